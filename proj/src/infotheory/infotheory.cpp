#include "cfs/infotheory.hpp"

#include "cfs/errors.hpp"
#include "cfs/text.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

namespace cfs {

DiscreteJoint DiscreteJoint::zeros(std::size_t nx, std::size_t ns, std::size_t nz) {
  DiscreteJoint j;
  j.nx = nx;
  j.ns = ns;
  j.nz = nz;
  j.p.assign(nx * ns * nz, 0.0);
  return j;
}

void DiscreteJoint::validate() const {
  if (nx == 0 || ns == 0 || nz == 0) throw ContractError("joint: empty alphabet");
  if (p.size() != nx * ns * nz) throw ContractError("joint: table size does not match alphabets");
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ContractError("joint: negative or non-finite entry");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ContractError("joint: entries do not sum to 1");
}

std::size_t RepMap::na() const { return a.empty() ? 0 : *std::max_element(a.begin(), a.end()) + 1; }
std::size_t RepMap::nb() const { return b.empty() ? 0 : *std::max_element(b.begin(), b.end()) + 1; }

void RepMap::validate(std::size_t nx) const {
  if (a.size() != nx || b.size() != nx) throw ContractError("reps: maps must be total on the x alphabet");
}

double entropy_bits(std::span<const double> dist) {
  double total = 0.0;
  double h = 0.0;
  for (double p : dist) {
    if (!(p >= 0.0)) throw ContractError("entropy: negative probability");
    total += p;
    if (p > 0.0) h -= p * std::log2(p);
  }
  if (std::abs(total - 1.0) > 1e-9) throw ContractError("entropy: distribution is not normalized");
  return h;
}

InfoModel::InfoModel(const DiscreteJoint& joint, const RepMap& reps) {
  joint.validate();
  reps.validate(joint.nx);
  sizes_ = {joint.nx, joint.ns, joint.nz, std::max<std::size_t>(reps.na(), 1),
            std::max<std::size_t>(reps.nb(), 1)};
  for (std::size_t x = 0; x < joint.nx; ++x) {
    for (std::size_t s = 0; s < joint.ns; ++s) {
      for (std::size_t z = 0; z < joint.nz; ++z) {
        const double mass = joint.at(x, s, z);
        if (mass > 0.0) outcomes_.push_back({{x, s, z, reps.a[x], reps.b[x]}, mass});
      }
    }
  }
}

double InfoModel::entropy(unsigned vars) const {
  vars &= 31u;
  if (vars == 0) return 0.0;
  if (cache_[vars]) return *cache_[vars];
  std::size_t cells = 1;
  for (std::size_t v = 0; v < 5; ++v) {
    if (vars & (1u << v)) cells *= sizes_[v];
  }
  std::vector<double> marginal(cells, 0.0);
  for (const Outcome& o : outcomes_) {
    std::size_t key = 0;
    for (std::size_t v = 0; v < 5; ++v) {
      if (vars & (1u << v)) key = key * sizes_[v] + o.code[v];
    }
    marginal[key] += o.mass;
  }
  double h = 0.0;
  for (double p : marginal) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  cache_[vars] = h;
  return h;
}

double InfoModel::conditional_entropy(unsigned vars, unsigned given) const {
  return entropy(vars | given) - entropy(given);
}

double InfoModel::mutual_information(unsigned u, unsigned v, unsigned given) const {
  return entropy(u | given) + entropy(v | given) - entropy(u | v | given) - entropy(given);
}

namespace {

double epsilon_from(const InfoModel& m) {
  return std::max({m.mutual_information(kS, kZ), m.conditional_entropy(kX, kS | kZ),
                   m.conditional_entropy(kS, kX | kZ), m.conditional_entropy(kZ, kX | kS),
                   m.mutual_information(kS, kZ, kB), m.mutual_information(kS, kZ, kA)});
}

BoundReport make_report(std::string name, double eps, double lhs, double rhs,
                        std::vector<std::pair<std::string, double>> terms) {
  BoundReport r;
  r.name = std::move(name);
  r.terms = std::move(terms);
  r.epsilon = eps;
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = rhs - lhs;
  r.holds = r.slack >= -kBoundTolerance;
  return r;
}

}  // namespace

double BoundReport::term(const std::string& key) const {
  for (const auto& [k, v] : terms) {
    if (k == key) return v;
  }
  throw ContractError("bound report has no term '" + key + "'");
}

double epsilon_of(const DiscreteJoint& joint, const RepMap& reps) {
  return epsilon_from(InfoModel(joint, reps));
}

BoundReport verify_theorem1(const DiscreteJoint& joint, const RepMap& reps) {
  const InfoModel m(joint, reps);
  const double eps = epsilon_from(m);
  const double i_axb = m.mutual_information(kA, kX, kB);
  const double i_bxs = m.mutual_information(kB, kX, kS);
  const double h_z = m.entropy(kZ);
  const double i_as = m.mutual_information(kA, kS);
  return make_report("theorem1", eps, i_axb + i_bxs - h_z - 4.0 * eps, i_as,
                     {{"I(a;x|b)", i_axb}, {"I(b;x|s)", i_bxs}, {"H(z)", h_z}, {"I(a;s)", i_as}});
}

std::array<BoundReport, 2> verify_theorem1_twosided(const DiscreteJoint& joint, const RepMap& reps) {
  const InfoModel m(joint, reps);
  const double eps = epsilon_from(m);
  const double i_axb = m.mutual_information(kA, kX, kB);
  const double i_bxs = m.mutual_information(kB, kX, kS);
  const double h_z = m.entropy(kZ);
  const double h_b = m.entropy(kB);
  const double i_as = m.mutual_information(kA, kS);
  std::vector<std::pair<std::string, double>> terms{
      {"I(a;x|b)", i_axb}, {"I(b;x|s)", i_bxs}, {"H(z)", h_z}, {"H(b)", h_b}, {"I(a;s)", i_as}};
  return {make_report("theorem1_twosided_lower", eps, i_as + 2.0 * i_bxs - h_z - h_b - 6.0 * eps,
                      i_axb, terms),
          make_report("theorem1_twosided_upper", eps, i_axb, i_as - i_bxs + h_z + 4.0 * eps, terms)};
}

BoundReport verify_joint_training_bound(const DiscreteJoint& joint, const RepMap& reps) {
  const InfoModel m(joint, reps);
  const double eps = epsilon_from(m);
  const double i_abx = m.mutual_information(kA | kB, kX);
  const double i_bxs = m.mutual_information(kB, kX, kS);
  const double i_bx = m.mutual_information(kB, kX);
  const double h_z = m.entropy(kZ);
  const double i_as = m.mutual_information(kA, kS);
  return make_report("joint_training", eps, i_abx + i_bxs - i_bx - h_z - 4.0 * eps, i_as,
                     {{"I(a,b;x)", i_abx},
                      {"I(b;x|s)", i_bxs},
                      {"I(b;x)", i_bx},
                      {"H(z)", h_z},
                      {"I(a;s)", i_as}});
}

std::array<BoundReport, 2> verify_theorem2(const DiscreteJoint& joint, const RepMap& reps) {
  const InfoModel m(joint, reps);
  const double eps = epsilon_from(m);
  const double i_ax = m.mutual_information(kA, kX);
  const double h_x = m.entropy(kX);
  const double i_xs = m.mutual_information(kX, kS);
  const double i_xz = m.mutual_information(kX, kZ);
  const double i_as = m.mutual_information(kA, kS);
  const double i_az = m.mutual_information(kA, kZ);
  return {make_report("theorem2_s", eps, i_ax - h_x + i_xs, i_as,
                      {{"I(a;x)", i_ax}, {"H(x)", h_x}, {"I(x;s)", i_xs}, {"I(a;s)", i_as}}),
          make_report("theorem2_z", eps, i_ax - h_x + i_xz, i_az,
                      {{"I(a;x)", i_ax}, {"H(x)", h_x}, {"I(x;z)", i_xz}, {"I(a;z)", i_az}})};
}

std::array<BoundReport, 2> verify_additive_decomposition(const DiscreteJoint& joint,
                                                         const RepMap& reps) {
  const InfoModel m(joint, reps);
  const double eps = epsilon_from(m);
  const double i_ax = m.mutual_information(kA, kX);
  const double i_as = m.mutual_information(kA, kS);
  const double i_az = m.mutual_information(kA, kZ);
  const double gap = i_ax - i_as - i_az;
  std::vector<std::pair<std::string, double>> terms{
      {"I(a;x)", i_ax}, {"I(a;s)", i_as}, {"I(a;z)", i_az}, {"difference", gap}};
  return {make_report("additive_lower", eps, -eps, gap, terms),
          make_report("additive_upper", eps, gap, 2.0 * eps, terms)};
}

GaussianCheck mse_mi_gaussian_check(double var_signal, double var_noise) {
  if (!(var_signal > 0.0) || !(var_noise > 0.0)) {
    throw ContractError("mse_mi_gaussian_check: variances must be positive");
  }
  const double two_pi = 2.0 * std::numbers::pi;
  const double h_x = 0.5 * std::log(two_pi * std::numbers::e * (var_signal + var_noise));
  GaussianCheck out;
  // The MMSE estimator of x from a leaves exactly the noise variance.
  out.lhs_nats = h_x - 0.5 * std::log(two_pi) - 0.5 * var_noise;
  out.mi_nats = 0.5 * std::log1p(var_signal / var_noise);
  out.holds = out.lhs_nats <= out.mi_nats + 1e-12;
  return out;
}

// ---------------------------------------------------------------------------

DiscreteJoint random_dirichlet_joint(std::size_t nx, std::size_t ns, std::size_t nz, Rng& rng) {
  DiscreteJoint j = DiscreteJoint::zeros(nx, ns, nz);
  double total = 0.0;
  for (double& v : j.p) {
    v = rng.gamma(1.0);
    total += v;
  }
  for (double& v : j.p) v /= total;
  return j;
}

namespace {

std::vector<std::size_t> random_map(std::size_t nx, Rng& rng) {
  const std::size_t range = 1 + rng.below(nx);
  std::vector<std::size_t> out(nx);
  for (auto& v : out) v = rng.below(range);
  return out;
}

std::vector<double> dirichlet(std::size_t n, Rng& rng) {
  std::vector<double> out(n);
  double total = 0.0;
  for (double& v : out) {
    v = rng.gamma(1.0);
    total += v;
  }
  for (double& v : out) v /= total;
  return out;
}

}  // namespace

TheoryInstance random_theory_instance(Rng& rng, std::size_t max_x, std::size_t max_sz) {
  TheoryInstance inst;
  if (rng.uniform() < 0.5) {
    inst.generator = "dirichlet";
    const std::size_t ns = 1 + rng.below(max_sz);
    const std::size_t nz = 1 + rng.below(max_sz);
    const std::size_t nx = 2 + rng.below(max_x - 1);
    inst.joint = random_dirichlet_joint(nx, ns, nz, rng);
    inst.reps.a = random_map(nx, rng);
    inst.reps.b = random_map(nx, rng);
    return inst;
  }
  inst.generator = "near-assumption";
  std::size_t ns = 0;
  std::size_t nz = 0;
  do {
    ns = 1 + rng.below(max_sz);
    nz = 1 + rng.below(max_sz);
  } while (ns * nz > max_x);
  const std::size_t paired = ns * nz;
  const std::size_t nx = std::max<std::size_t>(paired + rng.below(max_x - paired + 1), 2);
  const auto ps = dirichlet(ns, rng);
  const auto pz = dirichlet(nz, rng);
  const double weight = rng.uniform(0.0, 0.05);
  const DiscreteJoint noise = random_dirichlet_joint(nx, ns, nz, rng);
  inst.joint = DiscreteJoint::zeros(nx, ns, nz);
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t z = 0; z < nz; ++z) inst.joint.at(s * nz + z, s, z) = (1.0 - weight) * ps[s] * pz[z];
  }
  for (std::size_t i = 0; i < inst.joint.p.size(); ++i) inst.joint.p[i] += weight * noise.p[i];
  const double total = std::accumulate(inst.joint.p.begin(), inst.joint.p.end(), 0.0);
  for (double& v : inst.joint.p) v /= total;

  auto part_map = [&](bool s_part) {
    std::vector<std::size_t> out(nx);
    for (std::size_t x = 0; x < nx; ++x) {
      if (x < paired) {
        out[x] = s_part ? x / nz : x % nz;
      } else {
        out[x] = rng.below(s_part ? ns : nz);
      }
    }
    return out;
  };
  inst.reps.a = rng.uniform() < 0.5 ? part_map(true) : random_map(nx, rng);
  inst.reps.b = rng.uniform() < 0.5 ? part_map(false) : random_map(nx, rng);
  return inst;
}

TheoryRow evaluate_theory_instance(const TheoryInstance& inst, std::size_t index, std::uint64_t seed) {
  const InfoModel m(inst.joint, inst.reps);
  TheoryRow row;
  row.instance = index;
  row.seed = seed;
  row.generator = inst.generator;
  row.nx = inst.joint.nx;
  row.ns = inst.joint.ns;
  row.nz = inst.joint.nz;
  row.na = inst.reps.na();
  row.nb = inst.reps.nb();
  row.epsilon = epsilon_from(m);
  row.terms = {{"H_x", m.entropy(kX)},
               {"H_z", m.entropy(kZ)},
               {"H_b", m.entropy(kB)},
               {"I_s_z", m.mutual_information(kS, kZ)},
               {"I_a_s", m.mutual_information(kA, kS)},
               {"I_a_z", m.mutual_information(kA, kZ)},
               {"I_a_x", m.mutual_information(kA, kX)},
               {"I_a_x_given_b", m.mutual_information(kA, kX, kB)},
               {"I_b_x_given_s", m.mutual_information(kB, kX, kS)},
               {"I_ab_x", m.mutual_information(kA | kB, kX)},
               {"I_b_x", m.mutual_information(kB, kX)},
               {"I_x_s", m.mutual_information(kX, kS)},
               {"I_x_z", m.mutual_information(kX, kZ)}};
  row.bounds.push_back(verify_theorem1(inst.joint, inst.reps));
  for (auto& r : verify_theorem1_twosided(inst.joint, inst.reps)) row.bounds.push_back(r);
  row.bounds.push_back(verify_joint_training_bound(inst.joint, inst.reps));
  for (auto& r : verify_theorem2(inst.joint, inst.reps)) row.bounds.push_back(r);
  for (auto& r : verify_additive_decomposition(inst.joint, inst.reps)) row.bounds.push_back(r);
  row.holds = std::all_of(row.bounds.begin(), row.bounds.end(), [](const BoundReport& r) { return r.holds; });
  return row;
}

TheorySuiteResult run_theory_suite(std::size_t trials, std::uint64_t seed) {
  TheorySuiteResult result;
  Rng master(seed);
  result.rows.reserve(trials);
  for (std::size_t i = 0; i < trials; ++i) {
    const std::uint64_t instance_seed = master.next_u64();
    Rng rng(instance_seed);
    result.rows.push_back(evaluate_theory_instance(random_theory_instance(rng), i, instance_seed));
    if (!result.rows.back().holds) ++result.violations;
  }
  return result;
}

void write_theory_csv(std::ostream& out, const TheorySuiteResult& result) {
  out << "instance,seed,generator,nx,ns,nz,na,nb,epsilon";
  if (!result.rows.empty()) {
    for (const auto& [name, v] : result.rows.front().terms) out << ',' << name;
    for (const auto& b : result.rows.front().bounds) out << ",slack_" << b.name;
  }
  out << ",holds\n";
  for (const TheoryRow& row : result.rows) {
    out << row.instance << ',' << row.seed << ',' << row.generator << ',' << row.nx << ',' << row.ns
        << ',' << row.nz << ',' << row.na << ',' << row.nb << ',' << format_double(row.epsilon);
    for (const auto& [name, v] : row.terms) out << ',' << format_double(v);
    for (const auto& b : row.bounds) out << ',' << format_double(b.slack);
    out << ',' << (row.holds ? "true" : "false") << '\n';
  }
}

}  // namespace cfs
