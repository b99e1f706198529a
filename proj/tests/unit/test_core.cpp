#include <doctest.h>

#include "cfs/adam.hpp"
#include "cfs/errors.hpp"
#include "cfs/matrix.hpp"
#include "cfs/mlp.hpp"
#include "cfs/rng.hpp"
#include "cfs/tape.hpp"
#include "cfs/text.hpp"
#include "gradcheck.hpp"

#include <cmath>
#include <numeric>
#include <set>

using namespace cfs;
using cfs::testing::numeric_gradient;
using cfs::testing::random_matrix;
using cfs::testing::relative_error;

namespace {

// Builds a scalar from the inputs on a tape; the same builder drives both the
// analytic adjoints and the finite differences.
using Builder = std::function<Var(Tape&, const std::vector<Var>&)>;

double worst_gradient_error(const Builder& build, const std::vector<Matrix>& inputs) {
  Tape tape;
  std::vector<Var> vars;
  for (const auto& m : inputs) vars.push_back(tape.leaf(m, true));
  const Var loss = build(tape, vars);
  tape.backward(loss);
  auto f = [&](const std::vector<Matrix>& xs) {
    Tape t;
    std::vector<Var> vs;
    for (const auto& m : xs) vs.push_back(t.leaf(m, true));
    return t.value(build(t, vs))(0, 0);
  };
  const auto numeric = numeric_gradient(f, inputs);
  double worst = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    worst = std::max(worst, relative_error(tape.grad(vars[i]), numeric[i]));
  }
  return worst;
}

// Pushes entries away from a kink at `at` by at least `gap`.
Matrix avoid(Matrix m, double at, double gap) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    double& v = m.data()[i];
    if (std::abs(v - at) < gap) v = at + (v < at ? -gap : gap);
  }
  return m;
}

constexpr int kInstances = 20;
constexpr double kGradTol = 1e-6;

}  // namespace

TEST_CASE("matrix helpers") {
  const Matrix a = make_matrix({{1, 2}, {3, 4}});
  const Matrix b = make_matrix({{1}, {1}});
  CHECK(matmul(a, b) == make_matrix({{3}, {7}}));
  CHECK_THROWS_AS(matmul(b, b), ShapeError);
  CHECK(mse(a, Matrix::Zero(2, 2)) == doctest::Approx(7.5));
  CHECK_THROWS_AS(mse(a, b), ShapeError);
  const std::size_t rows[] = {1, 0, 1};
  CHECK(gather_rows(a, rows) == make_matrix({{3, 4}, {1, 2}, {3, 4}}));
  const std::size_t cols[] = {1};
  CHECK(gather_cols(a, cols) == make_matrix({{2}, {4}}));
  Matrix bad = a;
  bad(0, 0) = std::nan("");
  CHECK_FALSE(all_finite(bad));
  CHECK(all_finite(a));
  CHECK_THROWS(make_matrix({{1, 2}, {3}}));
}

TEST_CASE("normal cdf agrees with quadrature of the density") {
  // Composite Simpson on [-12, t] of the density written out here.
  auto quad = [](double t) {
    const int n = 20000;
    const double lo = -12.0, h = (t - lo) / n;
    auto pdf = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); };
    double s = pdf(lo) + pdf(t);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * pdf(lo + i * h);
    return s * h / 3.0;
  };
  for (double t : {-3.0, -1.0, 0.0, 0.5, 1.0, 2.5}) {
    CHECK(gaussian_cdf(t) == doctest::Approx(quad(t)).epsilon(1e-10));
  }
  CHECK(gaussian_cdf(1.0) == doctest::Approx(0.841344746).epsilon(1e-9));
  CHECK(gaussian_pdf(0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)));
}

TEST_CASE("rng streams are reproducible and well distributed") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(Rng(42).next_u64() != c.next_u64());

  Rng r(1);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0, sg = 0, sgam = 0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    su += u;
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
    sg += r.gumbel();
    sgam += r.gamma(2.5);
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(sg / n == doctest::Approx(0.5772156649).epsilon(0.02));
  CHECK(sgam / n == doctest::Approx(2.5).epsilon(0.02));

  std::size_t counts[7] = {};
  for (int i = 0; i < 70000; ++i) ++counts[r.below(7)];
  for (auto cnt : counts) CHECK(cnt == doctest::Approx(10000).epsilon(0.05));

  auto p = r.permutation(50);
  std::vector<std::size_t> sorted = p;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> iota(50);
  std::iota(iota.begin(), iota.end(), 0);
  CHECK(sorted == iota);

  Rng parent(9);
  Rng child = parent.split();
  CHECK(child.state() != parent.state());
}

TEST_CASE("gumbel draws stay finite") {
  Rng r(3);
  for (int i = 0; i < 100000; ++i) {
    const double g = r.gumbel();
    CHECK(std::isfinite(g));
  }
}

TEST_CASE("dense layer gradients") {
  Rng rng(100);
  for (int t = 0; t < kInstances; ++t) {
    const std::size_t n = 1 + rng.below(5), in = 1 + rng.below(6), out = 1 + rng.below(4);
    const Matrix target = random_matrix(n, out, rng);
    Builder build = [&](Tape& tp, const std::vector<Var>& v) {
      return tp.mean_square(tp.add_row(tp.matmul(v[0], v[1]), v[2]), tp.constant(target));
    };
    CHECK(worst_gradient_error(build, {random_matrix(n, in, rng), random_matrix(in, out, rng),
                                       random_matrix(1, out, rng)}) < kGradTol);
  }
}

TEST_CASE("elementwise op gradients") {
  Rng rng(101);
  for (int t = 0; t < kInstances; ++t) {
    const std::size_t n = 1 + rng.below(4), d = 1 + rng.below(5);
    const Matrix target = random_matrix(n, d, rng);
    const Matrix target_t = random_matrix(d, n, rng);
    const double s = rng.uniform(-2.0, 2.0);

    Builder relu = [&](Tape& tp, const std::vector<Var>& v) {
      return tp.mean_square(tp.relu(v[0]), tp.constant(target));
    };
    CHECK(worst_gradient_error(relu, {avoid(random_matrix(n, d, rng), 0.0, 1e-3)}) < kGradTol);

    Builder clamp = [&](Tape& tp, const std::vector<Var>& v) {
      return tp.mean_square(tp.clamp01(v[0]), tp.constant(target));
    };
    CHECK(worst_gradient_error(clamp, {avoid(avoid(random_matrix(n, d, rng), 0.0, 1e-3), 1.0, 1e-3)}) <
          kGradTol);

    Builder mul = [&](Tape& tp, const std::vector<Var>& v) {
      return tp.mean_square(tp.mul_row(tp.mul(v[0], v[1]), v[2]), tp.constant(target));
    };
    CHECK(worst_gradient_error(mul, {random_matrix(n, d, rng), random_matrix(n, d, rng),
                                     random_matrix(1, d, rng)}) < kGradTol);

    Builder misc = [&](Tape& tp, const std::vector<Var>& v) {
      return tp.mean_square(tp.transpose(tp.scale(tp.add(v[0], v[1]), s)), tp.constant(target_t));
    };
    CHECK(worst_gradient_error(misc, {random_matrix(n, d, rng), random_matrix(n, d, rng)}) < kGradTol);

    const Matrix target_cat = random_matrix(n, 2 * d, rng);
    Builder cat = [&](Tape& tp, const std::vector<Var>& v) {
      return tp.mean_square(tp.concat_cols(v[0], v[1]), tp.constant(target_cat));
    };
    CHECK(worst_gradient_error(cat, {random_matrix(n, d, rng), random_matrix(n, d, rng)}) < kGradTol);

    const double inv = 1.0 / rng.uniform(0.2, 2.0);
    Builder cdf = [&](Tape& tp, const std::vector<Var>& v) { return tp.gauss_cdf_sum(v[0], inv); };
    CHECK(worst_gradient_error(cdf, {random_matrix(1, d, rng)}) < kGradTol);

    Builder soft = [&](Tape& tp, const std::vector<Var>& v) {
      return tp.mean_square(tp.row_softmax(v[0]), tp.constant(target));
    };
    CHECK(worst_gradient_error(soft, {random_matrix(n, d, rng, 2.0)}) < kGradTol);
  }
}

TEST_CASE("loss op gradients") {
  Rng rng(102);
  for (int t = 0; t < kInstances; ++t) {
    const std::size_t n = 1 + rng.below(6), c = 2 + rng.below(4);
    Matrix labels(n, 1);
    Matrix onehot = Matrix::Zero(n, c);
    for (std::size_t i = 0; i < n; ++i) {
      labels(i, 0) = double(rng.below(2));
      onehot(i, rng.below(c)) = 1.0;
    }
    Builder bce = [&](Tape& tp, const std::vector<Var>& v) {
      return tp.bce_with_logits(v[0], tp.constant(labels));
    };
    CHECK(worst_gradient_error(bce, {random_matrix(n, 1, rng, 3.0)}) < kGradTol);
    Builder ce = [&](Tape& tp, const std::vector<Var>& v) {
      return tp.softmax_cross_entropy(v[0], tp.constant(onehot));
    };
    CHECK(worst_gradient_error(ce, {random_matrix(n, c, rng, 3.0)}) < kGradTol);
  }
}

TEST_CASE("loss ops match closed forms") {
  Tape tp;
  const Var z = tp.leaf(make_matrix({{0.0}, {2.0}}));
  const Var y = tp.constant(make_matrix({{1.0}, {0.0}}));
  const double expect = 0.5 * (std::log(2.0) + std::log1p(std::exp(2.0)));
  CHECK(tp.value(tp.bce_with_logits(z, y))(0, 0) == doctest::Approx(expect));
  const Var big = tp.leaf(make_matrix({{800.0, 0.0}}));
  const Var hot = tp.constant(make_matrix({{0.0, 1.0}}));
  CHECK(tp.value(tp.softmax_cross_entropy(big, hot))(0, 0) == doctest::Approx(800.0));
  CHECK(all_finite(tp.value(tp.row_softmax(big))));
}

TEST_CASE("tape contracts") {
  Tape tp;
  const Var a = tp.leaf(make_matrix({{1, 2}}), true);
  const Var b = tp.leaf(make_matrix({{3, 4}}), true);
  const Var frozen = tp.leaf(make_matrix({{5, 6}}), false);
  CHECK_THROWS_AS(tp.backward(tp.add(a, b)), ContractError);
  CHECK_THROWS_AS(tp.matmul(a, b), ShapeError);
  CHECK_THROWS_AS(tp.add(a, tp.leaf(make_matrix({{1}}))), ShapeError);

  const Var blocked = tp.stop_gradient(b);
  CHECK_FALSE(tp.requires_grad(blocked));
  const Var loss = tp.mean_square(tp.add(tp.mul(a, blocked), frozen), tp.constant(Matrix::Zero(1, 2)));
  tp.backward(loss);
  CHECK(tp.grad(b).isZero());
  CHECK(tp.grad(frozen).isZero());
  CHECK_FALSE(tp.grad(a).isZero());
  CHECK(tp.op(blocked) == Tape::Op::StopGradient);

  const auto replayed = tp.replay();
  REQUIRE(replayed.size() == tp.size());
  for (std::size_t i = 0; i < tp.size(); ++i) {
    CHECK(replayed[i] == tp.value(Var{i}));
  }
}

TEST_CASE("mlp forward on tape equals predict, and its gradients check") {
  Rng rng(7);
  const std::size_t widths[] = {5, 8, 6, 3};
  Mlp net(widths, rng);
  CHECK(net.input_width() == 5);
  CHECK(net.output_width() == 3);
  CHECK(net.depth() == 3);
  const Matrix x = random_matrix(4, 5, rng);
  Tape tp;
  const auto bound = net.bind(tp, true);
  CHECK(bound.size() == 6);
  CHECK(tp.value(net.forward(tp, tp.constant(x), bound)) == net.predict(x));
  const auto names = net.named_parameters("f");
  CHECK(names.front().first == "f.0.weight");
  CHECK(names.back().first == "f.2.bias");

  const Matrix target = random_matrix(4, 3, rng);
  for (int t = 0; t < kInstances; ++t) {
    Mlp m(widths, rng);
    const Matrix xi = random_matrix(4, 5, rng);
    std::vector<Matrix> params;
    for (auto* p : m.parameters()) params.push_back(*p);
    Builder build = [&](Tape& tp2, const std::vector<Var>& v) {
      return tp2.mean_square(m.forward(tp2, tp2.constant(xi), v), tp2.constant(target));
    };
    CHECK(worst_gradient_error(build, params) < kGradTol);
  }
  CHECK_THROWS_AS(net.predict(random_matrix(2, 4, rng)), ShapeError);
}

TEST_CASE("glorot initialisation range") {
  Rng rng(8);
  const Dense d = glorot_dense(30, 20, rng);
  const double bound = std::sqrt(6.0 / 50.0);
  CHECK(d.weight.cwiseAbs().maxCoeff() <= bound);
  CHECK(d.weight.cwiseAbs().maxCoeff() > 0.8 * bound);
  CHECK(d.bias.isZero());
}

TEST_CASE("adam first step moves each parameter by about the learning rate") {
  Matrix p = make_matrix({{1.0, -2.0, 0.5}});
  const Matrix before = p;
  std::vector<Matrix*> params{&p};
  AdamState opt(AdamConfig{}, params);
  const Matrix g = make_matrix({{0.3, -4.0, 1e-3}});
  std::vector<Matrix> grads{g};
  opt.step(params, grads);
  CHECK(opt.steps() == 1);
  for (Eigen::Index i = 0; i < 3; ++i) {
    const double moved = before(0, i) - p(0, i);
    const double expect = 1e-3 * g(0, i) / (std::abs(g(0, i)) + 1e-8);
    CHECK(moved == doctest::Approx(expect).epsilon(1e-9));
    CHECK(std::abs(moved) == doctest::Approx(1e-3).epsilon(1e-4));
  }
}

TEST_CASE("adam minimises a quadratic") {
  Matrix p = make_matrix({{3.0, -5.0}});
  std::vector<Matrix*> params{&p};
  AdamConfig cfg;
  cfg.learning_rate = 0.05;
  AdamState opt(cfg, params);
  for (int i = 0; i < 3000; ++i) {
    std::vector<Matrix> grads{2.0 * (p - make_matrix({{1.0, 2.0}}))};
    opt.step(params, grads);
  }
  CHECK(p(0, 0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(p(0, 1) == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("adam rejects bad gradients without mutating") {
  Matrix p = make_matrix({{1.0, 2.0}});
  std::vector<Matrix*> params{&p};
  AdamState opt(AdamConfig{}, params);
  std::vector<Matrix> ok{make_matrix({{1.0, 1.0}})};
  opt.step(params, ok);
  const Matrix snapshot = p;
  std::vector<Matrix> bad{make_matrix({{std::nan(""), 1.0}})};
  try {
    opt.step(params, bad);
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    CHECK(e.step() == 2);
  }
  CHECK(p == snapshot);
  std::vector<Matrix> wrong{make_matrix({{1.0}})};
  CHECK_THROWS_AS(opt.step(params, wrong), ShapeError);
}

TEST_CASE("text helpers") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5, 123456789.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(2.0) == "2");
  CHECK(split_list("1, 2,,3 ") == std::vector<std::string>{"1", "2", "3"});
  CHECK(join({"a", "b"}, "-") == "a-b");
}
