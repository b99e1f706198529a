#include "cfs/errors.hpp"
#include "cfs/eval.hpp"
#include "cfs/text.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ostream>
#include <thread>

namespace cfs {

void Harness::validate(const Dataset& data) const {
  data.validate();
  if (methods.empty() || ks.empty() || seeds.empty()) {
    throw ContractError("harness: methods, ks and seeds must all be nonempty");
  }
  if (data.target_labels.empty()) throw DataError("harness: target labels are required for evaluation");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ContractError("harness: train fraction must be in (0, 1)");
  }
  if (image_side && central_window > *image_side) {
    throw ContractError("harness: central window larger than the image side");
  }
  for (std::size_t k : ks) {
    if (k == 0 || k >= data.features()) {
      throw ContractError("harness: k=" + std::to_string(k) + " must be in [1, d)");
    }
  }
}

namespace {

struct Cell {
  Mode mode;
  std::size_t k;
  std::uint64_t seed;
};

EvalResult run_cell(const Dataset& data, const Harness& h, const Cell& cell) {
  const auto start = std::chrono::steady_clock::now();
  EvalResult r;
  r.method = to_string(cell.mode);
  r.k = cell.k;
  r.seed = cell.seed;
  r.classifier = h.classifier;
  try {
    const DatasetSplit sp = split(data, h.train_fraction, cell.seed);
    // held-out rows must never reach training
    std::vector<std::size_t> train = sp.indices.train, test = sp.indices.test;
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    std::vector<std::size_t> both;
    std::set_intersection(train.begin(), train.end(), test.begin(), test.end(), std::back_inserter(both));
    if (!both.empty()) throw ContractError("harness: train and test rows overlap");

    TrainConfig cfg = h.train;
    cfg.k = cell.k;
    cfg.seed = cell.seed;
    Rng rng(cell.seed);
    const MethodRun run = run_method(cell.mode, sp.train.target, sp.train.background, cfg, rng);
    r.features = run.features;
    if (r.features.k() == 0) throw TrainingError("no features selected", 0);

    const Matrix train_x = gather_cols(sp.train.target, r.features.indices);
    const Matrix test_x = gather_cols(sp.test_target, r.features.indices);
    std::vector<int> pred;
    if (h.classifier == ClassifierKind::Knn) {
      pred = knn_classify(train_x, sp.train.target_labels, test_x, h.k_neighbors);
    } else {
      LogisticConfig lc = h.logistic;
      lc.seed = cell.seed;
      pred = logistic_classify(train_x, sp.train.target_labels, test_x, lc);
    }
    r.accuracy = accuracy(pred, sp.test_labels);
    if (h.image_side && *h.image_side * *h.image_side == data.features()) {
      r.central_fraction = central_fraction(r.features, *h.image_side, h.central_window);
      if (!h.mask_dir.empty()) {
        std::filesystem::create_directories(h.mask_dir);
        write_pgm(h.mask_dir / (r.method + "_k" + std::to_string(r.k) + "_seed" +
                                std::to_string(r.seed) + ".pgm"),
                  selection_mask(r.features, *h.image_side));
      }
    }
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace

std::vector<EvalResult> run_benchmark(const Dataset& data, const Harness& harness) {
  harness.validate(data);
  std::vector<Cell> cells;
  for (Mode m : harness.methods) {
    for (std::size_t k : harness.ks) {
      for (std::uint64_t s : harness.seeds) cells.push_back({m, k, s});
    }
  }
  std::vector<EvalResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) results[i] = run_cell(data, harness, cells[i]);
  };
  const std::size_t threads = std::clamp<std::size_t>(harness.workers, 1, cells.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return results;
}

void write_results_csv(std::ostream& out, const std::vector<EvalResult>& results, bool record_time) {
  out << "method,k,seed,classifier,accuracy,central_fraction,seconds\n";
  for (const EvalResult& r : results) {
    out << r.method << ',' << r.k << ',' << r.seed << ',' << to_string(r.classifier) << ',';
    if (r.ok) out << format_double(r.accuracy);
    out << ',';
    if (r.ok && r.central_fraction) out << format_double(*r.central_fraction);
    out << ',' << (record_time ? format_double(r.seconds) : "0") << '\n';
  }
}

}  // namespace cfs
