#include "config.hpp"

#include "cfs/checkpoint.hpp"
#include "cfs/data.hpp"
#include "cfs/errors.hpp"
#include "cfs/eval.hpp"
#include "cfs/feature_set.hpp"
#include "cfs/infotheory.hpp"
#include "cfs/selectors.hpp"
#include "cfs/text.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace cfs;
namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kViolation = 3;

// Precondition failure attributable to one flag.
struct UsageError : std::runtime_error {
  UsageError(const std::string& flag, const std::string& what) : std::runtime_error(flag + ": " + what) {}
};

template <class T>
std::vector<T> parse_list(const std::string& text, const std::string& flag) {
  std::vector<T> out;
  for (const auto& piece : split_list(text)) {
    T v{};
    const auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), v);
    if (ec != std::errc() || ptr != piece.data() + piece.size()) throw UsageError(flag, "bad value '" + piece + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(flag, "empty list");
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw DataError("cannot write " + path.string());
}

// ---- shared training flags -------------------------------------------------

struct TrainFlags {
  std::string lambda = "0.1";
  TrainConfig cfg;
  std::string gate = "stochastic";

  void add(CLI::App* app) {
    app->add_option("--bg-dim", cfg.background_dim, "background representation size l");
    app->add_option("--lambda", lambda, "gate penalty weight, or 'auto' to tune for k open gates");
    app->add_option("--sigma", cfg.sigma, "gate noise scale");
    app->add_option("--epochs", cfg.epochs, "selector-stage epochs");
    app->add_option("--pretrain-epochs", cfg.pretrain_epochs, "background autoencoder epochs");
    app->add_option("--cae-epochs", cfg.cae_epochs, "concrete autoencoder epochs");
    app->add_option("--lr", cfg.learning_rate, "Adam learning rate");
    app->add_option("--batch-size", cfg.batch_size, "minibatch size");
    app->add_option("--gate", gate, "selection layer: stochastic (gates) or concrete")->check(CLI::IsMember({"stochastic", "concrete"}));
    app->add_option("--hidden", cfg.arch.reconstructor_hidden, "reconstructor hidden width");
    app->add_option("--encoder-hidden", cfg.arch.encoder_hidden, "background encoder hidden width");
    app->add_option("--classifier-hidden", cfg.arch.classifier_hidden, "supervised STG hidden width");
  }

  bool auto_lambda() const { return lambda == "auto"; }

  TrainConfig resolve(std::size_t d, std::size_t k, std::uint64_t seed) const {
    TrainConfig c = cfg;
    c.k = k;
    c.seed = seed;
    c.gate = gate == "concrete" ? GateKind::Concrete : GateKind::Stochastic;
    if (!auto_lambda()) {
      const auto v = parse_list<double>(lambda, "--lambda");
      if (v.size() != 1 || !(v[0] >= 0.0)) throw UsageError("--lambda", "must be a nonnegative number or 'auto'");
      c.lambda = v[0];
    }
    if (k == 0 || k >= d) throw UsageError("--k", "must be in [1, " + std::to_string(d - 1) + "] for d=" + std::to_string(d));
    if (c.background_dim == 0) throw UsageError("--bg-dim", "must be >= 1");
    if (c.batch_size == 0) throw UsageError("--batch-size", "must be >= 1");
    if (!(c.learning_rate > 0.0)) throw UsageError("--lr", "must be > 0");
    if (!(c.sigma > 0.0)) throw UsageError("--sigma", "must be > 0");
    if (c.epochs == 0) throw UsageError("--epochs", "must be >= 1");
    c.validate(d);
    return c;
  }
};

// ---- gen -------------------------------------------------------------------

struct GenCmd {
  std::string kind = "grassy";
  fs::path out;
  std::uint64_t seed = 0;
  GrassyConfig grassy;
  std::string texture_dir, mnist_images, mnist_labels;
  bool write_digits = false;
  std::size_t n = 2000, m = 2000, d = 100, k_salient = 10, l_background = 10;
  double snr = 1.0;

  void add(CLI::App* app) {
    app->add_option("kind,--kind", kind, "grassy|planted")->check(CLI::IsMember({"grassy", "planted"}));
    app->add_option("--out", out, "output directory")->required();
    app->add_option("--seed", seed, "generator seed");
    app->add_option("--scale", grassy.scale, "grassy: texture amplitude relative to the digit");
    app->add_option("--side", grassy.side, "grassy: image side");
    app->add_option("--n-target", grassy.n_target, "grassy: target images");
    app->add_option("--n-background", grassy.n_background, "grassy: background images");
    app->add_option("--texture-dir", texture_dir, "grassy: directory of PGM textures (default procedural)");
    app->add_option("--mnist-images", mnist_images, "grassy: IDX digit images (default rendered digits)");
    app->add_option("--mnist-labels", mnist_labels, "grassy: IDX digit labels");
    app->add_flag("--write-digits", write_digits, "grassy: also write the clean digit behind each target row");
    app->add_option("--n", n, "planted: target rows");
    app->add_option("--m", m, "planted: background rows");
    app->add_option("--d", d, "planted: features");
    app->add_option("--k-salient", k_salient, "planted: salient features");
    app->add_option("--l-background", l_background, "planted: background factors");
    app->add_option("--snr", snr, "planted: salient signal scale");
  }

  int run() {
    if (kind == "planted") {
      const PlantedDataset p = gen_planted(n, m, d, k_salient, l_background, snr, seed);
      write_dataset(out, p.data);
      write_feature_set(out / "salient.json", FeatureSet::from_indices(p.salient));
      return kOk;
    }
    grassy.seed = seed;
    if (!texture_dir.empty()) {
      grassy.source = TextureSource::Directory;
      grassy.texture_dir = texture_dir;
    }
    Rng rng(seed);
    ImageSet digits;
    if (!mnist_images.empty()) {
      if (mnist_labels.empty()) throw UsageError("--mnist-labels", "required with --mnist-images");
      digits = load_mnist(mnist_images, mnist_labels);
    } else {
      digits = render_digits(grassy.n_target, grassy.side, rng);
    }
    const Dataset data = gen_grassy(digits, grassy, rng);
    write_dataset(out, data);
    if (write_digits) {
      Matrix clean(data.target.rows(), data.target.cols());
      for (Eigen::Index i = 0; i < clean.rows(); ++i) {
        clean.row(i) = digits.pixels.row(i % static_cast<Eigen::Index>(digits.size()));
      }
      write_csv(out / "digits.csv", clean, data.feature_names);
    }
    return kOk;
  }
};

// ---- train -----------------------------------------------------------------

std::size_t final_open_gates(const MethodRun& run) {
  for (auto it = run.log.rbegin(); it != run.log.rend(); ++it) {
    if (it->stage != "pretrain") return it->open_gates;
  }
  return 0;
}

struct TrainCmd {
  fs::path data, out;
  std::string mode = "pretrained";
  std::size_t k = 20;
  std::uint64_t seed = 0;
  TrainFlags flags;

  void add(CLI::App* app) {
    app->add_option("--data", data, "dataset directory (target.csv, background.csv)")->required();
    app->add_option("--mode", mode, "pretrained|joint|stopgrad|cae|stg-supervised");
    app->add_option("--k", k, "features to select");
    app->add_option("--seed", seed, "training seed");
    app->add_option("--out", out, "output directory")->required();
    flags.add(app);
  }

  int run() {
    const Mode m = parse_mode(mode);
    const Dataset ds = read_dataset(data);
    TrainConfig cfg = flags.resolve(ds.features(), k, seed);
    if (flags.auto_lambda()) {
      if (m == Mode::Cae) throw UsageError("--lambda", "'auto' needs a gate-based mode");
      const auto result = tune_lambda(
          [&](double lambda) {
            TrainConfig probe = cfg;
            probe.lambda = lambda;
            Rng rng(seed);
            return final_open_gates(run_method(m, ds.target, ds.background, probe, rng));
          },
          k, 1e-3, 10.0);
      cfg.lambda = result.lambda;
      std::cerr << "lambda=" << format_double(result.lambda) << " open_gates=" << result.open_gates << "\n";
    }
    Rng rng(seed);
    const MethodRun run = run_method(m, ds.target, ds.background, cfg, rng);
    fs::create_directories(out);
    write_checkpoint(out / "checkpoint.bin", run.checkpoint);
    write_feature_set(out / "features.json", run.features);
    std::string losses = "stage,epoch,loss,open_gates,temperature\n";
    for (const auto& e : run.log) {
      losses += e.stage + "," + std::to_string(e.epoch) + "," + format_double(e.loss) + "," +
                std::to_string(e.open_gates) + "," + format_double(e.temperature) + "\n";
    }
    write_text(out / "losses.csv", losses);
    if (run.duplicates > 0) std::cerr << "warning: " << run.duplicates << " duplicate concrete selections\n";
    if (!run.converged) std::cerr << "warning: concrete selector did not converge\n";
    return kOk;
  }
};

// ---- select ----------------------------------------------------------------

struct SelectCmd {
  fs::path checkpoint, out;
  std::size_t k = 20;

  void add(CLI::App* app) {
    app->add_option("--checkpoint", checkpoint, "checkpoint.bin written by train")->required();
    app->add_option("--k", k, "features to extract");
    app->add_option("--out", out, "feature JSON path")->required();
  }

  int run() {
    const FeatureSet fs = features_from_checkpoint(read_checkpoint(checkpoint), k);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_feature_set(out, fs);
    return kOk;
  }
};

// ---- eval ------------------------------------------------------------------

struct EvalCmd {
  fs::path data, out;
  std::string methods = "pretrained,stopgrad,cae,stg-supervised";
  std::string ks = "20";
  std::string seeds = "0,1,2";
  std::string classifier = "knn";
  std::size_t k_neighbors = 5;
  std::size_t image_side = 0;
  std::size_t workers = 1;
  std::size_t logistic_epochs = 200;
  bool masks = false;
  bool record_time = false;
  TrainFlags flags;

  void add(CLI::App* app) {
    app->add_option("--data", data, "dataset directory with labels.csv")->required();
    app->add_option("--out", out, "output directory (results.csv, masks/)")->required();
    app->add_option("--methods", methods, "comma-separated methods");
    app->add_option("--ks", ks, "comma-separated k values");
    app->add_option("--seeds", seeds, "comma-separated seeds");
    app->add_option("--classifier", classifier, "knn|logistic")->check(CLI::IsMember({"knn", "logistic"}));
    app->add_option("--k-neighbors", k_neighbors, "knn neighbours");
    app->add_option("--logistic-epochs", logistic_epochs, "logistic regression epochs");
    app->add_option("--image-side", image_side, "square image side; enables the central-window metric (0: off)");
    app->add_flag("--masks", masks, "write a PGM selection mask per cell (needs --image-side)");
    app->add_option("--workers", workers, "parallel cells");
    app->add_flag("--record-time", record_time, "fill the seconds column (otherwise 0, keeping the CSV reproducible)");
    flags.add(app);
  }

  int run() {
    if (flags.auto_lambda()) throw UsageError("--lambda", "'auto' is only supported by train");
    const Dataset ds = read_dataset(data);
    Harness h;
    for (const auto& name : split_list(methods)) h.methods.push_back(parse_mode(name));
    h.ks = parse_list<std::size_t>(ks, "--ks");
    h.seeds = parse_list<std::uint64_t>(seeds, "--seeds");
    h.classifier = parse_classifier(classifier);
    h.k_neighbors = k_neighbors;
    h.logistic.epochs = logistic_epochs;
    for (std::size_t k : h.ks) h.train = flags.resolve(ds.features(), k, 0);
    if (image_side > 0) {
      if (image_side * image_side != ds.features()) throw UsageError("--image-side", "side^2 must equal d");
      h.image_side = image_side;
      if (image_side < h.central_window) h.central_window = image_side;
      if (masks) h.mask_dir = out / "masks";
    } else if (masks) {
      throw UsageError("--masks", "needs --image-side");
    }
    if (workers == 0) throw UsageError("--workers", "must be >= 1");
    h.workers = workers;
    const auto results = run_benchmark(ds, h);
    fs::create_directories(out);
    std::ostringstream csv;
    write_results_csv(csv, results, record_time);
    write_text(out / "results.csv", csv.str());
    int code = kOk;
    for (const auto& r : results) {
      if (!r.ok) {
        std::cerr << "cell " << r.method << " k=" << r.k << " seed=" << r.seed << " failed: " << r.error << "\n";
        code = kData;
      }
    }
    return code;
  }
};

// ---- verify-theory -----------------------------------------------------------

struct VerifyCmd {
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  fs::path out;

  void add(CLI::App* app) {
    app->add_option("--trials", trials, "random instances");
    app->add_option("--seed", seed, "master seed");
    app->add_option("--out", out, "output directory (theory.csv)")->required();
  }

  int run() {
    const TheorySuiteResult result = run_theory_suite(trials, seed);
    fs::create_directories(out);
    std::ostringstream csv;
    write_theory_csv(csv, result);
    write_text(out / "theory.csv", csv.str());
    std::cerr << trials << " instances, " << result.violations << " violations\n";
    return result.violations == 0 ? kOk : kViolation;
  }
};

// ---- mask ------------------------------------------------------------------

struct MaskCmd {
  fs::path features, out;
  std::size_t side = 28;

  void add(CLI::App* app) {
    app->add_option("--features", features, "feature JSON")->required();
    app->add_option("--side", side, "image side");
    app->add_option("--out", out, "PGM path")->required();
  }

  int run() {
    const Matrix mask = selection_mask(read_feature_set(features), side);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_pgm(out, mask);
    return kOk;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contrastive feature selection toolkit"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  GenCmd gen;
  TrainCmd train;
  SelectCmd select;
  EvalCmd eval;
  VerifyCmd verify;
  MaskCmd mask;
  struct Entry {
    CLI::App* app;
    std::function<int()> run;
  };
  std::vector<Entry> commands{
      {app.add_subcommand("gen", "generate a Grassy or planted-factor dataset"), [&] { return gen.run(); }},
      {app.add_subcommand("train", "train one selector and write its features"), [&] { return train.run(); }},
      {app.add_subcommand("select", "re-extract k features from a checkpoint"), [&] { return select.run(); }},
      {app.add_subcommand("eval", "benchmark methods x k x seeds with a downstream classifier"), [&] { return eval.run(); }},
      {app.add_subcommand("verify-theory", "check the information bounds on random discrete instances"), [&] { return verify.run(); }},
      {app.add_subcommand("mask", "render a feature set as a PGM mask"), [&] { return mask.run(); }},
  };
  gen.add(commands[0].app);
  train.add(commands[1].app);
  select.add(commands[2].app);
  eval.add(commands[3].app);
  verify.add(commands[4].app);
  mask.add(commands[5].app);
  for (auto& c : commands) c.app->add_option("--config,--from-manifest", "key=value file; explicit flags win");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    if (!args.empty()) {
      for (auto& c : commands) {
        if (c.app->get_name() == args.front()) args = cli::merge_config(*c.app, args, "--config", "--from-manifest");
      }
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }

  for (auto& c : commands) {
    if (!c.app->parsed()) continue;
    try {
      const int code = c.run();
      // mask and select write single files; the rest get a rerunnable manifest
      const fs::path* out = c.app == commands[0].app   ? &gen.out
                            : c.app == commands[1].app ? &train.out
                            : c.app == commands[3].app ? &eval.out
                            : c.app == commands[4].app ? &verify.out
                                                       : nullptr;
      if (out != nullptr) cli::write_manifest(*out, *c.app);
      return code;
    } catch (const UsageError& e) {
      std::cerr << "usage error: " << e.what() << "\n";
      return kUsage;
    } catch (const ContractError& e) {
      std::cerr << "usage error: " << e.what() << "\n";
      return kUsage;
    } catch (const ShapeError& e) {
      std::cerr << "usage error: " << e.what() << "\n";
      return kUsage;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kData;
    }
  }
  return kUsage;
}
