#include "tudiff/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "tudiff/checkpoint.hpp"
#include "tudiff/config.hpp"
#include "tudiff/csv.hpp"
#include "tudiff/dataset.hpp"
#include "tudiff/diffusion.hpp"
#include "tudiff/eval.hpp"
#include "tudiff/geometry.hpp"
#include "tudiff/model.hpp"
#include "tudiff/rng.hpp"
#include "tudiff/schedule.hpp"

namespace tudiff::cli {

namespace fs = std::filesystem;

namespace {

std::uint64_t fnv1a64_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  char buf[1 << 14];
  while (in) {
    in.read(buf, sizeof(buf));
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001B3ULL;
    }
  }
  return h;
}

// Per-run output directory <out>/<label>_seed<seed>/ plus the manifest of
// everything written into it.
class RunDir {
 public:
  RunDir(const Config& cfg)
      : dir_(fs::path(cfg.get_string("out")) /
             (cfg.get_string("run.label") + "_seed" + std::to_string(cfg.get_int("seed")))) {
    fs::create_directories(dir_);
  }

  std::string file(const std::string& name) {
    artifacts_.push_back(name);
    return (dir_ / name).string();
  }

  void write_text(const std::string& name, const std::string& content) {
    std::ofstream out(file(name), std::ios::binary);
    out << content;
  }

  void finalize() {
    std::ofstream out(dir_ / "manifest.txt", std::ios::binary);
    for (const std::string& name : artifacts_) {
      const fs::path p = dir_ / name;
      char hex[17];
      std::snprintf(hex, sizeof(hex), "%016llx",
                    static_cast<unsigned long long>(fnv1a64_file(p)));
      out << hex << "  " << fs::file_size(p) << "  " << name << '\n';
    }
  }

  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> artifacts_;
};

AmbientConfig ambient_from(const Config& cfg) {
  AmbientConfig a{static_cast<int>(cfg.get_int("ambient.D")),
                  static_cast<int>(cfg.get_int("ambient.d_prime"))};
  validate_ambient(a);
  return a;
}

ScheduleSpec schedule_from(const Config& cfg) {
  ConventionalParams params{cfg.get_real("schedule.beta_min"),
                            cfg.get_real("schedule.beta_max")};
  return make_schedule(parse_schedule_kind(cfg.get_string("schedule.kind")),
                       static_cast<int>(cfg.get_int("schedule.T")), params);
}

std::vector<Eigen::Vector2d> parse_centers(const std::string& raw) {
  std::vector<Eigen::Vector2d> centers;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const auto xy = csv::split(item);
    if (xy.size() != 2) throw ConfigError("mixture.centers: expected x,y pairs");
    centers.emplace_back(csv::parse_double(xy[0]), csv::parse_double(xy[1]));
  }
  if (centers.empty()) throw ConfigError("mixture.centers: no centers given");
  return centers;
}

SampleBatch dataset_from(const Config& cfg, std::uint64_t seed) {
  const std::string kind = cfg.get_string("dataset.kind");
  const long n = cfg.get_int("dataset.n");
  if (kind == "swiss-roll") {
    return swiss_roll(n, cfg.get_real("dataset.noise_scale"), seed);
  }
  if (kind == "gaussian-mixture") {
    return gaussian_mixture(n, parse_centers(cfg.get_string("mixture.centers")),
                            cfg.get_real("mixture.scale"), seed);
  }
  throw ConfigError("dataset.kind must be swiss-roll or gaussian-mixture");
}

double delta_from(const Config& cfg, const AmbientConfig& a) {
  const std::string& raw = cfg.get_string("ortho.delta");
  if (raw == "auto") return scaled_delta(0.05, a);
  return csv::parse_double(raw);
}

OrthoTimeConfig ortho_from(const Config& cfg, const AmbientConfig& a,
                           const SampleBatch& clean_embedded, int n_classes) {
  const double delta = delta_from(cfg, a);
  const std::string& mode = cfg.get_string("ortho.direction");
  if (mode == "axis") return axis_ortho_config(a, delta, n_classes);
  if (mode == "data") {
    OrthoTimeConfig o = data_ortho_config(clean_embedded, a, delta);
    if (n_classes > 0) {
      o.class_directions = axis_ortho_config(a, delta, n_classes).class_directions;
    }
    return o;
  }
  throw ConfigError("ortho.direction must be axis or data");
}

// ---------------------------------------------------------------------------

int cmd_schedule_analyze(const Config& cfg) {
  const ScheduleSpec s = schedule_from(cfg);
  const AmbientConfig a = ambient_from(cfg);
  const double eps = cfg.get_real("epsilon");

  RunDir run(cfg);
  {
    std::ofstream out(run.file("schedule.csv"), std::ios::binary);
    write_schedule_csv(s, out);
  }
  const DisjointnessReport rep = audit_disjointness(s, a, eps);
  {
    std::ofstream out(run.file("audit.csv"), std::ios::binary);
    write_audit_csv(rep, out);
  }
  run.finalize();

  std::cout << "schedule: " << schedule_kind_name(s.kind) << " T=" << s.T << '\n';
  if (rep.all_pass()) {
    std::cout << "audit: all " << rep.pairs.size() << " adjacent pairs disjoint at epsilon="
              << eps << '\n';
    return kExitOk;
  }
  long n_fail = 0;
  for (const auto& p : rep.pairs) n_fail += p.mixes();
  std::cout << "audit: mixing detected, first failing pair k=" << *rep.first_fail
            << ", last k=" << *rep.last_fail << " (" << n_fail << " of " << rep.pairs.size()
            << " pairs)\n";
  return kExitMixing;
}

// Closed-form band probability for a single normal coordinate:
// P(sqrt(1-2 sqrt(eps)) <= |z| <= sqrt(1+2 sqrt(eps)+2 eps)).
double coverage_closed_form_1d(double eps) {
  const double lo = std::sqrt(1.0 - 2.0 * std::sqrt(eps));
  const double hi = std::sqrt(1.0 + 2.0 * std::sqrt(eps) + 2.0 * eps);
  auto Phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  return 2.0 * (Phi(hi) - Phi(lo));
}

int cmd_verify_props(const Config& cfg) {
  const AmbientConfig a = ambient_from(cfg);
  const double eps = cfg.get_real("epsilon");
  const long mc_n = cfg.get_int("verify.mc_n");
  const long n_seq = cfg.get_int("verify.n_sequences");
  const std::uint64_t seed = cfg.get_int("seed");
  const ScheduleSpec s = schedule_from(cfg);

  bool all_pass = true;
  std::ostringstream report;
  auto check = [&](bool ok, const std::string& what) {
    const char* tag = ok ? "[PASS] " : "[FAIL] ";
    std::cout << tag << what << '\n';
    report << tag << what << '\n';
    all_pass = all_pass && ok;
  };

  // Shell coverage across a decile step grid.
  const int stride = std::max(1, s.T / 10);
  for (int k = stride; k <= s.T; k += stride) {
    const double cov = mc_shell_coverage(s, k, a, eps, mc_n, seed);
    std::ostringstream what;
    if (a.D - a.d_prime == 1) {
      const double expected = coverage_closed_form_1d(eps);
      const double tol =
          std::max(0.01, 6.0 * std::sqrt(expected * (1.0 - expected) / mc_n));
      what << "coverage k=" << k << ": " << cov << " vs closed form " << expected
           << " (tol " << tol << ")";
      check(std::abs(cov - expected) <= tol, what.str());
    } else {
      const double floor =
          std::max(0.0, 1.0 - 2.0 * std::exp(-2.0 * (a.D - a.d_prime) * eps));
      what << "coverage k=" << k << ": " << cov << " >= floor " << floor;
      check(cov >= floor, what.str());
    }
  }

  // Three exact disjointness formulations agree pairwise on random monotone
  // sigma sequences; the radial-increment form is implied by them.
  bool agree = true, implied = true;
  rng::Sequence gen(seed, 6000000);
  for (long i = 0; i < n_seq && (agree || implied); ++i) {
    const int T = 2 + static_cast<int>(gen.below(63));
    std::vector<double> sig(T + 1, 0.0);
    for (int k = 1; k <= T; ++k) sig[k] = sig[k - 1] + gen.uniform01() * 0.1;
    for (double e : {0.01, 0.04, 0.1}) {
      const double rho = rho_epsilon(e);
      const double kap = kappa_epsilon(e);
      const double lo = std::sqrt(1.0 - 2.0 * std::sqrt(e));
      const double hi = std::sqrt(1.0 + 2.0 * std::sqrt(e) + 2.0 * e);
      for (int k = 0; k < T; ++k) {
        const bool radius = sig[k + 1] * lo > sig[k] * hi;
        const bool ratio = sig[k + 1] > rho * sig[k];
        const bool gap = sig[k + 1] - sig[k] > (rho - 1.0) * sig[k];
        agree = agree && radius == ratio && ratio == gap;
        if (radius && !(sig[k + 1] - sig[k] > kap * sig[k])) implied = false;
      }
    }
  }
  check(agree, "adjacent-disjointness formulations (radius/ratio/gap) agree on " +
                   std::to_string(n_seq) + " random schedules");
  check(implied, "radial-increment condition implied by the strict criterion");

  // Guaranteed-disjoint grid spacing for the late-expansion schedule.
  bool prop3_ok = true;
  for (double e : {0.005, 0.01, 0.02, 0.04, 0.08, 0.15, 0.2}) {
    const double min_dt = prop3_min_dt(e);
    const int T = std::max(1, static_cast<int>(std::floor(1.0 / min_dt)));
    if (1.0 / T <= min_dt) continue;  // grid cannot strictly clear the bound
    const ScheduleSpec late = make_schedule(ScheduleKind::LateExpansionVP, T);
    prop3_ok = prop3_ok && audit_disjointness(late, a, e).all_pass();
  }
  check(prop3_ok, "late-expansion schedule disjoint whenever 1/T exceeds ln(1+kappa)");

  RunDir run(cfg);
  run.write_text("verify_report.txt", report.str());
  run.finalize();
  return all_pass ? kExitOk : kExitMixing;
}

struct BuiltTraining {
  SampleBatch data;
  TrainConfig train_cfg;
};

BuiltTraining build_training(const Config& cfg, std::uint64_t seed) {
  BuiltTraining b;
  const AmbientConfig a = ambient_from(cfg);
  SampleBatch raw = dataset_from(cfg, seed);
  b.data = embed(raw, a.D);

  b.train_cfg.schedule = schedule_from(cfg);
  b.train_cfg.ambient = a;
  b.train_cfg.epochs = static_cast<int>(cfg.get_int("train.epochs"));
  b.train_cfg.batch_size = cfg.get_int("train.batch_size");
  b.train_cfg.adam = {cfg.get_real("train.lr"), cfg.get_real("train.beta1"),
                      cfg.get_real("train.beta2"), cfg.get_real("train.adam_eps")};
  b.train_cfg.seed = seed;
  b.train_cfg.conditional = cfg.get_bool("train.conditional");

  std::vector<int> hidden;
  for (long w : cfg.get_int_list("model.hidden")) hidden.push_back(static_cast<int>(w));
  b.train_cfg.hidden = hidden;

  if (b.train_cfg.conditional && !cfg.get_bool("ortho.enabled")) {
    throw ConfigError("train.conditional requires ortho.enabled");
  }
  if (cfg.get_bool("ortho.enabled")) {
    int n_classes = 0;
    if (b.train_cfg.conditional) {
      if (!b.data.has_labels()) throw ConfigError("conditional training needs labeled data");
      n_classes = 1 + *std::max_element(b.data.labels.begin(), b.data.labels.end());
    }
    b.train_cfg.ortho = ortho_from(cfg, a, b.data, n_classes);
  }
  return b;
}

int cmd_train(const Config& cfg) {
  const std::uint64_t seed = cfg.get_int("seed");
  BuiltTraining b = build_training(cfg, seed);

  const TrainResult result = train(b.train_cfg, b.data);

  RunDir run(cfg);
  Checkpoint ckpt;
  ckpt.ambient = b.train_cfg.ambient;
  ckpt.schedule = b.train_cfg.schedule;
  ckpt.ortho = b.train_cfg.ortho;
  ckpt.model = result.model;
  save_checkpoint(run.file("checkpoint.tudm"), ckpt);

  {
    std::ofstream out(run.file("loss_history.csv"), std::ios::binary);
    out << "epoch,mean_loss\n";
    for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
      out << e << ',' << csv::g17(result.epoch_loss[e]) << '\n';
    }
  }
  run.finalize();
  std::cout << "trained " << result.model.parameter_count() << " parameters, "
            << "first-epoch loss " << result.epoch_loss.front() << ", final "
            << result.epoch_loss.back() << '\n'
            << "checkpoint: " << (run.dir() / "checkpoint.tudm").string() << '\n';
  return kExitOk;
}

int cmd_sample(const Config& cfg) {
  const std::string& path = cfg.get_string("sample.checkpoint");
  if (path.empty()) throw ConfigError("sample.checkpoint (or --checkpoint) is required");
  const Checkpoint ckpt = load_checkpoint(path);

  SampleOptions opts;
  opts.n = cfg.get_int("sample.n");
  opts.seed = cfg.get_int("seed");
  opts.project_eps = cfg.get_bool("ortho.project_eps");
  const long class_id = cfg.get_int("sample.class_id");
  if (class_id >= 0) opts.class_id = static_cast<int>(class_id);

  RunDir run(cfg);
  std::map<int, std::string> traj_files;
  if (cfg.get_bool("sample.trajectory_dump")) {
    const int stride = std::max(1, ckpt.schedule.T / 10);
    opts.trajectory_sink = [&](int k, const Eigen::MatrixXd& x) {
      if (k % stride != 0 && k != ckpt.schedule.T) return;
      SampleBatch b;
      b.data = x;
      b.d_prime = ckpt.ambient.d_prime;
      const std::string name = "trajectory_step" + std::to_string(k) + ".csv";
      write_batch_csv_file(b, run.file(name));
      traj_files[k] = name;
    };
  }

  const Predictor predictor = [&](const Eigen::MatrixXd& x) { return predict(ckpt.model, x); };
  const OrthoTimeConfig* ortho = ckpt.ortho.has_value() ? &*ckpt.ortho : nullptr;
  const SampleBatch out = sample(predictor, ckpt.schedule, ortho, ckpt.ambient, opts);

  write_batch_csv_file(out, run.file("samples.csv"));
  run.finalize();
  std::cout << "wrote " << out.n() << " samples to " << (run.dir() / "samples.csv").string()
            << '\n';
  return kExitOk;
}

int cmd_eval(const Config& cfg) {
  const std::string& gen_path = cfg.get_string("eval.generated");
  const std::string& ref_path = cfg.get_string("eval.reference");
  if (gen_path.empty() || ref_path.empty()) {
    throw ConfigError("eval.generated and eval.reference are required");
  }
  SampleBatch generated = read_batch_csv_file(gen_path);
  SampleBatch reference = read_batch_csv_file(ref_path);
  if (generated.dim() != reference.dim()) {
    throw ConfigError("eval: generated and reference dimensions differ (" +
                      std::to_string(generated.dim()) + " vs " +
                      std::to_string(reference.dim()) + ")");
  }

  EvalSettings settings;
  settings.d_prime = static_cast<int>(cfg.get_int("ambient.d_prime"));
  settings.n_projections = static_cast<int>(cfg.get_int("eval.n_projections"));
  settings.seed = cfg.get_int("seed");
  const EvalReport report = evaluate(generated, reference, settings);

  RunDir run(cfg);
  {
    std::ofstream out(run.file("report.txt"), std::ios::binary);
    write_report_kv(report, out);
  }
  run.write_text("report_row.csv", report_csv_header() + "\n" + report_csv_row(report) + "\n");
  run.finalize();
  std::cout << "mean_manifold_distance " << report.mean_manifold_distance
            << ", sliced_distance " << report.sliced_distance << '\n';
  return kExitOk;
}

int cmd_sweep_delta(const Config& cfg) {
  std::vector<double> spacings = cfg.get_real_list("sweep.spacings");
  if (spacings.empty()) throw ConfigError("sweep.spacings must list at least one value");
  std::sort(spacings.begin(), spacings.end());
  const auto last = std::unique(spacings.begin(), spacings.end());
  if (last != spacings.end()) {
    std::cerr << "warning: duplicate sweep spacings removed\n";
    spacings.erase(last, spacings.end());
  }
  const std::vector<long> seeds = cfg.get_int_list("sweep.seeds");
  if (seeds.empty()) throw ConfigError("sweep.seeds must list at least one seed");

  const AmbientConfig a = ambient_from(cfg);
  const long n_samples = cfg.get_int("sample.n");
  EvalSettings settings;
  settings.d_prime = a.d_prime;
  settings.n_projections = static_cast<int>(cfg.get_int("eval.n_projections"));
  settings.seed = cfg.get_int("seed");

  std::string seeds_label;
  for (long s : seeds) seeds_label += (seeds_label.empty() ? "" : "|") + std::to_string(s);

  RunDir run(cfg);
  std::ostringstream cells;
  cells << "spacing,delta,seed," << report_csv_header() << '\n';
  std::ostringstream agg;
  agg << "spacing,delta,seeds,mean_manifold_distance,median_manifold_distance,"
         "sliced_distance\n";

  for (double spacing : spacings) {
    const double delta = scaled_delta(spacing, a);
    double sum_mmd = 0.0, sum_median = 0.0, sum_sliced = 0.0;
    for (long seed : seeds) {
      Config cell_cfg = cfg;
      cell_cfg.set("ortho.enabled", "true");
      cell_cfg.set("ortho.delta", csv::g17(delta));
      BuiltTraining b = build_training(cell_cfg, static_cast<std::uint64_t>(seed));
      const TrainResult result = train(b.train_cfg, b.data);

      SampleOptions opts;
      opts.n = n_samples;
      opts.seed = static_cast<std::uint64_t>(seed);
      opts.project_eps = cfg.get_bool("ortho.project_eps");
      const Predictor predictor = [&](const Eigen::MatrixXd& x) {
        return predict(result.model, x);
      };
      const SampleBatch generated =
          sample(predictor, b.train_cfg.schedule, &*b.train_cfg.ortho, a, opts);

      Config ref_cfg = cfg;
      const SampleBatch reference =
          embed(dataset_from(ref_cfg, static_cast<std::uint64_t>(seed) + 7777), a.D);
      const EvalReport rep = evaluate(generated, reference, settings);
      cells << csv::g17(spacing) << ',' << csv::g17(delta) << ',' << seed << ','
            << report_csv_row(rep) << '\n';
      sum_mmd += rep.mean_manifold_distance;
      sum_median += rep.median_manifold_distance;
      sum_sliced += rep.sliced_distance;
    }
    const double n = static_cast<double>(seeds.size());
    agg << csv::g17(spacing) << ',' << csv::g17(delta) << ',' << seeds_label << ','
        << csv::g17(sum_mmd / n) << ',' << csv::g17(sum_median / n) << ','
        << csv::g17(sum_sliced / n) << '\n';
    std::cout << "spacing " << spacing << " (delta " << delta << "): sliced "
              << sum_sliced / n << ", manifold " << sum_mmd / n << '\n';
  }

  run.write_text("sweep.csv", agg.str());
  run.write_text("sweep_cells.csv", cells.str());
  run.finalize();
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"time-unconditional diffusion toolkit"};
  app.require_subcommand(1);

  struct Shared {
    std::string config_path;
    std::vector<std::string> sets;
    std::string out;
    std::string checkpoint;
    std::string generated;
    std::string reference;
    std::optional<long> seed;
  } shared;

  const std::map<std::string, int (*)(const Config&)> handlers = {
      {"schedule-analyze", &cmd_schedule_analyze}, {"verify-props", &cmd_verify_props},
      {"train", &cmd_train},                       {"sample", &cmd_sample},
      {"eval", &cmd_eval},                         {"sweep-delta", &cmd_sweep_delta},
  };

  for (const auto& [name, fn] : handlers) {
    (void)fn;
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", shared.config_path, "flat key-value config file");
    sub->add_option("--set", shared.sets, "override as key=value (repeatable)");
    sub->add_option("--out", shared.out, "output root directory");
    sub->add_option("--seed", shared.seed, "base seed");
    if (name == "sample") {
      sub->add_option("--checkpoint", shared.checkpoint, "checkpoint file");
      sub->add_option("--class-id", "alias for --set sample.class_id=N")
          ->each([&](const std::string& v) { shared.sets.push_back("sample.class_id=" + v); });
    }
    if (name == "eval") {
      sub->add_option("--generated", shared.generated, "generated batch CSV");
      sub->add_option("--reference", shared.reference, "reference batch CSV");
    }
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());  // CLI11 convention
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    Config cfg;
    if (!shared.config_path.empty()) cfg.load_file(shared.config_path);
    for (const std::string& s : shared.sets) cfg.set(s);
    if (!shared.out.empty()) cfg.set("out", shared.out);
    if (shared.seed.has_value()) cfg.set("seed", std::to_string(*shared.seed));
    if (!shared.checkpoint.empty()) cfg.set("sample.checkpoint", shared.checkpoint);
    if (!shared.generated.empty()) cfg.set("eval.generated", shared.generated);
    if (!shared.reference.empty()) cfg.set("eval.reference", shared.reference);

    for (const auto& [name, fn] : handlers) {
      if (app.got_subcommand(name)) return fn(cfg);
    }
    return kExitConfig;
  } catch (const TrainingDiverged& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const CheckpointError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCorrupt;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace tudiff::cli
