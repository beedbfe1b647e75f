#include "causalign/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <system_error>

#include "causalign/config.hpp"
#include "causalign/error.hpp"
#include "causalign/experiment.hpp"
#include "causalign/gradcheck.hpp"
#include "causalign/manifest.hpp"
#include "causalign/metrics.hpp"
#include "causalign/png_io.hpp"
#include "causalign/random.hpp"
#include "causalign/spectral.hpp"
#include "causalign/synthetic.hpp"

namespace causalign {
namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void ensure_dir(const fs::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_dir(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("write failed: " + path.string());
}

RunConfig base_config(const std::string& config_path) {
  return config_path.empty() ? RunConfig{} : load_run_config(config_path);
}

// Dataset present or generated on demand.
Manifest obtain_manifest(const RunConfig& config, std::ostream& out) {
  const fs::path path = config.paths.manifest_path();
  if (!fs::exists(path)) {
    if (!config.paths.generate_if_missing || !config.paths.manifest.empty())
      throw IoError("manifest not found: " + path.string());
    out << "generating synthetic corpus in " << config.paths.data_dir << "\n";
    generate_synthetic(config.data, config.paths.data_dir);
  }
  return load_manifest(path);
}

void check_shape(const EncoderArch& arch, const ClipDataset& data) {
  for (std::size_t i = 0; i < data.size(); ++i)
    for (const auto& frame : data.clips[i])
      if (frame.height() != arch.height || frame.width() != arch.width || frame.channels() != arch.channels)
        throw ValidationError("clip " + data.ids[i] + " has frames of " + std::to_string(frame.height()) + "x" +
                              std::to_string(frame.width()) + "x" + std::to_string(frame.channels()) +
                              ", model expects " + std::to_string(arch.height) + "x" +
                              std::to_string(arch.width) + "x" + std::to_string(arch.channels));
}

std::string loss_line(const EpochLog& e) {
  return std::to_string(e.epoch) + "," + fmt(e.mean.l_orig) + "," + fmt(e.mean.l_aug) + "," +
         fmt(e.mean.l_sup) + "," + fmt(e.mean.l_total) + "\n";
}

void report_stats(const Manifest& manifest, const ClipDataset& all, std::ostream& out) {
  std::size_t counts[2] = {0, 0};
  double sums[2] = {0, 0};
  std::size_t pixels[2] = {0, 0};
  for (std::size_t i = 0; i < all.size(); ++i) {
    const int d = manifest.entries[i].domain == Domain::kSource ? 0 : 1;
    ++counts[d];
    for (const auto& frame : all.clips[i])
      for (double v : frame.data()) {
        sums[d] += v;
        ++pixels[d];
      }
  }
  out << "classes: " << manifest.class_names.size() << "\n";
  out << "clips: " << manifest.entries.size() << " (source " << counts[0] << ", target " << counts[1] << ")\n";
  for (int d = 0; d < 2; ++d)
    if (pixels[d])
      out << (d == 0 ? "source" : "target") << " mean intensity: " << std::fixed << std::setprecision(4)
          << sums[d] / static_cast<double>(pixels[d]) << std::defaultfloat << "\n";
}

struct Context {
  std::ostream& out;
  std::ostream& err;
};

// Subcommands -------------------------------------------------------------

struct AugmentArgs {
  std::string input, style, out;
  double alpha = 0.5;
  std::uint64_t seed = 0;
};

int cmd_augment(const AugmentArgs& a, Context& ctx) {
  require(0.0 <= a.alpha && a.alpha <= 1.0, "--alpha must lie in [0, 1]");
  const ImageTensor src = read_png(a.input);
  const ImageTensor style = read_png(a.style);
  if (!src.same_shape(style))
    throw ValidationError("image dimensions differ: " + std::to_string(src.height()) + "x" +
                          std::to_string(src.width()) + " vs " + std::to_string(style.height()) + "x" +
                          std::to_string(style.width()));
  Rng rng(a.seed);
  const AugmentResult result = augment(src, style, a.alpha, rng);
  write_png(result.image, a.out);
  ctx.out << "beta=" << fmt(result.beta) << "\n";
  ctx.out << "clamped_pixels=" << result.clamped_pixels << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string config, out, manifest;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  int threads = 1;
};

int cmd_train(const TrainArgs& a, Context& ctx) {
  RunConfig config = base_config(a.config);
  if (a.seed) apply_run_seed(config, *a.seed);
  if (a.epochs) config.train.epochs = *a.epochs;
  if (!a.out.empty()) config.paths.out_dir = a.out;
  if (!a.manifest.empty()) config.paths.manifest = a.manifest;
  require(a.threads >= 1, "--threads must be at least 1");
  config.validate();

  const Manifest manifest = obtain_manifest(config, ctx.out);
  const ClipDataset data = load_clips(manifest, DomainFilter::kSource);
  const EncoderArch arch = arch_for(config);
  check_shape(arch, data);
  initial_checkpoint(config.train, arch, data);  // validates before any file is touched

  const fs::path out_dir = config.paths.out_dir;
  ensure_dir(out_dir);
  write_text(out_dir / "config.json", dump_run_config(config));
  const fs::path log_path = out_dir / "loss_log.csv";
  std::ofstream log(log_path, std::ios::binary | std::ios::trunc);
  if (!log) throw IoError("cannot open " + log_path.string());
  log << "epoch,l_orig,l_aug,l_sup,l_total\n" << std::flush;

  const TrainResult result = train(config.train, arch, data, [&](const EpochLog& e) {
    log << loss_line(e) << std::flush;
    if (!log) throw IoError("write failed: " + log_path.string());
  }, a.threads);
  save_checkpoint(result.checkpoint, out_dir / "checkpoint.cclk");

  ctx.out << "trained " << data.size() << " clips for " << config.train.epochs << " epochs\n";
  if (!result.log.empty()) {
    const auto& first = result.log.front().mean;
    const auto& last = result.log.back().mean;
    ctx.out << "l_total: " << fmt(first.l_total) << " -> " << fmt(last.l_total) << "\n";
  }
  ctx.out << "checkpoint: " << (out_dir / "checkpoint.cclk").string() << "\n";
  ctx.out << "loss log: " << log_path.string() << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string checkpoint, manifest, domain = "target", out;
};

void write_report(const fs::path& dir, const MetricsReport& report) {
  write_text(dir / "metrics.txt", format_metrics_text(report));
  write_text(dir / "metrics.kv", format_metrics_kv(report));
}

int cmd_eval(const EvalArgs& a, Context& ctx) {
  const DomainFilter filter = parse_domain_filter(a.domain);
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const Manifest manifest = load_manifest(a.manifest);
  if (manifest.class_names.size() != ck.class_names.size())
    throw ValidationError("class-count mismatch: checkpoint has " + std::to_string(ck.class_names.size()) +
                          " classes, manifest has " + std::to_string(manifest.class_names.size()));
  if (manifest.class_names != ck.class_names)
    throw ValidationError("class names differ between checkpoint and manifest");
  const ClipDataset data = load_clips(manifest, filter);
  check_shape(ck.arch, data);

  const PredictionSet preds = evaluate_dataset(ck, data);
  const MetricsReport report = compute_metrics(preds);
  const fs::path dir = a.out;
  ensure_dir(dir);
  write_text(dir / "predictions.csv", format_predictions(preds));
  write_report(dir, report);
  ctx.out << format_metrics_text(report);
  return kExitOk;
}

struct ScoreArgs {
  std::string predictions, out;
  int classes = 0;
};

int cmd_score(const ScoreArgs& a, Context& ctx) {
  require(a.classes >= 0, "--classes must be non-negative");
  const PredictionSet preds = load_predictions(a.predictions, a.classes);
  const MetricsReport report = compute_metrics(preds);
  if (!a.out.empty()) {
    ensure_dir(a.out);
    write_report(a.out, report);
  }
  ctx.out << format_metrics_text(report);
  return kExitOk;
}

struct AblateArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
};

std::string ablation_runs_csv(const std::vector<AblationRow>& rows) {
  std::string s = "variant,lambda_aug,lambda_sup,seed,domain,weighted_f1,unweighted_f1,global_f1,balanced_accuracy\n";
  for (const auto& row : rows)
    for (const auto& cell : row.cells)
      for (int d = 0; d < 2; ++d) {
        const MetricsReport& m = d == 0 ? cell.target : cell.source;
        s += row.variant.name + "," + fmt(row.variant.lambda_aug) + "," + fmt(row.variant.lambda_sup) + "," +
             std::to_string(cell.seed) + "," + (d == 0 ? "target" : "source") + "," + fmt(m.weighted_f1) + "," +
             fmt(m.unweighted_f1) + "," + fmt(m.global_f1) + "," + fmt(m.balanced_accuracy) + "\n";
      }
  return s;
}

std::string sweep_table(const std::vector<AblationRow>& rows) {
  std::ostringstream s;
  s << std::left << std::setw(12) << "lambda_aug" << std::setw(12) << "lambda_sup" << std::setw(14)
    << "Weighted F1" << "Balanced Accuracy\n";
  for (const auto& row : rows) {
    const MetricsReport m = row.mean_target();
    s << std::left << std::setw(12) << fmt(row.variant.lambda_aug) << std::setw(12) << fmt(row.variant.lambda_sup)
      << std::fixed << std::setprecision(3) << std::setw(14) << m.weighted_f1 << m.balanced_accuracy << "\n"
      << std::defaultfloat;
  }
  return s.str();
}

int cmd_ablate(const AblateArgs& a, Context& ctx) {
  RunConfig config = base_config(a.config);
  if (a.seed) {
    const std::size_t n = config.ablate.seeds.size();
    config.ablate.seeds.clear();
    for (std::size_t i = 0; i < n; ++i) config.ablate.seeds.push_back(*a.seed + i);
  }
  if (a.epochs) config.train.epochs = *a.epochs;
  if (!a.out.empty()) config.paths.out_dir = a.out;
  config.validate();
  require(!config.ablate.seeds.empty(), "ablate.seeds must not be empty");

  const auto rows = run_ablation(config, ablation_variants(config.train));
  const std::string table = format_ablation_table(rows);
  std::string sweep;
  if (!config.ablate.lambda_aug_grid.empty() || !config.ablate.lambda_sup_grid.empty()) {
    const auto aug = config.ablate.lambda_aug_grid.empty() ? std::vector<double>{config.train.lambda_aug}
                                                           : config.ablate.lambda_aug_grid;
    const auto sup = config.ablate.lambda_sup_grid.empty() ? std::vector<double>{config.train.lambda_sup}
                                                           : config.ablate.lambda_sup_grid;
    std::vector<AblationVariant> grid;
    for (double la : aug)
      for (double ls : sup) grid.push_back({"aug=" + fmt(la) + ",sup=" + fmt(ls), la, ls});
    sweep = sweep_table(run_ablation(config, grid));
  }

  const fs::path dir = config.paths.out_dir;
  ensure_dir(dir);
  write_text(dir / "ablation.txt", table);
  write_text(dir / "ablation_runs.csv", ablation_runs_csv(rows));
  if (!sweep.empty()) write_text(dir / "sweep.txt", sweep);
  ctx.out << table;
  if (!sweep.empty()) ctx.out << "\n" << sweep;
  return kExitOk;
}

struct GensynthArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> classes, clips, frames, size;
};

int cmd_gensynth(const GensynthArgs& a, Context& ctx) {
  RunConfig config = base_config(a.config);
  if (a.seed) apply_run_seed(config, *a.seed);
  if (a.classes) config.data.num_classes = *a.classes;
  if (a.clips) config.data.clips_per_class = *a.clips;
  if (a.frames) config.data.frames_per_clip = *a.frames;
  if (a.size) config.data.image_size = *a.size;
  config.data.validate();
  const fs::path dir = a.out.empty() ? fs::path(config.paths.data_dir) : fs::path(a.out);

  generate_synthetic(config.data, dir);
  const fs::path path = dir / "manifest.tsv";
  const Manifest manifest = load_manifest(path);
  ctx.out << "manifest: " << path.string() << "\n";
  report_stats(manifest, load_clips(manifest, DomainFilter::kAll), ctx.out);
  return kExitOk;
}

struct GradcheckArgs {
  std::uint64_t seed = 0;
  int instances = 20;
  double corrupt = 0.0;
};

int cmd_gradcheck(const GradcheckArgs& a, Context& ctx) {
  require(a.instances >= 1, "--instances must be at least 1");
  GradcheckOptions options;
  options.corrupt = a.corrupt;
  std::vector<ComponentCheck> worst;
  for (int i = 0; i < a.instances; ++i) {
    Rng rng(derive_seed(a.seed, static_cast<std::uint64_t>(i)));
    const auto checks = check_gradients(random_gradcheck_instance(rng), options);
    if (worst.empty()) {
      worst = checks;
      continue;
    }
    for (std::size_t c = 0; c < checks.size(); ++c) {
      worst[c].checked += checks[c].checked;
      worst[c].passed = worst[c].passed && checks[c].passed;
      if (checks[c].max_error > worst[c].max_error) {
        worst[c].max_error = checks[c].max_error;
        worst[c].worst_group = checks[c].worst_group;
      }
    }
  }
  bool ok = true;
  for (const auto& c : worst) {
    ctx.out << std::left << std::setw(8) << c.component << " max_rel_error=" << std::scientific
            << std::setprecision(3) << c.max_error << std::defaultfloat << " (" << c.worst_group << ", "
            << c.checked << " entries) " << (c.passed ? "PASS" : "FAIL") << "\n";
    ok = ok && c.passed;
  }
  ctx.out << "gradcheck " << (ok ? "PASS" : "FAIL") << " over " << a.instances << " instances\n";
  return ok ? kExitOk : kExitValidation;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fourier-augmented video-text alignment toolkit"};
  app.require_subcommand(1);
  Context ctx{out, err};
  std::function<int()> action;

  AugmentArgs aug;
  auto* s_aug = app.add_subcommand("augment", "Mix an image's amplitude spectrum toward a style image");
  s_aug->add_option("--input", aug.input, "Source PNG")->required();
  s_aug->add_option("--style", aug.style, "Style PNG")->required();
  s_aug->add_option("--alpha", aug.alpha, "Upper bound of the mix ratio")->capture_default_str();
  s_aug->add_option("--seed", aug.seed, "Seed for the mix ratio")->capture_default_str();
  s_aug->add_option("--out", aug.out, "Output PNG")->required();
  s_aug->callback([&] { action = [&] { return cmd_augment(aug, ctx); }; });

  TrainArgs tr;
  auto* s_train = app.add_subcommand("train", "Train on the source domain");
  s_train->add_option("--config", tr.config, "JSON config");
  s_train->add_option("--seed", tr.seed, "Run seed (overrides data.seed and train.seed)");
  s_train->add_option("--epochs", tr.epochs, "Override train.epochs");
  s_train->add_option("--manifest", tr.manifest, "Use this manifest instead of the configured corpus");
  s_train->add_option("--out", tr.out, "Output directory");
  s_train->add_option("--threads", tr.threads, "Worker threads for augmentation")->capture_default_str();
  s_train->callback([&] { action = [&] { return cmd_train(tr, ctx); }; });

  EvalArgs ev;
  auto* s_eval = app.add_subcommand("eval", "Predict a manifest with a checkpoint and score it");
  s_eval->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required();
  s_eval->add_option("--manifest", ev.manifest, "Manifest file")->required();
  s_eval->add_option("--domain", ev.domain, "source, target or all")->capture_default_str();
  s_eval->add_option("--out", ev.out, "Output directory")->required();
  s_eval->callback([&] { action = [&] { return cmd_eval(ev, ctx); }; });

  ScoreArgs sc;
  auto* s_score = app.add_subcommand("score", "Score a predictions file");
  s_score->add_option("predictions", sc.predictions, "Predictions CSV")->required();
  s_score->add_option("--classes", sc.classes, "Number of classes (default: from the file)");
  s_score->add_option("--out", sc.out, "Write metrics.txt and metrics.kv here");
  s_score->callback([&] { action = [&] { return cmd_score(sc, ctx); }; });

  AblateArgs ab;
  auto* s_ablate = app.add_subcommand("ablate", "Loss-component ablation over seeds");
  s_ablate->add_option("--config", ab.config, "JSON config");
  s_ablate->add_option("--seed", ab.seed, "First seed; the configured seed count is kept");
  s_ablate->add_option("--epochs", ab.epochs, "Override train.epochs");
  s_ablate->add_option("--out", ab.out, "Output directory");
  s_ablate->callback([&] { action = [&] { return cmd_ablate(ab, ctx); }; });

  GensynthArgs gs;
  auto* s_gen = app.add_subcommand("gensynth", "Render the synthetic domain-shift corpus");
  s_gen->add_option("--config", gs.config, "JSON config (data section)");
  s_gen->add_option("--seed", gs.seed, "Run seed");
  s_gen->add_option("--classes", gs.classes, "Number of classes");
  s_gen->add_option("--clips-per-class", gs.clips, "Clips per class and domain");
  s_gen->add_option("--frames", gs.frames, "Frames per clip");
  s_gen->add_option("--size", gs.size, "Frame height and width");
  s_gen->add_option("--out", gs.out, "Output directory");
  s_gen->callback([&] { action = [&] { return cmd_gensynth(gs, ctx); }; });

  GradcheckArgs gc;
  auto* s_grad = app.add_subcommand("gradcheck", "Finite-difference check of every loss gradient");
  s_grad->add_option("--seed", gc.seed, "Seed")->capture_default_str();
  s_grad->add_option("--instances", gc.instances, "Random instances")->capture_default_str();
  s_grad->add_option("--corrupt", gc.corrupt)->group("");
  s_grad->callback([&] { action = [&] { return cmd_gradcheck(gc, ctx); }; });

  std::vector<const char*> argv{"causalign"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    return action();
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace causalign
