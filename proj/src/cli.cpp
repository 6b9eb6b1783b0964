#include "pmc/cli.hpp"

#include "pmc/config.hpp"
#include "pmc/error.hpp"
#include "pmc/eval.hpp"
#include "pmc/frameio.hpp"
#include "pmc/log.hpp"
#include "pmc/motion.hpp"
#include "pmc/parallel.hpp"
#include "pmc/pipeline.hpp"
#include "pmc/synth.hpp"

#include "CLI11.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>

namespace pmc::cli {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FormatError(file.string() + ": cannot open");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void emit(const std::string& text, const std::string& out_file, std::ostream& out) {
  if (out_file.empty()) {
    out << text << '\n';
    return;
  }
  std::ofstream f(out_file, std::ios::binary);
  if (!f) throw FormatError(out_file + ": cannot open for writing");
  f << text << '\n';
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

std::string csv_rows(const Eigen::MatrixXd& m) {
  std::string text;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) text += ',';
      text += format_double(m(r, c));
    }
    text += '\n';
  }
  return text;
}

// Flags shared by the pipeline commands. Values only apply when the flag was
// given, so the precedence is flags > --config file > defaults.
struct PipelineFlags {
  std::string config_file;
  int tau = 0;
  double gamma = 0.0;
  int components = 0;
  int jobs = 1;
  std::string modality;
  std::string coarse_grid;
  int min_span = 0;
  int max_span = 0;
  double quiescence = 0.0;

  CLI::Option* tau_opt = nullptr;
  CLI::Option* gamma_opt = nullptr;
  CLI::Option* components_opt = nullptr;
  CLI::Option* jobs_opt = nullptr;
  CLI::Option* min_span_opt = nullptr;
  CLI::Option* max_span_opt = nullptr;
  CLI::Option* quiescence_opt = nullptr;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "JSON config file");
    tau_opt = app->add_option("--tau", tau, "motion expansion gap in pixels (default 5)");
    gamma_opt = app->add_option("--gamma", gamma, "downsizing scale in (0,1] (default 0.1)");
    components_opt = app->add_option("--components,-c", components,
                                     "principal components per gesture (default 10)");
    jobs_opt = app->add_option("--jobs,-j", jobs, "worker threads (default 1)");
    app->add_option("--modality", modality, "rgb or depth");
    app->add_option("--coarse-grid", coarse_grid, "segmentation grid RxC (default 3x3)");
    min_span_opt = app->add_option("--min-span", min_span, "shortest span in steps (default 8)");
    max_span_opt = app->add_option("--max-span", max_span, "longest span in steps (default 60)");
    quiescence_opt = app->add_option("--quiescence", quiescence,
                                     "quiescent fraction of the median energy (default 0.15)");
  }

  Config resolve() const {
    Config c;
    if (!config_file.empty()) c = Config::load(config_file, c);
    if (tau_opt->count()) c.train.motion.tau = tau;
    if (gamma_opt->count()) c.train.motion.gamma = gamma;
    if (components_opt->count()) c.train.components = components;
    if (jobs_opt->count()) c.jobs = jobs;
    if (!modality.empty()) c.modality = parse_modality(modality);
    if (!coarse_grid.empty()) c.segmentation.coarse = parse_grid(coarse_grid);
    if (min_span_opt->count()) c.segmentation.min_length = min_span;
    if (max_span_opt->count()) c.segmentation.max_length = max_span;
    if (quiescence_opt->count()) c.segmentation.quiescence = quiescence;
    if (c.jobs < 1) throw ParameterError("--jobs must be >= 1");
    if (c.train.components < 1) throw ParameterError("--components must be >= 1");
    return c;
  }
};

int cmd_train(const PipelineFlags& flags, const std::string& manifest_file,
              const std::string& model_out, std::ostream& err) {
  const Config config = flags.resolve();
  const BatchManifest manifest = load_manifest(manifest_file);
  const Vocabulary vocab = train_vocabulary(manifest, config.train, config.modality, config.jobs);
  vocab.save(model_out);
  err << "trained " << vocab.size() << " gesture models -> " << model_out << '\n';
  return kExitOk;
}

int cmd_classify(const PipelineFlags& flags, const std::string& model_file,
                 const std::string& manifest_file, const std::string& segmentation,
                 const std::string& out_file, bool timing, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  const Config config = flags.resolve();
  const Vocabulary vocab = Vocabulary::load(model_file);
  const BatchManifest manifest = load_manifest(manifest_file);

  std::optional<SpanTable> manual;
  if (segmentation.rfind("manual:", 0) == 0) {
    manual = span_table(segmentations_from_json(read_file(segmentation.substr(7))));
  } else if (segmentation != "auto") {
    throw UsageError("--segmentation must be 'auto' or 'manual:<spans.json>'");
  }

  const auto predictions = classify_batch(manifest, vocab, config, manual);
  std::optional<double> wall;
  if (timing) {
    wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  emit(predictions_to_json(predictions, wall), out_file, out);

  int failed = 0;
  for (const auto& p : predictions) {
    if (!p.failure.empty()) {
      err << "error: " << p.video << ": " << p.failure << '\n';
      ++failed;
    }
  }
  return failed ? kExitFailure : kExitOk;
}

int cmd_segment(const PipelineFlags& flags, const std::string& manifest_file,
                const std::string& video_dir, const std::string& out_file, std::ostream& out) {
  const Config config = flags.resolve();
  const BatchManifest manifest = load_manifest(manifest_file);
  const auto templates =
      training_templates(manifest, config.segmentation, config.modality, config.jobs);
  if (!video_dir.empty()) {
    const Video video = load_video(video_dir, config.modality, video_dir);
    emit(segmentation_to_json(segment_video(video, templates, config.segmentation)), out_file, out);
    return kExitOk;
  }
  std::vector<SegmentationResult> results(manifest.test.size());
  parallel_for(manifest.test.size(), config.jobs, [&](std::size_t i) {
    const auto& entry = manifest.test[i];
    results[i] = segment_video(load_video(manifest.resolve(entry.path), config.modality, entry.path),
                               templates, config.segmentation);
  });
  emit(segmentations_to_json(results), out_file, out);
  return kExitOk;
}

int cmd_score(const std::string& manifest_file, const std::string& predictions_file,
              const std::string& out_file, bool tsv, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const BatchManifest manifest = load_manifest(manifest_file);
  const PredictionFile predictions = predictions_from_json(read_file(predictions_file));
  ScoreReport report = batch_score(manifest, predictions.labels);
  report.wall_seconds = predictions.wall_seconds.value_or(
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  if (tsv) {
    if (!out_file.empty()) emit(report.to_json(), out_file, out);
    out << report.to_tsv() << '\n';
  } else {
    emit(report.to_json(), out_file, out);
  }
  return kExitOk;
}

int cmd_synth(const std::string& spec_file, const std::string& out_dir,
              std::optional<std::uint64_t> seed, std::ostream& err) {
  SynthSpec spec = spec_file.empty() ? SynthSpec{} : SynthSpec::from_json(read_file(spec_file));
  if (seed) spec.seed = *seed;
  const BatchManifest manifest = generate_batch(spec, out_dir);
  err << "wrote " << manifest.train.size() << " training and " << manifest.test.size()
      << " test videos to " << out_dir << '\n';
  return kExitOk;
}

int cmd_dump(const PipelineFlags& flags, const std::string& what, const std::string& video_dir,
             const std::string& model_file, int label, int top, const std::string& out_file,
             std::ostream& out) {
  const Config config = flags.resolve();
  if (what == "motion-maps" || what == "coarse") {
    if (video_dir.empty()) throw UsageError("dump " + what + " needs --video");
    const Video video = load_video(video_dir, config.modality);
    const Eigen::MatrixXd m = what == "coarse"
                                  ? coarse_sequence(video, config.segmentation.coarse).steps
                                  : bag_of_frames(video, config.train.motion).rows;
    emit(csv_rows(m), out_file, out);
    return kExitOk;
  }
  if (what == "components" || what == "mean") {
    if (model_file.empty()) throw UsageError("dump " + what + " needs --model");
    const Vocabulary vocab = Vocabulary::load(model_file);
    const PcaModel& model = vocab.model_for(label);
    const GridDims g = model.grid;
    std::string text;
    auto append_grid = [&](const Eigen::VectorXd& v) {
      text += csv_rows(Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                       Eigen::RowMajor>>(v.data(), g.rows, g.cols));
    };
    if (what == "mean") {
      append_grid(model.mean);
    } else {
      const int k = std::min(top, model.c_effective());
      for (int i = 0; i < k; ++i) {
        if (i) text += '\n';
        append_grid(model.components.col(i));
      }
    }
    emit(text.empty() ? text : text.substr(0, text.size() - 1), out_file, out);
    return kExitOk;
  }
  throw UsageError("unknown dump target '" + what + "' (motion-maps, coarse, components, mean)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Principal motion components: one-shot gesture recognition"};
  app.require_subcommand(1);

  std::string manifest_file, model_file, model_out, out_file, video_dir, segmentation = "auto";
  std::string predictions_file, spec_file, dump_what;
  bool timing = false, tsv = false;
  int label = 1, top = 3;
  std::uint64_t seed = 0;

  PipelineFlags train_flags, classify_flags, segment_flags, dump_flags;

  auto* train = app.add_subcommand("train", "fit one PCA model per training video");
  train->add_option("--manifest,-m", manifest_file, "batch manifest")->required();
  train->add_option("--model-out,-o", model_out, "vocabulary JSON to write")->required();
  train_flags.attach(train);

  auto* classify = app.add_subcommand("classify", "segment and label the test videos");
  classify->add_option("--model", model_file, "vocabulary JSON")->required();
  classify->add_option("--manifest,-m", manifest_file, "batch manifest")->required();
  classify->add_option("--segmentation", segmentation, "auto or manual:<spans.json>");
  classify->add_option("--out,-o", out_file, "predictions JSON (default stdout)");
  classify->add_flag("--timing", timing, "record wall time in the predictions");
  classify_flags.attach(classify);

  auto* segment = app.add_subcommand("segment", "split test videos into gesture spans");
  segment->add_option("--manifest,-m", manifest_file, "batch manifest (training templates)")
      ->required();
  segment->add_option("--video", video_dir, "single video directory (default: manifest tests)");
  segment->add_option("--out,-o", out_file, "spans JSON (default stdout)");
  segment_flags.attach(segment);

  auto* score = app.add_subcommand("score", "normalized Levenshtein score of predictions");
  score->add_option("--manifest,-m", manifest_file, "batch manifest")->required();
  score->add_option("--predictions,-p", predictions_file, "predictions JSON")->required();
  score->add_option("--out,-o", out_file, "report JSON (default stdout)");
  score->add_flag("--tsv", tsv, "print a one-line TSV summary");

  auto* synth = app.add_subcommand("synth", "generate a synthetic batch");
  synth->add_option("--spec", spec_file, "synth spec JSON (default settings if omitted)");
  synth->add_option("--out,-o", out_file, "output directory")->required();
  auto* seed_opt = synth->add_option("--seed", seed, "override the spec's RNG seed");

  auto* dump = app.add_subcommand("dump", "export matrices as CSV");
  dump->add_option("what", dump_what, "motion-maps | coarse | components | mean")->required();
  dump->add_option("--video", video_dir, "video directory");
  dump->add_option("--model", model_file, "vocabulary JSON");
  dump->add_option("--label", label, "gesture label (default 1)");
  dump->add_option("--top", top, "number of components (default 3)");
  dump->add_option("--out,-o", out_file, "CSV file (default stdout)");
  dump_flags.attach(dump);

  std::vector<const char*> argv{"pmc"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    if (e.get_exit_code() == 0) return kExitOk;
    return kExitUsage;
  }

  try {
    if (*train) return cmd_train(train_flags, manifest_file, model_out, err);
    if (*classify) {
      return cmd_classify(classify_flags, model_file, manifest_file, segmentation, out_file, timing,
                          out, err);
    }
    if (*segment) return cmd_segment(segment_flags, manifest_file, video_dir, out_file, out);
    if (*score) return cmd_score(manifest_file, predictions_file, out_file, tsv, out);
    if (*synth) {
      return cmd_synth(spec_file, out_file,
                       seed_opt->count() ? std::optional<std::uint64_t>(seed) : std::nullopt, err);
    }
    if (*dump) {
      return cmd_dump(dump_flags, dump_what, video_dir, model_file, label, top, out_file, out);
    }
  } catch (const ManifestInvalid& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace pmc::cli
