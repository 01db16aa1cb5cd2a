#include "cli.hpp"

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fallsentry/fallsentry.hpp"

namespace fallsentry::cli {
namespace {

namespace fs = std::filesystem;

struct DetectArgs {
  std::vector<std::string> inputs;
  double threshold = kDefaultThresholdPx;
  double visibility_min = kDefaultVisibilityMin;
  std::string output;
  std::string curves;
  unsigned jobs = 1;
};

struct EvalArgs {
  std::vector<std::string> preds;
  std::string truth;
  std::string level;
};

struct SynthArgs {
  std::string pattern;
  SynthSpec spec;
  StreamHeader header;
  std::string output;
};

struct PerturbArgs {
  std::string input;
  PerturbSpec spec;
  std::string output;
};

struct ValidateArgs {
  std::string input;
};

void require_existing(const std::string& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::Io, "input '" + path + "' does not exist");
}

int do_detect(const DetectArgs& args, std::ostream& out, std::ostream& err) {
  const DetectorConfig config{args.threshold, args.visibility_min};
  config.validate();
  for (const auto& in : args.inputs) require_existing(in);

  std::vector<StreamJob> batch;
  if (args.inputs.size() == 1) {
    StreamJob job{args.inputs.front(), std::nullopt, std::nullopt};
    if (!args.output.empty()) job.results_path = args.output;
    if (!args.curves.empty()) job.curves_path = args.curves;
    batch.push_back(job);
  } else {
    fs::create_directories(args.output);
    if (!args.curves.empty()) fs::create_directories(args.curves);
    for (const auto& in : args.inputs) {
      const std::string id = stream_id_from_path(in);
      StreamJob job{in, fs::path(args.output) / (id + ".results.jsonl"), std::nullopt};
      if (!args.curves.empty()) job.curves_path = fs::path(args.curves) / (id + ".curves.csv");
      batch.push_back(job);
    }
  }

  const auto outcomes = process_batch(batch, config, args.jobs);
  int status = kExitOk;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    if (!o.processed) {
      err << "error: " << batch[i].input.string() << ": " << o.error << '\n';
      status = kExitFailure;
      continue;
    }
    const RunReport& rep = o.processed->report;
    err << rep.stream_id << ": " << rep.frames_total << " frames, " << rep.frames_fall
        << " fall";
    if (rep.first_fall_index) err << ", first fall at frame " << *rep.first_fall_index;
    err << '\n';
    if (!batch[i].results_path) out << write_results(o.processed->results);
  }
  return status;
}

const GroundTruthLabels& match_truth(const std::vector<GroundTruthLabels>& truth,
                                     LabelLevel level, const std::string& stream_id,
                                     bool single_pred) {
  const GroundTruthLabels* only = nullptr;
  std::size_t count = 0;
  for (const auto& t : truth) {
    if (t.level() != level) continue;
    if (t.stream_id == stream_id) return t;
    only = &t;
    ++count;
  }
  if (single_pred && count == 1) return *only;
  throw Error(ErrorCode::MissingLabel, "no " + std::string(to_string(level)) +
                                           "-level ground truth for stream '" + stream_id + "'");
}

int do_eval(const EvalArgs& args, std::ostream& out) {
  const LabelLevel level = args.level == "frame" ? LabelLevel::FRAME : LabelLevel::VIDEO;
  require_existing(args.truth);
  const auto truth = parse_truth_csv(detail::read_file(args.truth));

  ConfusionMatrix all;
  for (const auto& pred : args.preds) {
    require_existing(pred);
    const auto results = parse_results(detail::read_file(pred));
    const std::string id = stream_id_from_path(pred);
    const auto& labels = match_truth(truth, level, id, args.preds.size() == 1);
    const ConfusionMatrix cm = confuse(results, labels);
    all += cm;
    out << metrics_record(id, cm, metrics(cm)) << '\n';
  }
  if (args.preds.size() > 1) out << metrics_record("ALL", all, metrics(all)) << '\n';
  return kExitOk;
}

int do_synth(SynthArgs args) {
  args.spec.pattern = *pattern_from_string(args.pattern);
  const PoseStream stream = synthesize_stream(args.spec, args.header);
  write_stream_file(args.output, stream);
  return kExitOk;
}

int do_perturb(const PerturbArgs& args) {
  require_existing(args.input);
  const PoseStream stream = read_stream_file(args.input);
  write_stream_file(args.output, perturb_stream(stream, args.spec));
  return kExitOk;
}

int do_validate(const ValidateArgs& args, std::ostream& out) {
  require_existing(args.input);
  const PoseStream stream = read_stream_file(args.input);
  std::size_t missing = 0;
  for (const auto& f : stream.frames) missing += f.has_pose() ? 0 : 1;
  out << "ok " << args.input << ": " << stream.header.width << 'x' << stream.header.height
      << " @ " << stream.header.fps << " fps, " << stream.frames.size() << " frames, " << missing
      << " without pose\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Head-displacement fall detection over pose landmark streams", "fallsentry"};
  app.require_subcommand(1);

  DetectArgs detect;
  auto* detect_cmd = app.add_subcommand("detect", "Flag fall frames and compute features");
  detect_cmd->add_option("--input", detect.inputs, "Landmark stream file(s)")->required();
  detect_cmd->add_option("--threshold", detect.threshold, "Head displacement threshold (px)")
      ->capture_default_str();
  detect_cmd->add_option("--visibility-min", detect.visibility_min,
                         "Minimum landmark visibility")
      ->capture_default_str();
  auto* output_opt = detect_cmd->add_option(
      "--output", detect.output, "Results file (directory when several inputs); default stdout");
  detect_cmd->add_option("--curves", detect.curves,
                         "Curve CSV file (directory when several inputs)");
  detect_cmd->add_option("--jobs", detect.jobs, "Streams processed in parallel")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Compare results against ground truth");
  eval_cmd->add_option("--pred", eval.preds, "Results file(s)")->required();
  eval_cmd->add_option("--truth", eval.truth, "Ground truth CSV")->required();
  eval_cmd->add_option("--level", eval.level, "frame or video")
      ->required()
      ->check(CLI::IsMember({"frame", "video"}));

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic landmark stream");
  synth_cmd->add_option("--pattern", synth.pattern)
      ->required()
      ->check(CLI::IsMember({"forward-fall", "backward-fall", "left-fall", "right-fall",
                             "no-fall-walk", "no-fall-sit"}));
  synth_cmd->add_option("--frames", synth.spec.frames)->capture_default_str();
  synth_cmd->add_option("--fall-start", synth.spec.fall_start)->capture_default_str();
  synth_cmd->add_option("--drop-px", synth.spec.drop_px)->capture_default_str();
  synth_cmd->add_option("--ramp-frames", synth.spec.ramp_frames)->capture_default_str();
  synth_cmd->add_option("--sway-px", synth.spec.sway_px)->capture_default_str();
  synth_cmd->add_option("--seed", synth.spec.seed)->capture_default_str();
  synth_cmd->add_option("--width", synth.header.width)->capture_default_str();
  synth_cmd->add_option("--height", synth.header.height)->capture_default_str();
  synth_cmd->add_option("--fps", synth.header.fps)->capture_default_str();
  synth_cmd->add_option("-o,--output", synth.output, "Output stream file")->required();

  PerturbArgs perturb;
  auto* perturb_cmd = app.add_subcommand("perturb", "Add landmark noise and frame dropout");
  perturb_cmd->add_option("--input", perturb.input)->required();
  perturb_cmd->add_option("--noise-sigma", perturb.spec.noise_sigma_px)->capture_default_str();
  perturb_cmd->add_option("--dropout", perturb.spec.dropout_prob)->capture_default_str();
  perturb_cmd->add_option("--seed", perturb.spec.seed)->capture_default_str();
  perturb_cmd->add_option("-o,--output", perturb.output, "Output stream file")->required();

  ValidateArgs validate;
  auto* validate_cmd = app.add_subcommand("validate", "Check a landmark stream file");
  validate_cmd->add_option("--input", validate.input)->required();

  try {
    app.parse(argc, argv);
    if (detect_cmd->parsed() && detect.inputs.size() > 1 && output_opt->count() == 0) {
      throw CLI::ValidationError("--output", "a directory is required with several inputs");
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (detect_cmd->parsed()) return do_detect(detect, out, err);
    if (eval_cmd->parsed()) return do_eval(eval, out);
    if (synth_cmd->parsed()) return do_synth(synth);
    if (perturb_cmd->parsed()) return do_perturb(perturb);
    if (validate_cmd->parsed()) return do_validate(validate, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace fallsentry::cli
