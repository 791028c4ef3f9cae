// antiuav: run the tracking and classification pipeline, generate synthetic
// streams, score tracker output and calibrate the adaptive TH gains.

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "antiuav/calibration.hpp"
#include "antiuav/config.hpp"
#include "antiuav/error.hpp"
#include "antiuav/event_io.hpp"
#include "antiuav/image_io.hpp"
#include "antiuav/metrics.hpp"
#include "antiuav/npu/assembler.hpp"
#include "antiuav/pipeline.hpp"
#include "json.hpp"

namespace {

using namespace antiuav;
using nlohmann::ordered_json;

int cmd_run(const std::string& config_path, const std::string& gating, std::optional<std::uint64_t> seed,
            const std::string& out) {
  auto config = load_pipeline_config(config_path);
  if (gating == "on") config.gating = true;
  if (gating == "off") config.gating = false;
  if (seed) config.synthetic.seed = *seed;
  if (!out.empty()) config.output_dir = out;
  const auto report = run_pipeline(config);
  report_metrics(report, config.output_dir);
  std::cout << "objects " << report.objects.size() << ", npu invocations " << report.npu_invocations
            << " (gated " << report.invocations_gated << ", ungated " << report.invocations_ungated << ")";
  if (report.tracking) std::cout << ", mean IoU " << report.tracking->mean_iou;
  std::cout << "\nwrote " << config.output_dir << "/report.json\n";
  return 0;
}

int cmd_synth(MotionSpec spec, const std::string& out) {
  const auto scene = generate_linear_motion(spec);
  std::filesystem::create_directories(out);
  const std::filesystem::path dir(out);
  write_events_file((dir / "events.csv").string(), scene.events);
  write_ground_truth_file((dir / "ground_truth.csv").string(), scene.truth);
  std::cout << scene.events.size() << " events, " << scene.truth.size() << " ground-truth boxes -> " << out << "\n";
  return 0;
}

int cmd_score(const std::string& results, const std::string& truth_path, double iou) {
  const SensorGeometry unbounded{1 << 20, 1 << 20};
  const auto rows = parse_track_rows(read_file(results));
  const auto truth = read_ground_truth_file(truth_path, unbounded);
  const auto s = evaluate_tracking(rows, truth, iou);
  ordered_json j{{"iou_threshold", s.iou_threshold}, {"samples", s.samples}, {"hits", s.hits},
                 {"accuracy", s.accuracy},           {"mean_iou", s.mean_iou}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_calibrate(const std::string& sweep_path, const std::string& out) {
  const auto spec = load_sweep_spec(sweep_path);
  const auto result = calibrate_th_gains(spec);
  ordered_json j{{"th_gain_size", result.gain_size},
                 {"th_gain_speed", result.gain_speed},
                 {"mean_iou", result.mean_iou},
                 {"baseline_mean_iou", result.baseline_mean_iou}};
  std::cout << j.dump(2) << "\n";
  if (!out.empty()) {
    std::ostringstream cfg;
    cfg << "[fotu]\nth_gain_size = " << result.gain_size << "\nth_gain_speed = " << result.gain_speed << "\n";
    write_file(out, cfg.str());
  }
  return 0;
}

int cmd_asm(const std::string& in, const std::string& out, bool disasm) {
  const auto text = read_file(in);
  std::string result = disasm ? npu::disassemble(npu::decode_program(npu::parse_words(text)))
                              : npu::format_words(npu::encode_program(npu::assemble(text)));
  if (out.empty()) {
    std::cout << result;
  } else {
    write_file(out, result);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-camera anti-UAV tracking and classification"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run the pipeline on a config");
  std::string config_path, gating, run_out;
  std::optional<std::uint64_t> seed;
  run->add_option("--config", config_path, "pipeline config file")->required();
  run->add_option("--gating", gating, "override NPU gating")->check(CLI::IsMember({"on", "off"}));
  run->add_option("--seed", seed, "synthetic input seed");
  run->add_option("--out", run_out, "output directory");

  auto* synth = app.add_subcommand("synth", "generate a linear-motion event stream");
  MotionSpec spec;
  std::string synth_out;
  synth->add_option("--speed", spec.speed, "px/s")->required();
  synth->add_option("--size", spec.object_size, "object side in pixels")->required();
  synth->add_option("--duration", spec.duration_s, "seconds")->required();
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--direction", spec.direction_deg, "degrees, 0 = +x");
  synth->add_option("--noise", spec.noise_fraction, "share of noise events");
  synth->add_option("--event-rate", spec.event_rate, "events per object pixel per frame interval");
  synth->add_option("--seed", spec.seed, "seed");

  auto* score = app.add_subcommand("score", "score tracker rows against ground truth");
  std::string results, truth;
  double iou = 0.65;
  score->add_option("--results", results, "tracks CSV")->required();
  score->add_option("--truth", truth, "ground-truth CSV")->required();
  score->add_option("--iou", iou, "IoU threshold");

  auto* calibrate = app.add_subcommand("calibrate-th", "grid-search the TH gains");
  std::string sweep, calib_out;
  calibrate->add_option("--sweep", sweep, "sweep spec")->required();
  calibrate->add_option("--out", calib_out, "write a [fotu] config fragment");

  auto* assemble = app.add_subcommand("asm", "assemble NPU source to hex words");
  auto* disassemble = app.add_subcommand("disasm", "disassemble hex words");
  std::string asm_in, asm_out;
  for (auto* sub : {assemble, disassemble}) {
    sub->add_option("--in", asm_in)->required();
    sub->add_option("--out", asm_out);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << ordered_json{{"error", "Usage"}, {"location", nullptr}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }

  try {
    if (*run) return cmd_run(config_path, gating, seed, run_out);
    if (*synth) return cmd_synth(spec, synth_out);
    if (*score) return cmd_score(results, truth, iou);
    if (*calibrate) return cmd_calibrate(sweep, calib_out);
    if (*assemble) return cmd_asm(asm_in, asm_out, false);
    if (*disassemble) return cmd_asm(asm_in, asm_out, true);
  } catch (const Error& e) {
    std::cerr << e.to_json() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << ordered_json{{"error", "Internal"}, {"location", nullptr}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
