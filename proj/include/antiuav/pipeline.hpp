#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "antiuav/config.hpp"
#include "antiuav/event_io.hpp"
#include "antiuav/fotu.hpp"
#include "antiuav/isp.hpp"
#include "antiuav/metrics.hpp"
#include "antiuav/npu/model.hpp"
#include "antiuav/npu/pe_array.hpp"
#include "antiuav/tracker.hpp"

namespace antiuav {

struct ObjectRecord {
  int id = 0;
  ClassificationRoute route = ClassificationRoute::Patch;
  InputKind input = InputKind::Patch;  // may fall back to Patch on a short trajectory
  int label = 0;
  std::string label_name;
  double confidence = 0.0;
  std::size_t invocations = 0;
  double speed = 0.0;  // px/s when classified
  Timestamp classified_t = 0;
};

struct SpeedIou {
  int object_id = 0;
  double speed = 0.0;  // ground-truth speed, px/s
  int track_id = -1;
  double mean_iou = 0.0;
  double accuracy = 0.0;
};

struct RunReport {
  bool gating = true;
  std::size_t events = 0;
  std::size_t frames_built = 0;
  std::size_t commits = 0;
  std::size_t matched_events = 0;
  std::size_t tracks_created = 0;
  std::size_t tracks_retired = 0;
  std::size_t dropped_components = 0;
  std::size_t unmonitored_tracks = 0;

  std::size_t npu_invocations = 0;      // performed in this run
  std::size_t invocations_gated = 0;    // once per tracked object
  std::size_t invocations_ungated = 0;  // once per event-mode commit
  double reduction = 0.0;               // 1 - gated / ungated
  npu::MacReport macs;
  std::uint64_t npu_cycles = 0;

  std::vector<ObjectRecord> objects;  // ascending id
  std::optional<TrackingScore> tracking;
  std::vector<SpeedIou> iou_vs_speed;

  std::vector<TrackResultRow> tracks;  // one row per event-mode commit
  std::vector<Trajectory> trajectories;
};

// One band per object so generated objects never touch.
SyntheticScene generate_synthetic_input(const SyntheticConfig& config, const SensorGeometry& geometry,
                                        Timestamp frame_interval);

// Replays `events` through the tracker and classifies tracked objects.
// Gray frames come from config.gray_frames_dir when set; otherwise patches are
// rendered from the most recent frame interval of events. Trajectory rasters
// go to `trajectory_model` when one is given.
RunReport run_pipeline(const PipelineConfig& config, const std::vector<Event>& events,
                       const std::vector<GroundTruthBox>& truth, const npu::Model& model,
                       const npu::Model* trajectory_model = nullptr);

// Loads inputs (or generates them from [synthetic]) and the model, then runs.
RunReport run_pipeline(const PipelineConfig& config);

std::string report_json(const RunReport& report);
std::string tracks_csv(const RunReport& report);
std::string trajectories_csv(const RunReport& report);
std::string iou_vs_speed_csv(const RunReport& report);

// Writes report.json, tracks.csv, trajectories.csv and iou_vs_speed.csv.
void report_metrics(const RunReport& report, const std::string& output_dir);

}  // namespace antiuav
