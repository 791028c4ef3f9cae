#include "antiuav/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>

#include "antiuav/error.hpp"
#include "antiuav/image_io.hpp"
#include "antiuav/npu/simulator.hpp"

namespace antiuav {

namespace fs = std::filesystem;

SyntheticScene generate_synthetic_input(const SyntheticConfig& config, const SensorGeometry& geometry,
                                        Timestamp frame_interval) {
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> tilt(-15.0, 15.0);
  std::vector<SyntheticScene> scenes;
  const double band = static_cast<double>(geometry.height) / static_cast<double>(config.objects);
  for (std::size_t i = 0; i < config.objects; ++i) {
    MotionSpec m;
    m.geometry = geometry;
    m.object_id = static_cast<int>(i);
    m.object_size = config.sizes[i % config.sizes.size()];
    m.speed = config.speeds[i % config.speeds.size()];
    m.direction_deg = tilt(rng) + (rng() % 2 ? 180.0 : 0.0);
    m.duration_s = config.duration_s;
    m.event_rate = config.event_rate;
    m.noise_fraction = config.noise_fraction;
    m.frame_interval_us = frame_interval;
    m.seed = rng();

    // Centre the path on the band.
    const double rad = m.direction_deg * std::numbers::pi / 180.0;
    const double travel = m.speed * m.duration_s;
    const double half = 0.5 * m.object_size;
    m.start_x = 0.5 * geometry.width - half - 0.5 * travel * std::cos(rad);
    m.start_y = (static_cast<double>(i) + 0.5) * band - half - 0.5 * travel * std::sin(rad);
    scenes.push_back(generate_linear_motion(m));
  }
  return merge_scenes(scenes);
}

namespace {

class GrayFrameSource {
 public:
  GrayFrameSource(const std::string& dir, const SensorGeometry& geometry) : geometry_(geometry) {
    if (dir.empty()) return;
    if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, "gray frame directory '" + dir + "' not found");
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() != ".pgm") continue;
      const auto stem = entry.path().stem().string();
      if (stem.empty() || !std::all_of(stem.begin(), stem.end(), [](char c) { return c >= '0' && c <= '9'; })) continue;
      files_[std::stoull(stem)] = entry.path().string();
    }
  }

  bool empty() const { return files_.empty(); }

  // Latest frame at or before t, else the earliest one.
  const GrayFrame& at(Timestamp t) {
    auto it = files_.upper_bound(t);
    if (it != files_.begin()) --it;
    if (!cached_ || cached_->t != it->first) {
      auto frame = gray_frame_from_image(decode_pgm(read_file(it->second)), it->first);
      if (frame.geometry.width != geometry_.width || frame.geometry.height != geometry_.height) {
        throw Error(ErrorCode::ShapeMismatch, "gray frame '" + it->second + "' does not match the sensor size");
      }
      cached_ = std::move(frame);
    }
    return *cached_;
  }

 private:
  SensorGeometry geometry_;
  std::map<Timestamp, std::string> files_;
  std::optional<GrayFrame> cached_;
};

struct TrackMeta {
  std::size_t commits = 0;
  bool opportunity_taken = false;
  bool classified = false;
  ObjectRecord record;
};

class Runner {
 public:
  Runner(const PipelineConfig& config, const npu::Model& model, const npu::Model* trajectory_model)
      : config_(config),
        tracker_(config.geometry, config.frame_interval, config.rpu, config.fotu),
        classifier_(model),
        gray_(config.gray_frames_dir, config.geometry) {
    if (trajectory_model) trajectory_classifier_.emplace(*trajectory_model);
  }

  void feed(const Event& e) {
    recent_.push_back(e);
    while (!recent_.empty() && recent_.front().t + config_.frame_interval <= e.t) recent_.pop_front();
    updates_.clear();
    tracker_.process(e, updates_);
    handle(updates_);
  }

  void finish() {
    updates_.clear();
    tracker_.finish(updates_);
    handle(updates_);
    for (const auto& rp : tracker_.state().proposals) flush(rp, last_t());
  }

  RunReport report(const std::vector<GroundTruthBox>& truth) {
    RunReport r;
    const auto& st = tracker_.state().stats;
    r.gating = config_.gating;
    r.events = st.events;
    r.frames_built = st.frames_built;
    r.commits = st.commits;
    r.matched_events = st.matched_events;
    r.tracks_created = st.tracks_created;
    r.tracks_retired = st.tracks_retired;
    r.dropped_components = st.dropped_components;
    r.unmonitored_tracks = tracker_.fotu().unmonitored_tracks();
    r.npu_invocations = classifier_.invocations();
    if (trajectory_classifier_) r.npu_invocations += trajectory_classifier_->invocations();
    r.invocations_gated = gated_;
    r.invocations_ungated = st.commits;
    r.reduction = st.commits ? 1.0 - static_cast<double>(gated_) / static_cast<double>(st.commits) : 0.0;
    r.macs = classifier_.macs();
    r.npu_cycles = classifier_.cycles();
    if (trajectory_classifier_) {
      r.macs += trajectory_classifier_->macs();
      r.npu_cycles += trajectory_classifier_->cycles();
    }
    for (const auto& [id, meta] : meta_) {
      if (meta.classified) r.objects.push_back(meta.record);
    }
    for (const auto& row : tracker_.state().results) {
      if (row.mode == TrackMode::Event) r.tracks.push_back(row);
    }
    r.trajectories = tracker_.fotu().all_trajectories();
    if (!truth.empty()) score(r, truth);
    return r;
  }

 private:
  Timestamp last_t() const { return tracker_.state().last_t; }

  void handle(const std::vector<TrackUpdate>& updates) {
    for (const auto& u : updates) {
      switch (u.kind) {
        case TrackUpdateKind::Created:
          meta_[u.rp.id];
          break;
        case TrackUpdateKind::Commit:
          on_commit(u.rp, u.t);
          break;
        case TrackUpdateKind::Retired:
          flush(u.rp, u.t);
          break;
        case TrackUpdateKind::Merged:
          // The absorbing track carries on for the same object.
          meta_[u.rp.id].opportunity_taken = true;
          fallback_.erase(u.rp.id);
          break;
      }
    }
  }

  void on_commit(const RegionProposal& rp, Timestamp t) {
    auto& meta = meta_[rp.id];
    ++meta.commits;
    if (!config_.gating) classify(rp, t, meta, false);
    if (meta.opportunity_taken) return;
    if (!rp.has_velocity) {
      fallback_[rp.id] = patch_input(rp, t);
      return;
    }
    const auto route = route_classification(rp.speed(), config_.fotu);
    const auto* traj = tracker_.fotu().trajectory(rp.id);
    if (route == ClassificationRoute::Trajectory && traj && traj->points.size() < config_.min_trajectory_points) {
      fallback_[rp.id] = patch_input(rp, t);
      return;  // wait for the trajectory memory to fill
    }
    take_opportunity(rp, t, meta, false);
  }

  // Last chance for a pending track: retirement or end of stream.
  void flush(const RegionProposal& rp, Timestamp t) {
    auto& meta = meta_[rp.id];
    if (meta.opportunity_taken || meta.commits == 0) return;
    take_opportunity(rp, t, meta, true);
  }

  void take_opportunity(const RegionProposal& rp, Timestamp t, TrackMeta& meta, bool late) {
    meta.opportunity_taken = true;
    ++gated_;
    if (config_.gating) classify(rp, t, meta, late);
    fallback_.erase(rp.id);
  }

  void classify(const RegionProposal& rp, Timestamp t, TrackMeta& meta, bool late) {
    const double speed = rp.has_velocity ? rp.speed() : 0.0;
    const auto route = route_classification(speed, config_.fotu);
    const auto* traj = tracker_.fotu().trajectory(rp.id);
    ClassifierInput input;
    if (route == ClassificationRoute::Trajectory && traj && traj->points.size() >= 2) {
      input = rasterize_trajectory(*traj);
    } else if (auto it = fallback_.find(rp.id); late && it != fallback_.end()) {
      input = it->second;
    } else {
      input = patch_input(rp, t);
    }
    input.object_id = rp.id;
    auto& npu = input.kind == InputKind::TrajectoryRaster && trajectory_classifier_ ? *trajectory_classifier_
                                                                                    : classifier_;
    const auto c = npu.classify(input);
    auto& rec = meta.record;
    rec.id = rp.id;
    rec.route = route;
    rec.input = input.kind;
    rec.label = c.label;
    rec.label_name = c.name;
    rec.confidence = c.confidence;
    rec.speed = speed;
    rec.classified_t = t;
    ++rec.invocations;
    meta.classified = true;
  }

  ClassifierInput patch_input(const RegionProposal& rp, Timestamp t) {
    if (!gray_.empty()) return extract_patch(gray_.at(t), rp.bbox, kDefaultPadRatio, rp.id);
    // Event-rendered stand-in: recent events dark on a bright background.
    GrayFrame frame{config_.geometry, t, std::vector<std::uint8_t>(config_.geometry.pixel_count(), 255)};
    for (const auto& e : recent_) {
      frame.pixels[static_cast<std::size_t>(e.y) * static_cast<std::size_t>(config_.geometry.width) +
                   static_cast<std::size_t>(e.x)] = 0;
    }
    return extract_patch(frame, rp.bbox, kDefaultPadRatio, rp.id);
  }

  void score(RunReport& r, const std::vector<GroundTruthBox>& truth) {
    r.tracking = evaluate_tracking(r.tracks, truth, config_.iou_threshold);
    std::map<int, std::vector<const GroundTruthBox*>> by_object;
    for (const auto& g : truth) by_object[g.object_id].push_back(&g);
    for (const auto& obj : r.tracking->objects) {
      const auto& samples = by_object.at(obj.object_id);
      const auto* a = samples.front();
      const auto* b = samples.back();
      double speed = 0.0;
      if (b->t > a->t) {
        speed = std::hypot(b->bbox.center_x() - a->bbox.center_x(), b->bbox.center_y() - a->bbox.center_y()) /
                (static_cast<double>(b->t - a->t) / 1e6);
      }
      r.iou_vs_speed.push_back({obj.object_id, speed, obj.track_id, obj.mean_iou,
                                static_cast<double>(obj.hits) / static_cast<double>(obj.samples)});
    }
  }

  const PipelineConfig& config_;
  HybridTracker tracker_;
  npu::Classifier classifier_;
  std::optional<npu::Classifier> trajectory_classifier_;
  GrayFrameSource gray_;
  std::deque<Event> recent_;
  std::vector<TrackUpdate> updates_;
  std::map<int, TrackMeta> meta_;
  std::map<int, ClassifierInput> fallback_;  // patch snapshot for pending tracks
  std::size_t gated_ = 0;
};

}  // namespace

RunReport run_pipeline(const PipelineConfig& config, const std::vector<Event>& events,
                       const std::vector<GroundTruthBox>& truth, const npu::Model& model,
                       const npu::Model* trajectory_model) {
  config.validate(false);
  Runner runner(config, model, trajectory_model);
  for (const auto& e : events) runner.feed(e);
  runner.finish();
  return runner.report(truth);
}

RunReport run_pipeline(const PipelineConfig& config) {
  config.validate();
  if (config.model_path.empty()) throw Error(ErrorCode::InvalidConfig, "input.model is required");
  const auto model = npu::load_model(config.model_path);
  std::optional<npu::Model> trajectory_model;
  if (!config.trajectory_model_path.empty()) trajectory_model = npu::load_model(config.trajectory_model_path);
  std::vector<Event> events;
  std::vector<GroundTruthBox> truth;
  if (!config.events_path.empty()) {
    events = read_events_file(config.events_path, config.geometry);
    if (!config.ground_truth_path.empty()) truth = read_ground_truth_file(config.ground_truth_path, config.geometry);
  } else {
    auto scene = generate_synthetic_input(config.synthetic, config.geometry, config.frame_interval);
    events = std::move(scene.events);
    truth = std::move(scene.truth);
  }
  return run_pipeline(config, events, truth, model, trajectory_model ? &*trajectory_model : nullptr);
}

}  // namespace antiuav
