#include <filesystem>
#include <iomanip>
#include <sstream>

#include "antiuav/error.hpp"
#include "antiuav/image_io.hpp"
#include "antiuav/pipeline.hpp"
#include "json.hpp"

namespace antiuav {

using nlohmann::ordered_json;

std::string report_json(const RunReport& r) {
  ordered_json j;
  j["gating"] = r.gating;
  j["events"] = r.events;
  j["frames_built"] = r.frames_built;
  j["commits"] = r.commits;
  j["matched_events"] = r.matched_events;
  j["tracks_created"] = r.tracks_created;
  j["tracks_retired"] = r.tracks_retired;
  j["dropped_components"] = r.dropped_components;
  j["unmonitored_tracks"] = r.unmonitored_tracks;

  auto& npu = j["npu"];
  npu["invocations"] = r.npu_invocations;
  npu["invocations_gated"] = r.invocations_gated;
  npu["invocations_ungated"] = r.invocations_ungated;
  npu["reduction"] = r.reduction;
  npu["cycles"] = r.npu_cycles;
  npu["macs"] = {{"dense", r.macs.dense},
                 {"executed", r.macs.executed},
                 {"skipped", r.macs.skipped},
                 {"waves", r.macs.waves},
                 {"dense_waves", r.macs.dense_waves}};

  j["objects"] = ordered_json::array();
  for (const auto& o : r.objects) {
    j["objects"].push_back({{"id", o.id},
                            {"route", to_string(o.route)},
                            {"input", to_string(o.input)},
                            {"label", o.label_name},
                            {"confidence", o.confidence},
                            {"invocations", o.invocations},
                            {"speed", o.speed},
                            {"classified_t", o.classified_t}});
  }

  if (r.tracking) {
    const auto& s = *r.tracking;
    ordered_json t{{"iou_threshold", s.iou_threshold},
                   {"samples", s.samples},
                   {"hits", s.hits},
                   {"accuracy", s.accuracy},
                   {"mean_iou", s.mean_iou}};
    t["objects"] = ordered_json::array();
    for (const auto& o : s.objects) {
      t["objects"].push_back({{"object_id", o.object_id},
                              {"track_id", o.track_id},
                              {"samples", o.samples},
                              {"hits", o.hits},
                              {"mean_iou", o.mean_iou}});
    }
    j["tracking"] = std::move(t);
  } else {
    j["tracking"] = nullptr;
  }
  j["trajectories"] = r.trajectories.size();
  return j.dump(2) + "\n";
}

std::string tracks_csv(const RunReport& r) { return serialize_track_rows(r.tracks); }

std::string trajectories_csv(const RunReport& r) {
  std::ostringstream out;
  out << "object_id,t,cx,cy\n";
  for (const auto& traj : r.trajectories) {
    for (const auto& p : traj.points) out << traj.object_id << ',' << p.t << ',' << p.cx << ',' << p.cy << '\n';
  }
  return out.str();
}

std::string iou_vs_speed_csv(const RunReport& r) {
  std::ostringstream out;
  out << "object_id,speed,track_id,mean_iou,accuracy\n" << std::fixed << std::setprecision(6);
  for (const auto& s : r.iou_vs_speed) {
    out << s.object_id << ',' << s.speed << ',' << s.track_id << ',' << s.mean_iou << ',' << s.accuracy << '\n';
  }
  return out.str();
}

void report_metrics(const RunReport& report, const std::string& output_dir) {
  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + output_dir + "': " + ec.message());
  const std::filesystem::path dir(output_dir);
  write_file((dir / "report.json").string(), report_json(report));
  write_file((dir / "tracks.csv").string(), tracks_csv(report));
  write_file((dir / "trajectories.csv").string(), trajectories_csv(report));
  write_file((dir / "iou_vs_speed.csv").string(), iou_vs_speed_csv(report));
}

}  // namespace antiuav
