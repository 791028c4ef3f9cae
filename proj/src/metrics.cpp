#include "antiuav/metrics.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "antiuav/error.hpp"

namespace antiuav {

double compute_iou(const Box& a, const Box& b) {
  if (!a.valid() || !b.valid() || !a.intersects(b)) return 0.0;
  const Box inter{std::max(a.x_min, b.x_min), std::max(a.y_min, b.y_min), std::min(a.x_max, b.x_max),
                  std::min(a.y_max, b.y_max)};
  const auto i = inter.area();
  return static_cast<double>(i) / static_cast<double>(a.area() + b.area() - i);
}

namespace {

using Rows = std::vector<TrackResultRow>;

const TrackResultRow& nearest(const Rows& rows, Timestamp t) {
  auto it = std::lower_bound(rows.begin(), rows.end(), t, [](const auto& r, Timestamp v) { return r.t < v; });
  if (it == rows.end()) return rows.back();
  if (it == rows.begin()) return *it;
  const auto prev = std::prev(it);
  return (t - prev->t <= it->t - t) ? *prev : *it;
}

double pair_score(const Rows& rows, const std::vector<GroundTruthBox>& samples) {
  double sum = 0.0;
  for (const auto& s : samples) sum += compute_iou(nearest(rows, s.t).bbox, s.bbox);
  return sum / static_cast<double>(samples.size());
}

}  // namespace

TrackingScore evaluate_tracking(const std::vector<TrackResultRow>& results,
                                const std::vector<GroundTruthBox>& truth, double iou_threshold) {
  if (truth.empty()) throw Error(ErrorCode::NoGroundTruth, "ground truth is empty");

  std::map<int, Rows> tracks;
  for (const auto& r : results) tracks[r.object_id].push_back(r);
  for (auto& [id, rows] : tracks) {
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  }
  std::map<int, std::vector<GroundTruthBox>> objects;
  for (const auto& g : truth) objects[g.object_id].push_back(g);

  std::vector<std::tuple<double, int, int>> pairs;  // (score, object, track)
  for (const auto& [oid, samples] : objects) {
    for (const auto& [tid, rows] : tracks) {
      const double s = pair_score(rows, samples);
      if (s > 0.0) pairs.emplace_back(s, oid, tid);
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    return std::tie(std::get<1>(a), std::get<2>(a)) < std::tie(std::get<1>(b), std::get<2>(b));
  });
  std::map<int, int> assigned;
  std::map<int, bool> taken;
  for (const auto& [s, oid, tid] : pairs) {
    if (assigned.contains(oid) || taken[tid]) continue;
    assigned[oid] = tid;
    taken[tid] = true;
  }

  TrackingScore score;
  score.iou_threshold = iou_threshold;
  double iou_sum = 0.0;
  for (const auto& [oid, samples] : objects) {
    ObjectScore obj;
    obj.object_id = oid;
    obj.samples = samples.size();
    double sum = 0.0;
    if (auto it = assigned.find(oid); it != assigned.end()) {
      obj.track_id = it->second;
      const auto& rows = tracks.at(it->second);
      for (const auto& s : samples) {
        const double iou = compute_iou(nearest(rows, s.t).bbox, s.bbox);
        sum += iou;
        if (iou >= iou_threshold) ++obj.hits;
      }
    }
    obj.mean_iou = sum / static_cast<double>(samples.size());
    score.samples += obj.samples;
    score.hits += obj.hits;
    iou_sum += sum;
    score.objects.push_back(obj);
  }
  score.accuracy = static_cast<double>(score.hits) / static_cast<double>(score.samples);
  score.mean_iou = iou_sum / static_cast<double>(score.samples);
  return score;
}

}  // namespace antiuav
