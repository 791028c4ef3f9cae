#pragma once

#include <cstddef>
#include <vector>

#include "antiuav/box.hpp"
#include "antiuav/event_io.hpp"
#include "antiuav/tracker.hpp"

namespace antiuav {

// |A ∩ B| / |A ∪ B| over inclusive pixel areas; 0 for invalid boxes.
double compute_iou(const Box& a, const Box& b);

struct ObjectScore {
  int object_id = 0;
  int track_id = -1;  // -1 when no track was assigned
  std::size_t samples = 0;
  std::size_t hits = 0;  // samples with IoU >= threshold
  double mean_iou = 0.0;
};

struct TrackingScore {
  double iou_threshold = 0.0;
  std::size_t samples = 0;
  std::size_t hits = 0;
  double accuracy = 0.0;  // hits / samples
  double mean_iou = 0.0;
  std::vector<ObjectScore> objects;  // ascending object id
};

// Each ground-truth object is paired with at most one track (greedy on mean
// IoU, one-to-one). Every ground-truth sample is scored against the assigned
// track's temporally nearest row, ties going to the earlier row.
// Throws NoGroundTruth.
TrackingScore evaluate_tracking(const std::vector<TrackResultRow>& results,
                                const std::vector<GroundTruthBox>& truth, double iou_threshold);

}  // namespace antiuav
