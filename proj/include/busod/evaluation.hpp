#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "busod/geometry.hpp"
#include "busod/odmatrix.hpp"
#include "busod/tracking.hpp"

namespace busod::eval {

struct SegmentCounts {
    std::string segment_id;  // e.g. "camA"
    int pred_in = 0, truth_in = 0;
    int pred_out = 0, truth_out = 0;
};

struct CountReport {
    double entry_accuracy = 1.0;
    double exit_accuracy = 1.0;
    double total_accuracy = 1.0;
    double entry_mae = 0.0;
    double exit_mae = 0.0;
    int complete_misses = 0;
    std::vector<SegmentCounts> segments;
};

struct MotReport {
    int id_switches = 0;
    int fragmentation = 0;
    double idf1 = 1.0;
    double detection_f1 = 1.0;
};

// Per-door accuracy uses the min/max form: min(pred,truth)/max(pred,truth),
// 1.0 when both are zero, 0.0 when truth is zero and pred positive. Aggregate
// accuracy is sum(min)/sum(max) over segments. A complete miss is a segment
// with zero predictions against nonzero truth.
CountReport count_metrics(const std::vector<SegmentCounts>& segments);

struct OdComparison {
    double exact_cell_match = 1.0;
    int l1_error = 0;
};

OdComparison od_compare(const od::OdMatrix& pred, const od::OdMatrix& truth);

// One ground-truth person's boxes in one camera.
struct TruthTrack {
    int person_id = 0;
    std::string camera_id;
    std::map<long, geom::BoundingBox> boxes;  // frame -> box
};

// Throws MetricUnavailable when truth is empty.
MotReport mot_metrics(const std::vector<track::Tracklet>& predicted,
                      const std::vector<TruthTrack>& truth);

}  // namespace busod::eval
