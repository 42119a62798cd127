#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "busod/geometry.hpp"
#include "busod/tracking.hpp"

namespace busod::count {

enum class Direction { In, Out };

enum class CountPolicy { Baseline, DoorState, Hybrid, QueueAware };

struct RoiEvent {
    std::string camera_id;
    int local_id = 0;
    Direction direction = Direction::In;
    long frame_index = 0;
    std::int64_t resolved_time_ms = 0;
    CountPolicy policy = CountPolicy::Baseline;
};

struct DoorStateSample {
    std::int64_t time_ms = 0;
    std::string door_id;
    bool open = false;
};

struct CountingConfig {
    CountPolicy policy = CountPolicy::Baseline;
    int density_threshold = 5;        // persons
    int hysteresis_frames = 3;
    double door_close_grace_s = 2.0;
    double dedup_window_s = 3.0;
    double queue_confirm_window_s = 4.0;
};

// Step-hold door state over time; closed before the first sample.
class DoorTimeline {
public:
    DoorTimeline() = default;
    explicit DoorTimeline(std::vector<DoorStateSample> samples);
    bool open_at(std::int64_t time_ms) const;
    bool empty() const { return samples_.empty(); }

private:
    std::vector<DoorStateSample> samples_;  // time-ordered
};

// Sign changes of signed_distance(box_center, door_line) sustained for at
// least hysteresis_frames emit one event, stamped at the first frame on the
// new side. negative -> positive is In.
std::vector<RoiEvent> detect_crossings(
    const track::Tracklet& tracklet, const geom::Roi& roi,
    const CountingConfig& cfg,
    const std::function<std::int64_t(long)>& frame_time_ms);

std::vector<RoiEvent> apply_baseline(std::vector<RoiEvent> events);

std::vector<RoiEvent> apply_door_state(const std::vector<RoiEvent>& events,
                                       const DoorTimeline& door,
                                       const CountingConfig& cfg);

track::DetectorKind select_detector(int occupancy, const CountingConfig& cfg);

// Queue-aware filtering for one tracklet's events: an In needs presence in
// the queue region shortly before the crossing, an Out needs the tracklet to
// reach the queue region shortly after; door gating applies on top.
// Throws MissingQueueRegion when the ROI has no queue polygon.
std::vector<RoiEvent> apply_queue_aware(
    const std::vector<RoiEvent>& events, const track::Tracklet& tracklet,
    const geom::Roi& roi, const DoorTimeline& door, const CountingConfig& cfg,
    const std::function<std::int64_t(long)>& frame_time_ms);

// second -> (in_count, out_count)
std::map<std::int64_t, std::pair<int, int>> per_second_counts(
    const std::vector<RoiEvent>& events);

}  // namespace busod::count
