#include "busod/counting.hpp"

#include <algorithm>

#include "busod/errors.hpp"
#include "busod/timeline.hpp"

namespace busod::count {

DoorTimeline::DoorTimeline(std::vector<DoorStateSample> samples)
    : samples_(std::move(samples)) {
    std::stable_sort(samples_.begin(), samples_.end(),
                     [](const DoorStateSample& a, const DoorStateSample& b) {
                         return a.time_ms < b.time_ms;
                     });
}

bool DoorTimeline::open_at(std::int64_t time_ms) const {
    bool open = false;  // closed before the first sample
    for (const DoorStateSample& s : samples_) {
        if (s.time_ms > time_ms) break;
        open = s.open;
    }
    return open;
}

std::vector<RoiEvent> detect_crossings(
    const track::Tracklet& tracklet, const geom::Roi& roi,
    const CountingConfig& cfg,
    const std::function<std::int64_t(long)>& frame_time_ms) {
    std::vector<RoiEvent> events;
    const auto& dets = tracklet.detections;
    if (dets.size() < 2) return events;

    auto emit = [&](int new_side, std::size_t at) {
        RoiEvent ev;
        ev.camera_id = tracklet.camera_id;
        ev.local_id = tracklet.local_id;
        ev.direction = new_side > 0 ? Direction::In : Direction::Out;
        ev.frame_index = dets[at].frame_index;
        ev.resolved_time_ms = frame_time_ms(ev.frame_index);
        ev.policy = cfg.policy;
        events.push_back(ev);
    };

    int side = 0;           // -1 exterior, +1 interior, 0 not yet known
    int pending_count = 0;  // consecutive frames on the opposite side
    std::size_t pending_start = 0;
    for (std::size_t i = 0; i < dets.size(); ++i) {
        double d = geom::signed_distance(geom::box_center(dets[i].box),
                                         roi.door_line);
        int s = d > 0 ? 1 : (d < 0 ? -1 : 0);
        if (s == 0) continue;  // on the line: no side change yet
        if (side == 0) {
            side = s;
            continue;
        }
        if (s == side) {
            pending_count = 0;
            continue;
        }
        if (pending_count == 0) pending_start = i;
        ++pending_count;
        if (pending_count >= cfg.hysteresis_frames) {
            emit(s, pending_start);
            side = s;
            pending_count = 0;
        }
    }
    // A crossing still pending when the track ends is confirmed: the person
    // left the camera on the new side, so the run could not flicker back.
    if (pending_count > 0) emit(-side, pending_start);
    return events;
}

std::vector<RoiEvent> apply_baseline(std::vector<RoiEvent> events) {
    return events;
}

std::vector<RoiEvent> apply_door_state(const std::vector<RoiEvent>& events,
                                       const DoorTimeline& door,
                                       const CountingConfig& cfg) {
    (void)cfg;  // the closure grace suppresses, so "door open at event time"
                // is the whole rule
    std::vector<RoiEvent> kept;
    for (const RoiEvent& ev : events)
        if (door.open_at(ev.resolved_time_ms)) kept.push_back(ev);
    return kept;
}

track::DetectorKind select_detector(int occupancy, const CountingConfig& cfg) {
    return occupancy > cfg.density_threshold ? track::DetectorKind::HeadOnly
                                             : track::DetectorKind::FullBody;
}

std::vector<RoiEvent> apply_queue_aware(
    const std::vector<RoiEvent>& events, const track::Tracklet& tracklet,
    const geom::Roi& roi, const DoorTimeline& door, const CountingConfig& cfg,
    const std::function<std::int64_t(long)>& frame_time_ms) {
    if (!roi.queue_region)
        throw MissingQueueRegion("queue_aware policy needs a queue_region");
    const auto& queue = *roi.queue_region;
    std::int64_t window_ms =
        static_cast<std::int64_t>(cfg.queue_confirm_window_s * 1000.0);

    auto in_queue_between = [&](std::int64_t lo, std::int64_t hi) {
        for (const track::Detection& d : tracklet.detections) {
            std::int64_t t = frame_time_ms(d.frame_index);
            if (t < lo || t > hi) continue;
            if (geom::contains(queue, geom::box_center(d.box))) return true;
        }
        return false;
    };

    std::vector<RoiEvent> kept;
    for (const RoiEvent& ev : events) {
        if (!door.open_at(ev.resolved_time_ms)) continue;
        bool ok = ev.direction == Direction::In
                      ? in_queue_between(ev.resolved_time_ms - window_ms,
                                         ev.resolved_time_ms)
                      : in_queue_between(ev.resolved_time_ms,
                                         ev.resolved_time_ms + window_ms);
        if (ok) kept.push_back(ev);
    }
    return kept;
}

std::map<std::int64_t, std::pair<int, int>> per_second_counts(
    const std::vector<RoiEvent>& events) {
    std::vector<std::pair<std::int64_t, Direction>> keyed;
    keyed.reserve(events.size());
    for (const RoiEvent& ev : events)
        keyed.emplace_back(ev.resolved_time_ms, ev.direction);
    auto buckets = timeline::bucket_events(keyed);
    std::map<std::int64_t, std::pair<int, int>> out;
    for (const auto& [sec, dirs] : buckets) {
        auto& [in_n, out_n] = out[sec];
        for (Direction d : dirs)
            (d == Direction::In ? in_n : out_n) += 1;
    }
    return out;
}

}  // namespace busod::count
