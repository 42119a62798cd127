#include "busod/odmatrix.hpp"

#include <algorithm>
#include <cmath>

namespace busod::od {

std::optional<std::string> attribute_event_to_stop(
    const count::RoiEvent& event, const std::vector<tele::StopEvent>& stops,
    double attach_slack_s) {
    auto slack = static_cast<std::int64_t>(attach_slack_s * 1000.0);
    const tele::StopEvent* best = nullptr;
    std::int64_t best_mid_dist = 0;
    for (const tele::StopEvent& s : stops) {
        if (event.resolved_time_ms < s.t_start_ms - slack ||
            event.resolved_time_ms > s.t_end_ms + slack)
            continue;
        std::int64_t mid = (s.t_start_ms + s.t_end_ms) / 2;
        std::int64_t d = std::llabs(event.resolved_time_ms - mid);
        if (!best || d < best_mid_dist) {
            best = &s;
            best_mid_dist = d;
        }
    }
    if (!best) return std::nullopt;
    return best->stop_id;
}

std::vector<Journey> build_journeys(
    const std::map<int, std::vector<count::RoiEvent>>& events_per_identity,
    const std::vector<tele::StopEvent>& stops, const OdConfig& cfg,
    int& unmatched_boardings, int& unmatched_alightings) {
    std::vector<Journey> journeys;
    for (const auto& [gid, raw_events] : events_per_identity) {
        std::vector<count::RoiEvent> events(raw_events);
        std::stable_sort(events.begin(), events.end(),
                         [](const count::RoiEvent& a, const count::RoiEvent& b) {
                             return a.resolved_time_ms < b.resolved_time_ms;
                         });
        std::optional<Journey> open;
        for (const count::RoiEvent& ev : events) {
            auto stop = attribute_event_to_stop(ev, stops, cfg.attach_slack_s);
            if (!stop) continue;
            if (ev.direction == count::Direction::In) {
                if (open && open->alight_stop) {
                    // Completed journey followed by a re-boarding.
                    journeys.push_back(*open);
                    open.reset();
                }
                if (!open) {
                    Journey j;
                    j.global_id = gid;
                    j.board_stop = *stop;
                    j.board_time_ms = ev.resolved_time_ms;
                    open = j;
                }
                // A second In with no intervening completed Out is ignored:
                // the earliest attributed In is the boarding.
            } else {
                if (open) {
                    open->alight_stop = *stop;  // latest Out after boarding wins
                    open->alight_time_ms = ev.resolved_time_ms;
                } else {
                    ++unmatched_alightings;
                }
            }
        }
        if (open) {
            if (!open->alight_stop) ++unmatched_boardings;
            journeys.push_back(*open);
        }
    }
    return journeys;
}

OdMatrix build_matrix(const std::vector<Journey>& journeys,
                      const tele::StopRegistry& registry,
                      const std::vector<tele::StopEvent>& stops) {
    OdMatrix m;
    for (const tele::Stop& s : registry.stops) m.stop_ids.push_back(s.stop_id);
    for (const tele::StopEvent& s : stops) {
        if (s.kind == tele::StopKind::Illegal && s.stop_id)
            m.stop_ids.push_back(*s.stop_id);  // first-occurrence order
    }
    for (const Journey& j : journeys) {
        if (!j.alight_stop) continue;
        m.counts[{j.board_stop, *j.alight_stop}] += 1;
        if (j.board_stop == *j.alight_stop) ++m.same_stop_journeys;
    }
    return m;
}

}  // namespace busod::od
