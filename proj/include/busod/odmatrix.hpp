#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "busod/counting.hpp"
#include "busod/telematics.hpp"

namespace busod::od {

struct OdConfig {
    double attach_slack_s = 10.0;
};

struct Journey {
    int global_id = 0;
    std::string board_stop;
    std::optional<std::string> alight_stop;
    std::int64_t board_time_ms = 0;
    std::int64_t alight_time_ms = 0;
};

struct OdMatrix {
    // Registry stops in registry order, then illegal ids by first occurrence.
    std::vector<std::string> stop_ids;
    std::map<std::pair<std::string, std::string>, int> counts;
    int unmatched_boardings = 0;
    int unmatched_alightings = 0;
    int same_stop_journeys = 0;

    int total_mass() const {
        int s = 0;
        for (const auto& [k, v] : counts) s += v;
        return s;
    }
};

// Stop event whose padded window contains the event time; overlapping
// candidates resolve to the nearest interval midpoint.
std::optional<std::string> attribute_event_to_stop(
    const count::RoiEvent& event, const std::vector<tele::StopEvent>& stops,
    double attach_slack_s);

// events_per_identity must already be cross-camera de-duplicated.
std::vector<Journey> build_journeys(
    const std::map<int, std::vector<count::RoiEvent>>& events_per_identity,
    const std::vector<tele::StopEvent>& stops, const OdConfig& cfg,
    int& unmatched_boardings, int& unmatched_alightings);

OdMatrix build_matrix(const std::vector<Journey>& journeys,
                      const tele::StopRegistry& registry,
                      const std::vector<tele::StopEvent>& stops);

}  // namespace busod::od
