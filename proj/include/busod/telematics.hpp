#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace busod::tele {

struct TelematicsSample {
    std::int64_t time_ms = 0;
    double speed_kmh = 0.0;
    double lat = 0.0;
    double lon = 0.0;
    double odometer_km = 0.0;
    std::optional<bool> door_open;
};

struct Stop {
    std::string stop_id;
    std::string name;
    double lat = 0.0;
    double lon = 0.0;
};

struct StopRegistry {
    std::vector<Stop> stops;  // unique stop_ids
};

struct StopConfig {
    double delta_gps_m = 50.0;
    double tau_slow_kmh = 6.0;
    double min_dwell_s = 3.0;
    double merge_gap_s = 5.0;
    double zero_speed_eps_kmh = 0.5;  // 0 restores the strict halt rule
};

enum class StopKind { Official, Illegal };

struct StopEvent {
    StopKind kind = StopKind::Official;
    std::optional<std::string> stop_id;  // Official, or synthetic "ILLEGAL-k"
    std::int64_t t_start_ms = 0;
    std::int64_t t_end_ms = 0;
    double centroid_lat = 0.0;
    double centroid_lon = 0.0;
};

enum class InstantClass { OfficialStopCandidate, IllegalStopCandidate, Moving };

// Great-circle distance, Earth radius 6371008.8 m.
// Throws InputSchemaError on out-of-range coordinates.
double haversine_m(double lat1, double lon1, double lat2, double lon2);

// Throws ConfigError on an empty registry. Ties break to the smaller stop_id.
std::pair<std::string, double> nearest_stop(double lat, double lon,
                                            const StopRegistry& registry);

InstantClass classify_instant(const TelematicsSample& s,
                              const StopRegistry& registry,
                              const StopConfig& cfg, bool roi_event_now);

// Maximal same-kind candidate runs of at least min_dwell become StopEvents;
// same-kind runs closer than merge_gap merge. Official events take the modal
// nearest stop over the run; illegal ones get ids "ILLEGAL-1", "ILLEGAL-2", ...
std::vector<StopEvent> segment_stops(
    const std::vector<TelematicsSample>& samples,
    const std::vector<InstantClass>& classifications,
    const StopRegistry& registry, const StopConfig& cfg);

}  // namespace busod::tele
