#include "busod/telematics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "busod/errors.hpp"

namespace busod::tele {

namespace {

constexpr double kEarthRadiusM = 6371008.8;
constexpr double kDegToRad = M_PI / 180.0;

}  // namespace

double haversine_m(double lat1, double lon1, double lat2, double lon2) {
    if (std::abs(lat1) > 90.0 || std::abs(lat2) > 90.0 ||
        std::abs(lon1) > 180.0 || std::abs(lon2) > 180.0)
        throw InputSchemaError("latitude/longitude out of range");
    double phi1 = lat1 * kDegToRad, phi2 = lat2 * kDegToRad;
    double dphi = (lat2 - lat1) * kDegToRad;
    double dlam = (lon2 - lon1) * kDegToRad;
    double sp = std::sin(dphi / 2.0), sl = std::sin(dlam / 2.0);
    double a = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
    a = std::clamp(a, 0.0, 1.0);
    return 2.0 * kEarthRadiusM * std::asin(std::sqrt(a));
}

std::pair<std::string, double> nearest_stop(double lat, double lon,
                                            const StopRegistry& registry) {
    if (registry.stops.empty())
        throw ConfigError("stop registry is empty");
    const Stop* best = nullptr;
    double best_d = 0.0;
    for (const Stop& s : registry.stops) {
        double d = haversine_m(lat, lon, s.lat, s.lon);
        if (!best || d < best_d || (d == best_d && s.stop_id < best->stop_id)) {
            best = &s;
            best_d = d;
        }
    }
    return {best->stop_id, best_d};
}

InstantClass classify_instant(const TelematicsSample& s,
                              const StopRegistry& registry,
                              const StopConfig& cfg, bool roi_event_now) {
    bool halted = s.speed_kmh <= cfg.zero_speed_eps_kmh;
    if (halted) {
        auto [id, dist] = nearest_stop(s.lat, s.lon, registry);
        return dist <= cfg.delta_gps_m ? InstantClass::OfficialStopCandidate
                                       : InstantClass::IllegalStopCandidate;
    }
    bool slow = s.speed_kmh < cfg.tau_slow_kmh;
    bool door = s.door_open.value_or(false);
    if (slow && door && roi_event_now) return InstantClass::IllegalStopCandidate;
    return InstantClass::Moving;
}

std::vector<StopEvent> segment_stops(
    const std::vector<TelematicsSample>& samples,
    const std::vector<InstantClass>& classifications,
    const StopRegistry& registry, const StopConfig& cfg) {
    if (samples.size() != classifications.size())
        throw InputSchemaError("classification list not aligned to samples");

    struct Run {
        StopKind kind;
        std::size_t first, last;  // sample indices, inclusive
    };
    std::vector<Run> runs;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (classifications[i] == InstantClass::Moving) continue;
        StopKind k = classifications[i] == InstantClass::OfficialStopCandidate
                         ? StopKind::Official
                         : StopKind::Illegal;
        if (!runs.empty() && runs.back().kind == k && runs.back().last + 1 == i) {
            runs.back().last = i;
        } else {
            runs.push_back({k, i, i});
        }
    }

    // Merge same-kind runs separated by less than merge_gap.
    auto gap_ms = static_cast<std::int64_t>(cfg.merge_gap_s * 1000.0);
    std::vector<Run> merged;
    for (const Run& r : runs) {
        if (!merged.empty() && merged.back().kind == r.kind &&
            samples[r.first].time_ms - samples[merged.back().last].time_ms <
                gap_ms) {
            merged.back().last = r.last;
        } else {
            merged.push_back(r);
        }
    }

    auto dwell_ms = static_cast<std::int64_t>(cfg.min_dwell_s * 1000.0);
    std::vector<StopEvent> events;
    int illegal_counter = 0;
    for (const Run& r : merged) {
        std::int64_t t0 = samples[r.first].time_ms;
        std::int64_t t1 = samples[r.last].time_ms;
        if (t1 - t0 < dwell_ms) continue;
        StopEvent ev;
        ev.kind = r.kind;
        ev.t_start_ms = t0;
        ev.t_end_ms = t1;
        double lat = 0.0, lon = 0.0;
        std::size_t n = 0;
        std::map<std::string, int> votes;
        for (std::size_t i = r.first; i <= r.last; ++i) {
            lat += samples[i].lat;
            lon += samples[i].lon;
            ++n;
            if (r.kind == StopKind::Official)
                votes[nearest_stop(samples[i].lat, samples[i].lon, registry)
                          .first] += 1;
        }
        ev.centroid_lat = lat / static_cast<double>(n);
        ev.centroid_lon = lon / static_cast<double>(n);
        if (r.kind == StopKind::Official) {
            // Modal nearest stop; std::map order makes ties deterministic.
            std::string best;
            int best_n = -1;
            for (const auto& [id, cnt] : votes) {
                if (cnt > best_n) {
                    best = id;
                    best_n = cnt;
                }
            }
            ev.stop_id = best;
        } else {
            ev.stop_id = "ILLEGAL-" + std::to_string(++illegal_counter);
        }
        events.push_back(std::move(ev));
    }
    return events;
}

}  // namespace busod::tele
