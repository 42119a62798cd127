#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace busod::timeline {

struct VideoMeta {
    double fps = 25.0;
    std::string camera_id;
    std::string segment_id;
};

struct FrameStamp {
    long frame_index = 0;
    std::string overlay;  // "YYYY-MM-DD HH:MM:SS"
    std::optional<std::int64_t> resolved_time_ms;
};

inline constexpr const char* kDefaultOverlayFormat = "%Y-%m-%d %H:%M:%S";

// Parses a recorder overlay string into epoch seconds (UTC).
// Throws OcrParseError on malformed input.
std::int64_t parse_overlay(const std::string& s,
                           const std::string& format = kDefaultOverlayFormat);

// Fills resolved_time_ms for every frame. Each run of identical overlay
// seconds is anchored at its first frame; offsets within a run follow
// round(1000 * k / fps). Unparseable overlays inherit the surrounding run.
// Throws TimelineUnresolvable when no overlay parses, ClockInconsistency when
// overlay seconds run backwards by more than one second.
std::vector<FrameStamp> resolve_timeline(std::vector<FrameStamp> stamps,
                                         const VideoMeta& meta,
                                         const std::string& format = kDefaultOverlayFormat);

// Inverse of parse_overlay for the default format.
std::string format_overlay(std::int64_t epoch_s);

// floor(ms / 1000) bucketing; insertion order preserved within a bucket.
template <typename T>
std::map<std::int64_t, std::vector<T>> bucket_events(
    const std::vector<std::pair<std::int64_t, T>>& events) {
    std::map<std::int64_t, std::vector<T>> out;
    for (const auto& [ms, payload] : events) {
        std::int64_t sec = ms >= 0 ? ms / 1000 : (ms - 999) / 1000;
        out[sec].push_back(payload);
    }
    return out;
}

}  // namespace busod::timeline
