#include "busod/timeline.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <iomanip>
#include <limits>
#include <sstream>

#include "busod/errors.hpp"

namespace busod::timeline {

namespace {

// Howard Hinnant's days-from-civil; avoids timezone-dependent mktime.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    unsigned yoe = static_cast<unsigned>(y - era * 400);
    unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

int days_in_month(int y, int m) {
    static const int d[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && ((y % 4 == 0 && y % 100 != 0) || y % 400 == 0)) return 29;
    return d[m - 1];
}

std::int64_t civil_to_epoch(int y, int mo, int d, int h, int mi, int s) {
    return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

bool parse_default(const std::string& s, std::int64_t& out) {
    if (s.size() != 19) return false;
    for (size_t i = 0; i < 19; ++i) {
        char c = s[i];
        if (i == 4 || i == 7) {
            if (c != '-') return false;
        } else if (i == 10) {
            if (c != ' ') return false;
        } else if (i == 13 || i == 16) {
            if (c != ':') return false;
        } else if (c < '0' || c > '9') {
            return false;
        }
    }
    int y = std::stoi(s.substr(0, 4));
    int mo = std::stoi(s.substr(5, 2));
    int d = std::stoi(s.substr(8, 2));
    int h = std::stoi(s.substr(11, 2));
    int mi = std::stoi(s.substr(14, 2));
    int sec = std::stoi(s.substr(17, 2));
    if (mo < 1 || mo > 12 || d < 1 || d > days_in_month(y, mo)) return false;
    if (h > 23 || mi > 59 || sec > 59) return false;
    out = civil_to_epoch(y, mo, d, h, mi, sec);
    return true;
}

// Inverse of days_from_civil.
void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    unsigned doe = static_cast<unsigned>(z - era * 146097);
    unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

}  // namespace

std::string format_overlay(std::int64_t epoch_s) {
    std::int64_t days = epoch_s >= 0 ? epoch_s / 86400 : (epoch_s - 86399) / 86400;
    int sod = static_cast<int>(epoch_s - days * 86400);
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d", y, m, d,
                  sod / 3600, (sod / 60) % 60, sod % 60);
    return buf;
}

std::int64_t parse_overlay(const std::string& s, const std::string& format) {
    if (format == kDefaultOverlayFormat) {
        std::int64_t out;
        if (!parse_default(s, out)) throw OcrParseError(s);
        return out;
    }
    std::tm tm{};
    std::istringstream iss(s);
    iss >> std::get_time(&tm, format.c_str());
    if (iss.fail()) throw OcrParseError(s);
    return civil_to_epoch(tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                          tm.tm_hour, tm.tm_min, tm.tm_sec);
}

std::vector<FrameStamp> resolve_timeline(std::vector<FrameStamp> stamps,
                                         const VideoMeta& meta,
                                         const std::string& format) {
    if (meta.fps <= 0.0) throw ConfigError("fps must be positive");
    if (stamps.empty()) return stamps;

    std::vector<std::optional<std::int64_t>> parsed(stamps.size());
    size_t first_ok = stamps.size();
    for (size_t i = 0; i < stamps.size(); ++i) {
        try {
            parsed[i] = parse_overlay(stamps[i].overlay, format);
            if (first_ok == stamps.size()) first_ok = i;
        } catch (const OcrParseError&) {
            parsed[i] = std::nullopt;
        }
    }
    if (first_ok == stamps.size())
        throw TimelineUnresolvable("no parseable overlay in segment " +
                                   meta.segment_id);

    // Anchor runs of identical overlay seconds at their first frame.
    long anchor_frame = stamps[first_ok].frame_index;
    std::int64_t anchor_sec = *parsed[first_ok];
    std::int64_t prev_ms = std::numeric_limits<std::int64_t>::min();
    for (size_t i = 0; i < stamps.size(); ++i) {
        if (parsed[i]) {
            std::int64_t sec = *parsed[i];
            if (sec < anchor_sec - 1)
                throw ClockInconsistency(
                    "overlay time runs backwards at frame " +
                    std::to_string(stamps[i].frame_index));
            if (sec > anchor_sec) {
                anchor_sec = sec;
                anchor_frame = stamps[i].frame_index;
            }
            // sec == anchor_sec or a one-second misread: stay in the run.
        }
        double off = 1000.0 * (stamps[i].frame_index - anchor_frame) / meta.fps;
        std::int64_t ms = anchor_sec * 1000 + std::llround(off);
        if (ms <= prev_ms) ms = prev_ms + 1;  // keep strictly increasing
        stamps[i].resolved_time_ms = ms;
        prev_ms = ms;
    }
    return stamps;
}

}  // namespace busod::timeline
