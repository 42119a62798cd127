#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "busod/geometry.hpp"

namespace busod::sim {

struct RouteStop {
    std::string stop_id;
    std::string name;
    double arrival_s = 0.0;
    double dwell_s = 20.0;
    double lat = 0.0;
    double lon = 0.0;
};

// Mid-route halt (or slow roll) away from any registered stop.
struct IllegalStopSpec {
    double at_s = 0.0;
    double dwell_s = 10.0;
    double slow_speed_kmh = 0.0;  // 0 = full halt
};

enum class OcclusionSite { None, Approach, Cross };

struct PassengerSpec {
    std::string board_stop;   // stop_id or "ILLEGAL-k"
    std::string alight_stop;  // empty = stays on board
    std::string board_door = "A";
    std::string alight_door = "B";
    OcclusionSite occlusion = OcclusionSite::None;  // applies to the boarding
    int occlusion_gap_frames = 0;
    double reappear_drift = 0.0;  // cosine distance injected after the gap
    int twin_of = -1;             // index of a passenger with a near-equal latent
};

struct Stressors {
    int loiterer_count = 0;   // oscillate across the Cam-B door line, door closed
    int standing_crowd = 0;   // static occupants inside each door ROI
    std::vector<double> modality_shift_times_s;
    double embedding_noise_sigma = 0.0;
    double min_latent_separation = 0.8;  // pairwise cosine distance
    double twin_separation = 0.08;
    std::vector<IllegalStopSpec> illegal_stops;
};

struct ScenarioConfig {
    std::uint64_t seed = 1;
    double fps = 25.0;
    double duration_s = 600.0;
    int embedding_dim = 16;
    std::int64_t start_epoch_s = 0;  // 0 = default scenario clock
    std::vector<RouteStop> route;
    std::vector<PassengerSpec> passengers;
    Stressors stressors;
    bool emit_head_stream = false;
};

ScenarioConfig scenario_from_json(const std::string& text);
std::string scenario_to_json(const ScenarioConfig& cfg);

// Shared scene geometry used by both synthetic cameras.
geom::Roi scene_roi();

// Writes cam_a.jsonl, cam_b.jsonl, door.csv, telematics.csv, stops.csv,
// truth.json and a ready-to-run pipeline_config.json into out_dir.
// Deterministic under cfg.seed. Throws ConfigError on inconsistent scripts.
void generate(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

// Internal-consistency oracle over a generated directory: every ground-truth
// crossing must be backed by log geometry, logs must match the declared truth
// tracks outside occluded spans, and frame order must be monotone.
bool replay_check(const std::filesystem::path& out_dir);

}  // namespace busod::sim
