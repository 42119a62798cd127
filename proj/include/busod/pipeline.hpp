#pragma once

#include <filesystem>
#include <string>

#include "busod/counting.hpp"
#include "busod/geometry.hpp"
#include "busod/odmatrix.hpp"
#include "busod/reid.hpp"
#include "busod/telematics.hpp"
#include "busod/timeline.hpp"
#include "busod/tracking.hpp"

namespace busod::pipe {

struct CameraInput {
    std::filesystem::path log;
    std::string camera_id = "camA";
    std::string door_id = "A";
    std::string segment_id;
    double fps = 25.0;
};

struct PipelineConfig {
    CameraInput cam_a, cam_b;
    std::filesystem::path door_csv;
    std::filesystem::path telematics_csv;
    std::filesystem::path stop_registry_csv;
    geom::Roi roi;  // shared scene geometry for both door cameras
    std::string overlay_format = timeline::kDefaultOverlayFormat;
    count::CountPolicy policy = count::CountPolicy::Baseline;
    track::TrackerConfig tracker;
    count::CountingConfig counting;
    reid::ReidConfig reid;
    tele::StopConfig stop_rules;
    od::OdConfig od;
    // Digest of the raw config file, recorded in the run manifest.
    std::string config_digest;
};

// Parses the JSON config file; relative paths resolve against its directory.
// Throws ConfigError / InputSchemaError on bad structure.
PipelineConfig load_config(const std::filesystem::path& path);

// Executes timeline resolution, per-camera tracking with the configured
// repair policy, crossing detection and counting policy, cross-camera
// association and de-duplication, telematics stop segmentation, journey
// building, and OD matrix construction. All artifacts are written to out_dir
// with deterministic bytes (sorted keys, fixed float precision).
void run_pipeline(const PipelineConfig& cfg,
                  const std::filesystem::path& out_dir);

// Compares a run_pipeline output directory against a simulator truth.json and
// writes eval_report.json plus eval_counts.csv into pred_dir.
void run_eval(const std::filesystem::path& pred_dir,
              const std::filesystem::path& truth_path);

}  // namespace busod::pipe
