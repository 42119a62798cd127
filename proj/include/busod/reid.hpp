#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "busod/assignment.hpp"
#include "busod/counting.hpp"
#include "busod/embedding.hpp"
#include "busod/tracking.hpp"

namespace busod::reid {

struct ReidConfig {
    double tau_reid = 0.6;             // cosine-distance gate
    double time_overlap_slack_s = 120; // boarding-to-alighting slack
    double dedup_window_s = 3.0;
    // Which camera owns each event direction for cross-view de-duplication.
    std::string in_owner_camera = "camA";
    std::string out_owner_camera = "camB";
};

struct GlobalIdentity {
    int global_id = 0;
    // camera_id -> tracklet local_id, at most one per camera
    std::map<std::string, int> members;
    std::vector<double> merged_embedding;  // unit vector
};

// Gated cross-camera association of per-camera tracklets. Candidate pairs are
// restricted to time-compatible tracklets (intervals overlapping or within
// the slack); unmatched tracklets become singleton identities.
std::vector<GlobalIdentity> associate_cameras(
    const std::vector<track::Tracklet>& a,
    const std::vector<track::Tracklet>& b, const ReidConfig& cfg,
    const std::function<std::int64_t(long)>& time_a,
    const std::function<std::int64_t(long)>& time_b);

// Collapses same-direction events seen by both cameras within the dedup
// window, keeping the event from the camera that owns that direction.
std::vector<count::RoiEvent> dedupe_events(
    const GlobalIdentity& identity,
    const std::vector<count::RoiEvent>& events, const ReidConfig& cfg);

using emb::cosine_distance;

}  // namespace busod::reid
