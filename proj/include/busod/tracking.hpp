#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "busod/geometry.hpp"

namespace busod::track {

enum class DetectorKind { FullBody, HeadOnly };

struct Detection {
    std::string camera_id;
    long frame_index = 0;
    geom::BoundingBox box;
    double confidence = 1.0;
    std::vector<double> embedding;
    DetectorKind kind = DetectorKind::FullBody;
};

enum class TrackState { Active, Lost, Closed };

struct Tracklet {
    int local_id = 0;
    std::string camera_id;
    std::vector<Detection> detections;  // strictly increasing frame_index
    std::vector<double> ema_embedding;  // unit norm
    std::array<double, 2> last_velocity{0.0, 0.0};  // px/frame
    TrackState state = TrackState::Active;
    long last_frame = -1;
    int miss_streak = 0;

    const Detection& first() const { return detections.front(); }
    const Detection& last() const { return detections.back(); }
    geom::Point2 last_center() const { return geom::box_center(last().box); }
    geom::Point2 first_center() const { return geom::box_center(first().box); }
};

enum class RepairPolicy { None, Ema, DoorAware, DoorAwareTrajectory };

struct TrackerConfig {
    double iou_gate = 0.1;
    double appearance_gate = 0.4;  // cosine distance
    int max_lost_frames = 25;
    double ema_alpha = 0.1;
    RepairPolicy repair_policy = RepairPolicy::None;
    int stitch_window = 50;          // frames
    double stitch_center_gate = 80;  // px
    double exclusion_iou = 0.5;
    double cost_iou_weight = 0.5;
    double door_appearance_widen = 1.5;
    double door_center_widen = 2.0;
    double ambiguity_margin = 0.05;
    int density_threshold = 5;  // occupancy at which trajectory repair engages
};

struct StitchDecision {
    int lost_id = 0;
    int candidate_id = 0;
};

// One frame of IoU+appearance assignment. Matched tracklets absorb their
// detection and update EMA/velocity; unmatched detections spawn new tracklets;
// tracklets unmatched for more than max_lost_frames become Lost.
// Throws InputSchemaError on embedding dimension mismatch.
void step_tracker(std::vector<Tracklet>& active, long frame_index,
                  const std::vector<Detection>& frame_dets,
                  const TrackerConfig& cfg, int& next_local_id);

std::optional<StitchDecision> repair_ema(
    const Tracklet& lost, std::span<const Tracklet* const> candidates,
    const TrackerConfig& cfg);

std::optional<StitchDecision> repair_door_aware(
    const Tracklet& lost, std::span<const Tracklet* const> candidates,
    const geom::Roi& door, bool door_open, const TrackerConfig& cfg);

std::optional<StitchDecision> repair_trajectory(
    const Tracklet& lost, std::span<const Tracklet* const> candidates,
    const geom::Roi& door, bool door_open, int occupancy,
    std::span<const Tracklet* const> unrelated_active, const TrackerConfig& cfg);

// Drives step_tracker plus lost-state handling and the configured repair
// policy over a per-camera frame stream.
class Tracker {
public:
    Tracker(TrackerConfig cfg, geom::Roi door_roi)
        : cfg_(cfg), door_(std::move(door_roi)) {}

    // frame_dets must all carry the given frame_index.
    void step(long frame_index, const std::vector<Detection>& frame_dets,
              bool door_open);

    // Occupancy of the door ROI after the latest step (active tracklet centers).
    int roi_occupancy() const { return occupancy_; }

    std::vector<Tracklet> finalize();
    const std::vector<Tracklet>& tracklets() const { return tracks_; }

private:
    void run_repair(long frame_index, bool door_open);

    TrackerConfig cfg_;
    geom::Roi door_;
    std::vector<Tracklet> tracks_;
    int next_id_ = 1;
    int occupancy_ = 0;
};

std::vector<double> normalized(std::span<const double> v);

}  // namespace busod::track
