#include "busod/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "busod/assignment.hpp"
#include "busod/embedding.hpp"
#include "busod/errors.hpp"

namespace busod::track {

namespace {

constexpr double kBigCost = 1e6;

double center_dist(const geom::Point2& a, const geom::Point2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

geom::BoundingBox predicted_box(const Tracklet& t, long frame_index) {
    geom::BoundingBox b = t.last().box;
    double gap = static_cast<double>(frame_index - t.last_frame);
    b.left += t.last_velocity[0] * gap;
    b.top += t.last_velocity[1] * gap;
    return b;
}

void update_on_match(Tracklet& t, const Detection& det, double alpha) {
    const Detection& prev = t.last();
    long gap = det.frame_index - prev.frame_index;
    geom::Point2 pc = geom::box_center(prev.box);
    geom::Point2 nc = geom::box_center(det.box);
    if (gap > 0) {
        t.last_velocity = {(nc.x - pc.x) / gap, (nc.y - pc.y) / gap};
    }
    std::vector<double> e = normalized(det.embedding);
    for (std::size_t i = 0; i < e.size(); ++i)
        e[i] = (1.0 - alpha) * t.ema_embedding[i] + alpha * e[i];
    t.ema_embedding = normalized(e);
    t.detections.push_back(det);
    t.last_frame = det.frame_index;
    t.miss_streak = 0;
    t.state = TrackState::Active;
}

struct RepairCandidate {
    const Tracklet* cand;
    double cost;       // cosine distance between EMA embeddings
    double cdist;      // lost last center to candidate first center
};

}  // namespace

std::vector<double> normalized(std::span<const double> v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    if (n == 0.0) throw DegenerateEmbedding("cannot normalize zero vector");
    n = std::sqrt(n);
    std::vector<double> out(v.begin(), v.end());
    for (double& x : out) x /= n;
    return out;
}

void step_tracker(std::vector<Tracklet>& active, long frame_index,
                  const std::vector<Detection>& frame_dets,
                  const TrackerConfig& cfg, int& next_local_id) {
    for (const Detection& d : frame_dets) {
        if (!active.empty() &&
            d.embedding.size() != active.front().ema_embedding.size())
            throw InputSchemaError("detection embedding dimension drift");
    }

    std::vector<Tracklet*> live;
    for (Tracklet& t : active)
        if (t.state == TrackState::Active) live.push_back(&t);

    std::vector<char> det_matched(frame_dets.size(), 0);
    if (!live.empty() && !frame_dets.empty()) {
        assign::CostMatrix costs(live.size(), frame_dets.size(), kBigCost);
        for (std::size_t i = 0; i < live.size(); ++i) {
            geom::BoundingBox pred = predicted_box(*live[i], frame_index);
            for (std::size_t j = 0; j < frame_dets.size(); ++j) {
                double ov = geom::iou(pred, frame_dets[j].box);
                double ad = emb::cosine_distance(live[i]->ema_embedding,
                                                 frame_dets[j].embedding);
                // Gated out only when both cues fail.
                if (ov < cfg.iou_gate && ad > cfg.appearance_gate) continue;
                // max() guards against -1e-16 style rounding when both cues
                // are near-perfect.
                costs.at(i, j) =
                    std::max(0.0, cfg.cost_iou_weight * (1.0 - ov) +
                                      (1.0 - cfg.cost_iou_weight) * ad);
            }
        }
        auto matches = assign::solve_assignment(costs, kBigCost / 2.0);
        std::vector<char> trk_matched(live.size(), 0);
        for (auto [r, c] : matches) {
            update_on_match(*live[r], frame_dets[c], cfg.ema_alpha);
            trk_matched[r] = 1;
            det_matched[c] = 1;
        }
        for (std::size_t i = 0; i < live.size(); ++i) {
            if (trk_matched[i]) continue;
            live[i]->miss_streak += 1;
            if (live[i]->miss_streak > cfg.max_lost_frames)
                live[i]->state = TrackState::Lost;
        }
    } else {
        for (Tracklet* t : live) {
            t->miss_streak += 1;
            if (t->miss_streak > cfg.max_lost_frames) t->state = TrackState::Lost;
        }
    }

    for (std::size_t j = 0; j < frame_dets.size(); ++j) {
        if (det_matched[j]) continue;
        Tracklet t;
        t.local_id = next_local_id++;
        t.camera_id = frame_dets[j].camera_id;
        t.detections.push_back(frame_dets[j]);
        t.ema_embedding = normalized(frame_dets[j].embedding);
        t.last_frame = frame_index;
        active.push_back(std::move(t));
    }
}

std::optional<StitchDecision> repair_ema(
    const Tracklet& lost, std::span<const Tracklet* const> candidates,
    const TrackerConfig& cfg) {
    std::vector<RepairCandidate> ok;
    for (const Tracklet* c : candidates) {
        double cost = emb::cosine_distance(lost.ema_embedding, c->ema_embedding);
        double cd = center_dist(lost.last_center(), c->first_center());
        if (cost > cfg.appearance_gate || cd > cfg.stitch_center_gate) continue;
        ok.push_back({c, cost, cd});
    }
    if (ok.empty()) return std::nullopt;
    auto best = std::min_element(ok.begin(), ok.end(), [](auto& a, auto& b) {
        if (a.cost != b.cost) return a.cost < b.cost;
        if (a.cdist != b.cdist) return a.cdist < b.cdist;
        return a.cand->local_id < b.cand->local_id;
    });
    return StitchDecision{lost.local_id, best->cand->local_id};
}

std::optional<StitchDecision> repair_door_aware(
    const Tracklet& lost, std::span<const Tracklet* const> candidates,
    const geom::Roi& door, bool door_open, const TrackerConfig& cfg) {
    std::vector<RepairCandidate> ok;
    for (const Tracklet* c : candidates) {
        double app_gate = cfg.appearance_gate;
        double ctr_gate = cfg.stitch_center_gate;
        if (door_open && geom::box_touches_roi(lost.last().box, door) &&
            geom::box_touches_roi(c->first().box, door)) {
            app_gate *= cfg.door_appearance_widen;
            ctr_gate *= cfg.door_center_widen;
        }
        double cost = emb::cosine_distance(lost.ema_embedding, c->ema_embedding);
        double cd = center_dist(lost.last_center(), c->first_center());
        if (cost > app_gate || cd > ctr_gate) continue;
        ok.push_back({c, cost, cd});
    }
    if (ok.empty()) return std::nullopt;
    std::sort(ok.begin(), ok.end(), [](auto& a, auto& b) {
        if (a.cost != b.cost) return a.cost < b.cost;
        if (a.cdist != b.cdist) return a.cdist < b.cdist;
        return a.cand->local_id < b.cand->local_id;
    });
    // Ambiguity guard: refuse near-ties between the two best candidates.
    if (ok.size() >= 2 && ok[1].cost - ok[0].cost < cfg.ambiguity_margin)
        return std::nullopt;
    return StitchDecision{lost.local_id, ok[0].cand->local_id};
}

std::optional<StitchDecision> repair_trajectory(
    const Tracklet& lost, std::span<const Tracklet* const> candidates,
    const geom::Roi& door, bool door_open, int occupancy,
    std::span<const Tracklet* const> unrelated_active,
    const TrackerConfig& cfg) {
    if (occupancy < cfg.density_threshold)
        return repair_door_aware(lost, candidates, door, door_open, cfg);

    std::vector<const Tracklet*> kept;
    for (const Tracklet* c : candidates) {
        long gap = c->first().frame_index - lost.last_frame;
        geom::Point2 pred{lost.last_center().x + lost.last_velocity[0] * gap,
                          lost.last_center().y + lost.last_velocity[1] * gap};
        if (center_dist(c->first_center(), pred) > cfg.stitch_center_gate)
            continue;
        bool conflict = false;
        for (const Tracklet* other : unrelated_active) {
            if (other->local_id == c->local_id) continue;
            if (geom::iou(c->first().box, other->last().box) > cfg.exclusion_iou) {
                conflict = true;
                break;
            }
        }
        if (!conflict) kept.push_back(c);
    }
    return repair_door_aware(lost, kept, door, door_open, cfg);
}

void Tracker::step(long frame_index, const std::vector<Detection>& frame_dets,
                   bool door_open) {
    step_tracker(tracks_, frame_index, frame_dets, cfg_, next_id_);

    occupancy_ = 0;
    for (const Tracklet& t : tracks_) {
        if (t.state != TrackState::Active || t.last_frame != frame_index) continue;
        if (geom::contains(door_.polygon, t.last_center())) ++occupancy_;
    }

    if (cfg_.repair_policy != RepairPolicy::None) run_repair(frame_index, door_open);

    // Lost tracklets out of stitch range are closed for good.
    for (Tracklet& t : tracks_) {
        if (t.state == TrackState::Lost &&
            frame_index - t.last_frame > cfg_.max_lost_frames + cfg_.stitch_window)
            t.state = TrackState::Closed;
    }
}

void Tracker::run_repair(long frame_index, bool door_open) {
    std::set<int> consumed;
    std::vector<Tracklet*> lost_list;
    for (Tracklet& t : tracks_)
        if (t.state == TrackState::Lost) lost_list.push_back(&t);
    std::sort(lost_list.begin(), lost_list.end(),
              [](auto* a, auto* b) { return a->local_id < b->local_id; });

    std::vector<StitchDecision> decisions;
    for (Tracklet* lost : lost_list) {
        std::vector<const Tracklet*> cands;
        for (const Tracklet& c : tracks_) {
            if (c.state != TrackState::Active) continue;
            if (consumed.count(c.local_id)) continue;
            long born = c.first().frame_index;
            if (born <= lost->last_frame ||
                born > lost->last_frame + cfg_.stitch_window)
                continue;
            cands.push_back(&c);
        }
        if (cands.empty()) continue;

        std::optional<StitchDecision> dec;
        switch (cfg_.repair_policy) {
            case RepairPolicy::Ema:
                dec = repair_ema(*lost, cands, cfg_);
                break;
            case RepairPolicy::DoorAware:
                dec = repair_door_aware(*lost, cands, door_, door_open, cfg_);
                break;
            case RepairPolicy::DoorAwareTrajectory: {
                std::vector<const Tracklet*> others;
                for (const Tracklet& t : tracks_)
                    if (t.state == TrackState::Active &&
                        t.local_id != lost->local_id)
                        others.push_back(&t);
                dec = repair_trajectory(*lost, cands, door_, door_open,
                                        occupancy_, others, cfg_);
                break;
            }
            case RepairPolicy::None:
                break;
        }
        if (dec) {
            consumed.insert(dec->candidate_id);
            decisions.push_back(*dec);
        }
    }

    for (const StitchDecision& dec : decisions) {
        Tracklet* lost = nullptr;
        std::size_t cand_idx = tracks_.size();
        for (std::size_t i = 0; i < tracks_.size(); ++i) {
            if (tracks_[i].local_id == dec.lost_id) lost = &tracks_[i];
            if (tracks_[i].local_id == dec.candidate_id) cand_idx = i;
        }
        Tracklet& cand = tracks_[cand_idx];
        // Candidate was born after the lost track's last sighting, so frame
        // indices stay strictly increasing.
        for (Detection& d : cand.detections)
            lost->detections.push_back(std::move(d));
        lost->ema_embedding = cand.ema_embedding;
        lost->last_velocity = cand.last_velocity;
        lost->last_frame = cand.last_frame;
        lost->miss_streak = cand.miss_streak;
        lost->state = TrackState::Active;
        tracks_.erase(tracks_.begin() + static_cast<long>(cand_idx));
    }
}

std::vector<Tracklet> Tracker::finalize() {
    for (Tracklet& t : tracks_) t.state = TrackState::Closed;
    std::sort(tracks_.begin(), tracks_.end(),
              [](const Tracklet& a, const Tracklet& b) {
                  return a.local_id < b.local_id;
              });
    return tracks_;
}

}  // namespace busod::track
