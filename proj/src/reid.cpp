#include "busod/reid.hpp"

#include <algorithm>
#include <cmath>

#include "busod/errors.hpp"

namespace busod::reid {

namespace {

constexpr double kBigCost = 1e6;

struct Interval {
    std::int64_t lo, hi;
};

Interval tracklet_interval(const track::Tracklet& t,
                           const std::function<std::int64_t(long)>& time) {
    return {time(t.first().frame_index), time(t.last().frame_index)};
}

bool time_compatible(const Interval& x, const Interval& y, double slack_s) {
    auto slack = static_cast<std::int64_t>(slack_s * 1000.0);
    return x.lo <= y.hi + slack && y.lo <= x.hi + slack;
}

}  // namespace

std::vector<GlobalIdentity> associate_cameras(
    const std::vector<track::Tracklet>& a,
    const std::vector<track::Tracklet>& b, const ReidConfig& cfg,
    const std::function<std::int64_t(long)>& time_a,
    const std::function<std::int64_t(long)>& time_b) {
    // Deterministic row/col order: ascending local id.
    std::vector<const track::Tracklet*> ra, rb;
    for (const auto& t : a) ra.push_back(&t);
    for (const auto& t : b) rb.push_back(&t);
    auto by_id = [](const track::Tracklet* x, const track::Tracklet* y) {
        return x->local_id < y->local_id;
    };
    std::sort(ra.begin(), ra.end(), by_id);
    std::sort(rb.begin(), rb.end(), by_id);

    assign::CostMatrix costs(ra.size(), rb.size(), kBigCost);
    for (std::size_t i = 0; i < ra.size(); ++i) {
        Interval ia = tracklet_interval(*ra[i], time_a);
        for (std::size_t j = 0; j < rb.size(); ++j) {
            Interval ib = tracklet_interval(*rb[j], time_b);
            if (!time_compatible(ia, ib, cfg.time_overlap_slack_s)) continue;
            costs.at(i, j) = emb::cosine_distance(ra[i]->ema_embedding,
                                                  rb[j]->ema_embedding);
        }
    }
    auto matches = assign::solve_assignment(costs, cfg.tau_reid);

    std::vector<GlobalIdentity> out;
    std::vector<char> a_used(ra.size(), 0), b_used(rb.size(), 0);
    int next_id = 1;
    for (auto [i, j] : matches) {
        GlobalIdentity g;
        g.global_id = next_id++;
        g.members[ra[i]->camera_id] = ra[i]->local_id;
        g.members[rb[j]->camera_id] = rb[j]->local_id;
        std::vector<double> merged(ra[i]->ema_embedding);
        for (std::size_t k = 0; k < merged.size(); ++k)
            merged[k] = (merged[k] + rb[j]->ema_embedding[k]) / 2.0;
        g.merged_embedding = track::normalized(merged);
        out.push_back(std::move(g));
        a_used[static_cast<std::size_t>(i)] = 1;
        b_used[static_cast<std::size_t>(j)] = 1;
    }
    for (std::size_t i = 0; i < ra.size(); ++i) {
        if (a_used[i]) continue;
        GlobalIdentity g;
        g.global_id = next_id++;
        g.members[ra[i]->camera_id] = ra[i]->local_id;
        g.merged_embedding = ra[i]->ema_embedding;
        out.push_back(std::move(g));
    }
    for (std::size_t j = 0; j < rb.size(); ++j) {
        if (b_used[j]) continue;
        GlobalIdentity g;
        g.global_id = next_id++;
        g.members[rb[j]->camera_id] = rb[j]->local_id;
        g.merged_embedding = rb[j]->ema_embedding;
        out.push_back(std::move(g));
    }
    return out;
}

std::vector<count::RoiEvent> dedupe_events(
    const GlobalIdentity& identity,
    const std::vector<count::RoiEvent>& events, const ReidConfig& cfg) {
    std::vector<count::RoiEvent> sorted(events);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const count::RoiEvent& x, const count::RoiEvent& y) {
                         return x.resolved_time_ms < y.resolved_time_ms;
                     });
    auto window = static_cast<std::int64_t>(cfg.dedup_window_s * 1000.0);
    std::vector<char> drop(sorted.size(), 0);
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (drop[i]) continue;
        for (std::size_t j = i + 1; j < sorted.size(); ++j) {
            if (drop[j]) continue;
            if (sorted[j].resolved_time_ms - sorted[i].resolved_time_ms > window)
                break;
            if (sorted[j].direction != sorted[i].direction) continue;
            if (sorted[j].camera_id == sorted[i].camera_id) continue;
            // Same direction from both views within the window: keep the view
            // that owns this door role.
            const std::string& owner = sorted[i].direction == count::Direction::In
                                           ? cfg.in_owner_camera
                                           : cfg.out_owner_camera;
            if (sorted[i].camera_id == owner) {
                drop[j] = 1;
            } else if (sorted[j].camera_id == owner) {
                drop[i] = 1;
            } else {
                drop[j] = 1;  // neither owns the role: keep the earlier one
            }
        }
    }
    (void)identity;
    std::vector<count::RoiEvent> kept;
    for (std::size_t i = 0; i < sorted.size(); ++i)
        if (!drop[i]) kept.push_back(sorted[i]);
    return kept;
}

}  // namespace busod::reid
