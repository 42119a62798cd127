#include "busod/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "busod/assignment.hpp"
#include "busod/errors.hpp"

namespace busod::eval {

namespace {

double minmax_accuracy(long pred, long truth) {
    if (pred == 0 && truth == 0) return 1.0;
    long lo = std::min(pred, truth), hi = std::max(pred, truth);
    return hi == 0 ? 1.0 : static_cast<double>(lo) / static_cast<double>(hi);
}

// Mutual center containment, ties broken by center distance.
bool boxes_match(const geom::BoundingBox& pred, const geom::BoundingBox& truth) {
    geom::Point2 pc = geom::box_center(pred);
    geom::Point2 tc = geom::box_center(truth);
    bool pred_has_tc = tc.x >= pred.left && tc.x <= pred.right() &&
                       tc.y >= pred.top && tc.y <= pred.bottom();
    bool truth_has_pc = pc.x >= truth.left && pc.x <= truth.right() &&
                        pc.y >= truth.top && pc.y <= truth.bottom();
    return pred_has_tc && truth_has_pc;
}

double center_dist(const geom::BoundingBox& a, const geom::BoundingBox& b) {
    geom::Point2 ca = geom::box_center(a), cb = geom::box_center(b);
    return std::hypot(ca.x - cb.x, ca.y - cb.y);
}

}  // namespace

CountReport count_metrics(const std::vector<SegmentCounts>& segments) {
    CountReport r;
    r.segments = segments;
    long in_min = 0, in_max = 0, out_min = 0, out_max = 0;
    double in_abs = 0.0, out_abs = 0.0;
    for (const SegmentCounts& s : segments) {
        in_min += std::min(s.pred_in, s.truth_in);
        in_max += std::max(s.pred_in, s.truth_in);
        out_min += std::min(s.pred_out, s.truth_out);
        out_max += std::max(s.pred_out, s.truth_out);
        in_abs += std::abs(s.pred_in - s.truth_in);
        out_abs += std::abs(s.pred_out - s.truth_out);
        bool truth_any = s.truth_in + s.truth_out > 0;
        bool pred_any = s.pred_in + s.pred_out > 0;
        if (truth_any && !pred_any) ++r.complete_misses;
    }
    r.entry_accuracy = minmax_accuracy(in_min, in_max);
    r.exit_accuracy = minmax_accuracy(out_min, out_max);
    long t_min = in_min + out_min, t_max = in_max + out_max;
    r.total_accuracy = t_max == 0 ? 1.0
                                  : static_cast<double>(t_min) /
                                        static_cast<double>(t_max);
    double n = segments.empty() ? 1.0 : static_cast<double>(segments.size());
    r.entry_mae = in_abs / n;
    r.exit_mae = out_abs / n;
    return r;
}

OdComparison od_compare(const od::OdMatrix& pred, const od::OdMatrix& truth) {
    std::set<std::string> universe;
    for (const auto& s : pred.stop_ids) universe.insert(s);
    for (const auto& s : truth.stop_ids) universe.insert(s);
    for (const auto& [k, v] : pred.counts) {
        universe.insert(k.first);
        universe.insert(k.second);
    }
    for (const auto& [k, v] : truth.counts) {
        universe.insert(k.first);
        universe.insert(k.second);
    }
    OdComparison out;
    if (universe.empty()) return out;
    long cells = 0, equal = 0;
    auto get = [](const od::OdMatrix& m, const std::string& a,
                  const std::string& b) {
        auto it = m.counts.find({a, b});
        return it == m.counts.end() ? 0 : it->second;
    };
    for (const auto& a : universe) {
        for (const auto& b : universe) {
            int p = get(pred, a, b);
            int t = get(truth, a, b);
            ++cells;
            if (p == t) ++equal;
            out.l1_error += std::abs(p - t);
        }
    }
    out.exact_cell_match = static_cast<double>(equal) / static_cast<double>(cells);
    return out;
}

MotReport mot_metrics(const std::vector<track::Tracklet>& predicted,
                      const std::vector<TruthTrack>& truth) {
    if (truth.empty())
        throw MetricUnavailable("detection-level ground truth unavailable");

    // Flatten predictions: frame -> list of (local_id, box).
    std::map<long, std::vector<std::pair<int, geom::BoundingBox>>> pred_frames;
    long total_pred = 0;
    for (const track::Tracklet& t : predicted) {
        for (const track::Detection& d : t.detections) {
            pred_frames[d.frame_index].emplace_back(t.local_id, d.box);
            ++total_pred;
        }
    }
    long total_truth = 0;
    for (const TruthTrack& t : truth)
        total_truth += static_cast<long>(t.boxes.size());

    // Per-frame greedy matching by center distance among mutual-containment
    // pairs; per truth person record which predicted id matched.
    std::map<int, std::map<long, int>> match_of;  // person -> frame -> pred id
    std::map<std::pair<int, int>, long> pair_overlap;  // (person, pred) -> frames
    long tp = 0;
    std::set<long> frames;
    for (const auto& [f, v] : pred_frames) frames.insert(f);
    for (const TruthTrack& t : truth)
        for (const auto& [f, b] : t.boxes) frames.insert(f);

    for (long f : frames) {
        struct Cand {
            double dist;
            int person;
            int pred_id;
            const geom::BoundingBox* pb;
        };
        std::vector<Cand> cands;
        auto pit = pred_frames.find(f);
        if (pit != pred_frames.end()) {
            for (const TruthTrack& t : truth) {
                auto bit = t.boxes.find(f);
                if (bit == t.boxes.end()) continue;
                for (const auto& [pid, pbox] : pit->second) {
                    if (!boxes_match(pbox, bit->second)) continue;
                    cands.push_back({center_dist(pbox, bit->second), t.person_id,
                                     pid, &pbox});
                }
            }
        }
        std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            if (a.dist != b.dist) return a.dist < b.dist;
            if (a.person != b.person) return a.person < b.person;
            return a.pred_id < b.pred_id;
        });
        std::set<int> used_person, used_pred;
        for (const Cand& c : cands) {
            if (used_person.count(c.person) || used_pred.count(c.pred_id))
                continue;
            used_person.insert(c.person);
            used_pred.insert(c.pred_id);
            match_of[c.person][f] = c.pred_id;
            pair_overlap[{c.person, c.pred_id}] += 1;
            ++tp;
        }
    }

    MotReport r;
    // Identity switches and fragmentation per truth person.
    for (const TruthTrack& t : truth) {
        const auto& matches = match_of[t.person_id];
        int prev_id = -1;
        bool was_matched = false;
        bool seen = false;
        for (const auto& [f, b] : t.boxes) {
            auto it = matches.find(f);
            if (it != matches.end()) {
                if (prev_id != -1 && it->second != prev_id) ++r.id_switches;
                if (seen && !was_matched) ++r.fragmentation;
                prev_id = it->second;
                was_matched = true;
                seen = true;
            } else {
                was_matched = false;
            }
        }
    }

    // IDF1 via optimal truth <-> prediction bijection over overlap counts.
    std::vector<int> persons;
    for (const TruthTrack& t : truth) persons.push_back(t.person_id);
    std::vector<int> pred_ids;
    for (const track::Tracklet& t : predicted) pred_ids.push_back(t.local_id);
    long idtp = 0;
    if (!persons.empty() && !pred_ids.empty()) {
        long max_ov = 0;
        for (const auto& [k, v] : pair_overlap) max_ov = std::max(max_ov, v);
        assign::CostMatrix costs(persons.size(), pred_ids.size(), 0.0);
        for (std::size_t i = 0; i < persons.size(); ++i) {
            for (std::size_t j = 0; j < pred_ids.size(); ++j) {
                auto it = pair_overlap.find({persons[i], pred_ids[j]});
                long ov = it == pair_overlap.end() ? 0 : it->second;
                costs.at(i, j) = static_cast<double>(max_ov - ov);
            }
        }
        auto matches = assign::solve_assignment(costs, 2.0 * max_ov + 1.0);
        for (auto [i, j] : matches) {
            auto it = pair_overlap.find({persons[i], pred_ids[j]});
            if (it != pair_overlap.end()) idtp += it->second;
        }
    }
    r.idf1 = (total_truth + total_pred) == 0
                 ? 1.0
                 : 2.0 * static_cast<double>(idtp) /
                       static_cast<double>(total_truth + total_pred);

    long fp = total_pred - tp;
    long fn = total_truth - tp;
    r.detection_f1 = (2 * tp + fp + fn) == 0
                         ? 1.0
                         : 2.0 * static_cast<double>(tp) /
                               static_cast<double>(2 * tp + fp + fn);
    return r;
}

}  // namespace busod::eval
