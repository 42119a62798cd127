#include "busod/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "busod/errors.hpp"
#include "busod/evaluation.hpp"
#include "busod/io.hpp"

namespace busod::pipe {

namespace {

using nlohmann::json;

count::CountPolicy policy_from_string(const std::string& s) {
    if (s == "baseline") return count::CountPolicy::Baseline;
    if (s == "door_state") return count::CountPolicy::DoorState;
    if (s == "hybrid") return count::CountPolicy::Hybrid;
    if (s == "queue_aware") return count::CountPolicy::QueueAware;
    throw ConfigError("unknown counting policy: " + s);
}

track::RepairPolicy repair_from_string(const std::string& s) {
    if (s == "none") return track::RepairPolicy::None;
    if (s == "ema") return track::RepairPolicy::Ema;
    if (s == "door") return track::RepairPolicy::DoorAware;
    if (s == "door_traj") return track::RepairPolicy::DoorAwareTrajectory;
    throw ConfigError("unknown repair policy: " + s);
}

std::string policy_name(count::CountPolicy p) {
    switch (p) {
        case count::CountPolicy::Baseline: return "baseline";
        case count::CountPolicy::DoorState: return "door_state";
        case count::CountPolicy::Hybrid: return "hybrid";
        case count::CountPolicy::QueueAware: return "queue_aware";
    }
    return "baseline";
}

geom::Roi roi_from_json(const json& rj) {
    geom::Roi roi;
    for (const auto& p : rj.at("polygon"))
        roi.polygon.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    const auto& dl = rj.at("door_line");
    roi.door_line.a = {dl.at("a").at(0).get<double>(),
                       dl.at("a").at(1).get<double>()};
    roi.door_line.b = {dl.at("b").at(0).get<double>(),
                       dl.at("b").at(1).get<double>()};
    std::string side = dl.value("interior_side", "positive");
    roi.door_line.interior_side =
        side == "negative" ? geom::HalfPlane::Negative : geom::HalfPlane::Positive;
    if (rj.contains("queue_region") && !rj["queue_region"].empty()) {
        std::vector<geom::Point2> q;
        for (const auto& p : rj["queue_region"])
            q.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        roi.queue_region = std::move(q);
    }
    return roi;
}

// Piecewise clock over the resolved frame stamps: queries between stamped
// frames extrapolate from the nearest stamp at the nominal frame rate.
std::function<std::int64_t(long)> make_clock(
    std::vector<timeline::FrameStamp> stamps, double fps) {
    auto table = std::make_shared<std::vector<std::pair<long, std::int64_t>>>();
    for (const auto& s : stamps)
        if (s.resolved_time_ms)
            table->emplace_back(s.frame_index, *s.resolved_time_ms);
    return [table, fps](long frame) -> std::int64_t {
        if (table->empty()) throw DataError("empty timeline");
        auto it = std::upper_bound(
            table->begin(), table->end(), frame,
            [](long f, const auto& e) { return f < e.first; });
        if (it != table->begin()) --it;
        return it->second +
               std::llround(1000.0 * (frame - it->first) / fps);
    };
}

struct CameraRun {
    std::vector<track::Tracklet> tracklets;
    std::function<std::int64_t(long)> clock;
    std::vector<count::RoiEvent> events;  // after the counting policy
};

CameraRun process_camera(const CameraInput& cam, const PipelineConfig& cfg,
                         const count::DoorTimeline& door) {
    io::DetectionLog log = io::ingest_detections(cam.log);

    timeline::VideoMeta meta;
    meta.fps = cam.fps;
    meta.camera_id = cam.camera_id;
    meta.segment_id = cam.segment_id.empty() ? cam.camera_id : cam.segment_id;
    auto stamps = timeline::resolve_timeline(log.stamps, meta, cfg.overlay_format);

    CameraRun run;
    run.clock = make_clock(std::move(stamps), cam.fps);

    std::map<long, std::vector<track::Detection>> by_frame;
    bool has_head = false;
    long max_frame = 0;
    for (auto& d : log.detections) {
        has_head |= d.kind == track::DetectorKind::HeadOnly;
        max_frame = std::max(max_frame, d.frame_index);
        by_frame[d.frame_index].push_back(std::move(d));
    }
    bool hybrid = cfg.policy == count::CountPolicy::Hybrid;
    if (hybrid && !has_head)
        throw HybridStreamMissing("hybrid policy needs a head-detector stream in " +
                                  cam.log.string());

    track::Tracker tracker(cfg.tracker, cfg.roi);
    static const std::vector<track::Detection> kNone;
    for (long f = 0; f <= max_frame; ++f) {
        bool open = door.open_at(run.clock(f));
        track::DetectorKind want =
            hybrid ? count::select_detector(tracker.roi_occupancy(), cfg.counting)
                   : track::DetectorKind::FullBody;
        auto it = by_frame.find(f);
        if (it == by_frame.end()) {
            tracker.step(f, kNone, open);
            continue;
        }
        std::vector<track::Detection> dets;
        for (const auto& d : it->second)
            if (d.kind == want) dets.push_back(d);
        tracker.step(f, dets, open);
    }
    run.tracklets = tracker.finalize();

    // Crossing detection plus the configured counting policy.
    for (const auto& t : run.tracklets) {
        auto raw = count::detect_crossings(t, cfg.roi, cfg.counting, run.clock);
        std::vector<count::RoiEvent> kept;
        switch (cfg.policy) {
            case count::CountPolicy::Baseline:
                kept = count::apply_baseline(std::move(raw));
                break;
            case count::CountPolicy::DoorState:
            case count::CountPolicy::Hybrid:
                kept = count::apply_door_state(raw, door, cfg.counting);
                break;
            case count::CountPolicy::QueueAware:
                kept = count::apply_queue_aware(raw, t, cfg.roi, door,
                                                cfg.counting, run.clock);
                break;
        }
        run.events.insert(run.events.end(), kept.begin(), kept.end());
    }
    return run;
}

json box_json(const geom::BoundingBox& b) {
    return json{b.left, b.top, b.width, b.height};
}

}  // namespace

PipelineConfig load_config(const std::filesystem::path& path) {
    std::string raw = io::read_file(path);
    json j;
    try {
        j = json::parse(raw);
    } catch (const json::exception& e) {
        throw ConfigError("bad pipeline config " + path.string() + ": " + e.what());
    }
    std::filesystem::path base = path.parent_path();
    auto rel = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };

    PipelineConfig cfg;
    cfg.config_digest = io::digest_hex(raw);
    try {
        auto cam = [&](const json& cj, CameraInput& c) {
            c.log = rel(cj.at("log").get<std::string>());
            c.camera_id = cj.value("camera_id", c.camera_id);
            c.door_id = cj.value("door_id", c.door_id);
            c.segment_id = cj.value("segment_id", c.camera_id);
            c.fps = cj.value("fps", 25.0);
        };
        cfg.cam_b.camera_id = "camB";
        cfg.cam_b.door_id = "B";
        cam(j.at("cam_a"), cfg.cam_a);
        cam(j.at("cam_b"), cfg.cam_b);
        cfg.door_csv = rel(j.at("door_csv").get<std::string>());
        cfg.telematics_csv = rel(j.at("telematics_csv").get<std::string>());
        cfg.stop_registry_csv = rel(j.at("stop_registry_csv").get<std::string>());
        cfg.roi = roi_from_json(j.at("roi"));
        geom::validate_roi(cfg.roi);
        cfg.overlay_format = j.value("overlay_format", cfg.overlay_format);
        cfg.policy = policy_from_string(j.value("policy", "baseline"));
        cfg.tracker.repair_policy =
            repair_from_string(j.value("repair", "none"));
        if (j.contains("tracker")) {
            const auto& t = j["tracker"];
            auto& tc = cfg.tracker;
            tc.iou_gate = t.value("iou_gate", tc.iou_gate);
            tc.appearance_gate = t.value("appearance_gate", tc.appearance_gate);
            tc.max_lost_frames = t.value("max_lost_frames", tc.max_lost_frames);
            tc.ema_alpha = t.value("ema_alpha", tc.ema_alpha);
            tc.stitch_window = t.value("stitch_window", tc.stitch_window);
            tc.stitch_center_gate =
                t.value("stitch_center_gate", tc.stitch_center_gate);
            tc.exclusion_iou = t.value("exclusion_iou", tc.exclusion_iou);
            tc.cost_iou_weight = t.value("cost_iou_weight", tc.cost_iou_weight);
            tc.door_appearance_widen =
                t.value("door_appearance_widen", tc.door_appearance_widen);
            tc.door_center_widen =
                t.value("door_center_widen", tc.door_center_widen);
            tc.ambiguity_margin = t.value("ambiguity_margin", tc.ambiguity_margin);
            tc.density_threshold =
                t.value("density_threshold", tc.density_threshold);
        }
        if (j.contains("counting")) {
            const auto& c = j["counting"];
            auto& cc = cfg.counting;
            cc.density_threshold = c.value("density_threshold", cc.density_threshold);
            cc.hysteresis_frames = c.value("hysteresis_frames", cc.hysteresis_frames);
            cc.door_close_grace_s = c.value("door_close_grace_s", cc.door_close_grace_s);
            cc.dedup_window_s = c.value("dedup_window_s", cc.dedup_window_s);
            cc.queue_confirm_window_s =
                c.value("queue_confirm_window_s", cc.queue_confirm_window_s);
        }
        if (j.contains("reid")) {
            const auto& r = j["reid"];
            auto& rc = cfg.reid;
            rc.tau_reid = r.value("tau_reid", rc.tau_reid);
            rc.time_overlap_slack_s =
                r.value("time_overlap_slack_s", rc.time_overlap_slack_s);
            rc.dedup_window_s = r.value("dedup_window_s", rc.dedup_window_s);
            rc.in_owner_camera = r.value("in_owner_camera", rc.in_owner_camera);
            rc.out_owner_camera = r.value("out_owner_camera", rc.out_owner_camera);
        }
        if (j.contains("stop_rules")) {
            const auto& s = j["stop_rules"];
            auto& sc = cfg.stop_rules;
            sc.delta_gps_m = s.value("delta_gps_m", sc.delta_gps_m);
            sc.tau_slow_kmh = s.value("tau_slow_kmh", sc.tau_slow_kmh);
            sc.min_dwell_s = s.value("min_dwell_s", sc.min_dwell_s);
            sc.merge_gap_s = s.value("merge_gap_s", sc.merge_gap_s);
            sc.zero_speed_eps_kmh =
                s.value("zero_speed_eps_kmh", sc.zero_speed_eps_kmh);
        }
        if (j.contains("od"))
            cfg.od.attach_slack_s = j["od"].value("attach_slack_s",
                                                  cfg.od.attach_slack_s);
        cfg.counting.policy = cfg.policy;
    } catch (const json::exception& e) {
        throw ConfigError("bad pipeline config " + path.string() + ": " + e.what());
    }
    for (const auto& p : {cfg.cam_a.log, cfg.cam_b.log, cfg.door_csv,
                          cfg.telematics_csv, cfg.stop_registry_csv})
        if (!std::filesystem::exists(p))
            throw ConfigError("missing input file: " + p.string());
    return cfg;
}

void run_pipeline(const PipelineConfig& cfg,
                  const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    auto door_samples = io::read_door_csv(cfg.door_csv);
    auto door_for = [&](const std::string& door_id) {
        std::vector<count::DoorStateSample> mine;
        for (const auto& s : door_samples)
            if (s.door_id == door_id) mine.push_back(s);
        return count::DoorTimeline(std::move(mine));
    };
    count::DoorTimeline door_a = door_for(cfg.cam_a.door_id);
    count::DoorTimeline door_b = door_for(cfg.cam_b.door_id);

    CameraRun run_a = process_camera(cfg.cam_a, cfg, door_a);
    CameraRun run_b = process_camera(cfg.cam_b, cfg, door_b);

    // Cross-camera association and per-identity event de-duplication.
    auto identities = reid::associate_cameras(run_a.tracklets, run_b.tracklets,
                                              cfg.reid, run_a.clock, run_b.clock);
    std::map<std::pair<std::string, int>, std::vector<count::RoiEvent>> by_track;
    for (const auto& ev : run_a.events)
        by_track[{ev.camera_id, ev.local_id}].push_back(ev);
    for (const auto& ev : run_b.events)
        by_track[{ev.camera_id, ev.local_id}].push_back(ev);

    std::map<int, std::vector<count::RoiEvent>> events_per_identity;
    for (const auto& g : identities) {
        std::vector<count::RoiEvent> evs;
        for (const auto& [cam_id, local_id] : g.members) {
            auto it = by_track.find({cam_id, local_id});
            if (it != by_track.end())
                evs.insert(evs.end(), it->second.begin(), it->second.end());
        }
        auto kept = reid::dedupe_events(g, evs, cfg.reid);
        if (!kept.empty()) events_per_identity[g.global_id] = std::move(kept);
    }

    // Telematics stop segmentation; rule (ii) needs door state and
    // whether any ROI event fell in the same second.
    auto tele_samples = io::read_telematics_csv(cfg.telematics_csv);
    tele::StopRegistry registry = io::read_stop_registry(cfg.stop_registry_csv);
    std::set<std::int64_t> event_seconds;
    for (const auto& [gid, evs] : events_per_identity)
        for (const auto& ev : evs)
            event_seconds.insert(ev.resolved_time_ms >= 0
                                     ? ev.resolved_time_ms / 1000
                                     : (ev.resolved_time_ms - 999) / 1000);
    std::vector<tele::InstantClass> classes;
    for (auto& s : tele_samples) {
        if (!s.door_open)  // no feed in the CSV: fall back to the door log
            s.door_open = door_a.open_at(s.time_ms) || door_b.open_at(s.time_ms);
        bool roi_now = event_seconds.count(s.time_ms >= 0
                                               ? s.time_ms / 1000
                                               : (s.time_ms - 999) / 1000) > 0;
        classes.push_back(
            tele::classify_instant(s, registry, cfg.stop_rules, roi_now));
    }
    auto stop_events =
        tele::segment_stops(tele_samples, classes, registry, cfg.stop_rules);

    int unmatched_board = 0, unmatched_alight = 0;
    auto journeys = od::build_journeys(events_per_identity, stop_events, cfg.od,
                                       unmatched_board, unmatched_alight);
    od::OdMatrix matrix = od::build_matrix(journeys, registry, stop_events);

    // ---- artifacts ------------------------------------------------------
    auto write_tracklets = [&](const CameraRun& run, const std::string& name) {
        std::ostringstream oss;
        for (const auto& t : run.tracklets) {
            for (const auto& d : t.detections) {
                json j;
                j["id"] = t.local_id;
                j["frame"] = d.frame_index;
                j["box"] = box_json(d.box);
                oss << j.dump() << "\n";
            }
        }
        io::write_file(out_dir / name, oss.str());
    };
    write_tracklets(run_a, "tracklets_" + cfg.cam_a.camera_id + ".jsonl");
    write_tracklets(run_b, "tracklets_" + cfg.cam_b.camera_id + ".jsonl");

    {
        std::ostringstream oss;
        for (const auto& [gid, evs] : events_per_identity) {
            for (const auto& ev : evs) {
                json j;
                j["global_id"] = gid;
                j["cam"] = ev.camera_id;
                j["local_id"] = ev.local_id;
                j["dir"] = ev.direction == count::Direction::In ? "in" : "out";
                j["frame"] = ev.frame_index;
                j["time_ms"] = ev.resolved_time_ms;
                auto stop = od::attribute_event_to_stop(ev, stop_events,
                                                        cfg.od.attach_slack_s);
                j["stop"] = stop ? json(*stop) : json(nullptr);
                oss << j.dump() << "\n";
            }
        }
        io::write_file(out_dir / "events.jsonl", oss.str());
    }

    {
        std::ostringstream oss;
        for (const auto& g : identities) {
            json j;
            j["global_id"] = g.global_id;
            j["members"] = g.members;
            oss << j.dump() << "\n";
        }
        io::write_file(out_dir / "identities.jsonl", oss.str());
    }

    {
        std::ostringstream oss;
        for (const auto& s : stop_events) {
            json j;
            j["kind"] = s.kind == tele::StopKind::Official ? "official" : "illegal";
            j["stop_id"] = s.stop_id ? json(*s.stop_id) : json(nullptr);
            j["t_start_ms"] = s.t_start_ms;
            j["t_end_ms"] = s.t_end_ms;
            j["centroid_lat"] = std::round(s.centroid_lat * 1e7) / 1e7;
            j["centroid_lon"] = std::round(s.centroid_lon * 1e7) / 1e7;
            oss << j.dump() << "\n";
        }
        io::write_file(out_dir / "stop_events.jsonl", oss.str());
    }

    {
        std::ostringstream oss;
        for (const auto& jn : journeys) {
            json j;
            j["global_id"] = jn.global_id;
            j["board_stop"] = jn.board_stop;
            j["alight_stop"] = jn.alight_stop ? json(*jn.alight_stop) : json(nullptr);
            j["board_time_ms"] = jn.board_time_ms;
            j["alight_time_ms"] = jn.alight_time_ms;
            oss << j.dump() << "\n";
        }
        io::write_file(out_dir / "journeys.jsonl", oss.str());
    }

    {
        json j;
        j["stops"] = matrix.stop_ids;
        j["cells"] = json::array();
        for (const auto& [key, v] : matrix.counts)
            j["cells"].push_back({{"origin", key.first},
                                  {"dest", key.second},
                                  {"count", v}});
        j["unmatched_boardings"] = matrix.unmatched_boardings;
        j["unmatched_alightings"] = matrix.unmatched_alightings;
        j["same_stop_journeys"] = matrix.same_stop_journeys;
        io::write_file(out_dir / "od_matrix.json", j.dump(2) + "\n");

        std::ostringstream csv;
        csv << "origin";
        for (const auto& s : matrix.stop_ids) csv << "," << s;
        csv << "\n";
        for (const auto& o : matrix.stop_ids) {
            csv << o;
            for (const auto& d : matrix.stop_ids) {
                auto it = matrix.counts.find({o, d});
                csv << "," << (it == matrix.counts.end() ? 0 : it->second);
            }
            csv << "\n";
        }
        io::write_file(out_dir / "od_matrix.csv", csv.str());
    }

    // Per-door per-second counts from the de-duplicated events.
    std::map<std::string, int> pred_in, pred_out;
    {
        std::map<std::string, std::vector<count::RoiEvent>> per_door;
        for (const auto& [gid, evs] : events_per_identity)
            for (const auto& ev : evs) {
                const std::string& door = ev.camera_id == cfg.cam_a.camera_id
                                              ? cfg.cam_a.door_id
                                              : cfg.cam_b.door_id;
                per_door[door].push_back(ev);
            }
        json j = json::object();
        for (const auto& did : {cfg.cam_a.door_id, cfg.cam_b.door_id}) {
            json rows = json::array();
            auto it = per_door.find(did);
            if (it != per_door.end()) {
                for (const auto& [sec, io_pair] :
                     count::per_second_counts(it->second)) {
                    rows.push_back({sec, io_pair.first, io_pair.second});
                    pred_in[did] += io_pair.first;
                    pred_out[did] += io_pair.second;
                }
            }
            j[did] = std::move(rows);
        }
        io::write_file(out_dir / "per_door_counts.json", j.dump(2) + "\n");
    }

    {
        int matched = 0;
        for (const auto& g : identities)
            if (g.members.size() == 2) ++matched;
        std::size_t na = run_a.tracklets.size(), nb = run_b.tracklets.size();
        json j;
        j["policy"] = policy_name(cfg.policy);
        j["reid"] = {{"tracklets_a", na},
                     {"tracklets_b", nb},
                     {"matched_pairs", matched},
                     {"match_rate",
                      na + nb == 0 ? 1.0
                                   : 2.0 * matched / static_cast<double>(na + nb)}};
        json counts = json::object();
        for (const auto& did : {cfg.cam_a.door_id, cfg.cam_b.door_id})
            counts[did] = {{"in", pred_in[did]}, {"out", pred_out[did]}};
        j["door_totals"] = std::move(counts);
        j["journeys"] = journeys.size();
        j["unmatched_boardings"] = unmatched_board;
        j["unmatched_alightings"] = unmatched_alight;
        j["od_total_mass"] = matrix.total_mass();
        io::write_file(out_dir / "report.json", j.dump(2) + "\n");
    }

    {
        json j;
        j["config_digest"] = cfg.config_digest;
        json inputs = json::object();
        for (const auto& p : {cfg.cam_a.log, cfg.cam_b.log, cfg.door_csv,
                              cfg.telematics_csv, cfg.stop_registry_csv})
            inputs[p.filename().string()] = io::digest_hex(io::read_file(p));
        j["inputs"] = std::move(inputs);
        json arts = json::array();
        for (const char* name :
             {"events.jsonl", "identities.jsonl", "journeys.jsonl",
              "od_matrix.csv", "od_matrix.json", "per_door_counts.json",
              "report.json", "stop_events.jsonl"})
            arts.push_back(name);
        arts.push_back("tracklets_" + cfg.cam_a.camera_id + ".jsonl");
        arts.push_back("tracklets_" + cfg.cam_b.camera_id + ".jsonl");
        j["artifacts"] = std::move(arts);
        io::write_file(out_dir / "manifest.json", j.dump(2) + "\n");
    }
}

void run_eval(const std::filesystem::path& pred_dir,
              const std::filesystem::path& truth_path) {
    json truth = json::parse(io::read_file(truth_path));
    json report = json::parse(io::read_file(pred_dir / "report.json"));
    json pred_counts = json::parse(io::read_file(pred_dir / "per_door_counts.json"));
    json pred_od = json::parse(io::read_file(pred_dir / "od_matrix.json"));

    json out;
    out["policy"] = report.value("policy", "unknown");
    out["reid_match_rate"] = report["reid"]["match_rate"];

    // ---- counting metrics ----------------------------------------------
    std::vector<eval::SegmentCounts> segments;
    for (const auto& [door, rows] : truth["door_counts"].items()) {
        eval::SegmentCounts seg;
        seg.segment_id = door;
        for (const auto& r : rows) {
            seg.truth_in += r[1].get<int>();
            seg.truth_out += r[2].get<int>();
        }
        if (pred_counts.contains(door)) {
            for (const auto& r : pred_counts[door]) {
                seg.pred_in += r[1].get<int>();
                seg.pred_out += r[2].get<int>();
            }
        }
        segments.push_back(seg);
    }
    eval::CountReport cr = eval::count_metrics(segments);
    json cj;
    cj["entry_accuracy"] = cr.entry_accuracy;
    cj["exit_accuracy"] = cr.exit_accuracy;
    cj["total_accuracy"] = cr.total_accuracy;
    cj["entry_mae"] = cr.entry_mae;
    cj["exit_mae"] = cr.exit_mae;
    cj["complete_misses"] = cr.complete_misses;
    int ti = 0, pi = 0, to = 0, po = 0;
    for (const auto& s : segments) {
        ti += s.truth_in;
        pi += s.pred_in;
        to += s.truth_out;
        po += s.pred_out;
    }
    cj["entry_ratio"] = ti == 0 ? 1.0 : static_cast<double>(pi) / ti;
    cj["exit_ratio"] = to == 0 ? 1.0 : static_cast<double>(po) / to;
    out["counts"] = std::move(cj);

    std::ostringstream csv;
    csv << "segment,pred_in,truth_in,pred_out,truth_out\n";
    for (const auto& s : segments)
        csv << s.segment_id << "," << s.pred_in << "," << s.truth_in << ","
            << s.pred_out << "," << s.truth_out << "\n";
    io::write_file(pred_dir / "eval_counts.csv", csv.str());

    // ---- OD comparison --------------------------------------------------
    auto matrix_of = [](const json& stops, const json& cells,
                        bool object_cells) {
        od::OdMatrix m;
        for (const auto& s : stops) m.stop_ids.push_back(s.get<std::string>());
        for (const auto& c : cells) {
            if (object_cells) {
                m.counts[{c.at("origin").get<std::string>(),
                          c.at("dest").get<std::string>()}] =
                    c.at("count").get<int>();
            } else {
                m.counts[{c[0].get<std::string>(), c[1].get<std::string>()}] =
                    c[2].get<int>();
            }
        }
        return m;
    };
    od::OdMatrix pm = matrix_of(pred_od["stops"], pred_od["cells"], true);
    od::OdMatrix tm = matrix_of(truth["truth_od"]["stops"],
                                truth["truth_od"]["cells"], false);
    eval::OdComparison oc = eval::od_compare(pm, tm);
    out["od"] = {{"exact_cell_match", oc.exact_cell_match},
                 {"l1_error", oc.l1_error}};

    // ---- MOT-lite per camera -------------------------------------------
    if (truth.contains("truth_tracks") && !truth["truth_tracks"].empty()) {
        json mj = json::object();
        int total_switches = 0;
        for (const auto& [cam, tracks] : truth["truth_tracks"].items()) {
            std::vector<eval::TruthTrack> tts;
            for (const auto& tr : tracks) {
                eval::TruthTrack tt;
                tt.person_id = tr.at("person").get<int>();
                tt.camera_id = cam;
                for (const auto& fr : tr.at("frames"))
                    tt.boxes[fr[0].get<long>()] = {
                        fr[1].get<double>(), fr[2].get<double>(),
                        fr[3].get<double>(), fr[4].get<double>()};
                tts.push_back(std::move(tt));
            }
            // Rebuild predicted tracklets from the artifact.
            std::map<int, track::Tracklet> preds;
            std::istringstream iss(
                io::read_file(pred_dir / ("tracklets_" + cam + ".jsonl")));
            std::string line;
            while (std::getline(iss, line)) {
                if (line.empty()) continue;
                json j = json::parse(line);
                track::Detection d;
                d.camera_id = cam;
                d.frame_index = j.at("frame").get<long>();
                d.box = {j["box"][0].get<double>(), j["box"][1].get<double>(),
                         j["box"][2].get<double>(), j["box"][3].get<double>()};
                auto& t = preds[j.at("id").get<int>()];
                t.local_id = j.at("id").get<int>();
                t.camera_id = cam;
                t.detections.push_back(std::move(d));
            }
            std::vector<track::Tracklet> plist;
            for (auto& [id, t] : preds) {
                std::sort(t.detections.begin(), t.detections.end(),
                          [](const auto& a, const auto& b) {
                              return a.frame_index < b.frame_index;
                          });
                plist.push_back(std::move(t));
            }
            eval::MotReport mr = eval::mot_metrics(plist, tts);
            total_switches += mr.id_switches;
            mj[cam] = {{"id_switches", mr.id_switches},
                       {"fragmentation", mr.fragmentation},
                       {"idf1", mr.idf1},
                       {"detection_f1", mr.detection_f1}};
        }
        mj["available"] = true;
        mj["total_id_switches"] = total_switches;
        out["mot"] = std::move(mj);
    } else {
        out["mot"] = {{"available", false}};
    }

    io::write_file(pred_dir / "eval_report.json", out.dump(2) + "\n");
}

}  // namespace busod::pipe
