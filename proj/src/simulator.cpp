#include "busod/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "busod/errors.hpp"
#include "busod/io.hpp"
#include "busod/timeline.hpp"

namespace busod::sim {

namespace {

using nlohmann::json;

// Scene layout (pixels), shared by both synthetic cameras. The door line is
// vertical at x = 320; the cabin interior is x > 320.
constexpr double kDoorX = 320.0;
constexpr double kBodyW = 44.0, kBodyH = 120.0;
constexpr double kHeadW = 24.0, kHeadH = 24.0;
constexpr std::int64_t kDefaultStartEpoch = 1742972400;  // 2025-03-26 07:00:00Z

struct Knot {
    double t, x, y;
};

struct Actor {
    int person = 0;
    std::string cam;
    std::vector<Knot> knots;
    double occl_t0 = -1.0, occl_t1 = -1.0;  // absolute seconds, [t0, t1)
    double drift = 0.0;                     // applied from occl_t1 onward
};

struct TruthEvent {
    std::string door;  // "A" or "B"
    bool in = true;
    double t = 0.0;  // scenario seconds of the exact line crossing
    int person = 0;
};

double interp_x(const std::vector<Knot>& k, double t, double& y) {
    if (t <= k.front().t) {
        y = k.front().y;
        return k.front().x;
    }
    for (std::size_t i = 1; i < k.size(); ++i) {
        if (t <= k[i].t) {
            double f = (t - k[i - 1].t) / (k[i].t - k[i - 1].t);
            y = k[i - 1].y + f * (k[i].y - k[i - 1].y);
            return k[i - 1].x + f * (k[i].x - k[i - 1].x);
        }
    }
    y = k.back().y;
    return k.back().x;
}

bool actor_visible(const Actor& a, double t) {
    return t >= a.knots.front().t && t <= a.knots.back().t;
}

// Exact time the actor's center crosses the door line, if any.
std::optional<double> crossing_time(const std::vector<Knot>& k) {
    for (std::size_t i = 1; i < k.size(); ++i) {
        double x0 = k[i - 1].x, x1 = k[i].x;
        if ((x0 - kDoorX) * (x1 - kDoorX) < 0.0) {
            double f = (kDoorX - x0) / (x1 - x0);
            return k[i - 1].t + f * (k[i].t - k[i - 1].t);
        }
    }
    return std::nullopt;
}

std::vector<double> random_unit(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> v(dim);
    double n = 0.0;
    do {
        n = 0.0;
        for (double& x : v) {
            x = g(rng);
            n += x * x;
        }
    } while (n < 1e-12);
    n = std::sqrt(n);
    for (double& x : v) x /= n;
    return v;
}

double cosd(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return 1.0 - dot;
}

// Rotates the unit vector v by the angle whose cosine distance is `dist`,
// toward a random direction orthogonal to v.
std::vector<double> rotate_by_distance(const std::vector<double>& v,
                                       double dist, std::mt19937_64& rng) {
    if (dist <= 0.0) return v;
    std::vector<double> u = random_unit(rng, static_cast<int>(v.size()));
    double dot = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) dot += u[i] * v[i];
    double n = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        u[i] -= dot * v[i];
        n += u[i] * u[i];
    }
    n = std::sqrt(n);
    if (n < 1e-9) return rotate_by_distance(v, dist, rng);
    double c = 1.0 - dist;
    double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = c * v[i] + s * u[i] / n;
    return out;
}

// Random orthogonal matrix via Gram-Schmidt on a gaussian matrix.
std::vector<std::vector<double>> random_rotation(std::mt19937_64& rng, int dim) {
    std::vector<std::vector<double>> q;
    for (int i = 0; i < dim; ++i) {
        std::vector<double> v = random_unit(rng, dim);
        for (const auto& prev : q) {
            double dot = 0.0;
            for (int k = 0; k < dim; ++k) dot += v[k] * prev[k];
            for (int k = 0; k < dim; ++k) v[k] -= dot * prev[k];
        }
        double n = 0.0;
        for (double x : v) n += x * x;
        n = std::sqrt(n);
        if (n < 1e-6) {
            --i;
            continue;
        }
        for (double& x : v) x /= n;
        q.push_back(std::move(v));
    }
    return q;
}

std::vector<double> apply_matrix(const std::vector<std::vector<double>>& q,
                                 const std::vector<double>& v) {
    std::vector<double> out(v.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t k = 0; k < v.size(); ++k) out[i] += q[i][k] * v[k];
    return out;
}

double round6(double v) { return std::round(v * 1e6) / 1e6; }

std::string cam_of_door(const std::string& door) {
    return door == "A" ? "camA" : "camB";
}

// --- telematics phases -------------------------------------------------

struct Phase {
    double t0, t1;
    bool dwell;            // true: stationary at a fixed point
    double lat0, lon0;     // position at t0 (dwell: held)
    double lat1, lon1;     // position at t1 (drive only)
    double dist_m;         // drive only
    double drive_time;     // drive only, pause-free seconds
    double pause_speed = 0.0;
    std::vector<IllegalStopSpec> pauses;  // inside a drive phase
};

}  // namespace

geom::Roi scene_roi() {
    geom::Roi roi;
    roi.polygon = {{200, 60}, {440, 60}, {440, 460}, {200, 460}};
    roi.door_line = {{kDoorX, 440}, {kDoorX, 80}, geom::HalfPlane::Positive};
    roi.queue_region = {{{120, 100}, {310, 100}, {310, 420}, {120, 420}}};
    return roi;
}

ScenarioConfig scenario_from_json(const std::string& text) {
    json j = json::parse(text);
    ScenarioConfig c;
    c.seed = j.value("seed", std::uint64_t{1});
    c.fps = j.value("fps", 25.0);
    c.duration_s = j.value("duration_s", 600.0);
    c.embedding_dim = j.value("embedding_dim", 16);
    c.start_epoch_s = j.value("start_epoch_s", std::int64_t{0});
    c.emit_head_stream = j.value("emit_head_stream", false);
    for (const auto& r : j.value("route", json::array())) {
        RouteStop s;
        s.stop_id = r.at("stop_id").get<std::string>();
        s.name = r.value("name", s.stop_id);
        s.arrival_s = r.at("arrival_s").get<double>();
        s.dwell_s = r.value("dwell_s", 20.0);
        s.lat = r.at("lat").get<double>();
        s.lon = r.at("lon").get<double>();
        c.route.push_back(std::move(s));
    }
    for (const auto& p : j.value("passengers", json::array())) {
        PassengerSpec s;
        s.board_stop = p.at("board_stop").get<std::string>();
        s.alight_stop = p.value("alight_stop", std::string());
        s.board_door = p.value("board_door", std::string("A"));
        s.alight_door = p.value("alight_door", std::string("B"));
        std::string occ = p.value("occlusion", std::string("none"));
        s.occlusion = occ == "approach" ? OcclusionSite::Approach
                      : occ == "cross"  ? OcclusionSite::Cross
                                        : OcclusionSite::None;
        s.occlusion_gap_frames = p.value("occlusion_gap_frames", 0);
        s.reappear_drift = p.value("reappear_drift", 0.0);
        s.twin_of = p.value("twin_of", -1);
        c.passengers.push_back(std::move(s));
    }
    if (j.contains("stressors")) {
        const auto& st = j["stressors"];
        c.stressors.loiterer_count = st.value("loiterer_count", 0);
        c.stressors.standing_crowd = st.value("standing_crowd", 0);
        c.stressors.modality_shift_times_s =
            st.value("modality_shift_times_s", std::vector<double>{});
        c.stressors.embedding_noise_sigma =
            st.value("embedding_noise_sigma", 0.0);
        c.stressors.min_latent_separation =
            st.value("min_latent_separation", 0.8);
        c.stressors.twin_separation = st.value("twin_separation", 0.08);
        for (const auto& il : st.value("illegal_stops", json::array())) {
            IllegalStopSpec s;
            s.at_s = il.at("at_s").get<double>();
            s.dwell_s = il.value("dwell_s", 10.0);
            s.slow_speed_kmh = il.value("slow_speed_kmh", 0.0);
            c.stressors.illegal_stops.push_back(s);
        }
    }
    return c;
}

std::string scenario_to_json(const ScenarioConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["fps"] = c.fps;
    j["duration_s"] = c.duration_s;
    j["embedding_dim"] = c.embedding_dim;
    j["start_epoch_s"] = c.start_epoch_s;
    j["emit_head_stream"] = c.emit_head_stream;
    j["route"] = json::array();
    for (const auto& s : c.route)
        j["route"].push_back({{"stop_id", s.stop_id},
                              {"name", s.name},
                              {"arrival_s", s.arrival_s},
                              {"dwell_s", s.dwell_s},
                              {"lat", s.lat},
                              {"lon", s.lon}});
    j["passengers"] = json::array();
    for (const auto& p : c.passengers) {
        json pj;
        pj["board_stop"] = p.board_stop;
        pj["alight_stop"] = p.alight_stop;
        pj["board_door"] = p.board_door;
        pj["alight_door"] = p.alight_door;
        pj["occlusion"] = p.occlusion == OcclusionSite::Approach ? "approach"
                          : p.occlusion == OcclusionSite::Cross ? "cross"
                                                                : "none";
        pj["occlusion_gap_frames"] = p.occlusion_gap_frames;
        pj["reappear_drift"] = p.reappear_drift;
        pj["twin_of"] = p.twin_of;
        j["passengers"].push_back(std::move(pj));
    }
    json st;
    st["loiterer_count"] = c.stressors.loiterer_count;
    st["standing_crowd"] = c.stressors.standing_crowd;
    st["modality_shift_times_s"] = c.stressors.modality_shift_times_s;
    st["embedding_noise_sigma"] = c.stressors.embedding_noise_sigma;
    st["min_latent_separation"] = c.stressors.min_latent_separation;
    st["twin_separation"] = c.stressors.twin_separation;
    st["illegal_stops"] = json::array();
    for (const auto& il : c.stressors.illegal_stops)
        st["illegal_stops"].push_back({{"at_s", il.at_s},
                                       {"dwell_s", il.dwell_s},
                                       {"slow_speed_kmh", il.slow_speed_kmh}});
    j["stressors"] = std::move(st);
    return j.dump(2) + "\n";
}

void generate(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
    if (cfg.route.empty()) throw ConfigError("scenario route is empty");
    for (std::size_t i = 1; i < cfg.route.size(); ++i) {
        if (cfg.route[i].arrival_s <=
            cfg.route[i - 1].arrival_s + cfg.route[i - 1].dwell_s)
            throw ConfigError("route arrivals must be increasing");
    }
    for (std::size_t i = 1; i < cfg.stressors.illegal_stops.size(); ++i) {
        if (cfg.stressors.illegal_stops[i].at_s <=
            cfg.stressors.illegal_stops[i - 1].at_s)
            throw ConfigError("illegal stops must be ordered by time");
    }

    std::int64_t start_epoch =
        cfg.start_epoch_s != 0 ? cfg.start_epoch_s : kDefaultStartEpoch;
    std::mt19937_64 rng(cfg.seed);

    auto stop_by_id = [&](const std::string& id) -> const RouteStop* {
        for (const auto& s : cfg.route)
            if (s.stop_id == id) return &s;
        return nullptr;
    };
    // Exchange window of an official or "ILLEGAL-k" stop.
    auto exchange_window = [&](const std::string& id) -> std::pair<double, double> {
        if (id.rfind("ILLEGAL-", 0) == 0) {
            std::size_t k = std::stoul(id.substr(8));
            if (k == 0 || k > cfg.stressors.illegal_stops.size())
                throw ConfigError("unknown illegal stop: " + id);
            const auto& il = cfg.stressors.illegal_stops[k - 1];
            return {il.at_s, il.at_s + il.dwell_s};
        }
        const RouteStop* s = stop_by_id(id);
        if (!s) throw ConfigError("unknown stop: " + id);
        return {s->arrival_s, s->arrival_s + s->dwell_s};
    };

    // ---- person latents -------------------------------------------------
    int n_pass = static_cast<int>(cfg.passengers.size());
    int n_loit = cfg.stressors.loiterer_count;
    int n_crowd = cfg.stressors.standing_crowd;
    int n_persons = n_pass + n_loit + n_crowd;
    std::vector<std::vector<double>> latent(n_persons);
    for (int p = 0; p < n_persons; ++p) {
        if (p < n_pass && cfg.passengers[p].twin_of >= 0) {
            int o = cfg.passengers[p].twin_of;
            if (o >= p) throw ConfigError("twin_of must reference an earlier passenger");
            latent[p] = rotate_by_distance(latent[o],
                                           cfg.stressors.twin_separation, rng);
            continue;
        }
        for (int attempt = 0;; ++attempt) {
            latent[p] = random_unit(rng, cfg.embedding_dim);
            bool ok = true;
            for (int q = 0; q < p; ++q) {
                if (q < n_pass && cfg.passengers[q].twin_of >= 0) continue;
                if (cosd(latent[p], latent[q]) <
                    cfg.stressors.min_latent_separation) {
                    ok = false;
                    break;
                }
            }
            if (ok) break;
            if (attempt > 5000)
                throw ConfigError("cannot satisfy min_latent_separation");
        }
    }

    // ---- actors and truth events ---------------------------------------
    std::vector<Actor> actors;
    std::vector<TruthEvent> truth_events;
    std::vector<json> truth_journeys;
    std::map<std::string, int> board_slot, alight_slot;
    std::vector<double> board_time(n_pass, 0.0);
    std::vector<bool> twin_target(n_pass, false);
    for (const auto& ps : cfg.passengers)
        if (ps.twin_of >= 0 && ps.twin_of < n_pass) twin_target[ps.twin_of] = true;

    auto lane_y = [&](int person) { return 200.0 + (person % 5) * 30.0; };

    for (int p = 0; p < n_pass; ++p) {
        const PassengerSpec& ps = cfg.passengers[p];
        auto [b0, b1] = exchange_window(ps.board_stop);
        bool twin = ps.twin_of >= 0;
        double t_board;
        if (twin) {
            // Twins share a boarding slot (distinct lanes) so their
            // occlusion windows overlap exactly.
            t_board = board_time[ps.twin_of];
        } else {
            int slot = board_slot[ps.board_stop]++;
            t_board = b0 + 3.0 + slot * 4.0;
        }
        board_time[p] = t_board;
        if (t_board + 2.0 > b1)
            throw ConfigError("dwell too short for boarding queue at " +
                              ps.board_stop);
        // Members of a twin pair take widely separated lanes so that only
        // trajectory, never appearance or lane overlap, can tell them apart.
        double y = twin ? 300.0 : twin_target[p] ? 180.0 : lane_y(p);
        Actor board;
        board.person = p + 1;
        board.cam = cam_of_door(ps.board_door);
        bool fast = ps.occlusion != OcclusionSite::None &&
                    ps.occlusion_gap_frames > 35;
        double x_start = fast ? 60.0 : 140.0;
        board.knots = {{t_board - 6.0, x_start, y},
                       {t_board - 0.5, 310.0, y},
                       {t_board + 2.5, 480.0, y},
                       {t_board + 6.0, 480.0, y}};
        double t_cross_b = *crossing_time(board.knots);
        if (ps.occlusion != OcclusionSite::None && ps.occlusion_gap_frames > 0) {
            double gap_s = ps.occlusion_gap_frames / cfg.fps;
            if (ps.occlusion == OcclusionSite::Approach) {
                // Fast approaches start the blackout later so the last
                // pre-gap box still touches the door ROI.
                board.occl_t0 = t_board - (fast ? 2.9 : 4.0);
                board.occl_t1 = board.occl_t0 + gap_s;
            } else {
                board.occl_t0 = t_cross_b - gap_s / 2.0;
                board.occl_t1 = t_cross_b + gap_s / 2.0;
            }
            board.drift = ps.reappear_drift;
        }
        truth_events.push_back({ps.board_door, true, t_cross_b, p + 1});
        actors.push_back(std::move(board));

        json jj;
        jj["person"] = p + 1;
        jj["board_stop"] = ps.board_stop;
        jj["board_time_ms"] =
            static_cast<std::int64_t>((start_epoch + t_cross_b) * 1000.0 + 0.5);
        jj["alight_stop"] = ps.alight_stop;
        jj["alight_time_ms"] = 0;

        if (!ps.alight_stop.empty()) {
            auto [a0, a1] = exchange_window(ps.alight_stop);
            if (a0 <= b0)
                throw ConfigError("alight stop precedes board stop for passenger " +
                                  std::to_string(p));
            int aslot = alight_slot[ps.alight_stop]++;
            double t_alight = a0 + 3.0 + aslot * 4.0;
            if (t_alight + 2.0 > a1)
                throw ConfigError("dwell too short for alighting at " +
                                  ps.alight_stop);
            Actor alight;
            alight.person = p + 1;
            alight.cam = cam_of_door(ps.alight_door);
            alight.knots = {{t_alight - 6.0, 480.0, y},
                            {t_alight - 0.5, 330.0, y},
                            {t_alight + 3.0, 140.0, y},
                            {t_alight + 4.5, 140.0, y}};
            double t_cross_a = *crossing_time(alight.knots);
            truth_events.push_back({ps.alight_door, false, t_cross_a, p + 1});
            jj["alight_time_ms"] = static_cast<std::int64_t>(
                (start_epoch + t_cross_a) * 1000.0 + 0.5);
            actors.push_back(std::move(alight));
        }
        truth_journeys.push_back(std::move(jj));
    }

    // Loiterers: oscillate across the Cam-B door line between the first two
    // stops while the doors are closed.
    if (n_loit > 0 && cfg.route.size() < 2)
        throw ConfigError("loiterers need at least two route stops");
    for (int i = 0; i < n_loit; ++i) {
        double dep1 = cfg.route[0].arrival_s + cfg.route[0].dwell_s;
        double t0 = dep1 + 4.0 + i * 2.0;
        if (t0 + 14.0 > cfg.route[1].arrival_s)
            throw ConfigError("no closed-door window for loiterers");
        Actor a;
        a.person = n_pass + i + 1;
        a.cam = "camB";
        double y = 150.0 + i * 60.0;
        a.knots = {{t0, 280, y},      {t0 + 2, 360, y}, {t0 + 4, 280, y},
                   {t0 + 6, 360, y},  {t0 + 8, 280, y}, {t0 + 12, 280, y}};
        actors.push_back(std::move(a));
    }

    // Standing crowd: static occupants inside both door ROIs.
    const double crowd_pos[][2] = {
        {350, 130}, {395, 130}, {430, 130}, {355, 390}, {415, 390},
        {370, 255}, {430, 300}, {350, 60},  {430, 200}, {390, 330}};
    for (int i = 0; i < n_crowd; ++i) {
        auto& pos = crowd_pos[i % 10];
        for (const char* cam : {"camA", "camB"}) {
            Actor a;
            a.person = n_pass + n_loit + i + 1;
            a.cam = cam;
            a.knots = {{0.0, pos[0], pos[1]}, {cfg.duration_s, pos[0], pos[1]}};
            actors.push_back(std::move(a));
        }
    }

    // Drift rotations, drawn in actor order.
    std::vector<std::vector<double>> drift_latent(actors.size());
    for (std::size_t i = 0; i < actors.size(); ++i) {
        if (actors[i].drift > 0.0)
            drift_latent[i] = rotate_by_distance(latent[actors[i].person - 1],
                                                 actors[i].drift, rng);
    }

    std::vector<std::vector<std::vector<double>>> shift_rot;
    for (std::size_t s = 0; s < cfg.stressors.modality_shift_times_s.size(); ++s)
        shift_rot.push_back(random_rotation(rng, cfg.embedding_dim));

    // ---- telematics phases ---------------------------------------------
    std::vector<Phase> phases;
    {
        std::vector<RouteStop> pts = cfg.route;
        double t_cursor = 0.0;
        // Drive in from a virtual depot when the first arrival leaves room.
        if (pts.front().arrival_s >= 20.0) {
            Phase d;
            d.t0 = 0.0;
            d.t1 = pts.front().arrival_s;
            d.dwell = false;
            d.lat0 = pts.front().lat;
            d.lon0 = pts.front().lon - 0.01;
            d.lat1 = pts.front().lat;
            d.lon1 = pts.front().lon;
            phases.push_back(d);
        } else {
            Phase p;
            p.t0 = 0.0;
            p.t1 = pts.front().arrival_s;
            p.dwell = true;
            p.lat0 = pts.front().lat;
            p.lon0 = pts.front().lon;
            if (p.t1 > p.t0) phases.push_back(p);
        }
        for (std::size_t i = 0; i < pts.size(); ++i) {
            Phase dw;
            dw.t0 = pts[i].arrival_s;
            dw.t1 = pts[i].arrival_s + pts[i].dwell_s;
            dw.dwell = true;
            dw.lat0 = pts[i].lat;
            dw.lon0 = pts[i].lon;
            phases.push_back(dw);
            double next_arr =
                i + 1 < pts.size() ? pts[i + 1].arrival_s : cfg.duration_s;
            if (next_arr > dw.t1) {
                Phase dr;
                dr.t0 = dw.t1;
                dr.t1 = next_arr;
                dr.dwell = false;
                dr.lat0 = pts[i].lat;
                dr.lon0 = pts[i].lon;
                dr.lat1 = i + 1 < pts.size() ? pts[i + 1].lat : pts[i].lat;
                dr.lon1 = i + 1 < pts.size() ? pts[i + 1].lon : pts[i].lon + 0.01;
                phases.push_back(dr);
            }
        }
        t_cursor = 0.0;
        (void)t_cursor;
        // Attach illegal pauses to their drive phase.
        for (const auto& il : cfg.stressors.illegal_stops) {
            bool placed = false;
            for (Phase& ph : phases) {
                if (!ph.dwell && il.at_s >= ph.t0 &&
                    il.at_s + il.dwell_s <= ph.t1) {
                    ph.pauses.push_back(il);
                    placed = true;
                    break;
                }
            }
            if (!placed)
                throw ConfigError("illegal stop does not fit a driving window");
        }
        for (Phase& ph : phases) {
            if (ph.dwell) continue;
            ph.dist_m = tele::haversine_m(ph.lat0, ph.lon0, ph.lat1, ph.lon1);
            double paused = 0.0;
            for (const auto& il : ph.pauses) paused += il.dwell_s;
            ph.drive_time = (ph.t1 - ph.t0) - paused;
            if (ph.drive_time <= 1.0)
                throw ConfigError("drive window too short between stops");
        }
    }

    auto phase_at = [&](double t) -> const Phase* {
        for (const Phase& ph : phases)
            if (t >= ph.t0 && t < ph.t1) return &ph;
        return phases.empty() ? nullptr : &phases.back();
    };

    // Speed (km/h) and position at time t.
    auto telematics_at = [&](double t, double& lat, double& lon,
                             double& dist_into_phase_m) -> double {
        const Phase* ph = phase_at(t);
        dist_into_phase_m = 0.0;
        if (ph->dwell) {
            lat = ph->lat0;
            lon = ph->lon0;
            return 0.0;
        }
        // Map wall time into pause-free drive time.
        double tau = t - ph->t0;
        double frozen_speed = -1.0;
        for (const auto& il : ph->pauses) {
            if (t >= il.at_s + il.dwell_s) {
                tau -= il.dwell_s;
            } else if (t >= il.at_s) {
                tau -= t - il.at_s;
                frozen_speed = il.slow_speed_kmh;
            }
        }
        double T = ph->drive_time;
        double ta = 0.2 * T;
        double vmax = ph->dist_m / (0.8 * T);  // m/s
        auto v_of = [&](double x) {
            double shape = std::min({1.0, x / ta, (T - x) / ta});
            return vmax * std::max(0.0, shape);
        };
        // Closed-form trapezoid integral.
        auto s_of = [&](double x) {
            x = std::clamp(x, 0.0, T);
            if (x <= ta) return vmax * x * x / (2.0 * ta);
            if (x <= T - ta) return vmax * (ta / 2.0 + (x - ta));
            double r = T - x;
            return ph->dist_m - vmax * r * r / (2.0 * ta);
        };
        double s = s_of(tau);
        double f = ph->dist_m > 0.0 ? s / ph->dist_m : 0.0;
        lat = ph->lat0 + f * (ph->lat1 - ph->lat0);
        lon = ph->lon0 + f * (ph->lon1 - ph->lon0);
        dist_into_phase_m = s;
        if (frozen_speed >= 0.0) return frozen_speed;
        return v_of(tau) * 3.6;
    };

    // ---- emit files -----------------------------------------------------
    std::filesystem::create_directories(out_dir);

    // stop registry
    tele::StopRegistry reg;
    for (const auto& s : cfg.route) {
        bool dup = false;
        for (const auto& r : reg.stops) dup |= r.stop_id == s.stop_id;
        if (!dup) reg.stops.push_back({s.stop_id, s.name, s.lat, s.lon});
    }
    io::write_stop_registry(out_dir / "stops.csv", reg);

    // door csv: both doors open during official and illegal exchanges
    {
        std::vector<count::DoorStateSample> samples;
        auto push_window = [&](double t0, double t1) {
            for (const char* door : {"A", "B"}) {
                samples.push_back(
                    {static_cast<std::int64_t>((start_epoch + t0) * 1000.0),
                     door, true});
                samples.push_back(
                    {static_cast<std::int64_t>((start_epoch + t1) * 1000.0),
                     door, false});
            }
        };
        samples.push_back({start_epoch * 1000, "A", false});
        samples.push_back({start_epoch * 1000, "B", false});
        for (const auto& s : cfg.route)
            push_window(s.arrival_s + 0.5, s.arrival_s + s.dwell_s - 0.5);
        for (const auto& il : cfg.stressors.illegal_stops)
            push_window(il.at_s + 0.5, il.at_s + il.dwell_s - 0.5);
        std::stable_sort(samples.begin(), samples.end(),
                         [](const auto& a, const auto& b) {
                             if (a.time_ms != b.time_ms)
                                 return a.time_ms < b.time_ms;
                             return a.door_id < b.door_id;
                         });
        io::write_door_csv(out_dir / "door.csv", samples);
    }

    // telematics csv at 1 Hz
    {
        std::vector<tele::TelematicsSample> samples;
        double odo = 0.0;
        double prev_lat = 0.0, prev_lon = 0.0;
        bool first = true;
        for (double t = 0.0; t < cfg.duration_s; t += 1.0) {
            tele::TelematicsSample s;
            double d_unused;
            s.speed_kmh = telematics_at(t, s.lat, s.lon, d_unused);
            s.time_ms = static_cast<std::int64_t>((start_epoch + t) * 1000.0);
            if (!first) odo += tele::haversine_m(prev_lat, prev_lon, s.lat, s.lon);
            prev_lat = s.lat;
            prev_lon = s.lon;
            first = false;
            s.odometer_km = odo / 1000.0;
            samples.push_back(s);
        }
        io::write_telematics_csv(out_dir / "telematics.csv", samples);
    }

    // detection logs
    std::normal_distribution<double> noise(0.0, 1.0);
    auto observe = [&](std::size_t actor_idx, double t) {
        const Actor& a = actors[actor_idx];
        std::vector<double> e = (a.drift > 0.0 && t >= a.occl_t1)
                                    ? drift_latent[actor_idx]
                                    : latent[a.person - 1];
        for (std::size_t s = 0; s < cfg.stressors.modality_shift_times_s.size();
             ++s) {
            if (t >= cfg.stressors.modality_shift_times_s[s])
                e = apply_matrix(shift_rot[s], e);
        }
        if (cfg.stressors.embedding_noise_sigma > 0.0) {
            double n = 0.0;
            for (double& x : e) {
                x += cfg.stressors.embedding_noise_sigma * noise(rng);
                n += x * x;
            }
            n = std::sqrt(n);
            for (double& x : e) x /= n;
        }
        for (double& x : e) x = round6(x);
        return e;
    };

    long n_frames = static_cast<long>(cfg.duration_s * cfg.fps);
    json truth_tracks = json::object();
    json occl_json = json::array();
    for (const char* cam : {"camA", "camB"}) {
        std::vector<track::Detection> dets;
        std::vector<timeline::FrameStamp> stamps;
        std::map<int, json> tracks;  // person -> {person, frames:[...]}
        for (long f = 0; f < n_frames; ++f) {
            double t = f / cfg.fps;
            timeline::FrameStamp st;
            st.frame_index = f;
            st.overlay = timeline::format_overlay(
                start_epoch + static_cast<std::int64_t>(std::floor(t)));
            stamps.push_back(st);
            for (std::size_t ai = 0; ai < actors.size(); ++ai) {
                const Actor& a = actors[ai];
                if (a.cam != cam || !actor_visible(a, t)) continue;
                double y;
                double x = interp_x(a.knots, t, y);
                geom::BoundingBox body{round6(x - kBodyW / 2),
                                       round6(y - kBodyH / 2), kBodyW, kBodyH};
                auto& tr = tracks[a.person];
                if (tr.is_null()) {
                    tr["person"] = a.person;
                    tr["frames"] = json::array();
                }
                tr["frames"].push_back(
                    {f, body.left, body.top, body.width, body.height});
                bool occluded = a.occl_t0 >= 0.0 && t >= a.occl_t0 && t < a.occl_t1;
                if (occluded) continue;
                std::vector<double> e = observe(ai, t);
                track::Detection d;
                d.camera_id = cam;
                d.frame_index = f;
                d.box = body;
                d.confidence = 0.9;
                d.embedding = e;
                d.kind = track::DetectorKind::FullBody;
                dets.push_back(d);
                if (cfg.emit_head_stream) {
                    track::Detection h = dets.back();
                    h.box = {round6(x - kHeadW / 2), round6(y - kBodyH / 2),
                             kHeadW, kHeadH};
                    h.kind = track::DetectorKind::HeadOnly;
                    dets.push_back(std::move(h));
                }
            }
        }
        io::write_detections(
            out_dir / (std::string(cam) == "camA" ? "cam_a.jsonl" : "cam_b.jsonl"),
            dets, stamps);
        json arr = json::array();
        for (auto& [p, tr] : tracks) arr.push_back(std::move(tr));
        truth_tracks[cam] = std::move(arr);
    }
    for (std::size_t ai = 0; ai < actors.size(); ++ai) {
        const Actor& a = actors[ai];
        if (a.occl_t0 < 0.0) continue;
        occl_json.push_back({a.cam, a.person,
                             static_cast<long>(std::ceil(a.occl_t0 * cfg.fps)),
                             static_cast<long>(std::floor(a.occl_t1 * cfg.fps))});
    }

    // truth.json
    {
        json truth;
        truth["start_epoch_s"] = start_epoch;
        truth["fps"] = cfg.fps;
        truth["journeys"] = truth_journeys;
        json counts = json::object();
        counts["A"] = json::array();
        counts["B"] = json::array();
        std::map<std::string, std::map<std::int64_t, std::array<int, 2>>> agg;
        for (const auto& ev : truth_events) {
            std::int64_t sec =
                start_epoch + static_cast<std::int64_t>(std::floor(ev.t));
            agg[ev.door][sec][ev.in ? 0 : 1] += 1;
        }
        for (const auto& [door, m] : agg)
            for (const auto& [sec, io_counts] : m)
                counts[door].push_back({sec, io_counts[0], io_counts[1]});
        truth["door_counts"] = std::move(counts);
        truth["truth_tracks"] = std::move(truth_tracks);
        truth["occlusions"] = std::move(occl_json);
        json od = json::object();
        std::map<std::pair<std::string, std::string>, int> cells;
        for (const auto& jj : truth_journeys) {
            std::string as = jj["alight_stop"].get<std::string>();
            if (as.empty()) continue;
            cells[{jj["board_stop"].get<std::string>(), as}] += 1;
        }
        od["cells"] = json::array();
        for (const auto& [k, v] : cells)
            od["cells"].push_back({k.first, k.second, v});
        json stop_list = json::array();
        for (const auto& s : reg.stops) stop_list.push_back(s.stop_id);
        for (std::size_t k = 0; k < cfg.stressors.illegal_stops.size(); ++k)
            stop_list.push_back("ILLEGAL-" + std::to_string(k + 1));
        od["stops"] = std::move(stop_list);
        truth["truth_od"] = std::move(od);
        io::write_file(out_dir / "truth.json", truth.dump(2) + "\n");
    }

    // pipeline_config.json with relative paths, ready for `run`
    {
        json pc;
        pc["cam_a"] = {{"log", "cam_a.jsonl"},
                       {"camera_id", "camA"},
                       {"door_id", "A"},
                       {"fps", cfg.fps},
                       {"segment_id", "segA"}};
        pc["cam_b"] = {{"log", "cam_b.jsonl"},
                       {"camera_id", "camB"},
                       {"door_id", "B"},
                       {"fps", cfg.fps},
                       {"segment_id", "segB"}};
        pc["door_csv"] = "door.csv";
        pc["telematics_csv"] = "telematics.csv";
        pc["stop_registry_csv"] = "stops.csv";
        geom::Roi roi = scene_roi();
        json rj;
        rj["polygon"] = json::array();
        for (const auto& p : roi.polygon) rj["polygon"].push_back({p.x, p.y});
        rj["door_line"] = {{"a", {roi.door_line.a.x, roi.door_line.a.y}},
                           {"b", {roi.door_line.b.x, roi.door_line.b.y}},
                           {"interior_side", "positive"}};
        rj["queue_region"] = json::array();
        for (const auto& p : *roi.queue_region)
            rj["queue_region"].push_back({p.x, p.y});
        pc["roi"] = std::move(rj);
        pc["policy"] = "baseline";
        pc["repair"] = "none";
        pc["reid"] = {{"tau_reid", 0.6},
                      {"time_overlap_slack_s", cfg.duration_s},
                      {"dedup_window_s", 3.0}};
        io::write_file(out_dir / "pipeline_config.json", pc.dump(2) + "\n");
    }
}

bool replay_check(const std::filesystem::path& out_dir) {
    json truth = json::parse(io::read_file(out_dir / "truth.json"));
    double fps = truth["fps"].get<double>();

    for (const char* cam : {"camA", "camB"}) {
        std::filesystem::path log =
            out_dir / (std::string(cam) == "camA" ? "cam_a.jsonl" : "cam_b.jsonl");
        io::DetectionLog dl = io::ingest_detections(log);
        long prev = -1;
        for (const auto& d : dl.detections) {
            if (d.frame_index < prev) return false;  // frame order broken
            prev = std::max(prev, d.frame_index);
        }
        // Index body detections by (frame, left, top).
        std::set<std::tuple<long, long, long>> have;
        for (const auto& d : dl.detections) {
            if (d.kind != track::DetectorKind::FullBody) continue;
            have.insert({d.frame_index,
                         static_cast<long>(std::llround(d.box.left * 1000.0)),
                         static_cast<long>(std::llround(d.box.top * 1000.0))});
        }
        auto occluded = [&](int person, long frame) {
            for (const auto& o : truth["occlusions"]) {
                if (o[0].get<std::string>() != cam) continue;
                if (o[1].get<int>() != person) continue;
                if (frame >= o[2].get<long>() && frame <= o[3].get<long>())
                    return true;
            }
            return false;
        };
        for (const auto& tr : truth["truth_tracks"][cam]) {
            int person = tr["person"].get<int>();
            for (const auto& fr : tr["frames"]) {
                long f = fr[0].get<long>();
                if (occluded(person, f)) continue;
                std::tuple<long, long, long> key{
                    f, std::llround(fr[1].get<double>() * 1000.0),
                    std::llround(fr[2].get<double>() * 1000.0)};
                if (!have.count(key)) return false;
            }
        }
    }

    // Every ground-truth count must be backed by crossing geometry in the
    // truth tracks of the owning camera.
    std::int64_t start_epoch = truth["start_epoch_s"].get<std::int64_t>();
    for (const auto& [door, rows] : truth["door_counts"].items()) {
        std::string cam = door == "A" ? "camA" : "camB";
        for (const auto& row : rows) {
            std::int64_t sec = row[0].get<std::int64_t>();
            double t0 = static_cast<double>(sec - start_epoch);
            bool found = false;
            for (const auto& tr : truth["truth_tracks"][cam]) {
                double prev_d = 0.0;
                bool first = true;
                for (const auto& fr : tr["frames"]) {
                    double t = fr[0].get<long>() / fps;
                    if (t < t0 - 2.0 || t > t0 + 3.0) continue;
                    double cx = fr[1].get<double>() + fr[3].get<double>() / 2.0;
                    double d = cx - 320.0;
                    if (!first && prev_d * d < 0.0) {
                        found = true;
                        break;
                    }
                    prev_d = d;
                    first = false;
                }
                if (found) break;
            }
            if (!found) return false;
        }
    }
    return true;
}

}  // namespace busod::sim
