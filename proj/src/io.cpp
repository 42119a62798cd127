#include "busod/io.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "busod/errors.hpp"

namespace busod::io {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream iss(line);
    while (std::getline(iss, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open file: " + path.string());
    return f;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write file: " + path.string());
    return f;
}

// Fixed-precision float formatting keeps emitted files byte-stable.
std::string fmt(double v, int prec = 6) {
    std::ostringstream oss;
    oss << std::fixed << std::setprecision(prec) << v;
    return oss.str();
}

}  // namespace

DetectionLog ingest_detections(const std::filesystem::path& path) {
    std::ifstream f = open_in(path);
    DetectionLog log;
    std::string line;
    long lineno = 0;
    std::size_t emb_dim = 0;
    bool have_dim = false;
    long last_stamp_frame = -1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw InputSchemaError(path.string() + ":" + std::to_string(lineno) +
                                   ": malformed JSON: " + e.what());
        }
        try {
            track::Detection d;
            d.frame_index = j.at("frame").get<long>();
            d.camera_id = j.at("cam").get<std::string>();
            std::string kind = j.at("kind").get<std::string>();
            if (kind == "body") {
                d.kind = track::DetectorKind::FullBody;
            } else if (kind == "head") {
                d.kind = track::DetectorKind::HeadOnly;
            } else {
                throw InputSchemaError("unknown detector kind: " + kind);
            }
            auto box = j.at("box");
            d.box = {box.at(0).get<double>(), box.at(1).get<double>(),
                     box.at(2).get<double>(), box.at(3).get<double>()};
            d.confidence = j.at("conf").get<double>();
            d.embedding = j.at("emb").get<std::vector<double>>();
            if (!have_dim) {
                emb_dim = d.embedding.size();
                have_dim = true;
            } else if (d.embedding.size() != emb_dim) {
                throw InputSchemaError(
                    path.string() + ":" + std::to_string(lineno) +
                    ": embedding dimension drift (" +
                    std::to_string(d.embedding.size()) + " vs " +
                    std::to_string(emb_dim) + ")");
            }
            if (d.frame_index != last_stamp_frame) {
                timeline::FrameStamp st;
                st.frame_index = d.frame_index;
                st.overlay = j.at("ts").get<std::string>();
                log.stamps.push_back(st);
                last_stamp_frame = d.frame_index;
            }
            log.detections.push_back(std::move(d));
        } catch (const json::exception& e) {
            throw InputSchemaError(path.string() + ":" + std::to_string(lineno) +
                                   ": bad record: " + e.what());
        }
    }
    return log;
}

void write_detections(const std::filesystem::path& path,
                      const std::vector<track::Detection>& dets,
                      const std::vector<timeline::FrameStamp>& stamps) {
    std::map<long, const std::string*> overlay_of;
    for (const auto& s : stamps) overlay_of[s.frame_index] = &s.overlay;
    std::ofstream f = open_out(path);
    for (const track::Detection& d : dets) {
        json j;
        j["frame"] = d.frame_index;
        auto it = overlay_of.find(d.frame_index);
        j["ts"] = it != overlay_of.end() ? *it->second : std::string();
        j["cam"] = d.camera_id;
        j["kind"] = d.kind == track::DetectorKind::FullBody ? "body" : "head";
        j["box"] = {d.box.left, d.box.top, d.box.width, d.box.height};
        j["conf"] = d.confidence;
        j["emb"] = d.embedding;
        f << j.dump() << "\n";
    }
}

std::vector<count::DoorStateSample> read_door_csv(
    const std::filesystem::path& path) {
    std::ifstream f = open_in(path);
    std::vector<count::DoorStateSample> out;
    std::string line;
    long lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (lineno == 1 && line.rfind("time_ms", 0) == 0) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 3)
            throw InputSchemaError(path.string() + ":" + std::to_string(lineno) +
                                   ": expected time_ms,door_id,open");
        count::DoorStateSample s;
        s.time_ms = std::stoll(cells[0]);
        s.door_id = cells[1];
        s.open = cells[2] == "1";
        out.push_back(std::move(s));
    }
    return out;
}

void write_door_csv(const std::filesystem::path& path,
                    const std::vector<count::DoorStateSample>& samples) {
    std::ofstream f = open_out(path);
    f << "time_ms,door_id,open\n";
    for (const auto& s : samples)
        f << s.time_ms << "," << s.door_id << "," << (s.open ? 1 : 0) << "\n";
}

std::vector<tele::TelematicsSample> read_telematics_csv(
    const std::filesystem::path& path) {
    std::ifstream f = open_in(path);
    std::vector<tele::TelematicsSample> out;
    std::string line;
    long lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (lineno == 1 && line.rfind("time_ms", 0) == 0) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 5 && cells.size() != 6)
            throw InputSchemaError(
                path.string() + ":" + std::to_string(lineno) +
                ": expected time_ms,speed_kmh,lat,lon,odometer_km[,door_open]");
        tele::TelematicsSample s;
        try {
            s.time_ms = std::stoll(cells[0]);
            s.speed_kmh = std::stod(cells[1]);
            s.lat = std::stod(cells[2]);
            s.lon = std::stod(cells[3]);
            s.odometer_km = std::stod(cells[4]);
            if (cells.size() == 6 && !cells[5].empty())
                s.door_open = cells[5] == "1";
        } catch (const std::exception&) {
            throw InputSchemaError(path.string() + ":" + std::to_string(lineno) +
                                   ": bad numeric field");
        }
        if (!out.empty() && s.time_ms <= out.back().time_ms)
            throw DataError(path.string() + ":" + std::to_string(lineno) +
                            ": telematics time not strictly increasing");
        out.push_back(std::move(s));
    }
    return out;
}

void write_telematics_csv(const std::filesystem::path& path,
                          const std::vector<tele::TelematicsSample>& samples) {
    std::ofstream f = open_out(path);
    f << "time_ms,speed_kmh,lat,lon,odometer_km,door_open\n";
    for (const auto& s : samples) {
        f << s.time_ms << "," << fmt(s.speed_kmh, 3) << "," << fmt(s.lat, 7)
          << "," << fmt(s.lon, 7) << "," << fmt(s.odometer_km, 4) << ",";
        if (s.door_open) f << (*s.door_open ? 1 : 0);
        f << "\n";
    }
}

tele::StopRegistry read_stop_registry(const std::filesystem::path& path) {
    std::ifstream f = open_in(path);
    tele::StopRegistry reg;
    std::string line;
    long lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (lineno == 1 && line.rfind("stop_id", 0) == 0) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 4)
            throw InputSchemaError(path.string() + ":" + std::to_string(lineno) +
                                   ": expected stop_id,name,lat,lon");
        tele::Stop s;
        s.stop_id = cells[0];
        s.name = cells[1];
        s.lat = std::stod(cells[2]);
        s.lon = std::stod(cells[3]);
        for (const auto& other : reg.stops)
            if (other.stop_id == s.stop_id)
                throw ConfigError("duplicate stop_id: " + s.stop_id);
        reg.stops.push_back(std::move(s));
    }
    return reg;
}

void write_stop_registry(const std::filesystem::path& path,
                         const tele::StopRegistry& registry) {
    std::ofstream f = open_out(path);
    f << "stop_id,name,lat,lon\n";
    for (const auto& s : registry.stops)
        f << s.stop_id << "," << s.name << "," << fmt(s.lat, 7) << ","
          << fmt(s.lon, 7) << "\n";
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open file: " + path.string());
    std::ostringstream oss;
    oss << f.rdbuf();
    return oss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write file: " + path.string());
    f << content;
}

std::string digest_hex(const std::string& content) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : content) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream oss;
    oss << std::hex << std::setw(16) << std::setfill('0') << h;
    return oss.str();
}

}  // namespace busod::io
