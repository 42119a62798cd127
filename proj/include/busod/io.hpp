#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "busod/counting.hpp"
#include "busod/telematics.hpp"
#include "busod/timeline.hpp"
#include "busod/tracking.hpp"

namespace busod::io {

struct DetectionLog {
    std::vector<track::Detection> detections;  // frame order as read
    std::vector<timeline::FrameStamp> stamps;  // one per distinct frame
};

// JSON-lines, one detection per line:
//   {"frame":0,"ts":"2025-03-26 07:00:00","cam":"camA","kind":"body",
//    "box":[l,t,w,h],"conf":0.9,"emb":[...]}
// Rejects embedding dimension drift and malformed lines with a line number.
DetectionLog ingest_detections(const std::filesystem::path& path);
void write_detections(const std::filesystem::path& path,
                      const std::vector<track::Detection>& dets,
                      const std::vector<timeline::FrameStamp>& stamps);

// door CSV: time_ms,door_id,open
std::vector<count::DoorStateSample> read_door_csv(
    const std::filesystem::path& path);
void write_door_csv(const std::filesystem::path& path,
                    const std::vector<count::DoorStateSample>& samples);

// telematics CSV: time_ms,speed_kmh,lat,lon,odometer_km[,door_open]
std::vector<tele::TelematicsSample> read_telematics_csv(
    const std::filesystem::path& path);
void write_telematics_csv(const std::filesystem::path& path,
                          const std::vector<tele::TelematicsSample>& samples);

// stop registry CSV: stop_id,name,lat,lon
tele::StopRegistry read_stop_registry(const std::filesystem::path& path);
void write_stop_registry(const std::filesystem::path& path,
                         const tele::StopRegistry& registry);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

// FNV-1a 64-bit content digest, hex-encoded; used in run manifests.
std::string digest_hex(const std::string& content);

}  // namespace busod::io
