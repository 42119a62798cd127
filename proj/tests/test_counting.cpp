#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "busod/counting.hpp"
#include "busod/errors.hpp"
#include "busod/geometry.hpp"
#include "busod/tracking.hpp"

using namespace busod;
using namespace busod::count;

namespace {

// Door line along y=0, interior above it; distances below are center-y values.
geom::Roi test_roi(bool with_queue = false) {
    geom::Roi roi;
    roi.polygon = {{-50, -50}, {50, -50}, {50, 50}, {-50, 50}};
    roi.door_line = geom::DoorLine{{0, 0}, {10, 0}, geom::HalfPlane::Positive};
    if (with_queue)
        roi.queue_region = std::vector<geom::Point2>{
            {-50, -40}, {50, -40}, {50, -5}, {-50, -5}};
    return roi;
}

track::Tracklet track_at_distances(const std::vector<double>& dists) {
    track::Tracklet t;
    t.local_id = 1;
    t.camera_id = "camA";
    for (size_t i = 0; i < dists.size(); ++i) {
        track::Detection d;
        d.camera_id = "camA";
        d.frame_index = static_cast<long>(i);
        d.box = {3.0, dists[i] - 2.0, 4.0, 4.0};  // center y = dists[i]
        d.embedding = {1.0};
        t.detections.push_back(d);
    }
    t.ema_embedding = {1.0};
    t.last_frame = static_cast<long>(dists.size()) - 1;
    return t;
}

std::int64_t frame_ms(long frame) { return frame * 40; }  // 25 fps clock

RoiEvent event_at(std::int64_t ms, Direction dir) {
    RoiEvent ev;
    ev.camera_id = "camA";
    ev.local_id = 1;
    ev.direction = dir;
    ev.resolved_time_ms = ms;
    return ev;
}

}  // namespace

TEST_CASE("sustained sign change emits one In at the first new-side frame") {
    auto events =
        detect_crossings(track_at_distances({-5, -2, 1, 3, 4}), test_roi(),
                         CountingConfig{}, frame_ms);
    REQUIRE(events.size() == 1);
    CHECK(events[0].direction == Direction::In);
    CHECK(events[0].frame_index == 2);  // the +1 sample
    CHECK(events[0].resolved_time_ms == 80);
}

TEST_CASE("flicker shorter than hysteresis emits nothing") {
    auto events =
        detect_crossings(track_at_distances({-5, 1, -4, -4, -4}), test_roi(),
                         CountingConfig{}, frame_ms);
    CHECK(events.empty());
}

TEST_CASE("inbound then outbound emits an alternating In/Out pair") {
    auto events = detect_crossings(
        track_at_distances({-3, -1, 2, 4, 4, 1, -2, -5, -5}), test_roi(),
        CountingConfig{}, frame_ms);
    REQUIRE(events.size() == 2);
    CHECK(events[0].direction == Direction::In);
    CHECK(events[0].frame_index == 2);
    CHECK(events[1].direction == Direction::Out);
    CHECK(events[1].frame_index == 6);
}

TEST_CASE("crossing pending at track end is confirmed") {
    // Two frames on the new side, then the person leaves the camera; the run
    // cannot flicker back, so the In stands.
    auto events = detect_crossings(track_at_distances({-5, -2, 1, 3}),
                                   test_roi(), CountingConfig{}, frame_ms);
    REQUIRE(events.size() == 1);
    CHECK(events[0].direction == Direction::In);
    CHECK(events[0].frame_index == 2);
}

TEST_CASE("events from one tracklet alternate in direction") {
    auto events = detect_crossings(
        track_at_distances({-3, 2, 3, 4, -2, -3, -4, 3, 3, 3, -4, -4, -4}),
        test_roi(), CountingConfig{}, frame_ms);
    REQUIRE(events.size() >= 2);
    for (size_t i = 1; i < events.size(); ++i)
        CHECK(events[i].direction != events[i - 1].direction);
}

TEST_CASE("short tracklets produce no events") {
    CHECK(detect_crossings(track_at_distances({-5}), test_roi(),
                           CountingConfig{}, frame_ms)
              .empty());
}

TEST_CASE("baseline policy is the identity filter") {
    CHECK(apply_baseline({}).empty());
    std::vector<RoiEvent> events{event_at(1000, Direction::In),
                                 event_at(5000, Direction::Out)};
    auto out = apply_baseline(events);
    REQUIRE(out.size() == 2);
    CHECK(out[0].resolved_time_ms == 1000);
    // The documented failure mode: door-closed events pass through untouched.
    CHECK(out[1].direction == Direction::Out);
}

TEST_CASE("door-state filter keeps only door-open events") {
    DoorTimeline door({{1000, "A", true}, {10000, "A", false}});
    CountingConfig cfg;
    std::vector<RoiEvent> events{
        event_at(5000, Direction::In),    // door open
        event_at(11000, Direction::Out),  // 1 s after close, inside grace
        event_at(500, Direction::In),     // before first sample: closed
    };
    auto kept = apply_door_state(events, door, cfg);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].resolved_time_ms == 5000);

    DoorTimeline no_data;
    CHECK(apply_door_state(events, no_data, cfg).empty());
}

TEST_CASE("door-state output is a subset of its input") {
    DoorTimeline door({{0, "A", true}, {4000, "A", false}, {9000, "A", true}});
    std::vector<RoiEvent> events;
    for (int i = 0; i < 20; ++i)
        events.push_back(event_at(i * 700, i % 2 ? Direction::In
                                                 : Direction::Out));
    auto kept = apply_door_state(events, door, CountingConfig{});
    CHECK(kept.size() <= events.size());
    for (const RoiEvent& ev : kept) CHECK(door.open_at(ev.resolved_time_ms));
}

TEST_CASE("detector selection switches strictly above five") {
    CountingConfig cfg;
    CHECK(select_detector(3, cfg) == track::DetectorKind::FullBody);
    CHECK(select_detector(5, cfg) == track::DetectorKind::FullBody);
    CHECK(select_detector(6, cfg) == track::DetectorKind::HeadOnly);
    int full = 0, head = 0;
    for (int occ = 0; occ <= 10; ++occ)
        (select_detector(occ, cfg) == track::DetectorKind::FullBody ? full
                                                                    : head)++;
    CHECK(full == 6);
    CHECK(head == 5);
}

TEST_CASE("queue-aware policy requires a queue region") {
    auto t = track_at_distances({-10, -10, 2, 3, 4});
    DoorTimeline door({{0, "A", true}});
    CHECK_THROWS_AS(apply_queue_aware({}, t, test_roi(false), door,
                                      CountingConfig{}, frame_ms),
                    MissingQueueRegion);
}

TEST_CASE("queue-aware In needs recent queue presence") {
    geom::Roi roi = test_roi(true);
    DoorTimeline door({{0, "A", true}});
    CountingConfig cfg;

    // Waits in the queue band (y=-10), then crosses inward.
    auto queued = track_at_distances({-10, -10, -10, 2, 3, 4});
    auto events = detect_crossings(queued, roi, cfg, frame_ms);
    REQUIRE(events.size() == 1);
    CHECK(apply_queue_aware(events, queued, roi, door, cfg, frame_ms).size() ==
          1);

    // Same geometry with the door closed: suppressed.
    DoorTimeline closed;
    CHECK(apply_queue_aware(events, queued, roi, closed, cfg, frame_ms)
              .empty());

    // Approaches from just outside the line without ever entering the queue
    // band (y=-2 is outside the band, which starts at y=-5): In suppressed.
    auto skipped = track_at_distances({-2, -2, -2, 2, 3, 4});
    auto ev2 = detect_crossings(skipped, roi, cfg, frame_ms);
    REQUIRE(ev2.size() == 1);
    CHECK(apply_queue_aware(ev2, skipped, roi, door, cfg, frame_ms).empty());
}

TEST_CASE("queue-aware Out needs the exterior region after the crossing") {
    geom::Roi roi = test_roi(true);
    DoorTimeline door({{0, "A", true}});
    CountingConfig cfg;

    // Leaves the bus and walks away through the queue band: kept.
    auto leaves = track_at_distances({5, 4, -2, -6, -10, -15});
    auto events = detect_crossings(leaves, roi, cfg, frame_ms);
    REQUIRE(events.size() == 1);
    REQUIRE(events[0].direction == Direction::Out);
    CHECK(apply_queue_aware(events, leaves, roi, door, cfg, frame_ms).size() ==
          1);

    // Hovers just outside the line, never reaching the exterior band.
    auto hovers = track_at_distances({5, 4, -1, -2, -2, -2});
    auto ev2 = detect_crossings(hovers, roi, cfg, frame_ms);
    REQUIRE(ev2.size() == 1);
    CHECK(apply_queue_aware(ev2, hovers, roi, door, cfg, frame_ms).empty());
}

TEST_CASE("queued person who never crosses produces zero events") {
    geom::Roi roi = test_roi(true);
    auto waiting = track_at_distances({-10, -11, -10, -12, -10, -11});
    CHECK(detect_crossings(waiting, roi, CountingConfig{}, frame_ms).empty());
}

TEST_CASE("per-second tallies") {
    CHECK(per_second_counts({}).empty());

    std::vector<RoiEvent> events{event_at(2100, Direction::In),
                                 event_at(2500, Direction::In),
                                 event_at(2900, Direction::Out)};
    auto counts = per_second_counts(events);
    REQUIRE(counts.size() == 1);
    CHECK(counts.at(2) == std::pair<int, int>{2, 1});

    events.push_back(event_at(4000, Direction::Out));
    events.push_back(event_at(7350, Direction::In));
    counts = per_second_counts(events);
    REQUIRE(counts.size() == 3);
    CHECK(counts.at(4) == std::pair<int, int>{0, 1});
    CHECK(counts.at(7) == std::pair<int, int>{1, 0});
}
