#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <vector>

#include "busod/odmatrix.hpp"

using namespace busod;
using namespace busod::od;

namespace {

tele::StopEvent stop_window(const std::string& id, double t0_s, double t1_s,
                            tele::StopKind kind = tele::StopKind::Official) {
    tele::StopEvent s;
    s.kind = kind;
    s.stop_id = id;
    s.t_start_ms = static_cast<std::int64_t>(t0_s * 1000.0);
    s.t_end_ms = static_cast<std::int64_t>(t1_s * 1000.0);
    return s;
}

count::RoiEvent event(double t_s, count::Direction dir) {
    count::RoiEvent ev;
    ev.camera_id = "camA";
    ev.direction = dir;
    ev.resolved_time_ms = static_cast<std::int64_t>(t_s * 1000.0);
    return ev;
}

tele::StopRegistry registry() {
    return tele::StopRegistry{{{"A", "A", 51.05, 3.70},
                               {"B", "B", 51.05, 3.71},
                               {"C", "C", 51.05, 3.72}}};
}

}  // namespace

TEST_CASE("event attribution to stop windows") {
    std::vector<tele::StopEvent> stops{stop_window("A", 100, 130),
                                       stop_window("B", 300, 330)};
    CHECK(*attribute_event_to_stop(event(110, count::Direction::In), stops,
                                   10.0) == "A");
    // In the slack tail of A, 5 s past its end.
    CHECK(*attribute_event_to_stop(event(135, count::Direction::In), stops,
                                   10.0) == "A");
    // 100 s from any window with 10 s slack: unattributed.
    CHECK_FALSE(attribute_event_to_stop(event(230, count::Direction::In),
                                        stops, 10.0)
                    .has_value());
}

TEST_CASE("overlapping slack windows resolve to the closer midpoint") {
    // A ends at 200, B starts at 210; with 20 s slack both cover t=205.
    std::vector<tele::StopEvent> stops{stop_window("A", 170, 200),
                                       stop_window("B", 210, 240)};
    // Midpoints: A=185, B=225. t=204 is 19 s from A, 21 s from B.
    CHECK(*attribute_event_to_stop(event(204, count::Direction::In), stops,
                                   20.0) == "A");
    // t=206 is 21 s from A, 19 s from B.
    CHECK(*attribute_event_to_stop(event(206, count::Direction::Out), stops,
                                   20.0) == "B");
}

TEST_CASE("journeys from attributed In/Out pairs") {
    std::vector<tele::StopEvent> stops{stop_window("A", 100, 130),
                                       stop_window("B", 300, 330),
                                       stop_window("C", 500, 530)};
    OdConfig cfg;
    int ub = 0, ua = 0;

    std::map<int, std::vector<count::RoiEvent>> events{
        {1, {event(110, count::Direction::In),
             event(510, count::Direction::Out)}}};
    auto journeys = build_journeys(events, stops, cfg, ub, ua);
    REQUIRE(journeys.size() == 1);
    CHECK(journeys[0].global_id == 1);
    CHECK(journeys[0].board_stop == "A");
    CHECK(*journeys[0].alight_stop == "C");
    CHECK(journeys[0].board_time_ms < journeys[0].alight_time_ms);
    CHECK(ub == 0);
    CHECK(ua == 0);
}

TEST_CASE("boarding without alighting stays open") {
    std::vector<tele::StopEvent> stops{stop_window("A", 100, 130)};
    int ub = 0, ua = 0;
    std::map<int, std::vector<count::RoiEvent>> events{
        {3, {event(110, count::Direction::In)}}};
    auto journeys = build_journeys(events, stops, OdConfig{}, ub, ua);
    REQUIRE(journeys.size() == 1);
    CHECK_FALSE(journeys[0].alight_stop.has_value());
    CHECK(ub == 1);
    CHECK(ua == 0);
}

TEST_CASE("alighting without boarding counts as unmatched") {
    std::vector<tele::StopEvent> stops{stop_window("B", 300, 330)};
    int ub = 0, ua = 0;
    std::map<int, std::vector<count::RoiEvent>> events{
        {4, {event(310, count::Direction::Out)}}};
    CHECK(build_journeys(events, stops, OdConfig{}, ub, ua).empty());
    CHECK(ua == 1);
}

TEST_CASE("same-stop journeys are permitted and flagged") {
    std::vector<tele::StopEvent> stops{stop_window("A", 100, 160)};
    int ub = 0, ua = 0;
    std::map<int, std::vector<count::RoiEvent>> events{
        {5, {event(110, count::Direction::In),
             event(150, count::Direction::Out)}}};
    auto journeys = build_journeys(events, stops, OdConfig{}, ub, ua);
    REQUIRE(journeys.size() == 1);
    CHECK(journeys[0].board_stop == "A");
    CHECK(*journeys[0].alight_stop == "A");

    auto m = build_matrix(journeys, registry(), stops);
    CHECK(m.counts.at({"A", "A"}) == 1);
    CHECK(m.same_stop_journeys == 1);
}

TEST_CASE("re-boarding splits into multiple journeys") {
    std::vector<tele::StopEvent> stops{stop_window("A", 100, 130),
                                       stop_window("B", 300, 330),
                                       stop_window("C", 500, 530)};
    int ub = 0, ua = 0;
    std::map<int, std::vector<count::RoiEvent>> events{
        {6, {event(110, count::Direction::In),
             event(310, count::Direction::Out),
             event(320, count::Direction::In),
             event(510, count::Direction::Out)}}};
    auto journeys = build_journeys(events, stops, OdConfig{}, ub, ua);
    REQUIRE(journeys.size() == 2);
    CHECK(journeys[0].board_stop == "A");
    CHECK(*journeys[0].alight_stop == "B");
    CHECK(journeys[1].board_stop == "B");
    CHECK(*journeys[1].alight_stop == "C");
}

TEST_CASE("matrix construction and hand tallies") {
    auto reg = registry();
    std::vector<tele::StopEvent> stops{
        stop_window("A", 100, 130), stop_window("B", 300, 330),
        stop_window("ILLEGAL-1", 400, 420, tele::StopKind::Illegal),
        stop_window("C", 500, 530)};

    SUBCASE("single journey") {
        std::vector<Journey> js{{1, "A", "B", 110000, 310000}};
        auto m = build_matrix(js, reg, stops);
        CHECK(m.counts.size() == 1);
        CHECK(m.counts.at({"A", "B"}) == 1);
        CHECK(m.total_mass() == 1);
    }

    SUBCASE("zero journeys give an all-zero matrix") {
        auto m = build_matrix({}, reg, stops);
        CHECK(m.counts.empty());
        CHECK(m.total_mass() == 0);
        // Stop universe: registry order, then illegal ids.
        REQUIRE(m.stop_ids.size() == 4);
        CHECK(m.stop_ids[0] == "A");
        CHECK(m.stop_ids[3] == "ILLEGAL-1");
    }

    SUBCASE("five journeys including an illegal origin") {
        std::vector<Journey> js{{1, "A", "B", 0, 1},
                                {2, "A", "B", 0, 1},
                                {3, "A", "C", 0, 1},
                                {4, "ILLEGAL-1", "C", 0, 1},
                                {5, "B", "C", 0, 1}};
        auto m = build_matrix(js, reg, stops);
        CHECK(m.counts.at({"A", "B"}) == 2);
        CHECK(m.counts.at({"A", "C"}) == 1);
        CHECK(m.counts.at({"ILLEGAL-1", "C"}) == 1);
        CHECK(m.counts.at({"B", "C"}) == 1);
        CHECK(m.total_mass() == 5);
    }
}

TEST_CASE("identity order does not change the matrix") {
    std::vector<tele::StopEvent> stops{stop_window("A", 100, 130),
                                       stop_window("B", 300, 330)};
    OdConfig cfg;
    std::map<int, std::vector<count::RoiEvent>> forward{
        {1, {event(110, count::Direction::In),
             event(310, count::Direction::Out)}},
        {2, {event(112, count::Direction::In),
             event(312, count::Direction::Out)}}};
    std::map<int, std::vector<count::RoiEvent>> reversed{
        {2, forward.at(2)}, {1, forward.at(1)}};
    int ub1 = 0, ua1 = 0, ub2 = 0, ua2 = 0;
    auto m1 = build_matrix(build_journeys(forward, stops, cfg, ub1, ua1),
                           registry(), stops);
    auto m2 = build_matrix(build_journeys(reversed, stops, cfg, ub2, ua2),
                           registry(), stops);
    CHECK(m1.counts == m2.counts);
}

TEST_CASE("matrix mass plus open boardings equals In-bearing identities") {
    std::vector<tele::StopEvent> stops{stop_window("A", 100, 130),
                                       stop_window("B", 300, 330)};
    int ub = 0, ua = 0;
    std::map<int, std::vector<count::RoiEvent>> events{
        {1, {event(110, count::Direction::In),
             event(310, count::Direction::Out)}},
        {2, {event(112, count::Direction::In)}},
        {3, {event(114, count::Direction::In),
             event(314, count::Direction::Out)}},
    };
    auto journeys = build_journeys(events, stops, OdConfig{}, ub, ua);
    auto m = build_matrix(journeys, registry(), stops);
    CHECK(m.total_mass() + ub == 3);
}
