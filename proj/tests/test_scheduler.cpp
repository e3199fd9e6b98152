#include <doctest.h>

#include <random>
#include <set>

#include "f4tele/scheduler.hpp"

using namespace f4tele;

namespace {

std::vector<int> hot_tail(int n, int count) {
    std::vector<int> h;
    for (int r = n - count; r < n; ++r) h.push_back(r);
    return h;
}

}  // namespace

TEST_CASE("partition without hotspots") {
    const auto p = partition_racks(20, 4, {});
    CHECK(p.k_total == 5);
    CHECK(p.k_hot == 0);
    for (const auto& s : p.sets) CHECK(s.rack_ids.size() == 4);
}

TEST_CASE("single rack forms one set") {
    const auto p = partition_racks(1, 4, {});
    REQUIRE(p.sets.size() == 1);
    CHECK(p.sets[0].rack_ids == std::vector<int>{0});
}

TEST_CASE("24 racks with four hotspot racks") {
    const auto p = partition_racks(24, 4, hot_tail(24, 4));
    CHECK(p.k_low == 5);
    CHECK(p.k_hot == 1);
    CHECK(p.sets.back().klass == RackClass::Hotspot);
    CHECK(p.sets.back().rack_ids == std::vector<int>{20, 21, 22, 23});
}

TEST_CASE("partition rejects bad capacity and rack ids") {
    CHECK_THROWS_AS(partition_racks(4, 0, {}), SchedulerError);
    CHECK_THROWS_AS(partition_racks(0, 2, {}), SchedulerError);
    CHECK_THROWS_AS(partition_racks(4, 2, {7}), SchedulerError);
}

TEST_CASE("interleaved cycle for three low sets and one hotspot set") {
    const auto p = partition_racks(4, 1, {3});
    const auto s = build_schedule(p, 0.01, InterleavedHotspot{});
    CHECK(s.slots == std::vector<int>{0, 3, 1, 3, 2, 3});
    CHECK(s.tau == doctest::Approx(0.06));
}

TEST_CASE("smallest interleaving") {
    const auto s = build_schedule(partition_racks(2, 1, {1}), 0.01, InterleavedHotspot{});
    CHECK(s.slots == std::vector<int>{0, 1});
    CHECK(s.tau == doctest::Approx(0.02));
}

TEST_CASE("five low sets and one hotspot set at 10 ms") {
    const auto s = build_schedule(partition_racks(24, 4, hot_tail(24, 4)), 0.01, InterleavedHotspot{});
    CHECK(s.slots.size() == 10);
    CHECK(s.tau == doctest::Approx(0.1));
    CHECK(s.tau_hot == doctest::Approx(0.01));
    CHECK(s.service_share(5) == doctest::Approx(0.5));
}

TEST_CASE("interleaving needs both classes") {
    CHECK_THROWS_AS(build_schedule(partition_racks(4, 1, {}), 0.01, InterleavedHotspot{}), SchedulerError);
    CHECK_THROWS_AS(build_schedule(partition_racks(4, 1, {3}), 0.0, RoundRobin{}), SchedulerError);
    CHECK_THROWS_AS(build_schedule(partition_racks(4, 1, {3}), 0.01, CustomSlots{{0, 1, 2}}), SchedulerError);
}

TEST_CASE("stability examples") {
    const auto p = partition_racks(4, 1, {3});
    const auto s = build_schedule(p, 0.01, InterleavedHotspot{});
    TrafficProfile t;
    const auto svc = deterministic_service(1e-3);

    t.lambda_low = 0;
    t.lambda_hot = 0;
    const auto idle = stability_check(s, t, svc, p);
    CHECK(idle.stable);
    for (const auto& set : idle.sets) CHECK(set.effective_utilization == 0.0);

    t.lambda_low = 100;
    t.lambda_hot = 600;
    const auto hot = stability_check(s, t, svc, p);
    CHECK(hot.sets[3].effective_utilization == doctest::Approx(1.2));
    CHECK_FALSE(hot.sets[3].stable);
    CHECK_FALSE(hot.stable);

    const auto dedicated = stability_check_dedicated(t, svc, p);
    CHECK(dedicated.sets[0].effective_utilization == doctest::Approx(0.1));
}

TEST_CASE("property: generated schedules keep their invariants") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        const int p_cap = 1 + static_cast<int>(rng() % 4);
        const int n = 2 + static_cast<int>(rng() % 40);
        const int hot = static_cast<int>(rng() % static_cast<unsigned>(n));
        const auto part = partition_racks(n, p_cap, hot_tail(n, hot));
        const auto again = partition_racks(n, p_cap, hot_tail(n, hot));
        REQUIRE(part.sets.size() == again.sets.size());
        for (std::size_t i = 0; i < part.sets.size(); ++i) CHECK(part.sets[i].rack_ids == again.sets[i].rack_ids);

        std::set<int> seen;
        for (const auto& s : part.sets) {
            CHECK(static_cast<int>(s.rack_ids.size()) <= p_cap);
            for (int r : s.rack_ids) CHECK(seen.insert(r).second);
        }
        CHECK(static_cast<int>(seen.size()) == n);

        const double d = 0.001 * (1 + static_cast<int>(rng() % 100));
        SchedulePolicy policy = RoundRobin{};
        if (part.k_hot > 0 && part.k_low > 0) policy = InterleavedHotspot{};
        const auto s = build_schedule(part, d, policy);
        CHECK(s.tau == doctest::Approx(s.slots.size() * d));
        CHECK(s.tau_hot <= s.tau_max + 1e-12);
        CHECK(s.tau_max < s.tau + d);
        if (std::holds_alternative<InterleavedHotspot>(policy)) {
            double hot_share = 0.0;
            for (const auto& set : part.sets)
                if (set.klass == RackClass::Hotspot) hot_share += s.service_share(set.set_id);
            CHECK(hot_share == doctest::Approx(0.5).epsilon(1e-12));
        }
    }
}
