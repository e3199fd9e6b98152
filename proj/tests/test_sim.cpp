#include <doctest.h>

#include <random>
#include <sstream>

#include "f4tele/config.hpp"
#include "f4tele/report.hpp"
#include "f4tele/sim.hpp"

using namespace f4tele;

namespace {

// Two racks, one per set: rack 0 non-hotspot, rack 1 hotspot. With d = 1 s
// rack 0 is served in [0,1), rack 1 in [1,2), and so on.
ValidatedConfig two_racks(const std::string& extra_cluster = "", const std::string& extra_traffic = "") {
    std::istringstream in("[cluster]\nn_data_racks = 2\nbundle_capacity = 1\n" + extra_cluster +
                          "[schedule]\nslot_length = 1\n[traffic]\nlambda_low = 0\nbeta = 0.1\n" + extra_traffic);
    return parse_config(IniDocument::parse(in, "test.ini")).build();
}

ValidatedConfig from_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(IniDocument::parse(in, "test.ini")).build();
}

SimOptions manual(Mode mode, double duration = 10.0) {
    SimOptions o;
    o.mode = mode;
    o.duration = duration;
    o.generate_traffic = false;
    o.trace_service_order = true;
    return o;
}

void check_conservation(const SimReport& r) {
    for (const auto& s : r.per_set) {
        CHECK(s.arrivals == s.served + s.drops_deadline + s.drops_overflow + s.in_system_end);
        CHECK(s.mean_wait >= 0.0);
        CHECK(s.p99_wait >= 0.0);
    }
}

}  // namespace

TEST_CASE("zero arrival rate serves nothing") {
    SimOptions o;
    o.duration = 5.0;
    const auto r = run_simulation(two_racks(), o);
    for (const auto& s : r.per_set) {
        CHECK(s.served == 0);
        CHECK(s.drops_deadline + s.drops_overflow == 0);
        CHECK(s.throughput == 0.0);
    }
}

TEST_CASE("primary overflow during a vacation without loopback") {
    Simulator sim(two_racks("primary_buffer = 100\n"), manual(Mode::F4TelePlus));
    for (int i = 0; i < 150; ++i) sim.inject_packet(1, 0.1 + i * 1e-3);
    sim.run_until(0.9);
    CHECK(sim.primary_size(1) == 100);
    CHECK(sim.report().per_set[1].drops_overflow == 50);
}

TEST_CASE("zero drain rate keeps vacation arrivals in the backup queue") {
    Simulator sim(two_racks("backup_drain_rate = 0\n"), manual(Mode::F4Tele));
    for (int i = 0; i < 20; ++i) sim.inject_packet(1, 0.1 + i * 1e-3);
    sim.run_until(0.9);
    CHECK(sim.backup_size(1) == 20);
    CHECK(sim.primary_size(1) == 0);
    sim.run_until(1.5);
    CHECK(sim.backup_size(1) == 0);
    CHECK(sim.report().per_set[1].served == 20);
}

TEST_CASE("drained backup packets keep arrival order") {
    Simulator sim(two_racks("backup_drain_rate = 1e5\n"), manual(Mode::F4Tele));
    std::vector<std::uint64_t> ids;
    for (int i = 0; i < 30; ++i) ids.push_back(sim.inject_packet(1, 0.1 + i * 1e-2, 1500.0, 1e-3));
    sim.run_until(2.0);
    CHECK(sim.service_order(1) == ids);
}

TEST_CASE("benchmark mirrors never change") {
    Simulator sim(two_racks(), manual(Mode::Benchmark));
    for (double t : {0.5, 1.5, 2.5, 7.5}) {
        sim.run_until(t);
        CHECK(sim.mirror(0) == MirrorState::Transparent);
        CHECK(sim.mirror(1) == MirrorState::Transparent);
    }
}

TEST_CASE("rotation toggles mirrors") {
    Simulator sim(two_racks(), manual(Mode::F4Tele));
    sim.run_until(0.5);
    CHECK(sim.mirror(0) == MirrorState::Transparent);
    CHECK(sim.mirror(1) == MirrorState::Reflective);
    sim.run_until(1.5);
    CHECK(sim.mirror(0) == MirrorState::Reflective);
    CHECK(sim.mirror(1) == MirrorState::Transparent);
}

TEST_CASE("vacation arrivals are served first come first served") {
    for (Mode m : {Mode::F4Tele, Mode::F4TelePlus}) {
        Simulator sim(two_racks(), manual(m));
        const auto a = sim.inject_packet(1, 0.2);
        const auto b = sim.inject_packet(1, 0.3);
        sim.run_until(2.0);
        CHECK(sim.service_order(1) == std::vector<std::uint64_t>{a, b});
    }
}

TEST_CASE("ten packets of a tenth of a slot fit in one slot") {
    Simulator sim(two_racks("backup_drain_rate = 0\n"), manual(Mode::F4Tele));
    for (int i = 0; i < 10; ++i) sim.inject_packet(1, 0.1 + i * 1e-3, 1500.0, 0.1);
    sim.run_until(2.0 + 1e-9);
    CHECK(sim.report().per_set[1].served == 10);
}

TEST_CASE("gated slot end holds a service that would overrun") {
    auto vc = from_text("[cluster]\nn_data_racks = 2\nbundle_capacity = 1\n[schedule]\nslot_length = 1\nslot_end = gated\n"
                        "[traffic]\nlambda_low = 0\nbeta = 0.1\n");
    Simulator sim(vc, manual(Mode::F4TelePlus));
    sim.inject_packet(1, 0.5, 1500.0, 0.6);
    sim.inject_packet(1, 0.6, 1500.0, 0.6);
    sim.run_until(2.0);
    CHECK(sim.report().per_set[1].served == 1);
    sim.run_until(4.0);
    CHECK(sim.report().per_set[1].served == 2);
}

TEST_CASE("deadline drops happen at dequeue") {
    auto vc = two_racks("", "qos_deadline = 0.5\n");
    Simulator sim(vc, manual(Mode::F4TelePlus));
    sim.inject_packet(1, 0.1);  // waits 0.9 s
    sim.inject_packet(1, 0.8);  // waits 0.2 s
    sim.run_until(0.95);
    CHECK(sim.primary_size(1) == 2);
    sim.run_until(2.0);
    const auto r = sim.report();
    CHECK(r.per_set[1].drops_deadline == 1);
    CHECK(r.per_set[1].served == 1);
}

TEST_CASE("infinite deadline never drops for age") {
    SimOptions o;
    o.duration = 20.0;
    const auto r = run_simulation(from_text("[cluster]\nn_data_racks = 8\n[traffic]\nlambda_low = 2000\n"), o);
    for (const auto& s : r.per_set) CHECK(s.drops_deadline == 0);
    check_conservation(r);
}

TEST_CASE("low load sees no deadline drops when the deadline exceeds a full rotation") {
    const auto vc = from_text("[cluster]\nn_data_racks = 24\n[traffic]\nlambda_low = 100\nqos_deadline = 0.2\n");
    SimOptions o;
    o.duration = 20.0;
    const auto r = run_simulation(vc, o);
    for (const auto& s : r.per_set) CHECK(s.drops_deadline == 0);
}

TEST_CASE("same seed gives identical reports, different seeds differ") {
    const auto vc = from_text("[cluster]\nn_data_racks = 8\n[traffic]\nlambda_low = 1000\n");
    SimOptions o;
    o.duration = 3.0;
    const auto a = run_simulation(vc, o), b = run_simulation(vc, o);
    CHECK(sets_csv(a) == sets_csv(b));
    CHECK(report_hash(a) == report_hash(b));
    o.seed = 2;
    CHECK(report_hash(run_simulation(vc, o)) != report_hash(a));
}

TEST_CASE("thinning keeps the requested fraction of arrivals") {
    // Same candidate stream (rate / keep) in both runs.
    const auto full_cfg = from_text("[cluster]\nn_data_racks = 8\n[traffic]\nlambda_low = 1000\n");
    const auto half_cfg = from_text("[cluster]\nn_data_racks = 8\n[traffic]\nlambda_low = 500\n");
    SimOptions o;
    o.duration = 3.0;
    o.mode = Mode::Benchmark;
    const auto full = run_simulation(full_cfg, o);
    o.arrival_keep = 0.5;
    const auto half = run_simulation(half_cfg, o);
    for (std::size_t i = 0; i < full.per_set.size(); ++i) {
        CHECK(half.per_set[i].arrivals < full.per_set[i].arrivals);
        CHECK(static_cast<double>(half.per_set[i].arrivals) ==
              doctest::Approx(0.5 * static_cast<double>(full.per_set[i].arrivals)).epsilon(0.05));
    }
    o.arrival_keep = 0.0;
    CHECK_THROWS_AS(run_simulation(full_cfg, o), std::invalid_argument);
}

TEST_CASE("property: conservation and non-negative waits across random configs and modes") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 12; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 12);
        const int p = 1 + static_cast<int>(rng() % 4);
        std::ostringstream ini;
        ini << "[cluster]\nn_data_racks = " << n << "\nbundle_capacity = " << std::min(p, n)
            << "\nprimary_buffer = " << 5 + rng() % 200 << "\nbackup_buffer = " << rng() % 300
            << "\nbackup_drain_rate = " << (rng() % 2 ? 1e6 : 0.0) << "\n[schedule]\npolicy = round_robin\nslot_length = " << 1e-3 * (1 + rng() % 20)
            << "\n[traffic]\n";
        switch (trial % 3) {
        case 0: ini << "source = poisson\nlambda_low = " << 500 + rng() % 20000 << "\nqos_deadline = 0.01\n"; break;
        case 1: ini << "source = udp\nlambda_low = 2\nflow_size = uniform:1e5,1e6\n"; break;
        default: ini << "source = tcp\nlambda_low = 2\nflow_size = uniform:1e5,1e6\n"; break;
        }
        const auto vc = from_text(ini.str());
        for (Mode m : {Mode::F4Tele, Mode::F4TelePlus, Mode::Benchmark}) {
            SimOptions o;
            o.mode = m;
            o.seed = trial + 1;
            o.duration = 2.0;
            check_conservation(run_simulation(vc, o));
        }
    }
}

TEST_CASE("property: benchmark serves at least as much as F4Tele, which serves at least F4TelePlus") {
    const auto vc = from_text(
        "[cluster]\nn_data_racks = 8\nprimary_buffer = 20\nbackup_buffer = 5000\n"
        "[traffic]\nlambda_low = 20000\n");
    std::uint64_t bench = 0, loop = 0, plus = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        SimOptions o;
        o.seed = seed;
        o.duration = 1.0;
        o.mode = Mode::Benchmark;
        bench += total_served(run_simulation(vc, o));
        o.mode = Mode::F4Tele;
        loop += total_served(run_simulation(vc, o));
        o.mode = Mode::F4TelePlus;
        plus += total_served(run_simulation(vc, o));
    }
    CHECK(bench >= loop);
    CHECK(loop >= plus);
}

TEST_CASE("UDP packets bypass the loopback when filtered") {
    const std::string base =
        "[cluster]\nn_data_racks = 2\nbundle_capacity = 1\nprimary_buffer = 10\nbackup_drain_rate = 0\n"
        "[schedule]\nslot_length = 1\n"
        "[traffic]\nsource = udp\nudp_rate = 1e8\nflow_size = packets:100\nlambda_low = 0.5\nbeta = 0.1\n";
    SimOptions o;
    o.duration = 10.0;
    const auto filtered = run_simulation(from_text(base + "loopback_filter_udp = true\n"), o);
    const auto looped = run_simulation(from_text(base + "loopback_filter_udp = false\n"), o);
    check_conservation(filtered);
    check_conservation(looped);
    std::uint64_t drops_filtered = 0, drops_looped = 0;
    for (const auto& s : filtered.per_set) drops_filtered += s.drops_overflow;
    for (const auto& s : looped.per_set) drops_looped += s.drops_overflow;
    CHECK(drops_filtered > 0);
    CHECK(drops_looped == 0);
}

TEST_CASE("TCP windows are sampled for active flows") {
    const auto vc = load_config(std::string(F4TELE_SOURCE_DIR) + "/configs/tcp_scenario.ini").build();
    SimOptions o;
    o.duration = 3.0;
    o.cwnd_sample_interval = 0.01;
    const auto r = run_simulation(vc, o);
    CHECK_FALSE(r.cwnd_low.empty());
    CHECK_FALSE(r.cwnd_ack_low.empty());
    for (double w : r.cwnd_ack_low) CHECK((w >= 1.0 && w <= 256.0));
    CHECK_FALSE(r.per_flow.empty());
    check_conservation(r);
}
