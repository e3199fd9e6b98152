#include <doctest.h>

#include <sstream>

#include "f4tele/config.hpp"

using namespace f4tele;

namespace {

ExperimentConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(IniDocument::parse(in, "test.ini"));
}

}  // namespace

TEST_CASE("canonical config file loads and builds") {
    const auto cfg = load_config(std::string(F4TELE_SOURCE_DIR) + "/configs/canonical.ini");
    const auto vc = cfg.build();
    CHECK(vc.cluster().n_data_racks == 24);
    CHECK(vc.partition().k_low == 5);
    CHECK(vc.partition().k_hot == 1);
    CHECK(vc.schedule().slots.size() == 10);
    CHECK(vc.traffic().lambda_hot == doctest::Approx(30000));
}

TEST_CASE("defaults fill unspecified keys") {
    const auto cfg = parse("[cluster]\nn_data_racks = 8\nbundle_capacity = 4\n");
    CHECK(cfg.slot_length == doctest::Approx(0.01));
    CHECK(cfg.traffic.beta == doctest::Approx(0.1));
    CHECK(cfg.traffic.lambda_hot == doctest::Approx(500));
    CHECK(cfg.effective_service().mean_service == doctest::Approx(1500 * 8 / 1e9));
    CHECK(cfg.cluster.backup_drain_rate == doctest::Approx(1e7));
    CHECK_NOTHROW(cfg.build());
}

TEST_CASE("unknown keys and malformed values carry the line number") {
    try {
        parse("[cluster]\nn_data_racks = 8\nspeed = 3\n");
        FAIL("expected ConfigParseError");
    } catch (const ConfigParseError& e) {
        CHECK(e.line() == 3);
        CHECK(e.key().find("speed") != std::string::npos);
    }
    CHECK_THROWS_AS(parse("[cluster]\nfso_rate = fast\n"), ConfigParseError);
    CHECK_THROWS_AS(parse("[schedule]\npolicy = random\n"), ConfigParseError);
    CHECK_THROWS_AS(parse("[traffic]\nflow_size = uniform:3\n"), ConfigParseError);
}

TEST_CASE("capacity above rack count names the invariant") {
    const auto cfg = parse("[cluster]\nn_data_racks = 2\nbundle_capacity = 4\n");
    try {
        cfg.build();
        FAIL("expected ConfigViolation");
    } catch (const ConfigViolation& e) {
        bool named = false;
        for (const auto& v : e.violations()) named = named || v.find("bundle_capacity") != std::string::npos;
        CHECK(named);
    }
}

TEST_CASE("explicit sets and custom slots") {
    const auto cfg = parse(
        "[cluster]\nn_data_racks = 4\nbundle_capacity = 2\n"
        "[partition]\nsets = 0,1 | 2,3\nhot_set_ids = 1\n"
        "[schedule]\npolicy = custom\nslots = 0,1,1\n");
    const auto vc = cfg.build();
    CHECK(vc.partition().k_hot == 1);
    CHECK(vc.schedule().slots == std::vector<int>{0, 1, 1});
}

TEST_CASE("transport sources parse") {
    const auto tcp = parse("[traffic]\nsource = tcp\nflow_size = uniform:1e6,1e7\ntcp_rtt = 2e-3\n");
    const auto* a = std::get_if<TcpAimd>(&tcp.traffic.source_type);
    REQUIRE(a != nullptr);
    CHECK(a->params.rtt == doctest::Approx(2e-3));
    const auto udp = parse("[traffic]\nsource = udp\nudp_rate = 5e7\nloopback_filter_udp = false\n");
    REQUIRE(std::holds_alternative<UdpConstantRate>(udp.traffic.source_type));
    CHECK_FALSE(udp.traffic.loopback_filter_udp);
}

TEST_CASE("sweep axes must not be empty") {
    CHECK_THROWS_AS(parse("[sweep]\nloads =\n"), ConfigParseError);
    const auto cfg = parse("[sweep]\nloads = 0.1, 0.5\nk_hot = 1-3\n");
    CHECK(cfg.sweep.loads.size() == 2);
    CHECK(cfg.sweep.k_hot == std::vector<int>{1, 2, 3});
}
