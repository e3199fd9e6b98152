#include <doctest.h>

#include <algorithm>

#include "f4tele/model.hpp"
#include "f4tele/scheduler.hpp"

using namespace f4tele;

namespace {

struct Setup {
    ClusterSpec cluster;
    Partition partition;
    Schedule schedule;
    TrafficProfile traffic;
};

Setup canonical() {
    Setup s;
    s.cluster.n_data_racks = 24;
    s.cluster.bundle_capacity = 4;
    s.partition = partition_racks(24, 4, {20, 21, 22, 23});
    s.schedule = build_schedule(s.partition, 0.01, InterleavedHotspot{});
    s.traffic.lambda_low = 50;
    s.traffic.lambda_hot = 500;
    s.traffic.beta = 0.1;
    return s;
}

bool mentions(const std::vector<std::string>& v, const std::string& text) {
    return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.find(text) != std::string::npos; });
}

}  // namespace

TEST_CASE("canonical 24-rack layout validates") {
    auto s = canonical();
    const auto vc = validate_config(s.cluster, s.partition, s.schedule, s.traffic);
    CHECK(vc.partition().k_low == 5);
    CHECK(vc.partition().k_hot == 1);
    CHECK(vc.warnings().empty());
}

TEST_CASE("six sets of four over 20 racks exceed N") {
    auto s = canonical();
    s.cluster.n_data_racks = 20;
    const auto v = check_config(s.cluster, s.partition, s.schedule, s.traffic, {});
    CHECK(mentions(v, "set union exceeds N"));
}

TEST_CASE("equal hotspot and non-hotspot rates warn but validate") {
    auto s = canonical();
    s.traffic.lambda_hot = s.traffic.lambda_low;
    s.traffic.beta = 1.0;
    const auto vc = validate_config(s.cluster, s.partition, s.schedule, s.traffic);
    REQUIRE(vc.warnings().size() == 1);
    CHECK(vc.warnings()[0].find("beta = 1") != std::string::npos);
}

TEST_CASE("every violation is reported together") {
    auto s = canonical();
    s.cluster.fso_rate = 0;
    s.traffic.beta = 2.0;
    s.traffic.qos_deadline = -1;
    try {
        validate_config(s.cluster, s.partition, s.schedule, s.traffic);
        FAIL("expected ConfigViolation");
    } catch (const ConfigViolation& e) {
        CHECK(mentions(e.violations(), "fso_rate"));
        CHECK(mentions(e.violations(), "beta"));
        CHECK(mentions(e.violations(), "qos_deadline"));
    }
}

TEST_CASE("hotspot rate below non-hotspot rate is rejected") {
    auto s = canonical();
    s.traffic.lambda_hot = 10;
    CHECK(mentions(check_config(s.cluster, s.partition, s.schedule, s.traffic, {}), "lambda_hot"));
}

TEST_CASE("service moments") {
    CHECK(exponential_service(2.0).second_moment() == doctest::Approx(8.0));
    CHECK(exponential_service(2.0).third_moment() == doctest::Approx(48.0));
    CHECK(deterministic_service(2.0).second_moment() == doctest::Approx(4.0));
    CHECK(deterministic_service(2.0).third_moment() == doctest::Approx(8.0));
    const auto slow = exponential_service(1e-3).scaled(10.0);
    CHECK(slow.mean_service == doctest::Approx(1e-2));
    CHECK(slow.second_moment() == doctest::Approx(2e-4));
}

TEST_CASE("moment-specified service below mean squared is rejected") {
    auto s = canonical();
    ServiceModel svc;
    svc.distribution = ServiceDistribution::GeneralMoments;
    svc.mean_service = 1.0;
    svc.m2 = 0.5;
    svc.m3 = 1.0;
    CHECK(mentions(check_config(s.cluster, s.partition, s.schedule, s.traffic, svc), "second moment"));
}
