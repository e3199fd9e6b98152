#include <doctest.h>

#include <random>

#include "f4tele/analytic.hpp"
#include "f4tele/scheduler.hpp"

using namespace f4tele;

namespace {

Schedule interleaved(int k_low, int k_hot, double d) {
    std::vector<int> hot;
    for (int r = k_low; r < k_low + k_hot; ++r) hot.push_back(r);
    return build_schedule(partition_racks(k_low + k_hot, 1, hot), d, InterleavedHotspot{});
}

}  // namespace

TEST_CASE("residual moments") {
    const auto zero = residual_moments(0.0, exponential_service(1.0));
    CHECK(zero.mean_residual == 0.0);
    CHECK(zero.second_moment == 0.0);
    CHECK(zero.variance == 0.0);

    const auto ex = residual_moments(0.5, exponential_service(1.0));
    CHECK(ex.mean_residual == doctest::Approx(0.5));
    CHECK(ex.second_moment == doctest::Approx(1.0));
    CHECK_FALSE(ex.negative_variance);

    const auto det = residual_moments(0.5, deterministic_service(1.0));
    CHECK(det.mean_residual == doctest::Approx(0.25));
    CHECK(det.second_moment == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("state probabilities") {
    CHECK(state_probabilities(1).pr_low == doctest::Approx(0.5));
    CHECK(state_probabilities(5).pr_low == doctest::Approx(0.1));
    for (int k = 1; k <= 20; ++k) {
        const auto p = state_probabilities(k);
        CHECK(p.pr_hot + k * p.pr_low == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(state_probabilities(0), AnalysisError);
}

TEST_CASE("slot wait table examples") {
    const double d = 0.01;
    const auto s = interleaved(3, 1, d);
    const auto t = slot_wait_table(s, 0);
    CHECK(t.from_slot_start[2] == doctest::Approx(4 * d));
    CHECK(t.mean_wait_uniform == doctest::Approx(25.0 * d / 12.0));
    CHECK(slot_wait_table(interleaved(1, 1, d), 0).from_slot_start[1] == doctest::Approx(d));
    CHECK_THROWS_AS(slot_wait_table(s, 9), AnalysisError);
}

TEST_CASE("non-hotspot wait matches the closed form") {
    // Zero load: the vacation term alone.
    LowWaitParams p;
    p.schedule = interleaved(5, 1, 0.01);
    p.k_total = 6;
    p.d = 0.01;
    p.service = exponential_service(1e-3);
    p.lambda_low = 0.0;
    p.in_service_probability = 0.0;
    CHECK(expected_wait_low(p).mean_wait == doctest::Approx(low_vacation_term(p)).epsilon(1e-9));
    // Share reading: the set is in service for a tenth of the cycle.
    p.in_service_probability.reset();
    CHECK(expected_wait_low(p).mean_wait == doctest::Approx(0.9 * low_vacation_term(p)).epsilon(1e-9));

    // rho = 0.5, A = 2, residual 0.25 -> 5/3.
    p.lambda_low = 0.5;
    p.service = deterministic_service(1.0);
    p.in_service_probability = 0.5;
    const double a = low_vacation_term(p);
    const double rbar = 0.25;
    const double w = expected_wait_low(p).mean_wait;
    CHECK(w == doctest::Approx(((1 - 0.5) * a + rbar) / (1 - 0.25)).epsilon(1e-9));

    p.lambda_low = 1.0;
    CHECK_THROWS_AS(expected_wait_low(p), AnalysisError);
}

TEST_CASE("A = 2 s, residual 0.25 s, rho 0.5 gives 5/3 s") {
    LowWaitParams p;
    p.k_total = 6;
    p.d = 1.0;
    p.schedule = interleaved(5, 1, 1.0);
    p.service = deterministic_service(1.0);
    // The vacation term is linear in d; rescale d so it equals 2 s.
    const double d = 2.0 / low_vacation_term(p);
    p.d = d;
    p.schedule = interleaved(5, 1, d);
    REQUIRE(low_vacation_term(p) == doctest::Approx(2.0).epsilon(1e-12));
    p.lambda_low = 0.5;
    p.in_service_probability = 0.5;
    const auto est = expected_wait_low(p);
    CHECK(est.mean_wait == doctest::Approx(5.0 / 3.0).epsilon(1e-9));
    CHECK(est.queue_len == doctest::Approx(0.5 * 5.0 / 3.0).epsilon(1e-9));
    CHECK(est.converged);
}

TEST_CASE("hotspot wait is d for every stable load") {
    HighWaitParams p;
    p.d = 0.01;
    p.service = exponential_service(1e-3);
    for (double lam : {0.0, 100.0, 500.0, 990.0}) {
        p.lambda_hot = lam;
        CHECK(expected_wait_high(p).mean_wait == doctest::Approx(0.01).epsilon(1e-9));
    }
    p.lambda_hot = 1000.0;
    try {
        expected_wait_high(p);
        FAIL("expected AnalysisError");
    } catch (const AnalysisError& e) {
        CHECK(e.kind() == AnalysisError::Kind::NonConvergence);
    }
}

TEST_CASE("M/M/1 oracle") {
    CHECK(mm1_oracle(500, exponential_service(1e-3)) == doctest::Approx(1e-3));
    CHECK(mm1_oracle(0, exponential_service(1e-3)) == 0.0);
    CHECK_THROWS_AS(mm1_oracle(1000, exponential_service(1e-3)), AnalysisError);
}

TEST_CASE("property: non-hotspot wait grows with load and slot length") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int k_low = 1 + static_cast<int>(u(rng) * 6);
        const double d = 0.001 + u(rng) * 0.1;
        LowWaitParams p;
        p.schedule = interleaved(k_low, 1, d);
        p.k_total = k_low + 1;
        p.d = d;
        p.service = exponential_service(1e-3);
        const double l1 = u(rng) * 900, l2 = l1 + u(rng) * (990 - l1);
        p.lambda_low = l1;
        const double w1 = expected_wait_low(p).mean_wait;
        p.lambda_low = l2;
        const double w2 = expected_wait_low(p).mean_wait;
        CHECK(w2 >= w1 * (1 - 1e-9));
        LowWaitParams q = p;
        q.schedule = interleaved(k_low, 1, 2 * d);
        q.d = 2 * d;
        CHECK(expected_wait_low(q).mean_wait >= w2 * (1 - 1e-9));
        const auto r = residual_moments(l2, exponential_service(1e-3));
        CHECK(r.mean_residual >= 0.0);
        CHECK_FALSE(r.negative_variance);
    }
}
