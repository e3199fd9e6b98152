#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "f4tele/model.hpp"

namespace f4tele {

class AnalysisError : public std::runtime_error {
public:
    enum class Kind { InvalidCount, UnknownSet, Unstable, NonConvergence };
    AnalysisError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

struct ResidualMoments {
    double mean_residual = 0.0;  // R̄
    double second_moment = 0.0;  // E[R²]
    double variance = 0.0;
    bool negative_variance = false;  // reported, never clamped
};

/// R̄ = ρ·E[X²]/(2·E[X]) and E[R²] = λ·E[X³]/3 for a Poisson stream of rate λ.
ResidualMoments residual_moments(double lambda, const ServiceModel& service);

struct StateProbabilities {
    double pr_hot = 0.5;
    double pr_low = 0.5;  // per non-hotspot set
    int k_low = 1;
};

StateProbabilities state_probabilities(int k_low);

struct SlotWaitTable {
    std::vector<double> d_values;  // D_1 .. D_{K-1}: remaining-slot partial sums
    double d_hot = 0.0;            // D_h
    // Wait from the start of each slot position until target's next slot starts
    // (zero for the target's own slots).
    std::vector<double> from_slot_start;
    // Expected wait to the target's next slot for an arrival uniform over the cycle.
    double mean_wait_uniform = 0.0;
};

/// Slot waits seen by packets queued at `target_set`.
///
/// D_h follows the fixed successor of each hotspot slot: every hotspot slot
/// occurrence contributes the wait from its start to the target's next slot,
/// weighted by the state probability of the non-hotspot set that precedes it.
SlotWaitTable slot_wait_table(const Schedule& schedule, int target_set);

struct WaitEstimate {
    double mean_wait = 0.0;
    double queue_len = 0.0;  // Z = λ·W
    int vacation_count = 0;
    int slots_waited = 0;
    int iterations = 0;
    bool converged = false;
};

struct FixedPointOptions {
    double damping = 0.5;
    double tolerance = 1e-9;
    int max_iterations = 10000;
};

struct LowWaitParams {
    double lambda_low = 0.0;
    ServiceModel service;
    Schedule schedule;
    int k_total = 0;
    double d = 0.0;
    // Probability that an arriving packet finds its own set in service.
    // Unset: the set's share of the cycle taken from the schedule.
    std::optional<double> in_service_probability;
};

/// Non-hotspot mean wait: fixed point of
///   W = s·(λ·W·X̄) + (1 − s)·[Pr_i·(K−1)(K−2)d/2 + Pr_h·D_h] + R̄
/// solved by damped iteration from W = 0.
WaitEstimate expected_wait_low(const LowWaitParams& params, const FixedPointOptions& opts = {});

// The bracketed vacation term Pr_i·(K−1)(K−2)d/2 + Pr_h·D_h.
double low_vacation_term(const LowWaitParams& params);

struct HighWaitParams {
    double lambda_hot = 0.0;
    ServiceModel service;
    double d = 0.0;
    int n_low_between_visits = 1;  // R_D^p
    int k_hot = 1;
};

/// Hotspot mean wait: fixed point of
///   W = ρ·(λ·W·X̄) + (1 − ρ)·(λ·W·X̄ + Σ_{j=1}^{R_D^p} d)
/// which reduces to W = R_D^p·d for every ρ < 1.
WaitEstimate expected_wait_high(const HighWaitParams& params, const FixedPointOptions& opts = {});

/// Pollaczek–Khinchine mean queueing delay λ·E[X²]/(2(1−ρ)).
double mm1_oracle(double lambda, const ServiceModel& service);

}  // namespace f4tele
