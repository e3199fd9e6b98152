#include "f4tele/analytic.hpp"

#include <cmath>
#include <functional>

namespace f4tele {

namespace {

struct FixedPoint {
    double value = 0.0;
    int iterations = 0;
};

// Damped iteration W <- (1-γ)W + γ f(W) from W = 0. The stopping rule bounds
// the distance to the fixed point, estimated from the observed contraction
// ratio of successive steps, by tolerance·|W|.
FixedPoint damped_fixed_point(const std::function<double(double)>& f, const FixedPointOptions& opts) {
    double w = 0.0;
    double prev_step = 0.0;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        const double next = (1.0 - opts.damping) * w + opts.damping * f(w);
        if (!std::isfinite(next)) break;
        const double step = next - w;
        w = next;
        if (step == 0.0) return {w, it};
        if (it > 1 && prev_step != 0.0) {
            const double ratio = std::abs(step / prev_step);
            if (ratio < 1.0) {
                const double remaining = std::abs(step) * ratio / (1.0 - ratio);
                if (remaining <= opts.tolerance * std::abs(w)) return {w, it};
            }
        }
        prev_step = step;
    }
    throw AnalysisError(AnalysisError::Kind::NonConvergence,
                        "fixed-point iteration did not converge within " + std::to_string(opts.max_iterations) + " iterations");
}

int first_low_set(const Schedule& schedule) {
    for (int id = 0; id < schedule.n_sets(); ++id)
        if (schedule.set_class[static_cast<std::size_t>(id)] == RackClass::NonHotspot &&
            !schedule.positions_of(id).empty())
            return id;
    throw AnalysisError(AnalysisError::Kind::InvalidCount, "schedule has no non-hotspot set");
}

int count_class(const Schedule& schedule, RackClass klass) {
    int n = 0;
    for (int id = 0; id < schedule.n_sets(); ++id)
        if (schedule.set_class[static_cast<std::size_t>(id)] == klass && !schedule.positions_of(id).empty()) ++n;
    return n;
}

}  // namespace

ResidualMoments residual_moments(double lambda, const ServiceModel& service) {
    ResidualMoments r;
    if (lambda <= 0.0) return r;
    const double rho = service.utilization(lambda);
    r.mean_residual = 0.5 * rho * service.second_moment() / service.mean_service;
    r.second_moment = lambda * service.third_moment() / 3.0;
    r.variance = r.second_moment - r.mean_residual * r.mean_residual;
    r.negative_variance = r.variance < -1e-12 * std::max(r.second_moment, 1e-300);
    return r;
}

StateProbabilities state_probabilities(int k_low) {
    if (k_low < 1) throw AnalysisError(AnalysisError::Kind::InvalidCount, "k_low must be >= 1");
    StateProbabilities p;
    p.k_low = k_low;
    p.pr_hot = 0.5;
    p.pr_low = (1.0 - p.pr_hot) / k_low;
    return p;
}

SlotWaitTable slot_wait_table(const Schedule& schedule, int target_set) {
    const auto own = target_set >= 0 ? schedule.positions_of(target_set) : std::vector<int>{};
    if (own.empty()) throw AnalysisError(AnalysisError::Kind::UnknownSet, "set " + std::to_string(target_set) + " is not in the schedule");

    const int n = static_cast<int>(schedule.slots.size());
    const double d = schedule.slot_length;
    SlotWaitTable t;

    t.from_slot_start.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        if (schedule.slots[static_cast<std::size_t>(i)] == target_set) continue;
        int ahead = 1;
        while (schedule.slots[static_cast<std::size_t>((i + ahead) % n)] != target_set) ++ahead;
        t.from_slot_start[static_cast<std::size_t>(i)] = ahead * d;
    }

    double total = 0.0;
    for (int i = 0; i < n; ++i)
        if (schedule.slots[static_cast<std::size_t>(i)] != target_set)
            total += t.from_slot_start[static_cast<std::size_t>(i)] - 0.5 * d;
    t.mean_wait_uniform = total / n;

    int k = 0;
    for (int id = 0; id < schedule.n_sets(); ++id)
        if (!schedule.positions_of(id).empty()) ++k;
    for (int j = 1; j <= k - 1; ++j) t.d_values.push_back((k - j) * d);

    const int k_low = count_class(schedule, RackClass::NonHotspot);
    const int k_hot = count_class(schedule, RackClass::Hotspot);
    StateProbabilities pr;
    if (k_low > 0) pr = state_probabilities(k_low);
    double weighted = 0.0;
    double weight = 0.0;
    for (int i = 0; i < n; ++i) {
        const int id = schedule.slots[static_cast<std::size_t>(i)];
        if (schedule.set_class[static_cast<std::size_t>(id)] != RackClass::Hotspot || id == target_set) continue;
        const int pred = schedule.slots[static_cast<std::size_t>((i + n - 1) % n)];
        double w = 1.0;
        if (k_low > 0)
            w = schedule.set_class[static_cast<std::size_t>(pred)] == RackClass::Hotspot ? pr.pr_hot / std::max(k_hot, 1)
                                                                                          : pr.pr_low;
        weighted += w * t.from_slot_start[static_cast<std::size_t>(i)];
        weight += w;
    }
    t.d_hot = weight > 0.0 ? weighted / weight : 0.0;
    return t;
}

double low_vacation_term(const LowWaitParams& p) {
    const int target = first_low_set(p.schedule);
    const auto pr = state_probabilities(count_class(p.schedule, RackClass::NonHotspot));
    const auto table = slot_wait_table(p.schedule, target);
    const double k = p.k_total;
    return pr.pr_low * (k - 1.0) * (k - 2.0) * p.d / 2.0 + pr.pr_hot * table.d_hot;
}

WaitEstimate expected_wait_low(const LowWaitParams& p, const FixedPointOptions& opts) {
    const double x = p.service.mean_service;
    const double rho = p.service.utilization(p.lambda_low);
    if (rho >= 1.0) throw AnalysisError(AnalysisError::Kind::Unstable, "non-hotspot utilisation rho_L >= 1");

    const int target = first_low_set(p.schedule);
    const double in_service = p.in_service_probability.value_or(p.schedule.service_share(target));
    const double vacation = low_vacation_term(p);
    const double residual = residual_moments(p.lambda_low, p.service).mean_residual;

    const auto f = [&](double w) {
        return in_service * (p.lambda_low * w * x) + (1.0 - in_service) * vacation + residual;
    };
    const auto fp = damped_fixed_point(f, opts);

    WaitEstimate est;
    est.mean_wait = fp.value;
    est.queue_len = p.lambda_low * fp.value;
    est.vacation_count = 1;
    est.slots_waited = static_cast<int>(std::lround(p.schedule.tau_max / p.schedule.slot_length));
    est.iterations = fp.iterations;
    est.converged = true;
    return est;
}

WaitEstimate expected_wait_high(const HighWaitParams& p, const FixedPointOptions& opts) {
    const double x = p.service.mean_service;
    const double rho = p.service.utilization(p.lambda_hot);
    // For rho >= 1 the fixed point still exists but repels the iteration.
    if (rho >= 1.0)
        throw AnalysisError(AnalysisError::Kind::NonConvergence, "hotspot utilisation rho_H >= 1: fixed point is not attracting");
    if (p.n_low_between_visits < 0) throw AnalysisError(AnalysisError::Kind::InvalidCount, "R_D^p must be >= 0");

    const double slots = p.n_low_between_visits * p.d;
    const auto f = [&](double w) {
        const double queued = p.lambda_hot * w * x;
        return rho * queued + (1.0 - rho) * (queued + slots);
    };
    const auto fp = damped_fixed_point(f, opts);

    WaitEstimate est;
    est.mean_wait = fp.value;
    est.queue_len = p.lambda_hot * fp.value;
    est.vacation_count = p.n_low_between_visits;
    est.slots_waited = p.k_hot + 1;
    est.iterations = fp.iterations;
    est.converged = true;
    return est;
}

double mm1_oracle(double lambda, const ServiceModel& service) {
    const double rho = service.utilization(lambda);
    if (rho >= 1.0) throw AnalysisError(AnalysisError::Kind::Unstable, "rho >= 1");
    if (lambda <= 0.0) return 0.0;
    return lambda * service.second_moment() / (2.0 * (1.0 - rho));
}

}  // namespace f4tele
