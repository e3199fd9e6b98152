#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <optional>
#include <string>
#include <vector>

#include "f4tele/config.hpp"
#include "f4tele/sim.hpp"

namespace f4tele {

// Packets per arrival event: 1 for packet sources, mean flow size / MSS otherwise.
double packets_per_arrival(const TrafficProfile& traffic);

struct AnalyticRow {
    double load = 1.0;
    int k_low = 0;
    int k_hot = 0;
    double d = 0.0;
    double mean_service = 0.0;
    double w_low = 0.0;
    double w_hot = 0.0;
    double pr_hot = 0.0;
    double pr_low = 0.0;
    double r_mean = 0.0;
    bool stable = true;
    bool converged = true;
};

AnalyticRow analyze_point(const ValidatedConfig& cfg, InServiceReading reading, double load = 1.0);

struct PointSpec {
    double load = 1.0;  // multiplies the configured arrival rates
    std::optional<int> k_hot;
    std::optional<double> d;
    double mu_multiplier = 1.0;  // FSO speed factor
};

/// Base config adjusted to one sweep point. Changing k_hot keeps the
/// non-hotspot sets and rebuilds the cluster with N = (K_L + k_hot)·P, the
/// hotspot racks numbered last.
ExperimentConfig derive_point(const ExperimentConfig& base, const PointSpec& point);

// One row per combination of the config's [sweep] axes, in axis order.
std::vector<AnalyticRow> analyze_config(const ExperimentConfig& cfg);
void write_analysis_csv(std::ostream& os, const std::vector<AnalyticRow>& rows);

struct ValidationRow {
    int set_id = 0;
    RackClass klass = RackClass::NonHotspot;
    std::uint64_t observed = 0;
    double predicted = 0.0;
    double simulated = 0.0;
    double rel_error = 0.0;
    bool within = true;
    std::string basis;
};

struct ValidationResult {
    std::vector<ValidationRow> rows;
    bool ok = true;
    int worst = -1;  // index into rows
};

/// Runs the simulation and compares each set's mean wait with its analytic
/// prediction: Pollaczek–Khinchine in Benchmark mode, the non-hotspot and
/// hotspot fixed points otherwise. Sets without observations are skipped.
ValidationResult cross_validate(const ExperimentConfig& cfg, Mode mode, std::uint64_t seed, double duration,
                                double tolerance);
void write_validation(std::ostream& os, const ValidationResult& result, double tolerance);

class PlanError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SweepPlan {
    std::string config_path;
    std::vector<Mode> modes{Mode::F4Tele};
    std::vector<std::uint64_t> seeds{1};
    std::vector<double> loads;
    std::vector<int> k_hot;
    std::vector<double> slot_lengths;
    std::vector<double> mu_multipliers;
    std::string out_dir;
    bool simulate = true;
    double cycles = 20.0;              // per point, in revisit periods of the slowest-visited set
    double duration = 0.0;             // seconds per point; overrides cycles when > 0
    double utilization_ceiling = 0.95; // effective utilisation reached at load 1
    int workers = 0;                   // 0: hardware concurrency
};

// Throws PlanError for empty axes or duplicate seeds; ConfigParseError for syntax.
SweepPlan parse_plan(const IniDocument& doc);
SweepPlan load_plan(const std::string& path);

struct SweepRow {
    std::string source;  // analytic, or the simulated mode
    RackClass klass = RackClass::NonHotspot;
    double load = 0.0;
    int k = 0;
    double d = 0.0;
    double mu_multiplier = 1.0;
    double w_mean = 0.0;
};

struct SweepResult {
    // wh<ms>, wl<ms> and speed families, in plan order.
    std::map<std::string, std::vector<SweepRow>> families;
};

/// Sweep load is a fraction of each class's allocated capacity: a set served
/// for share s of the cycle receives λ = load·ceiling·s/X̄ packets/s, with X̄
/// taken at the slowest speed multiplier in the speed family. Simulated
/// points reuse one arrival stream per seed thinned to each load.
SweepResult run_sweep(const SweepPlan& plan, const ExperimentConfig& base);
void write_sweep(const SweepResult& result, const std::string& out_dir);

}  // namespace f4tele
