// f4tele: simulate, analyze, validate and sweep rotating-FSO telemetry configs.
//
// Exit codes: 0 ok, 1 I/O failure, 2 invalid config or plan, 3 unstable
// analysis point, 4 validation tolerance breach.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "f4tele/config.hpp"
#include "f4tele/experiment.hpp"
#include "f4tele/report.hpp"
#include "f4tele/scheduler.hpp"
#include "f4tele/sim.hpp"

namespace fs = std::filesystem;
using namespace f4tele;

namespace {

enum Exit { kOk = 0, kIo = 1, kConfig = 2, kUnstable = 3, kBreach = 4 };

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << text;
    if (!os) throw IoError("write failed: " + path.string());
}

fs::path prepare_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir);
    return fs::path(dir);
}

ExperimentConfig read_config(const std::string& path) {
    if (!fs::exists(path)) throw IoError("config not found: " + path);
    return load_config(path);
}

std::string default_out_dir() {
    const char* env = std::getenv("F4TELE_OUT_DIR");
    return env && *env ? env : "f4tele_out";
}

int cmd_simulate(const std::string& config, const std::string& mode, std::uint64_t seed, double duration,
                 const std::string& out_dir) {
    const auto cfg = read_config(config);
    const auto vc = cfg.build();
    for (const auto& w : vc.warnings()) std::cerr << "warning: " << w << '\n';
    SimOptions opt;
    opt.mode = parse_mode(mode);
    opt.seed = seed;
    opt.duration = duration;
    const SimReport rep = run_simulation(vc, opt);

    const auto dir = prepare_dir(out_dir);
    write_file(dir / "sets.csv", sets_csv(rep));
    write_file(dir / "flows.csv", flows_csv(rep));
    std::ostringstream summary;
    write_summary(summary, rep);
    write_file(dir / "summary.txt", summary.str());
    std::ostringstream sched;
    write_schedule_csv(sched, vc.schedule());
    write_file(dir / "schedule.csv", sched.str());
    std::cout << summary.str();
    return kOk;
}

int cmd_analyze(const std::string& config, const std::string& out_dir) {
    const auto cfg = read_config(config);
    const auto rows = analyze_config(cfg);
    std::ostringstream csv;
    write_analysis_csv(csv, rows);
    std::cout << csv.str();
    if (!out_dir.empty()) write_file(prepare_dir(out_dir) / "analysis.csv", csv.str());
    for (const auto& r : rows)
        if (!r.stable) {
            std::cerr << "unstable point: load " << fmt_num(r.load) << ", k_hot " << r.k_hot << ", d " << fmt_num(r.d)
                      << '\n';
            return kUnstable;
        }
    return kOk;
}

int cmd_validate(const std::string& config, const std::string& mode, std::uint64_t seed, double duration,
                 double tolerance, const std::string& out_dir) {
    const auto cfg = read_config(config);
    const auto res = cross_validate(cfg, parse_mode(mode), seed, duration, tolerance);
    std::ostringstream text;
    write_validation(text, res, tolerance);
    std::cout << text.str();
    if (!out_dir.empty()) write_file(prepare_dir(out_dir) / "validation.csv", text.str());
    return res.ok ? kOk : kBreach;
}

int cmd_sweep(const std::string& plan_path, const std::string& out_override) {
    if (!fs::exists(plan_path)) throw IoError("plan not found: " + plan_path);
    const auto plan = load_plan(plan_path);
    const auto base = read_config(plan.config_path);
    const auto result = run_sweep(plan, base);
    const std::string out = !out_override.empty() ? out_override : !plan.out_dir.empty() ? plan.out_dir : default_out_dir();
    prepare_dir(out);
    try {
        write_sweep(result, out);
    } catch (const std::exception& e) {
        throw IoError(e.what());
    }
    for (const auto& [family, rows] : result.families)
        std::cout << family << ".csv: " << rows.size() << " rows\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rotating FSO telemetry simulator and delay analysis"};
    app.require_subcommand(1);

    std::string config, mode = "f4tele", out_dir, plan;
    std::uint64_t seed = 1;
    double duration = 10.0;
    double tolerance = 0.05;

    auto* sim = app.add_subcommand("simulate", "run one replication and write sets.csv, flows.csv, summary.txt");
    sim->add_option("--config", config, "config file")->required();
    sim->add_option("--mode", mode, "f4tele | f4tele+ | benchmark")->capture_default_str();
    sim->add_option("--seed", seed, "random seed")->capture_default_str();
    sim->add_option("--duration", duration, "simulated seconds")->capture_default_str()->check(CLI::PositiveNumber);
    sim->add_option("--out-dir", out_dir, "output directory (default $F4TELE_OUT_DIR or ./f4tele_out)");

    auto* ana = app.add_subcommand("analyze", "evaluate the analytic waits over the config's [sweep] axes");
    ana->add_option("--config", config, "config file")->required();
    ana->add_option("--out-dir", out_dir, "also write analysis.csv here");

    auto* val = app.add_subcommand("validate", "compare simulated and predicted per-set mean waits");
    val->add_option("--config", config, "config file")->required();
    val->add_option("--mode", mode, "f4tele | f4tele+ | benchmark")->capture_default_str();
    val->add_option("--seed", seed, "random seed")->capture_default_str();
    val->add_option("--duration", duration, "simulated seconds")->capture_default_str()->check(CLI::PositiveNumber);
    val->add_option("--tolerance", tolerance, "relative error bound")->capture_default_str()->check(CLI::PositiveNumber);
    val->add_option("--out-dir", out_dir, "also write validation.csv here");

    auto* swp = app.add_subcommand("sweep", "run a sweep plan and write one CSV per figure family");
    swp->add_option("--plan", plan, "plan file")->required();
    swp->add_option("--out-dir", out_dir, "overrides the plan's out_dir");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*sim) return cmd_simulate(config, mode, seed, duration, out_dir.empty() ? default_out_dir() : out_dir);
        if (*ana) return cmd_analyze(config, out_dir);
        if (*val) return cmd_validate(config, mode, seed, duration, tolerance, out_dir);
        if (*swp) return cmd_sweep(plan, out_dir);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    } catch (const ConfigViolation& e) {
        std::cerr << "invalid config:\n";
        for (const auto& v : e.violations()) std::cerr << "  " << v << '\n';
        return kConfig;
    } catch (const ConfigParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfig;
    } catch (const PlanError& e) {
        std::cerr << "invalid plan: " << e.what() << '\n';
        return kConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    }
    return kOk;
}
