#include "f4tele/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <thread>

#include "f4tele/analytic.hpp"
#include "f4tele/report.hpp"
#include "f4tele/scheduler.hpp"

namespace f4tele {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Non-hotspot slots between consecutive hotspot-class slots (worst case).
int low_slots_between_hot_visits(const Schedule& s) {
    const int n = static_cast<int>(s.slots.size());
    int worst = 0;
    for (int i = 0; i < n; ++i) {
        if (s.set_class[static_cast<std::size_t>(s.slots[static_cast<std::size_t>(i)])] != RackClass::Hotspot) continue;
        int run = 0;
        for (int j = 1; j <= n; ++j) {
            const int set = s.slots[static_cast<std::size_t>((i + j) % n)];
            if (s.set_class[static_cast<std::size_t>(set)] == RackClass::Hotspot) break;
            ++run;
        }
        worst = std::max(worst, run);
    }
    return worst;
}

// Longest interval between consecutive visits of any one set.
double longest_revisit(const ValidatedConfig& cfg) {
    const auto& s = cfg.schedule();
    double worst = 0.0;
    for (int id = 0; id < s.n_sets(); ++id) {
        const auto pos = s.positions_of(id);
        if (!pos.empty()) worst = std::max(worst, s.tau / static_cast<double>(pos.size()));
    }
    return worst;
}

double min_share(const ValidatedConfig& cfg, RackClass klass) {
    double share = std::numeric_limits<double>::infinity();
    for (const auto& set : cfg.partition().sets)
        if (set.klass == klass) share = std::min(share, cfg.schedule().service_share(set.set_id));
    return std::isfinite(share) ? share : 0.0;
}

std::optional<double> in_service_for(const ValidatedConfig& cfg, InServiceReading reading, double lambda_low) {
    if (reading == InServiceReading::Utilization) return cfg.service().utilization(lambda_low);
    return std::nullopt;
}

WaitEstimate low_wait(const ValidatedConfig& cfg, InServiceReading reading, double lambda) {
    LowWaitParams p;
    p.lambda_low = lambda;
    p.service = cfg.service();
    p.schedule = cfg.schedule();
    p.k_total = cfg.partition().k_total;
    p.d = cfg.schedule().slot_length;
    p.in_service_probability = in_service_for(cfg, reading, lambda);
    return expected_wait_low(p);
}

WaitEstimate high_wait(const ValidatedConfig& cfg, double lambda) {
    HighWaitParams p;
    p.lambda_hot = lambda;
    p.service = cfg.service();
    p.d = cfg.schedule().slot_length;
    p.n_low_between_visits = low_slots_between_hot_visits(cfg.schedule());
    p.k_hot = cfg.partition().k_hot;
    return expected_wait_high(p);
}

template <class F>
void run_pool(std::size_t n_tasks, int workers, F task) {
    int w = workers > 0 ? workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    w = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(w), n_tasks));
    if (w <= 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(w));
    std::vector<std::thread> pool;
    for (int t = 0; t < w; ++t)
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = next++; i < n_tasks; i = next++) task(i);
            } catch (...) {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
                next = n_tasks;
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace

double packets_per_arrival(const TrafficProfile& t) {
    if (std::holds_alternative<PoissonPacket>(t.source_type)) return 1.0;
    const double mss = std::holds_alternative<TcpAimd>(t.source_type) ? std::get<TcpAimd>(t.source_type).params.mss
                                                                       : t.packet_bytes;
    return mean_flow_size(t.flow_size_law, t.packet_bytes) / mss;
}

AnalyticRow analyze_point(const ValidatedConfig& cfg, InServiceReading reading, double load) {
    AnalyticRow row;
    const auto& part = cfg.partition();
    const double ppa = packets_per_arrival(cfg.traffic());
    const double lam_low = cfg.traffic().lambda_low * ppa;
    const double lam_hot = cfg.traffic().lambda_hot * ppa;

    row.load = load;
    row.k_low = part.k_low;
    row.k_hot = part.k_hot;
    row.d = cfg.schedule().slot_length;
    row.mean_service = cfg.service().mean_service;
    row.stable = stability_check(cfg.schedule(), cfg.traffic(), cfg.service(), part, ppa,
                                 cfg.cluster().switchover_delay)
                     .stable;
    row.r_mean = residual_moments(lam_low, cfg.service()).mean_residual;
    if (part.k_low > 0) {
        const auto pr = state_probabilities(part.k_low);
        row.pr_hot = pr.pr_hot;
        row.pr_low = pr.pr_low;
    } else {
        row.pr_hot = 1.0;
    }

    row.w_low = kNaN;
    if (part.k_low > 0) {
        try {
            row.w_low = low_wait(cfg, reading, lam_low).mean_wait;
        } catch (const AnalysisError&) {
            row.stable = false;
            row.converged = false;
        }
    }
    row.w_hot = kNaN;
    if (part.k_hot > 0) {
        try {
            row.w_hot = high_wait(cfg, lam_hot).mean_wait;
        } catch (const AnalysisError&) {
            row.stable = false;
            row.converged = false;
        }
    }
    return row;
}

ExperimentConfig derive_point(const ExperimentConfig& base, const PointSpec& point) {
    ExperimentConfig out = base;
    out.traffic.lambda_low *= point.load;
    out.traffic.lambda_hot *= point.load;
    if (point.d) out.slot_length = *point.d;
    if (point.mu_multiplier != 1.0) {
        out.cluster.fso_rate *= point.mu_multiplier;
        if (out.mean_service_set) out.service = out.service.scaled(1.0 / point.mu_multiplier);
    }
    if (point.k_hot) {
        const int k_low = base.build().partition().k_low;
        const int p = base.cluster.bundle_capacity;
        const int k = *point.k_hot;
        out.cluster.n_data_racks = (k_low + k) * p;
        out.partition = PartitionRequest{};
        for (int r = k_low * p; r < (k_low + k) * p; ++r) out.partition.hotspot_racks.push_back(r);
    }
    return out;
}

std::vector<AnalyticRow> analyze_config(const ExperimentConfig& cfg) {
    std::vector<std::optional<int>> ks;
    for (int k : cfg.sweep.k_hot) ks.emplace_back(k);
    if (ks.empty()) ks.emplace_back();
    std::vector<std::optional<double>> ds;
    for (double d : cfg.sweep.slot_lengths) ds.emplace_back(d);
    if (ds.empty()) ds.emplace_back();

    std::vector<AnalyticRow> rows;
    for (const auto& d : ds)
        for (const auto& k : ks)
            for (double mu : cfg.sweep.mu_multipliers)
                for (double load : cfg.sweep.loads) {
                    const auto point = derive_point(cfg, PointSpec{load, k, d, mu});
                    rows.push_back(analyze_point(point.build(), cfg.reading, load));
                }
    return rows;
}

void write_analysis_csv(std::ostream& os, const std::vector<AnalyticRow>& rows) {
    os << "load,k_low,k_hot,d_seconds,mean_service,w_low_seconds,w_hot_seconds,pr_hot,pr_low,r_mean,stable,converged\n";
    for (const auto& r : rows)
        os << fmt_num(r.load) << ',' << r.k_low << ',' << r.k_hot << ',' << fmt_num(r.d) << ','
           << fmt_num(r.mean_service) << ',' << fmt_num(r.w_low) << ',' << fmt_num(r.w_hot) << ','
           << fmt_num(r.pr_hot) << ',' << fmt_num(r.pr_low) << ',' << fmt_num(r.r_mean) << ','
           << (r.stable ? "true" : "false") << ',' << (r.converged ? "true" : "false") << '\n';
}

ValidationResult cross_validate(const ExperimentConfig& cfg, Mode mode, std::uint64_t seed, double duration,
                                double tolerance) {
    const ValidatedConfig vc = cfg.build();
    SimOptions opt;
    opt.mode = mode;
    opt.seed = seed;
    opt.duration = duration;
    const SimReport rep = run_simulation(vc, opt);
    const double ppa = packets_per_arrival(vc.traffic());

    ValidationResult res;
    double worst_err = -1.0;
    for (const auto& s : rep.per_set) {
        if (s.waits_observed == 0) continue;
        const double lam = vc.traffic().rate_of(s.klass) * ppa;
        ValidationRow row;
        row.set_id = s.set_id;
        row.klass = s.klass;
        row.observed = s.waits_observed;
        row.simulated = s.mean_wait;
        try {
            if (mode == Mode::Benchmark) {
                row.predicted = mm1_oracle(lam, vc.service());
                row.basis = "pollaczek-khinchine";
            } else if (s.klass == RackClass::NonHotspot) {
                row.predicted = low_wait(vc, cfg.reading, lam).mean_wait;
                row.basis = "non-hotspot fixed point";
            } else {
                row.predicted = high_wait(vc, lam).mean_wait;
                row.basis = "hotspot fixed point (load-independent, see README: hotspot wait model)";
            }
        } catch (const AnalysisError& e) {
            row.predicted = kNaN;
            row.basis = e.what();
        }
        const double diff = std::fabs(row.simulated - row.predicted);
        row.rel_error = row.predicted > 0.0 ? diff / row.predicted : (diff == 0.0 ? 0.0 : kNaN);
        row.within = !std::isnan(row.rel_error) && row.rel_error <= tolerance;
        res.ok = res.ok && row.within;
        const double err = std::isnan(row.rel_error) ? std::numeric_limits<double>::infinity() : row.rel_error;
        if (err > worst_err) {
            worst_err = err;
            res.worst = static_cast<int>(res.rows.size());
        }
        res.rows.push_back(row);
    }
    return res;
}

void write_validation(std::ostream& os, const ValidationResult& r, double tolerance) {
    os << "set_id,class,observed,predicted_wait,simulated_wait,rel_error,within,basis\n";
    for (const auto& v : r.rows)
        os << v.set_id << ',' << to_string(v.klass) << ',' << v.observed << ',' << fmt_num(v.predicted) << ','
           << fmt_num(v.simulated) << ',' << fmt_num(v.rel_error) << ',' << (v.within ? "true" : "false") << ",\""
           << v.basis << "\"\n";
    os << "# tolerance " << fmt_num(tolerance) << ": " << (r.ok ? "all sets within" : "breach") << '\n';
    if (!r.ok && r.worst >= 0) {
        const auto& w = r.rows[static_cast<std::size_t>(r.worst)];
        os << "# worst offender: set " << w.set_id << " (" << to_string(w.klass) << "), rel_error "
           << fmt_num(w.rel_error) << ", " << w.basis << '\n';
    }
}

SweepPlan parse_plan(const IniDocument& doc) {
    doc.require_known("plan", {"config", "modes", "seeds", "loads", "k_hot", "slot_lengths", "mu_multipliers",
                               "out_dir", "simulate", "cycles", "duration", "utilization_ceiling", "workers"});
    SweepPlan plan;
    plan.config_path = doc.get_string("plan", "config", "");
    if (plan.config_path.empty()) doc.fail("plan", "config", "required");
    // Relative config paths resolve against the plan file's directory.
    const std::filesystem::path cp(plan.config_path);
    if (cp.is_relative() && !doc.source().empty())
        plan.config_path = (std::filesystem::path(doc.source()).parent_path() / cp).lexically_normal().string();

    if (doc.has("plan", "modes")) {
        plan.modes.clear();
        const std::string text = doc.get_string("plan", "modes", "");
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const std::size_t comma = std::min(text.find(',', pos), text.size());
            std::string item = text.substr(pos, comma - pos);
            item.erase(0, item.find_first_not_of(" \t"));
            item.erase(item.find_last_not_of(" \t") + 1);
            if (!item.empty()) {
                try {
                    plan.modes.push_back(parse_mode(item));
                } catch (const std::exception&) {
                    doc.fail("plan", "modes", "unknown mode '" + item + "'");
                }
            }
            pos = comma + 1;
        }
        if (plan.modes.empty()) throw PlanError("plan.modes: empty axis");
    }
    if (doc.has("plan", "seeds")) {
        plan.seeds.clear();
        for (int s : doc.get_ints("plan", "seeds", {})) {
            if (s < 0) doc.fail("plan", "seeds", "seeds must be >= 0");
            plan.seeds.push_back(static_cast<std::uint64_t>(s));
        }
        if (plan.seeds.empty()) throw PlanError("plan.seeds: empty axis");
        if (std::set<std::uint64_t>(plan.seeds.begin(), plan.seeds.end()).size() != plan.seeds.size())
            throw PlanError("plan.seeds: seeds must be distinct");
    }
    const auto axis_d = [&](const char* key, std::vector<double>& dst) {
        if (!doc.has("plan", key)) return;
        dst = doc.get_doubles("plan", key, {});
        if (dst.empty()) throw PlanError(std::string("plan.") + key + ": empty axis");
    };
    axis_d("loads", plan.loads);
    axis_d("slot_lengths", plan.slot_lengths);
    axis_d("mu_multipliers", plan.mu_multipliers);
    if (doc.has("plan", "k_hot")) {
        plan.k_hot = doc.get_ints("plan", "k_hot", {});
        if (plan.k_hot.empty()) throw PlanError("plan.k_hot: empty axis");
    }
    for (double l : plan.loads)
        if (!(l > 0.0 && l <= 1.0)) doc.fail("plan", "loads", "loads must lie in (0, 1]");
    for (int k : plan.k_hot)
        if (k < 1) doc.fail("plan", "k_hot", "k_hot must be >= 1");
    for (double d : plan.slot_lengths)
        if (!(d > 0.0)) doc.fail("plan", "slot_lengths", "slot lengths must be > 0");
    for (double m : plan.mu_multipliers)
        if (!(m > 0.0)) doc.fail("plan", "mu_multipliers", "multipliers must be > 0");

    plan.out_dir = doc.get_string("plan", "out_dir", "");
    plan.simulate = doc.get_bool("plan", "simulate", true);
    plan.cycles = doc.get_double("plan", "cycles", plan.cycles);
    if (!(plan.cycles > 0.0)) doc.fail("plan", "cycles", "must be > 0");
    plan.duration = doc.get_double("plan", "duration", 0.0);
    if (plan.duration < 0.0) doc.fail("plan", "duration", "must be >= 0");
    plan.utilization_ceiling = doc.get_double("plan", "utilization_ceiling", plan.utilization_ceiling);
    if (!(plan.utilization_ceiling > 0.0 && plan.utilization_ceiling < 1.0))
        doc.fail("plan", "utilization_ceiling", "must lie in (0, 1)");
    plan.workers = doc.get_int("plan", "workers", 0);
    return plan;
}

SweepPlan load_plan(const std::string& path) { return parse_plan(IniDocument::load(path)); }

namespace {

struct SweepPoint {
    std::string family;
    RackClass klass;
    double load;
    int k;
    double d;
    double mu;
    std::size_t config;  // index into point configs
};

std::string ms_label(double d) {
    const double ms = d * 1000.0;
    if (std::fabs(ms - std::round(ms)) < 1e-9) return std::to_string(static_cast<long long>(std::llround(ms)));
    return fmt_num(ms);
}

}  // namespace

SweepResult run_sweep(const SweepPlan& plan, const ExperimentConfig& base) {
    const ValidatedConfig base_vc = base.build();
    const std::vector<double> loads = plan.loads.empty() ? base.sweep.loads : plan.loads;
    std::vector<int> ks = plan.k_hot.empty() ? base.sweep.k_hot : plan.k_hot;
    if (ks.empty()) ks.push_back(base_vc.partition().k_hot);
    std::vector<double> ds = plan.slot_lengths.empty() ? base.sweep.slot_lengths : plan.slot_lengths;
    if (ds.empty()) ds.push_back(base.slot_length);
    const std::vector<double> mus = plan.mu_multipliers.empty() ? base.sweep.mu_multipliers : plan.mu_multipliers;
    if (loads.empty() || mus.empty()) throw PlanError("sweep: empty axis");
    const double load_max = *std::max_element(loads.begin(), loads.end());
    const double mu_min = *std::min_element(mus.begin(), mus.end());
    const double ppa = packets_per_arrival(base.traffic);

    // One config per (d, k, mu); loads only change rates.
    struct Shape {
        double d;
        int k;
        double mu;
        double mean_ref;  // X̄ the arrival rates are sized against
    };
    std::vector<Shape> shapes;
    const auto shape_index = [&](double d, int k, double mu, double mean_ref) {
        for (std::size_t i = 0; i < shapes.size(); ++i)
            if (shapes[i].d == d && shapes[i].k == k && shapes[i].mu == mu && shapes[i].mean_ref == mean_ref) return i;
        shapes.push_back({d, k, mu, mean_ref});
        return shapes.size() - 1;
    };

    const double mean_base = base.effective_service().mean_service;
    std::vector<SweepPoint> points;
    for (double d : ds) {
        const std::string ms = ms_label(d);
        for (auto klass : {RackClass::Hotspot, RackClass::NonHotspot})
            for (int k : ks)
                for (double l : loads)
                    points.push_back({(klass == RackClass::Hotspot ? "wh" : "wl") + ms, klass, l, k, d, 1.0,
                                      shape_index(d, k, 1.0, mean_base)});
    }
    for (double d : ds)
        for (double mu : mus)
            for (auto klass : {RackClass::Hotspot, RackClass::NonHotspot})
                for (double l : loads)
                    points.push_back({"speed", klass, l, ks.front(), d, mu,
                                      shape_index(d, ks.front(), mu, mean_base / mu_min)});

    // Rates at load `l` for one shape: each class fills `ceiling·l` of its share.
    const auto config_at = [&](const Shape& s, double l) {
        ExperimentConfig c = derive_point(base, PointSpec{1.0, s.k, s.d, s.mu});
        const ValidatedConfig probe = [&] {
            ExperimentConfig q = c;
            q.traffic.lambda_low = 0.0;
            q.traffic.lambda_hot = 0.0;
            q.traffic.beta = 1.0;
            return q.build();
        }();
        const double unit = plan.utilization_ceiling * l / (s.mean_ref * ppa);
        c.traffic.lambda_low = unit * min_share(probe, RackClass::NonHotspot);
        c.traffic.lambda_hot = unit * min_share(probe, RackClass::Hotspot);
        c.traffic.beta = c.traffic.lambda_hot > 0.0 ? c.traffic.lambda_low / c.traffic.lambda_hot : 1.0;
        return c;
    };

    SweepResult result;
    // Analytic rows.
    for (const auto& p : points) {
        const auto vc = config_at(shapes[p.config], p.load).build();
        const auto row = analyze_point(vc, base.reading, p.load);
        result.families[p.family].push_back(
            {"analytic", p.klass, p.load, p.k, p.d, p.mu, p.klass == RackClass::Hotspot ? row.w_hot : row.w_low});
    }
    if (!plan.simulate) return result;

    // One run per (shape, load, mode, seed); waits of both classes come from it.
    struct Run {
        std::size_t shape;
        double load;
        Mode mode;
        std::uint64_t seed;
        double w_hot = kNaN;
        double w_low = kNaN;
    };
    std::vector<Run> runs;
    std::vector<std::pair<std::size_t, double>> keyed;
    for (const auto& p : points) {
        const std::pair<std::size_t, double> key{p.config, p.load};
        if (std::find(keyed.begin(), keyed.end(), key) != keyed.end()) continue;
        keyed.push_back(key);
        for (Mode m : plan.modes)
            for (auto seed : plan.seeds) runs.push_back({p.config, p.load, m, seed});
    }
    run_pool(runs.size(), plan.workers, [&](std::size_t i) {
        Run& r = runs[i];
        const Shape& s = shapes[r.shape];
        // Candidates are drawn at the largest load's rate and thinned, so
        // every load of a shape sees nested subsets of one stream.
        const auto vc = config_at(s, r.load).build();
        SimOptions opt;
        opt.mode = r.mode;
        opt.seed = r.seed;
        opt.duration = plan.duration > 0.0 ? plan.duration : plan.cycles * longest_revisit(vc);
        opt.arrival_keep = r.load / load_max;
        const auto rep = run_simulation(vc, opt);
        r.w_hot = mean_class_wait(rep, RackClass::Hotspot);
        r.w_low = mean_class_wait(rep, RackClass::NonHotspot);
    });

    for (const auto& p : points)
        for (Mode m : plan.modes) {
            double sum = 0.0;
            int n = 0;
            for (const auto& r : runs)
                if (r.shape == p.config && r.load == p.load && r.mode == m) {
                    sum += p.klass == RackClass::Hotspot ? r.w_hot : r.w_low;
                    ++n;
                }
            result.families[p.family].push_back({to_string(m), p.klass, p.load, p.k, p.d, p.mu, n ? sum / n : kNaN});
        }
    return result;
}

void write_sweep(const SweepResult& result, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    for (const auto& [family, rows] : result.families) {
        const auto path = std::filesystem::path(out_dir) / (family + ".csv");
        std::ofstream os(path);
        if (!os) throw std::runtime_error("cannot write " + path.string());
        os << "source,class,load,k,d,mu_multiplier,w_mean\n";
        for (const auto& r : rows)
            os << r.source << ',' << to_string(r.klass) << ',' << fmt_num(r.load) << ',' << r.k << ',' << fmt_num(r.d)
               << ',' << fmt_num(r.mu_multiplier) << ',' << fmt_num(r.w_mean) << '\n';
        if (!os) throw std::runtime_error("write failed: " + path.string());
    }
}

}  // namespace f4tele
