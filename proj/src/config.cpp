#include "f4tele/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

namespace f4tele {

namespace {

std::string trim(const std::string& s) {
    auto b = s.begin();
    auto e = s.end();
    while (b != e && std::isspace(static_cast<unsigned char>(*b))) ++b;
    while (e != b && std::isspace(static_cast<unsigned char>(*(e - 1)))) --e;
    return {b, e};
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

bool parse_number(const std::string& text, double& out) {
    const std::string t = lower(trim(text));
    if (t == "inf" || t == "infinity") {
        out = std::numeric_limits<double>::infinity();
        return true;
    }
    try {
        std::size_t used = 0;
        out = std::stod(t, &used);
        return used == t.size();
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

ConfigParseError::ConfigParseError(const std::string& source, int line, const std::string& key, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + (key.empty() ? "" : "key '" + key + "': ") + message),
      line_(line),
      key_(key) {}

IniDocument IniDocument::parse(std::istream& in, const std::string& source) {
    IniDocument doc;
    doc.source_ = source;
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto cut = raw.find_first_of("#;");
        const std::string text = trim(cut == std::string::npos ? raw : raw.substr(0, cut));
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']') throw ConfigParseError(source, line, "", "unterminated section header");
            section = lower(trim(text.substr(1, text.size() - 2)));
            if (section.empty()) throw ConfigParseError(source, line, "", "empty section name");
            doc.section_lines_.emplace(section, line);
            doc.sections_[section];
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ConfigParseError(source, line, text, "expected key = value");
        const std::string key = lower(trim(text.substr(0, eq)));
        if (key.empty()) throw ConfigParseError(source, line, "", "missing key before '='");
        if (section.empty()) throw ConfigParseError(source, line, key, "key outside of any [section]");
        auto& entries = doc.sections_[section];
        if (entries.count(key)) throw ConfigParseError(source, line, key, "duplicate key in [" + section + "]");
        entries.emplace(key, IniEntry{trim(text.substr(eq + 1)), line});
    }
    return doc;
}

IniDocument IniDocument::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
    return parse(in, path);
}

const IniEntry* IniDocument::find(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

bool IniDocument::has(const std::string& section, const std::string& key) const { return find(section, key) != nullptr; }

std::vector<std::string> IniDocument::keys(const std::string& section) const {
    std::vector<std::string> out;
    const auto s = sections_.find(section);
    if (s != sections_.end())
        for (const auto& [k, _] : s->second) out.push_back(k);
    return out;
}

void IniDocument::fail(const std::string& section, const std::string& key, const std::string& message) const {
    const auto* e = find(section, key);
    int line = e ? e->line : 0;
    if (!e) {
        const auto it = section_lines_.find(section);
        if (it != section_lines_.end()) line = it->second;
    }
    throw ConfigParseError(source_, line, section + "." + key, message);
}

std::string IniDocument::get_string(const std::string& section, const std::string& key, const std::string& fallback) const {
    const auto* e = find(section, key);
    return e ? e->value : fallback;
}

double IniDocument::get_double(const std::string& section, const std::string& key, double fallback) const {
    const auto* e = find(section, key);
    if (!e) return fallback;
    double v = 0.0;
    if (!parse_number(e->value, v)) fail(section, key, "expected a number, got '" + e->value + "'");
    return v;
}

int IniDocument::get_int(const std::string& section, const std::string& key, int fallback) const {
    const auto* e = find(section, key);
    if (!e) return fallback;
    double v = 0.0;
    if (!parse_number(e->value, v) || v != std::floor(v) || std::abs(v) > 1e9)
        fail(section, key, "expected an integer, got '" + e->value + "'");
    return static_cast<int>(v);
}

bool IniDocument::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    const auto* e = find(section, key);
    if (!e) return fallback;
    const auto v = lower(e->value);
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    fail(section, key, "expected a boolean, got '" + e->value + "'");
}

std::vector<double> IniDocument::get_doubles(const std::string& section, const std::string& key,
                                             std::vector<double> fallback) const {
    const auto* e = find(section, key);
    if (!e) return fallback;
    std::vector<double> out;
    for (const auto& item : split(e->value, ',')) {
        double v = 0.0;
        if (!parse_number(item, v)) fail(section, key, "expected a number list, bad item '" + item + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<int> IniDocument::get_ints(const std::string& section, const std::string& key, std::vector<int> fallback) const {
    const auto* e = find(section, key);
    if (!e) return fallback;
    std::vector<int> out;
    for (const auto& item : split(e->value, ',')) {
        // a-b expands to the inclusive range
        const auto dash = item.find('-', 1);
        double lo = 0.0, hi = 0.0;
        if (dash != std::string::npos && parse_number(item.substr(0, dash), lo) && parse_number(item.substr(dash + 1), hi)) {
            if (lo != std::floor(lo) || hi != std::floor(hi) || hi < lo) fail(section, key, "bad range '" + item + "'");
            for (int v = static_cast<int>(lo); v <= static_cast<int>(hi); ++v) out.push_back(v);
            continue;
        }
        double v = 0.0;
        if (!parse_number(item, v) || v != std::floor(v)) fail(section, key, "expected an integer list, bad item '" + item + "'");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

void IniDocument::require_known(const std::string& section, const std::vector<std::string>& allowed) const {
    for (const auto& k : keys(section))
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) fail(section, k, "unknown key");
}

ServiceModel ExperimentConfig::effective_service() const {
    ServiceModel s = service;
    if (!mean_service_set) s.mean_service = traffic.packet_bytes * 8.0 / cluster.fso_rate;
    return s;
}

ValidatedConfig ExperimentConfig::build() const {
    const ServiceModel svc = effective_service();
    const int n = cluster.n_data_racks;
    const int p = cluster.bundle_capacity;
    if (n < 1 || p < 1 || p > n) {
        auto v = check_config(cluster, Partition{}, Schedule{}, traffic, svc);
        v.erase(std::remove_if(v.begin(), v.end(),
                               [](const std::string& s) { return s.rfind("partition", 0) == 0 || s.rfind("schedule", 0) == 0; }),
                v.end());
        throw ConfigViolation(std::move(v));
    }

    Partition part;
    if (!partition.explicit_sets.empty()) {
        for (std::size_t i = 0; i < partition.explicit_sets.size(); ++i) {
            RackSet s;
            s.set_id = static_cast<int>(i);
            s.rack_ids = partition.explicit_sets[i];
            const bool hot = std::find(partition.explicit_hot_set_ids.begin(), partition.explicit_hot_set_ids.end(),
                                       static_cast<int>(i)) != partition.explicit_hot_set_ids.end();
            s.klass = hot ? RackClass::Hotspot : RackClass::NonHotspot;
            (hot ? part.k_hot : part.k_low) += 1;
            if (!hot) part.low_set_ids.push_back(s.set_id);
            part.sets.push_back(std::move(s));
        }
        part.k_total = part.k_hot + part.k_low;
    } else {
        try {
            part = partition_racks(n, p, partition.hotspot_racks);
        } catch (const SchedulerError& e) {
            throw ConfigViolation({std::string("partition: ") + e.what()});
        }
    }

    Schedule sched;
    try {
        sched = build_schedule(part, slot_length, policy);
    } catch (const SchedulerError& e) {
        auto v = check_config(cluster, part, Schedule{}, traffic, svc);
        v.erase(std::remove_if(v.begin(), v.end(), [](const std::string& s) { return s.rfind("schedule", 0) == 0; }), v.end());
        v.push_back(std::string("schedule: ") + e.what());
        throw ConfigViolation(std::move(v));
    }
    return validate_config(cluster, part, sched, traffic, svc, slot_end);
}

ExperimentConfig parse_config(const IniDocument& doc) {
    ExperimentConfig cfg;
    doc.require_known("cluster", {"n_data_racks", "n_nms_racks", "bundle_capacity", "fso_rate", "primary_buffer",
                                  "backup_buffer", "backup_drain_rate", "switchover_delay"});
    doc.require_known("partition", {"hotspot_racks", "hotspot_sets", "sets", "hot_set_ids"});
    doc.require_known("schedule", {"slot_length", "policy", "slots", "slot_end"});
    doc.require_known("traffic", {"source", "lambda_low", "lambda_hot", "beta", "qos_deadline", "packet_bytes",
                                  "flow_size", "udp_rate", "loopback_filter_udp", "tcp_initial_window", "tcp_ssthresh",
                                  "tcp_rtt", "tcp_loss_response", "tcp_max_window"});
    doc.require_known("service", {"distribution", "mean_service", "m2", "m3"});
    doc.require_known("analysis", {"rho_reading"});
    doc.require_known("sweep", {"loads", "k_hot", "slot_lengths", "mu_multipliers"});

    auto& c = cfg.cluster;
    c.n_data_racks = doc.get_int("cluster", "n_data_racks", c.n_data_racks);
    c.n_nms_racks = doc.get_int("cluster", "n_nms_racks", c.n_nms_racks);
    c.bundle_capacity = doc.get_int("cluster", "bundle_capacity", c.bundle_capacity);
    c.fso_rate = doc.get_double("cluster", "fso_rate", c.fso_rate);
    c.primary_buffer = doc.get_int("cluster", "primary_buffer", c.primary_buffer);
    c.backup_buffer = doc.get_int("cluster", "backup_buffer", c.backup_buffer);
    c.backup_drain_rate = doc.get_double("cluster", "backup_drain_rate", 0.01 * c.fso_rate);
    c.switchover_delay = doc.get_double("cluster", "switchover_delay", c.switchover_delay);

    // Partition: explicit sets ("0,1,2,3 | 4,5,6,7"), or hotspot racks, or a
    // hotspot set count taking the highest-numbered racks.
    if (doc.has("partition", "sets")) {
        for (const auto& group : split(doc.get_string("partition", "sets", ""), '|')) {
            std::vector<int> racks;
            for (const auto& item : split(group, ',')) {
                double v = 0.0;
                if (!parse_number(item, v) || v != std::floor(v)) doc.fail("partition", "sets", "bad rack id '" + item + "'");
                racks.push_back(static_cast<int>(v));
            }
            cfg.partition.explicit_sets.push_back(std::move(racks));
        }
        cfg.partition.explicit_hot_set_ids = doc.get_ints("partition", "hot_set_ids", {});
    } else if (doc.has("partition", "hotspot_racks")) {
        cfg.partition.hotspot_racks = doc.get_ints("partition", "hotspot_racks", {});
    } else {
        const int hot_sets = doc.get_int("partition", "hotspot_sets", 1);
        const int hot_racks = std::min(std::max(hot_sets, 0) * c.bundle_capacity, c.n_data_racks);
        for (int r = c.n_data_racks - hot_racks; r < c.n_data_racks; ++r) cfg.partition.hotspot_racks.push_back(r);
    }

    cfg.slot_length = doc.get_double("schedule", "slot_length", cfg.slot_length);
    const auto policy = lower(doc.get_string("schedule", "policy", "interleaved"));
    if (policy == "interleaved") cfg.policy = InterleavedHotspot{};
    else if (policy == "round_robin" || policy == "roundrobin") cfg.policy = RoundRobin{};
    else if (policy == "custom") cfg.policy = CustomSlots{doc.get_ints("schedule", "slots", {})};
    else doc.fail("schedule", "policy", "expected interleaved, round_robin or custom");
    const auto slot_end = lower(doc.get_string("schedule", "slot_end", "complete"));
    if (slot_end == "complete") cfg.slot_end = SlotEndPolicy::Complete;
    else if (slot_end == "gated") cfg.slot_end = SlotEndPolicy::Gated;
    else doc.fail("schedule", "slot_end", "expected complete or gated");

    auto& t = cfg.traffic;
    t.packet_bytes = doc.get_double("traffic", "packet_bytes", t.packet_bytes);
    t.lambda_low = doc.get_double("traffic", "lambda_low", 50.0);
    if (doc.has("traffic", "lambda_hot")) {
        t.lambda_hot = doc.get_double("traffic", "lambda_hot", 0.0);
        t.beta = doc.get_double("traffic", "beta", t.lambda_hot > 0.0 ? t.lambda_low / t.lambda_hot : 1.0);
    } else {
        t.beta = doc.get_double("traffic", "beta", 0.1);
        t.lambda_hot = t.beta > 0.0 ? t.lambda_low / t.beta : 0.0;
    }
    t.qos_deadline = doc.get_double("traffic", "qos_deadline", t.qos_deadline);
    t.loopback_filter_udp = doc.get_bool("traffic", "loopback_filter_udp", t.loopback_filter_udp);

    const auto size = lower(doc.get_string("traffic", "flow_size", "packets:1"));
    if (size.rfind("uniform:", 0) == 0) {
        const auto bounds = split(size.substr(8), ',');
        double lo = 0.0, hi = 0.0;
        if (bounds.size() != 2 || !parse_number(bounds[0], lo) || !parse_number(bounds[1], hi))
            doc.fail("traffic", "flow_size", "expected uniform:<min>,<max>");
        t.flow_size_law = UniformBytes{lo, hi};
    } else if (size.rfind("packets:", 0) == 0) {
        double n = 0.0;
        if (!parse_number(size.substr(8), n) || n != std::floor(n)) doc.fail("traffic", "flow_size", "expected packets:<n>");
        t.flow_size_law = FixedPackets{static_cast<int>(n)};
    } else {
        doc.fail("traffic", "flow_size", "expected uniform:<min>,<max> or packets:<n>");
    }

    const auto source = lower(doc.get_string("traffic", "source", "poisson"));
    if (source == "poisson") {
        t.source_type = PoissonPacket{};
    } else if (source == "udp") {
        t.source_type = UdpConstantRate{doc.get_double("traffic", "udp_rate", 100e6)};
    } else if (source == "tcp") {
        AimdParams a;
        a.mss = t.packet_bytes;
        a.initial_window = doc.get_double("traffic", "tcp_initial_window", a.initial_window);
        a.ssthresh = doc.get_double("traffic", "tcp_ssthresh", a.ssthresh);
        a.rtt = doc.get_double("traffic", "tcp_rtt", a.rtt);
        a.loss_response = doc.get_double("traffic", "tcp_loss_response", a.loss_response);
        a.max_window = doc.get_double("traffic", "tcp_max_window", a.max_window);
        t.source_type = TcpAimd{a};
    } else {
        doc.fail("traffic", "source", "expected poisson, udp or tcp");
    }

    const auto dist = lower(doc.get_string("service", "distribution", "exponential"));
    if (dist == "exponential") cfg.service.distribution = ServiceDistribution::Exponential;
    else if (dist == "deterministic") cfg.service.distribution = ServiceDistribution::Deterministic;
    else if (dist == "moments") cfg.service.distribution = ServiceDistribution::GeneralMoments;
    else doc.fail("service", "distribution", "expected exponential, deterministic or moments");
    cfg.mean_service_set = doc.has("service", "mean_service");
    cfg.service.mean_service = doc.get_double("service", "mean_service", cfg.service.mean_service);
    cfg.service.m2 = doc.get_double("service", "m2", 0.0);
    cfg.service.m3 = doc.get_double("service", "m3", 0.0);

    const auto reading = lower(doc.get_string("analysis", "rho_reading", "share"));
    if (reading == "share") cfg.reading = InServiceReading::ScheduleShare;
    else if (reading == "utilization") cfg.reading = InServiceReading::Utilization;
    else doc.fail("analysis", "rho_reading", "expected share or utilization");

    cfg.sweep.loads = doc.get_doubles("sweep", "loads", cfg.sweep.loads);
    cfg.sweep.k_hot = doc.get_ints("sweep", "k_hot", {});
    cfg.sweep.slot_lengths = doc.get_doubles("sweep", "slot_lengths", {});
    cfg.sweep.mu_multipliers = doc.get_doubles("sweep", "mu_multipliers", cfg.sweep.mu_multipliers);
    if (cfg.sweep.loads.empty()) doc.fail("sweep", "loads", "empty axis");
    if (cfg.sweep.mu_multipliers.empty()) doc.fail("sweep", "mu_multipliers", "empty axis");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(IniDocument::load(path)); }

}  // namespace f4tele
