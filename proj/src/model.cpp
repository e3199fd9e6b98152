#include "f4tele/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace f4tele {

const char* to_string(RackClass klass) { return klass == RackClass::Hotspot ? "hotspot" : "non-hotspot"; }

const char* source_name(const SourceType& source) {
    if (std::holds_alternative<PoissonPacket>(source)) return "poisson";
    if (std::holds_alternative<UdpConstantRate>(source)) return "udp";
    return "tcp";
}

const RackSet& Partition::set(int set_id) const {
    for (const auto& s : sets)
        if (s.set_id == set_id) return s;
    throw std::out_of_range("unknown set id " + std::to_string(set_id));
}

std::vector<int> Partition::rack_to_set(int n_racks) const {
    std::vector<int> owner(static_cast<std::size_t>(n_racks), -1);
    for (const auto& s : sets)
        for (int r : s.rack_ids)
            if (r >= 0 && r < n_racks) owner[static_cast<std::size_t>(r)] = s.set_id;
    return owner;
}

std::vector<int> Schedule::positions_of(int set_id) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < slots.size(); ++i)
        if (slots[i] == set_id) out.push_back(static_cast<int>(i));
    return out;
}

double Schedule::service_share(int set_id) const {
    if (slots.empty()) return 0.0;
    return static_cast<double>(positions_of(set_id).size()) / static_cast<double>(slots.size());
}

double ServiceModel::second_moment() const {
    switch (distribution) {
    case ServiceDistribution::Exponential: return 2.0 * mean_service * mean_service;
    case ServiceDistribution::Deterministic: return mean_service * mean_service;
    case ServiceDistribution::GeneralMoments: return m2;
    }
    return m2;
}

double ServiceModel::third_moment() const {
    const double x = mean_service;
    switch (distribution) {
    case ServiceDistribution::Exponential: return 6.0 * x * x * x;
    case ServiceDistribution::Deterministic: return x * x * x;
    case ServiceDistribution::GeneralMoments: return m3;
    }
    return m3;
}

ServiceModel ServiceModel::scaled(double factor) const {
    ServiceModel out = *this;
    out.mean_service *= factor;
    out.m2 *= factor * factor;
    out.m3 *= factor * factor * factor;
    return out;
}

ServiceModel exponential_service(double mean) { return {mean, ServiceDistribution::Exponential, 0.0, 0.0}; }
ServiceModel deterministic_service(double mean) { return {mean, ServiceDistribution::Deterministic, 0.0, 0.0}; }

namespace {

std::string join(const std::vector<std::string>& lines) {
    std::ostringstream os;
    os << "invalid configuration:";
    for (const auto& l : lines) os << "\n  - " << l;
    return os.str();
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

void check_cluster(const ClusterSpec& c, std::vector<std::string>& out) {
    if (c.n_data_racks < 1) out.push_back("cluster.n_data_racks must be >= 1");
    if (c.n_nms_racks < 1) out.push_back("cluster.n_nms_racks must be >= 1");
    if (c.bundle_capacity < 1 || c.bundle_capacity > c.n_data_racks)
        out.push_back("cluster.bundle_capacity must satisfy 1 <= P <= N");
    if (!positive(c.fso_rate)) out.push_back("cluster.fso_rate must be > 0");
    if (!(c.backup_drain_rate >= 0.0) || !std::isfinite(c.backup_drain_rate))
        out.push_back("cluster.backup_drain_rate must be >= 0");
    if (c.primary_buffer < 0) out.push_back("cluster.primary_buffer must be >= 0");
    if (c.backup_buffer < 0) out.push_back("cluster.backup_buffer must be >= 0");
    if (!(c.switchover_delay >= 0.0) || !std::isfinite(c.switchover_delay))
        out.push_back("cluster.switchover_delay must be >= 0");
}

void check_partition(const ClusterSpec& c, const Partition& p, std::vector<std::string>& out) {
    std::set<int> seen_racks;
    std::set<int> seen_ids;
    std::size_t total = 0;
    int hot = 0;
    int low = 0;
    for (const auto& s : p.sets) {
        if (!seen_ids.insert(s.set_id).second) out.push_back("partition: duplicate set id " + std::to_string(s.set_id));
        if (s.rack_ids.empty()) out.push_back("partition: set " + std::to_string(s.set_id) + " is empty");
        if (static_cast<int>(s.rack_ids.size()) > c.bundle_capacity)
            out.push_back("partition: set " + std::to_string(s.set_id) + " has more than P racks");
        for (int r : s.rack_ids) {
            if (r < 0 || r >= c.n_data_racks)
                out.push_back("partition: rack id " + std::to_string(r) + " outside [0, N)");
            if (!seen_racks.insert(r).second)
                out.push_back("partition: rack " + std::to_string(r) + " appears in more than one set");
        }
        total += s.rack_ids.size();
        (s.klass == RackClass::Hotspot ? hot : low) += 1;
    }
    if (total > static_cast<std::size_t>(std::max(c.n_data_racks, 0)))
        out.push_back("partition: set union exceeds N");
    else if (seen_racks.size() != static_cast<std::size_t>(std::max(c.n_data_racks, 0)))
        out.push_back("partition: sets do not cover all N data racks");
    for (std::size_t i = 0; i < p.sets.size(); ++i)
        if (p.sets[i].set_id != static_cast<int>(i)) {
            out.push_back("partition: set ids must be 0..K-1 in order");
            break;
        }
    if (p.k_total != static_cast<int>(p.sets.size())) out.push_back("partition: k_total does not match number of sets");
    if (p.k_hot != hot) out.push_back("partition: k_hot does not match hotspot set count");
    if (p.k_low != low) out.push_back("partition: k_low does not match non-hotspot set count");
    if (p.k_total != p.k_hot + p.k_low) out.push_back("partition: k_total != k_hot + k_low");
    std::vector<int> expect_low;
    for (const auto& s : p.sets)
        if (s.klass == RackClass::NonHotspot) expect_low.push_back(s.set_id);
    if (p.low_set_ids != expect_low) out.push_back("partition: low_set_ids does not list the non-hotspot sets");
}

void check_schedule(const Partition& p, const Schedule& s, std::vector<std::string>& out) {
    if (!positive(s.slot_length)) out.push_back("schedule: slot length d must be > 0");
    if (s.slots.empty()) out.push_back("schedule: empty slot list");
    const double tau = static_cast<double>(s.slots.size()) * s.slot_length;
    if (std::abs(s.tau - tau) > 1e-12 * std::max(1.0, tau)) out.push_back("schedule: tau != len(slots) * d");
    if (s.n_sets() != p.k_total) out.push_back("schedule: set class table does not match partition");
    for (const auto& set : p.sets) {
        if (std::find(s.slots.begin(), s.slots.end(), set.set_id) == s.slots.end())
            out.push_back("schedule: set " + std::to_string(set.set_id) + " never served");
        if (set.set_id < s.n_sets() && s.set_class[static_cast<std::size_t>(set.set_id)] != set.klass)
            out.push_back("schedule: class of set " + std::to_string(set.set_id) + " disagrees with partition");
    }
    for (int id : s.slots)
        if (id < 0 || id >= p.k_total) {
            out.push_back("schedule: slot refers to unknown set " + std::to_string(id));
            break;
        }
    const double eps = 1e-12 * std::max(1.0, s.tau);
    if (!(s.tau_hot <= s.tau_max + eps && s.tau_max <= s.tau + eps))
        out.push_back("schedule: requires tau_hot <= tau_max <= tau");
}

void check_traffic(const TrafficProfile& t, std::vector<std::string>& out) {
    if (!(t.lambda_low >= 0.0) || !std::isfinite(t.lambda_low)) out.push_back("traffic.lambda_low must be >= 0");
    if (!(t.lambda_hot >= t.lambda_low) || !std::isfinite(t.lambda_hot))
        out.push_back("traffic.lambda_hot must be >= lambda_low");
    if (!(t.beta > 0.0 && t.beta <= 1.0)) out.push_back("traffic.beta must lie in (0, 1]");
    if (t.lambda_hot > 0.0 && std::abs(t.beta - t.lambda_low / t.lambda_hot) > 1e-9 * std::max(1.0, t.beta))
        out.push_back("traffic.beta inconsistent with lambda_low / lambda_hot");
    if (!(t.qos_deadline > 0.0)) out.push_back("traffic.qos_deadline must be > 0");
    if (!positive(t.packet_bytes)) out.push_back("traffic.packet_bytes must be > 0");
    if (const auto* u = std::get_if<UniformBytes>(&t.flow_size_law)) {
        if (!(u->min_bytes > 0.0 && u->max_bytes >= u->min_bytes)) out.push_back("traffic: flow size range invalid");
    } else if (std::get<FixedPackets>(t.flow_size_law).packets < 1) {
        out.push_back("traffic: fixed flow size must be >= 1 packet");
    }
    if (const auto* udp = std::get_if<UdpConstantRate>(&t.source_type)) {
        if (!positive(udp->rate)) out.push_back("traffic.udp_rate must be > 0");
    } else if (const auto* tcp = std::get_if<TcpAimd>(&t.source_type)) {
        const auto& a = tcp->params;
        if (!(positive(a.initial_window) && positive(a.ssthresh) && positive(a.rtt) && positive(a.mss) &&
              positive(a.max_window)))
            out.push_back("traffic: AIMD parameters must all be > 0");
        if (!(a.loss_response > 0.0 && a.loss_response < 1.0)) out.push_back("traffic: loss_response must lie in (0, 1)");
    }
}

void check_service(const ServiceModel& s, std::vector<std::string>& out) {
    if (!positive(s.mean_service)) out.push_back("service.mean_service must be > 0");
    if (s.distribution == ServiceDistribution::GeneralMoments) {
        if (!positive(s.m2) || !positive(s.m3)) out.push_back("service moments must be finite and > 0");
        else if (s.m2 < s.mean_service * s.mean_service * (1 - 1e-12))
            out.push_back("service second moment below mean squared");
    }
}

}  // namespace

ConfigViolation::ConfigViolation(std::vector<std::string> violations)
    : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

std::vector<std::string> check_config(const ClusterSpec& cluster, const Partition& partition,
                                      const Schedule& schedule, const TrafficProfile& traffic,
                                      const ServiceModel& service) {
    std::vector<std::string> out;
    check_cluster(cluster, out);
    check_partition(cluster, partition, out);
    check_schedule(partition, schedule, out);
    check_traffic(traffic, out);
    check_service(service, out);
    return out;
}

ValidatedConfig validate_config(const ClusterSpec& cluster, const Partition& partition, const Schedule& schedule,
                                const TrafficProfile& traffic, const ServiceModel& service, SlotEndPolicy slot_end) {
    auto violations = check_config(cluster, partition, schedule, traffic, service);
    if (!violations.empty()) throw ConfigViolation(std::move(violations));

    ValidatedConfig cfg;
    cfg.cluster_ = cluster;
    cfg.partition_ = partition;
    cfg.schedule_ = schedule;
    cfg.traffic_ = traffic;
    cfg.service_ = service;
    cfg.slot_end_ = slot_end;
    if (partition.k_hot > 0 && traffic.beta == 1.0) cfg.warnings_.push_back("beta = 1: hotspot sets carry no extra load");
    return cfg;
}

}  // namespace f4tele
