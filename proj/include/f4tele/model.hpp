#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace f4tele {

// Units: seconds, bytes, bits/second throughout.

enum class RackClass { Hotspot, NonHotspot };

const char* to_string(RackClass klass);

struct ClusterSpec {
    int n_data_racks = 24;      // N
    int n_nms_racks = 4;        // U, informational only
    int bundle_capacity = 4;    // P
    double fso_rate = 1e9;
    int primary_buffer = 1000;  // packets
    int backup_buffer = 10000;  // packets
    double backup_drain_rate = 1e7;
    double switchover_delay = 0.0;
};

struct RackSet {
    int set_id = 0;
    std::vector<int> rack_ids;
    RackClass klass = RackClass::NonHotspot;
};

struct Partition {
    std::vector<RackSet> sets;
    int k_total = 0;
    int k_hot = 0;
    int k_low = 0;
    std::vector<int> low_set_ids;

    const RackSet& set(int set_id) const;
    // Set id owning each rack, indexed by rack id.
    std::vector<int> rack_to_set(int n_racks) const;
};

struct Schedule {
    std::vector<int> slots;        // set id per slot, one rotation cycle
    double slot_length = 0.0;      // d
    double tau = 0.0;              // len(slots) * d
    double tau_hot = 0.0;          // longest gap between hotspot-class slots
    double tau_max = 0.0;          // longest gap between visits of a non-hotspot set
    std::vector<RackClass> set_class;  // indexed by set id

    int n_sets() const { return static_cast<int>(set_class.size()); }
    // Slot positions (within one cycle) at which set_id is served.
    std::vector<int> positions_of(int set_id) const;
    double service_share(int set_id) const;
};

struct UniformBytes {
    double min_bytes = 1e6;
    double max_bytes = 1e7;
};
struct FixedPackets {
    int packets = 1;
};
using FlowSizeLaw = std::variant<UniformBytes, FixedPackets>;

struct AimdParams {
    double initial_window = 2.0;   // packets
    double ssthresh = 64.0;        // packets
    double rtt = 0.2e-3;
    double mss = 1500.0;           // bytes
    double loss_response = 0.5;
    double max_window = 256.0;     // receiver window cap, packets
};

struct PoissonPacket {};
struct UdpConstantRate {
    double rate = 100e6;
};
struct TcpAimd {
    AimdParams params;
};
using SourceType = std::variant<PoissonPacket, UdpConstantRate, TcpAimd>;

const char* source_name(const SourceType& source);

struct TrafficProfile {
    double lambda_low = 0.0;   // per rack, packets/s (or flows/s for flow sources)
    double lambda_hot = 0.0;
    double beta = 1.0;         // lambda_low / lambda_hot
    FlowSizeLaw flow_size_law = FixedPackets{1};
    SourceType source_type = PoissonPacket{};
    double qos_deadline = std::numeric_limits<double>::infinity();
    double packet_bytes = 1500.0;
    bool loopback_filter_udp = true;

    double rate_of(RackClass klass) const { return klass == RackClass::Hotspot ? lambda_hot : lambda_low; }
};

enum class ServiceDistribution { Exponential, Deterministic, GeneralMoments };

struct ServiceModel {
    double mean_service = 12e-6;  // X̄, seconds per packet
    ServiceDistribution distribution = ServiceDistribution::Exponential;
    double m2 = 0.0;  // only read for GeneralMoments
    double m3 = 0.0;

    double second_moment() const;
    double third_moment() const;
    double utilization(double lambda) const { return lambda * mean_service; }
    ServiceModel scaled(double factor) const;
};

ServiceModel exponential_service(double mean);
ServiceModel deterministic_service(double mean);

enum class SlotEndPolicy { Complete, Gated };

class ConfigViolation : public std::runtime_error {
public:
    explicit ConfigViolation(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

// Immutable once constructed; only validate_config builds one.
class ValidatedConfig {
public:
    const ClusterSpec& cluster() const { return cluster_; }
    const Partition& partition() const { return partition_; }
    const Schedule& schedule() const { return schedule_; }
    const TrafficProfile& traffic() const { return traffic_; }
    const ServiceModel& service() const { return service_; }
    SlotEndPolicy slot_end_policy() const { return slot_end_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    friend ValidatedConfig validate_config(const ClusterSpec&, const Partition&, const Schedule&,
                                           const TrafficProfile&, const ServiceModel&, SlotEndPolicy);
    ValidatedConfig() = default;

    ClusterSpec cluster_;
    Partition partition_;
    Schedule schedule_;
    TrafficProfile traffic_;
    ServiceModel service_;
    SlotEndPolicy slot_end_ = SlotEndPolicy::Complete;
    std::vector<std::string> warnings_;
};

// Returns every violated invariant at once (empty when valid).
std::vector<std::string> check_config(const ClusterSpec& cluster, const Partition& partition,
                                      const Schedule& schedule, const TrafficProfile& traffic,
                                      const ServiceModel& service);

// Throws ConfigViolation listing all violations; never accepts partially.
ValidatedConfig validate_config(const ClusterSpec& cluster, const Partition& partition,
                                const Schedule& schedule, const TrafficProfile& traffic,
                                const ServiceModel& service = {},
                                SlotEndPolicy slot_end = SlotEndPolicy::Complete);

}  // namespace f4tele
