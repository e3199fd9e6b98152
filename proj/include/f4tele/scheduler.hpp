#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "f4tele/model.hpp"

namespace f4tele {

struct InterleavedHotspot {};
struct RoundRobin {};
struct CustomSlots {
    std::vector<int> slots;
};
using SchedulePolicy = std::variant<InterleavedHotspot, RoundRobin, CustomSlots>;

class SchedulerError : public std::runtime_error {
public:
    enum class Kind { InvalidCapacity, PolicyMismatch, InvalidSlotLength };
    SchedulerError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Groups racks into sets of at most `p` racks, one class at a time.
///
/// Non-hotspot sets come first (ids 0..K_L-1), then hotspot sets. Within a
/// class, racks are taken in ascending id order and the ⌈n_class/p⌉ sets are
/// balanced so sizes differ by at most one.
Partition partition_racks(int n, int p, std::vector<int> hotspot_rack_ids);

/// Builds one rotation cycle.
///
/// InterleavedHotspot alternates non-hotspot and hotspot slots,
/// [L1, H1, L2, H2, ...]; each class is visited round-robin in its own
/// positions, so the cycle has 2 * lcm(K_L, K_H) slots and each class holds
/// exactly half of them. RoundRobin visits every set once in id order.
Schedule build_schedule(const Partition& partition, double d, const SchedulePolicy& policy);

// Fills tau, tau_hot and tau_max from slots, slot_length and set_class.
void derive_rotation_times(Schedule& schedule);

struct SetStability {
    int set_id = 0;
    RackClass klass = RackClass::NonHotspot;
    double utilization = 0.0;      // λ·X̄ per rack
    double share = 0.0;            // fraction of cycle time the set is served
    double effective_utilization = 0.0;
    bool stable = true;
};

struct StabilityReport {
    std::vector<SetStability> sets;
    bool stable = true;
};

/// Per-set effective utilisation λ·X̄·τ/(time allocated per cycle).
/// `packets_per_arrival` converts flow arrival rates to packet rates.
StabilityReport stability_check(const Schedule& schedule, const TrafficProfile& traffic, const ServiceModel& service,
                                const Partition& partition, double packets_per_arrival = 1.0,
                                double switchover_delay = 0.0);

// Benchmark mode: every rack owns a dedicated link, so ρ_eff = λ·X̄.
StabilityReport stability_check_dedicated(const TrafficProfile& traffic, const ServiceModel& service,
                                          const Partition& partition, double packets_per_arrival = 1.0);

// slot_index,set_id,start_offset_seconds
void write_schedule_csv(std::ostream& os, const Schedule& schedule);

}  // namespace f4tele
