#include "f4tele/scheduler.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

namespace f4tele {

namespace {

void append_class_sets(Partition& out, const std::vector<int>& racks, int p, RackClass klass) {
    if (racks.empty()) return;
    const int n = static_cast<int>(racks.size());
    const int k = (n + p - 1) / p;
    const int base = n / k;
    const int extra = n % k;
    std::size_t next = 0;
    for (int i = 0; i < k; ++i) {
        RackSet set;
        set.set_id = static_cast<int>(out.sets.size());
        set.klass = klass;
        const int size = base + (i < extra ? 1 : 0);
        for (int j = 0; j < size; ++j) set.rack_ids.push_back(racks[next++]);
        out.sets.push_back(std::move(set));
    }
}

// Longest idle gap between consecutive occurrences of any position in `pos`
// on a cycle of `n` slots, measured in slots (end of one to start of next).
int longest_gap(const std::vector<int>& pos, int n) {
    if (pos.empty()) return 0;
    int gap = 0;
    for (std::size_t i = 0; i < pos.size(); ++i) {
        const int next = i + 1 < pos.size() ? pos[i + 1] : pos.front() + n;
        gap = std::max(gap, next - pos[i] - 1);
    }
    return gap;
}

}  // namespace

Partition partition_racks(int n, int p, std::vector<int> hotspot_rack_ids) {
    if (n < 1 || p < 1)
        throw SchedulerError(SchedulerError::Kind::InvalidCapacity,
                             "need N >= 1 and P >= 1, got N=" + std::to_string(n) + ", P=" + std::to_string(p));
    std::sort(hotspot_rack_ids.begin(), hotspot_rack_ids.end());
    hotspot_rack_ids.erase(std::unique(hotspot_rack_ids.begin(), hotspot_rack_ids.end()), hotspot_rack_ids.end());
    for (int r : hotspot_rack_ids)
        if (r < 0 || r >= n)
            throw SchedulerError(SchedulerError::Kind::InvalidCapacity, "hotspot rack id " + std::to_string(r) + " outside [0, n)");

    std::vector<int> low;
    for (int r = 0; r < n; ++r)
        if (!std::binary_search(hotspot_rack_ids.begin(), hotspot_rack_ids.end(), r)) low.push_back(r);

    Partition out;
    append_class_sets(out, low, p, RackClass::NonHotspot);
    append_class_sets(out, hotspot_rack_ids, p, RackClass::Hotspot);
    for (const auto& s : out.sets) {
        if (s.klass == RackClass::Hotspot) {
            ++out.k_hot;
        } else {
            ++out.k_low;
            out.low_set_ids.push_back(s.set_id);
        }
    }
    out.k_total = out.k_hot + out.k_low;
    return out;
}

void derive_rotation_times(Schedule& s) {
    const int n = static_cast<int>(s.slots.size());
    const double d = s.slot_length;
    s.tau = n * d;

    std::vector<int> hot_positions;
    for (int i = 0; i < n; ++i) {
        const int id = s.slots[static_cast<std::size_t>(i)];
        if (id >= 0 && id < s.n_sets() && s.set_class[static_cast<std::size_t>(id)] == RackClass::Hotspot)
            hot_positions.push_back(i);
    }
    s.tau_hot = longest_gap(hot_positions, n) * d;

    int worst = 0;
    bool any_low = false;
    for (int id = 0; id < s.n_sets(); ++id) {
        if (s.set_class[static_cast<std::size_t>(id)] != RackClass::NonHotspot) continue;
        any_low = true;
        worst = std::max(worst, longest_gap(s.positions_of(id), n));
    }
    if (!any_low)
        for (int id = 0; id < s.n_sets(); ++id) worst = std::max(worst, longest_gap(s.positions_of(id), n));
    s.tau_max = std::max(worst * d, s.tau_hot);
}

Schedule build_schedule(const Partition& partition, double d, const SchedulePolicy& policy) {
    if (!(d > 0.0)) throw SchedulerError(SchedulerError::Kind::InvalidSlotLength, "slot length d must be > 0");

    Schedule s;
    s.slot_length = d;
    s.set_class.resize(static_cast<std::size_t>(partition.k_total));
    std::vector<int> low, hot;
    for (const auto& set : partition.sets) {
        if (set.set_id < 0 || set.set_id >= partition.k_total)
            throw SchedulerError(SchedulerError::Kind::PolicyMismatch, "partition set ids must be 0..K-1");
        s.set_class[static_cast<std::size_t>(set.set_id)] = set.klass;
        (set.klass == RackClass::Hotspot ? hot : low).push_back(set.set_id);
    }

    if (std::holds_alternative<InterleavedHotspot>(policy)) {
        if (hot.empty() || low.empty())
            throw SchedulerError(SchedulerError::Kind::PolicyMismatch,
                                 "interleaved schedule needs at least one hotspot and one non-hotspot set");
        const std::size_t pairs = std::lcm(low.size(), hot.size());
        for (std::size_t i = 0; i < pairs; ++i) {
            s.slots.push_back(low[i % low.size()]);
            s.slots.push_back(hot[i % hot.size()]);
        }
    } else if (std::holds_alternative<RoundRobin>(policy)) {
        for (int id = 0; id < partition.k_total; ++id) s.slots.push_back(id);
    } else {
        s.slots = std::get<CustomSlots>(policy).slots;
        if (s.slots.empty()) throw SchedulerError(SchedulerError::Kind::PolicyMismatch, "custom schedule is empty");
        for (int id : s.slots)
            if (id < 0 || id >= partition.k_total)
                throw SchedulerError(SchedulerError::Kind::PolicyMismatch, "custom slot names unknown set " + std::to_string(id));
        for (int id = 0; id < partition.k_total; ++id)
            if (std::find(s.slots.begin(), s.slots.end(), id) == s.slots.end())
                throw SchedulerError(SchedulerError::Kind::PolicyMismatch, "custom schedule never serves set " + std::to_string(id));
    }
    derive_rotation_times(s);
    return s;
}

StabilityReport stability_check(const Schedule& schedule, const TrafficProfile& traffic, const ServiceModel& service,
                                const Partition& partition, double packets_per_arrival, double switchover_delay) {
    StabilityReport report;
    const double usable = std::max(schedule.slot_length - switchover_delay, 0.0);
    for (const auto& set : partition.sets) {
        SetStability st;
        st.set_id = set.set_id;
        st.klass = set.klass;
        st.utilization = traffic.rate_of(set.klass) * packets_per_arrival * service.mean_service;
        const double allocated = static_cast<double>(schedule.positions_of(set.set_id).size()) * usable;
        st.share = schedule.tau > 0.0 ? allocated / schedule.tau : 0.0;
        if (st.utilization == 0.0)
            st.effective_utilization = 0.0;
        else if (allocated <= 0.0)
            st.effective_utilization = std::numeric_limits<double>::infinity();
        else
            st.effective_utilization = st.utilization * schedule.tau / allocated;
        st.stable = st.effective_utilization < 1.0;
        report.stable = report.stable && st.stable;
        report.sets.push_back(st);
    }
    return report;
}

StabilityReport stability_check_dedicated(const TrafficProfile& traffic, const ServiceModel& service,
                                          const Partition& partition, double packets_per_arrival) {
    StabilityReport report;
    for (const auto& set : partition.sets) {
        SetStability st;
        st.set_id = set.set_id;
        st.klass = set.klass;
        st.utilization = traffic.rate_of(set.klass) * packets_per_arrival * service.mean_service;
        st.share = 1.0;
        st.effective_utilization = st.utilization;
        st.stable = st.effective_utilization < 1.0;
        report.stable = report.stable && st.stable;
        report.sets.push_back(st);
    }
    return report;
}

void write_schedule_csv(std::ostream& os, const Schedule& schedule) {
    os << "slot_index,set_id,start_offset_seconds\n";
    const auto old = os.precision(17);
    for (std::size_t i = 0; i < schedule.slots.size(); ++i)
        os << i << ',' << schedule.slots[i] << ',' << static_cast<double>(i) * schedule.slot_length << '\n';
    os.precision(old);
}

}  // namespace f4tele
