#include "f4tele/report.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace f4tele {

std::string fmt_num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string sets_csv(const SimReport& r) {
    std::ostringstream os;
    os << "set_id,class,racks,arrivals,served,drops_deadline,drops_overflow,in_system_end,waits_observed,"
          "mean_wait,p99_wait,service_time_fraction,throughput_bps\n";
    for (const auto& s : r.per_set)
        os << s.set_id << ',' << to_string(s.klass) << ',' << s.racks << ',' << s.arrivals << ',' << s.served << ','
           << s.drops_deadline << ',' << s.drops_overflow << ',' << s.in_system_end << ',' << s.waits_observed << ','
           << fmt_num(s.mean_wait) << ',' << fmt_num(s.p99_wait) << ',' << fmt_num(s.service_time_fraction) << ','
           << fmt_num(s.throughput) << '\n';
    return os.str();
}

std::string flows_csv(const SimReport& r) {
    std::ostringstream os;
    os << "flow_id,rack,set_id,class,transport,start,size_bytes,delivered_bytes,throughput_bps,completion_time\n";
    for (const auto& f : r.per_flow)
        os << f.flow_id << ',' << f.rack << ',' << f.set_id << ',' << to_string(f.klass) << ',' << to_string(f.transport)
           << ',' << fmt_num(f.start) << ',' << fmt_num(f.size) << ',' << fmt_num(f.delivered) << ','
           << fmt_num(f.throughput) << ',' << fmt_num(f.completion_time) << '\n';
    return os.str();
}

std::uint64_t report_hash(const SimReport& report) { return fnv1a64(sets_csv(report) + flows_csv(report)); }

void write_summary(std::ostream& os, const SimReport& r) {
    os << "mode: " << to_string(r.mode) << '\n'
       << "seed: " << r.seed << '\n'
       << "duration_s: " << fmt_num(r.sim_duration) << '\n'
       << "warmup_s: " << fmt_num(r.warmup) << '\n'
       << "events: " << r.events << '\n'
       << "served_packets: " << total_served(r) << '\n';
    for (auto klass : {RackClass::NonHotspot, RackClass::Hotspot}) {
        os << to_string(klass) << "_mean_wait_s: " << fmt_num(mean_class_wait(r, klass)) << '\n'
           << to_string(klass) << "_throughput_bps: " << fmt_num(class_throughput(r, klass)) << '\n';
        if (!r.per_flow.empty())
            os << to_string(klass) << "_mean_flow_throughput_bps: " << fmt_num(mean_flow_throughput(r, klass)) << '\n';
    }
    os << "report_hash: " << hex64(report_hash(r)) << '\n';
}

}  // namespace f4tele
