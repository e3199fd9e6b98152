#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "f4tele/model.hpp"
#include "f4tele/traffic.hpp"

namespace f4tele {

enum class Mode { F4Tele, F4TelePlus, Benchmark };

const char* to_string(Mode mode);
// Accepts f4tele, f4tele+, f4teleplus, benchmark.
Mode parse_mode(const std::string& text);

enum class MirrorState { Transparent, Reflective };

struct SimOptions {
    Mode mode = Mode::F4Tele;
    std::uint64_t seed = 1;
    double duration = 10.0;
    double warmup_fraction = 0.1;
    // Common-random-numbers thinning for raw packet sources: candidates are
    // drawn at rate λ/keep and each is kept with probability keep, so a run at
    // a lower keep sees a subset of the arrivals of a run at a higher keep.
    double arrival_keep = 1.0;
    double cwnd_sample_interval = 1e-3;
    // Off: no internal sources; packets only come from Simulator::inject_packet.
    bool generate_traffic = true;
    // Record served packet ids per rack (tests only).
    bool trace_service_order = false;
};

struct SetStats {
    int set_id = 0;
    RackClass klass = RackClass::NonHotspot;
    int racks = 0;
    // Whole-run counters; arrivals = served + drops_deadline + drops_overflow + in_system_end.
    std::uint64_t arrivals = 0;
    std::uint64_t served = 0;
    std::uint64_t drops_deadline = 0;
    std::uint64_t drops_overflow = 0;
    std::uint64_t in_system_end = 0;
    // Post-warm-up observations.
    std::uint64_t waits_observed = 0;
    double mean_wait = 0.0;
    double p99_wait = 0.0;
    double service_time_fraction = 0.0;
    double throughput = 0.0;  // served bits/s over the measurement window, whole set
};

struct FlowStats {
    int flow_id = 0;
    int rack = 0;
    int set_id = 0;
    RackClass klass = RackClass::NonHotspot;
    Transport transport = Transport::RawPacket;
    double start = 0.0;
    double size = 0.0;
    double delivered = 0.0;        // bytes
    double throughput = 0.0;       // bits/s
    double completion_time = -1.0; // seconds since start, -1 when unfinished
};

struct SimReport {
    Mode mode = Mode::F4Tele;
    std::uint64_t seed = 0;
    double sim_duration = 0.0;
    double warmup = 0.0;
    std::vector<SetStats> per_set;
    std::vector<FlowStats> per_flow;  // flows started after warm-up
    std::vector<double> cwnd_low;     // periodic samples of active TCP windows, packets
    std::vector<double> cwnd_hot;
    // Window after an advancing ack, at most once per sample interval per flow.
    std::vector<double> cwnd_ack_low;
    std::vector<double> cwnd_ack_hot;
    std::uint64_t events = 0;
};

/// Event-driven engine over one configuration.
///
/// Each rack owns a primary and (F4Tele) backup queue feeding its own FSO
/// link. A link is usable only while its set's mirror is Transparent, which
/// the slot rotation toggles; Benchmark gives every rack a dedicated,
/// always-usable link. Service is FIFO by arrival time across both queues.
class Simulator {
public:
    Simulator(const ValidatedConfig& config, const SimOptions& options);
    ~Simulator();
    Simulator(const Simulator&) = delete;
    Simulator& operator=(const Simulator&) = delete;

    // Queue a packet arrival at `rack`; service <= 0 draws from the service model.
    std::uint64_t inject_packet(int rack, double time, double bytes = 1500.0, double service = 0.0);
    // Processes every event with time <= until.
    void run_until(double until);
    double now() const;

    // Mirror transitions at the start of global slot `slot_index`:
    // outgoing set -> Reflective, incoming set -> Transparent (after any
    // switchover delay), then service starts on the incoming racks.
    void on_slot_boundary(long slot_index);
    // Starts service on every idle rack of `set_id` whose link is usable.
    void serve_packets(int set_id);

    MirrorState mirror(int set_id) const;
    std::size_t primary_size(int rack) const;
    std::size_t backup_size(int rack) const;
    const std::vector<std::uint64_t>& service_order(int rack) const;

    SimReport report() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Runs one replication. Single-threaded and deterministic in (config, options).
SimReport run_simulation(const ValidatedConfig& config, const SimOptions& options);

// Mean per-flow throughput over flows of a class (NaN when there are none).
double mean_flow_throughput(const SimReport& report, RackClass klass);
// Post-warm-up mean wait pooled over sets of a class (NaN when unobserved).
double mean_class_wait(const SimReport& report, RackClass klass);
double class_throughput(const SimReport& report, RackClass klass);
std::uint64_t total_served(const SimReport& report);

}  // namespace f4tele
