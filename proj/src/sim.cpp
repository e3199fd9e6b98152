#include "f4tele/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>

namespace f4tele {

const char* to_string(Mode mode) {
    switch (mode) {
    case Mode::F4Tele: return "f4tele";
    case Mode::F4TelePlus: return "f4tele+";
    case Mode::Benchmark: return "benchmark";
    }
    return "f4tele";
}

Mode parse_mode(const std::string& text) {
    if (text == "f4tele") return Mode::F4Tele;
    if (text == "f4tele+" || text == "f4teleplus" || text == "f4tele-plus") return Mode::F4TelePlus;
    if (text == "benchmark") return Mode::Benchmark;
    throw std::invalid_argument("unknown mode '" + text + "' (expected f4tele, f4tele+ or benchmark)");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Same-timestamp ordering: departures, then slot boundaries, then arrivals.
enum class EventKind : int {
    Departure = 0,
    SlotBoundary,
    MirrorOn,
    Drain,
    Ack,
    Timeout,
    CwndSample,
    PacketArrival,
    UdpEmit,
    FlowStart,
};

struct Event {
    double time;
    EventKind kind;
    std::uint64_t seq;
    long a;
    long b;
    long c;
    double x;
};

struct EventLater {
    bool operator()(const Event& x, const Event& y) const {
        if (x.time != y.time) return x.time > y.time;
        if (x.kind != y.kind) return static_cast<int>(x.kind) > static_cast<int>(y.kind);
        return x.seq > y.seq;
    }
};

struct Packet {
    std::uint64_t id = 0;
    double arrival = 0.0;
    double bytes = 0.0;
    double service = 0.0;
    int flow = -1;
    int seq = -1;
    int epoch = 0;  // sender timeout count at transmission (TCP)
    Transport transport = Transport::RawPacket;
};

struct Rack {
    int set_id = 0;
    RackClass klass = RackClass::NonHotspot;
    std::deque<Packet> primary;  // sorted by arrival
    std::deque<Packet> backup;
    bool busy = false;
    Packet in_service;
    bool drain_pending = false;
    PoissonArrivals arrivals{0.0, Rng{}};
    Rng marks;
    Rng flows;
    std::vector<std::uint64_t> order;
};

struct SetRuntime {
    MirrorState mirror = MirrorState::Reflective;
    double slot_end = 0.0;         // when the current run of slots ends
    double transparent_since = 0.0;
    double transparent_time = 0.0; // within the measurement window
    std::vector<double> waits;
    SetStats stats;
    double served_bits = 0.0;
};

struct Flow {
    FlowSpec spec;
    std::optional<TcpAimdSender> sender;
    std::optional<TcpReceiver> receiver;
    std::vector<Emission> emissions;  // UDP
    int resolved = 0;                 // UDP packets delivered or dropped
    int total_packets = 0;
    double delivered = 0.0;
    double finished = -1.0;
    double rto_deadline = kInf;
    double last_ack_sample = -kInf;
    bool timer_pending = false;
    bool active = true;
};

}  // namespace

struct Simulator::Impl {
    ValidatedConfig cfg;
    SimOptions opt;
    double clock = 0.0;
    double warmup = 0.0;
    std::uint64_t next_seq = 0;
    std::uint64_t next_packet = 0;
    std::uint64_t processed = 0;
    std::priority_queue<Event, std::vector<Event>, EventLater> events;
    std::vector<Rack> racks;
    std::vector<SetRuntime> sets;
    std::vector<Flow> flows;
    std::vector<int> active_tcp;
    std::vector<std::pair<int, Packet>> staged;  // injected packets, by event
    std::vector<double> cwnd_low, cwnd_hot;
    std::vector<double> cwnd_ack_low, cwnd_ack_hot;
    std::exponential_distribution<double> unit_exp{1.0};
    std::uniform_real_distribution<double> unit_uniform{0.0, 1.0};

    Impl(const ValidatedConfig& c, const SimOptions& o) : cfg(c), opt(o) {
        if (!(opt.duration > 0.0)) throw std::invalid_argument("duration must be > 0");
        if (!(opt.arrival_keep > 0.0 && opt.arrival_keep <= 1.0)) throw std::invalid_argument("arrival_keep must lie in (0, 1]");
        warmup = opt.warmup_fraction * opt.duration;
        const auto& part = cfg.partition();
        const int n = cfg.cluster().n_data_racks;
        racks.resize(static_cast<std::size_t>(n));
        sets.resize(part.sets.size());
        for (const auto& s : part.sets) {
            auto& rt = sets[static_cast<std::size_t>(s.set_id)];
            rt.stats.set_id = s.set_id;
            rt.stats.klass = s.klass;
            rt.stats.racks = static_cast<int>(s.rack_ids.size());
            for (int r : s.rack_ids) {
                auto& rack = racks[static_cast<std::size_t>(r)];
                rack.set_id = s.set_id;
                rack.klass = s.klass;
            }
        }
        const auto& traffic = cfg.traffic();
        for (int r = 0; r < n; ++r) {
            auto& rack = racks[static_cast<std::size_t>(r)];
            const double rate = traffic.rate_of(rack.klass);
            const bool raw = std::holds_alternative<PoissonPacket>(traffic.source_type);
            rack.arrivals = PoissonArrivals(raw ? rate / opt.arrival_keep : rate, make_stream(opt.seed, static_cast<std::uint64_t>(r), 1));
            rack.marks = make_stream(opt.seed, static_cast<std::uint64_t>(r), 2);
            rack.flows = make_stream(opt.seed, static_cast<std::uint64_t>(r), 3);
        }

        if (opt.mode == Mode::Benchmark) {
            for (auto& s : sets) {
                s.mirror = MirrorState::Transparent;
                s.slot_end = kInf;
            }
        } else {
            push(0.0, EventKind::SlotBoundary, 0, 0);
        }

        if (opt.generate_traffic) {
            const bool raw = std::holds_alternative<PoissonPacket>(traffic.source_type);
            for (int r = 0; r < n; ++r) {
                auto& rack = racks[static_cast<std::size_t>(r)];
                const double t = rack.arrivals.next(0.0);
                if (t <= opt.duration) push(t, raw ? EventKind::PacketArrival : EventKind::FlowStart, r, 0);
            }
            if (std::holds_alternative<TcpAimd>(traffic.source_type) && opt.cwnd_sample_interval > 0.0)
                push(warmup, EventKind::CwndSample, 0, 0);
        }
    }

    void push(double t, EventKind kind, long a, long b, long c = 0, double x = 0.0) {
        events.push(Event{t, kind, next_seq++, a, b, c, x});
    }

    bool usable(const Rack& rack) const {
        return sets[static_cast<std::size_t>(rack.set_id)].mirror == MirrorState::Transparent;
    }

    double draw_service(Rack& rack) {
        const auto& s = cfg.service();
        switch (s.distribution) {
        case ServiceDistribution::Exponential: return s.mean_service * unit_exp(rack.marks);
        case ServiceDistribution::Deterministic: return s.mean_service;
        case ServiceDistribution::GeneralMoments: {
            const double var = s.m2 - s.mean_service * s.mean_service;
            if (var <= 0.0) return s.mean_service;
            std::gamma_distribution<double> g(s.mean_service * s.mean_service / var, var / s.mean_service);
            return g(rack.marks);
        }
        }
        return s.mean_service;
    }

    double transmission_time(double bytes) const { return bytes * 8.0 / cfg.cluster().fso_rate; }

    // ----- slot rotation -------------------------------------------------

    void set_transparent(int set_id, double t) {
        auto& s = sets[static_cast<std::size_t>(set_id)];
        if (s.mirror == MirrorState::Transparent) return;
        s.mirror = MirrorState::Transparent;
        s.transparent_since = t;
    }

    void set_reflective(int set_id, double t) {
        auto& s = sets[static_cast<std::size_t>(set_id)];
        if (s.mirror == MirrorState::Reflective) return;
        s.mirror = MirrorState::Reflective;
        s.transparent_time += std::max(0.0, std::min(t, opt.duration) - std::max(s.transparent_since, warmup));
    }

    void on_slot_boundary(long k) {
        if (opt.mode == Mode::Benchmark) return;
        const auto& sched = cfg.schedule();
        const long n = static_cast<long>(sched.slots.size());
        const double d = sched.slot_length;
        const double t = static_cast<double>(k) * d;
        const int incoming = sched.slots[static_cast<std::size_t>(k % n)];
        const int outgoing = k > 0 ? sched.slots[static_cast<std::size_t>((k - 1) % n)] : -1;

        long run = 1;
        while (run < n && sched.slots[static_cast<std::size_t>((k + run) % n)] == incoming) ++run;
        if (run == n) run = std::numeric_limits<long>::max() / 4;
        auto& in = sets[static_cast<std::size_t>(incoming)];

        if (outgoing != incoming) {
            if (outgoing >= 0) set_reflective(outgoing, t);
            in.slot_end = run >= std::numeric_limits<long>::max() / 4 ? kInf : static_cast<double>(k + run) * d;
            const double delay = cfg.cluster().switchover_delay;
            if (delay > 0.0) {
                push(t + delay, EventKind::MirrorOn, incoming, 0);
            } else {
                set_transparent(incoming, t);
                serve_packets(incoming);
            }
        }
        const double next = static_cast<double>(k + 1) * d;
        if (next <= opt.duration) push(next, EventKind::SlotBoundary, k + 1, 0);
    }

    void serve_packets(int set_id) {
        for (const auto& s : cfg.partition().sets)
            if (s.set_id == set_id)
                for (int r : s.rack_ids) start_service(r);
    }

    // ----- queues --------------------------------------------------------

    void count_drop(Rack& rack, const Packet& p, bool overflow) {
        auto& st = sets[static_cast<std::size_t>(rack.set_id)].stats;
        (overflow ? st.drops_overflow : st.drops_deadline) += 1;
        if (p.flow >= 0 && flows[static_cast<std::size_t>(p.flow)].spec.transport == Transport::UdpLike)
            resolve_udp(p.flow);
    }

    void enqueue(int r, Packet p) {
        auto& rack = racks[static_cast<std::size_t>(r)];
        const auto& cl = cfg.cluster();
        sets[static_cast<std::size_t>(rack.set_id)].stats.arrivals += 1;

        const bool loop_back = opt.mode == Mode::F4Tele && !usable(rack) &&
                               !(p.transport == Transport::UdpLike && cfg.traffic().loopback_filter_udp);
        if (loop_back) {
            if (static_cast<int>(rack.backup.size()) >= cl.backup_buffer) {
                count_drop(rack, p, true);
                return;
            }
            rack.backup.push_back(p);
            schedule_drain(r);
        } else {
            if (static_cast<int>(rack.primary.size()) >= cl.primary_buffer) {
                count_drop(rack, p, true);
                return;
            }
            rack.primary.push_back(p);
        }
        start_service(r);
    }

    void schedule_drain(int r) {
        auto& rack = racks[static_cast<std::size_t>(r)];
        const double rate = cfg.cluster().backup_drain_rate;
        if (rack.drain_pending || rack.backup.empty() || !(rate > 0.0)) return;
        if (static_cast<int>(rack.primary.size()) >= cfg.cluster().primary_buffer) return;
        rack.drain_pending = true;
        push(clock + rack.backup.front().bytes * 8.0 / rate, EventKind::Drain, r, 0);
    }

    // Backup head moves into the primary queue at its arrival-order position.
    void on_drain(int r) {
        auto& rack = racks[static_cast<std::size_t>(r)];
        rack.drain_pending = false;
        if (rack.backup.empty() || static_cast<int>(rack.primary.size()) >= cfg.cluster().primary_buffer) return;
        Packet p = rack.backup.front();
        rack.backup.pop_front();
        auto at = std::upper_bound(rack.primary.begin(), rack.primary.end(), p.arrival,
                                   [](double t, const Packet& q) { return t < q.arrival; });
        rack.primary.insert(at, p);
        schedule_drain(r);
    }

    // Head with the earliest arrival across both queues.
    std::deque<Packet>* next_queue(Rack& rack) {
        if (rack.primary.empty()) return rack.backup.empty() ? nullptr : &rack.backup;
        if (rack.backup.empty()) return &rack.primary;
        return rack.backup.front().arrival < rack.primary.front().arrival ? &rack.backup : &rack.primary;
    }

    void start_service(int r) {
        auto& rack = racks[static_cast<std::size_t>(r)];
        if (rack.busy || !usable(rack)) return;
        auto& set = sets[static_cast<std::size_t>(rack.set_id)];
        const double deadline = cfg.traffic().qos_deadline;
        while (auto* q = next_queue(rack)) {
            Packet p = q->front();
            if (clock - p.arrival > deadline) {
                q->pop_front();
                count_drop(rack, p, false);
                continue;
            }
            if (cfg.slot_end_policy() == SlotEndPolicy::Gated && clock + p.service > set.slot_end) return;
            q->pop_front();
            rack.busy = true;
            rack.in_service = p;
            if (p.arrival >= warmup) set.waits.push_back(clock - p.arrival);
            if (opt.trace_service_order) rack.order.push_back(p.id);
            push(clock + p.service, EventKind::Departure, r, 0);
            schedule_drain(r);
            return;
        }
    }

    void on_departure(int r) {
        auto& rack = racks[static_cast<std::size_t>(r)];
        rack.busy = false;
        const Packet p = rack.in_service;
        auto& set = sets[static_cast<std::size_t>(rack.set_id)];
        set.stats.served += 1;
        if (clock >= warmup) set.served_bits += p.bytes * 8.0;
        if (p.flow >= 0) deliver(p);
        start_service(r);
    }

    // ----- raw packet sources -------------------------------------------

    void on_packet_arrival(int r) {
        auto& rack = racks[static_cast<std::size_t>(r)];
        const double keep_draw = unit_uniform(rack.marks);
        const double service = draw_service(rack);
        if (keep_draw < opt.arrival_keep) {
            Packet p;
            p.id = next_packet++;
            p.arrival = clock;
            p.bytes = cfg.traffic().packet_bytes;
            p.service = service;
            enqueue(r, p);
        }
        const double t = rack.arrivals.next(clock);
        if (t <= opt.duration) push(t, EventKind::PacketArrival, r, 0);
    }

    // ----- flow sources --------------------------------------------------

    void on_flow_start(int r) {
        auto& rack = racks[static_cast<std::size_t>(r)];
        const auto& traffic = cfg.traffic();
        Flow f;
        f.spec.flow_id = static_cast<int>(flows.size());
        f.spec.source_rack = r;
        f.spec.start_time = clock;
        f.spec.size = sample_flow_size(traffic.flow_size_law, rack.flows, traffic.packet_bytes);
        const int id = f.spec.flow_id;
        if (const auto* udp = std::get_if<UdpConstantRate>(&traffic.source_type)) {
            f.spec.transport = Transport::UdpLike;
            f.emissions = udp_source(f.spec, udp->rate, traffic.packet_bytes);
            f.total_packets = static_cast<int>(f.emissions.size());
            flows.push_back(std::move(f));
            push(clock, EventKind::UdpEmit, id, 0);
        } else {
            const auto& params = std::get<TcpAimd>(traffic.source_type).params;
            f.spec.transport = Transport::TcpLike;
            f.sender.emplace(f.spec, params);
            f.total_packets = f.sender->total_packets();
            f.receiver.emplace(f.total_packets);
            flows.push_back(std::move(f));
            active_tcp.push_back(id);
            tcp_send(id);
        }
        const double t = rack.arrivals.next(clock);
        if (t <= opt.duration) push(t, EventKind::FlowStart, r, 0);
    }

    void on_udp_emit(int id, int index) {
        auto& f = flows[static_cast<std::size_t>(id)];
        const auto& e = f.emissions[static_cast<std::size_t>(index)];
        Packet p;
        p.id = next_packet++;
        p.arrival = clock;
        p.bytes = e.bytes;
        p.service = transmission_time(e.bytes);
        p.flow = id;
        p.seq = index;
        p.transport = Transport::UdpLike;
        const int rack = f.spec.source_rack;
        if (index + 1 < static_cast<int>(f.emissions.size())) {
            const double t = f.emissions[static_cast<std::size_t>(index + 1)].time;
            if (t <= opt.duration) push(t, EventKind::UdpEmit, id, index + 1);
        }
        enqueue(rack, p);
    }

    void resolve_udp(int id) {
        auto& f = flows[static_cast<std::size_t>(id)];
        if (++f.resolved >= f.total_packets) f.finished = clock;
    }

    void send_tcp_packet(int id, int seq) {
        auto& f = flows[static_cast<std::size_t>(id)];
        Packet p;
        p.id = next_packet++;
        p.arrival = clock;
        p.bytes = f.sender->packet_bytes(seq);
        p.service = transmission_time(p.bytes);
        p.flow = id;
        p.seq = seq;
        p.epoch = f.sender->epoch();
        p.transport = Transport::TcpLike;
        enqueue(f.spec.source_rack, p);
    }

    void arm_timer(int id, bool restart) {
        auto& f = flows[static_cast<std::size_t>(id)];
        if (f.sender->in_flight() == 0 || f.sender->done()) {
            f.rto_deadline = kInf;
            return;
        }
        if (restart || f.rto_deadline == kInf) f.rto_deadline = clock + f.sender->rto();
        if (!f.timer_pending) {
            f.timer_pending = true;
            push(f.rto_deadline, EventKind::Timeout, id, 0);
        }
    }

    void tcp_send(int id) {
        auto& f = flows[static_cast<std::size_t>(id)];
        for (int seq : f.sender->sendable()) send_tcp_packet(id, seq);
        arm_timer(id, false);
    }

    void deliver(const Packet& p) {
        auto& f = flows[static_cast<std::size_t>(p.flow)];
        if (f.spec.transport == Transport::UdpLike) {
            f.delivered += p.bytes;
            resolve_udp(p.flow);
            return;
        }
        const bool fresh = f.receiver->deliver(p.seq);
        if (fresh) {
            f.delivered += p.bytes;
            if (f.receiver->complete() && f.finished < 0.0) f.finished = clock;
        }
        const double rtt = std::get<TcpAimd>(cfg.traffic().source_type).params.rtt;
        // Ack payload: next expected seq, echoed epoch with a duplicate flag,
        // and the echoed send time.
        push(clock + rtt, EventKind::Ack, p.flow, f.receiver->next_expected(), 2L * p.epoch + (fresh ? 0 : 1), p.arrival);
    }

    void on_ack(int id, int ack, long echo, double sent) {
        auto& f = flows[static_cast<std::size_t>(id)];
        if (f.sender->done()) return;
        const int before = f.sender->acked();
        const int retransmit = f.sender->on_ack(ack, static_cast<int>(echo / 2), (echo & 1) != 0, clock - sent);
        if (f.sender->acked() > before && clock >= warmup && opt.cwnd_sample_interval > 0.0 &&
            clock - f.last_ack_sample >= opt.cwnd_sample_interval) {
            f.last_ack_sample = clock;
            const auto klass = racks[static_cast<std::size_t>(f.spec.source_rack)].klass;
            (klass == RackClass::Hotspot ? cwnd_ack_hot : cwnd_ack_low).push_back(f.sender->window());
        }
        if (retransmit >= 0) send_tcp_packet(id, retransmit);
        if (f.sender->done()) {
            f.rto_deadline = kInf;
            f.active = false;
            return;
        }
        tcp_send(id);
        if (f.sender->acked() > before) arm_timer(id, true);
    }

    void on_timeout(int id) {
        auto& f = flows[static_cast<std::size_t>(id)];
        f.timer_pending = false;
        if (f.sender->done() || f.rto_deadline == kInf) return;
        if (clock < f.rto_deadline) {
            f.timer_pending = true;
            push(f.rto_deadline, EventKind::Timeout, id, 0);
            return;
        }
        send_tcp_packet(id, f.sender->on_timeout());
        f.rto_deadline = kInf;
        tcp_send(id);
    }

    void on_cwnd_sample() {
        std::size_t keep = 0;
        for (int id : active_tcp) {
            const auto& f = flows[static_cast<std::size_t>(id)];
            if (!f.active) continue;
            active_tcp[keep++] = id;
            const auto klass = racks[static_cast<std::size_t>(f.spec.source_rack)].klass;
            (klass == RackClass::Hotspot ? cwnd_hot : cwnd_low).push_back(f.sender->window());
        }
        active_tcp.resize(keep);
        const double t = clock + opt.cwnd_sample_interval;
        if (t <= opt.duration) push(t, EventKind::CwndSample, 0, 0);
    }

    // ----- main loop -----------------------------------------------------

    void dispatch(const Event& e) {
        switch (e.kind) {
        case EventKind::Departure: on_departure(static_cast<int>(e.a)); break;
        case EventKind::SlotBoundary: on_slot_boundary(e.a); break;
        case EventKind::MirrorOn: {
            const int id = static_cast<int>(e.a);
            if (sets[static_cast<std::size_t>(id)].slot_end > clock) {
                set_transparent(id, clock);
                serve_packets(id);
            }
            break;
        }
        case EventKind::Drain: on_drain(static_cast<int>(e.a)); break;
        case EventKind::Ack: on_ack(static_cast<int>(e.a), static_cast<int>(e.b), e.c, e.x); break;
        case EventKind::Timeout: on_timeout(static_cast<int>(e.a)); break;
        case EventKind::CwndSample: on_cwnd_sample(); break;
        case EventKind::PacketArrival:
            if (e.b < 0) {
                const auto& [rack, packet] = staged[static_cast<std::size_t>(-e.b - 1)];
                enqueue(rack, packet);
            } else {
                on_packet_arrival(static_cast<int>(e.a));
            }
            break;
        case EventKind::UdpEmit: on_udp_emit(static_cast<int>(e.a), static_cast<int>(e.b)); break;
        case EventKind::FlowStart: on_flow_start(static_cast<int>(e.a)); break;
        }
    }

    void run_until(double until) {
        while (!events.empty() && events.top().time <= until) {
            const Event e = events.top();
            events.pop();
            clock = e.time;
            ++processed;
            dispatch(e);
        }
        clock = std::max(clock, until);
    }

    SimReport report() const {
        SimReport rep;
        rep.mode = opt.mode;
        rep.seed = opt.seed;
        rep.sim_duration = opt.duration;
        rep.warmup = warmup;
        rep.events = processed;
        const double window = opt.duration - warmup;
        for (std::size_t i = 0; i < sets.size(); ++i) {
            const auto& s = sets[i];
            SetStats st = s.stats;
            for (const auto& part_set : cfg.partition().sets) {
                if (part_set.set_id != static_cast<int>(i)) continue;
                for (int r : part_set.rack_ids) {
                    const auto& rack = racks[static_cast<std::size_t>(r)];
                    st.in_system_end += rack.primary.size() + rack.backup.size() + (rack.busy ? 1 : 0);
                }
            }
            st.waits_observed = s.waits.size();
            if (!s.waits.empty()) {
                double sum = 0.0;
                for (double w : s.waits) sum += w;
                st.mean_wait = sum / static_cast<double>(s.waits.size());
                std::vector<double> sorted = s.waits;
                const std::size_t k = std::min(sorted.size() - 1, static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(sorted.size()))) - 1);
                std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(k), sorted.end());
                st.p99_wait = sorted[k];
            }
            double transparent = s.transparent_time;
            if (s.mirror == MirrorState::Transparent)
                transparent += std::max(0.0, opt.duration - std::max(s.transparent_since, warmup));
            st.service_time_fraction = window > 0.0 ? transparent / window : 0.0;
            st.throughput = window > 0.0 ? s.served_bits / window : 0.0;
            rep.per_set.push_back(st);
        }
        for (const auto& f : flows) {
            if (f.spec.start_time < warmup) continue;
            FlowStats fs;
            fs.flow_id = f.spec.flow_id;
            fs.rack = f.spec.source_rack;
            fs.set_id = racks[static_cast<std::size_t>(fs.rack)].set_id;
            fs.klass = racks[static_cast<std::size_t>(fs.rack)].klass;
            fs.transport = f.spec.transport;
            fs.start = f.spec.start_time;
            fs.size = f.spec.size;
            fs.delivered = f.delivered;
            const double end = f.finished >= 0.0 ? f.finished : opt.duration;
            fs.completion_time = f.finished >= 0.0 ? f.finished - f.spec.start_time : -1.0;
            fs.throughput = end > fs.start ? f.delivered * 8.0 / (end - fs.start) : 0.0;
            rep.per_flow.push_back(fs);
        }
        rep.cwnd_low = cwnd_low;
        rep.cwnd_hot = cwnd_hot;
        rep.cwnd_ack_low = cwnd_ack_low;
        rep.cwnd_ack_hot = cwnd_ack_hot;
        return rep;
    }
};

Simulator::Simulator(const ValidatedConfig& config, const SimOptions& options)
    : impl_(std::make_unique<Impl>(config, options)) {}

Simulator::~Simulator() = default;

std::uint64_t Simulator::inject_packet(int rack, double time, double bytes, double service) {
    if (rack < 0 || rack >= static_cast<int>(impl_->racks.size())) throw std::out_of_range("rack id");
    Packet p;
    p.id = impl_->next_packet++;
    p.arrival = time;
    p.bytes = bytes;
    p.service = service > 0.0 ? service : impl_->draw_service(impl_->racks[static_cast<std::size_t>(rack)]);
    impl_->staged.push_back({rack, p});
    impl_->push(time, EventKind::PacketArrival, rack, -static_cast<long>(impl_->staged.size()));
    return p.id;
}

void Simulator::run_until(double until) { impl_->run_until(until); }
double Simulator::now() const { return impl_->clock; }
void Simulator::on_slot_boundary(long slot_index) { impl_->on_slot_boundary(slot_index); }
void Simulator::serve_packets(int set_id) { impl_->serve_packets(set_id); }
MirrorState Simulator::mirror(int set_id) const { return impl_->sets.at(static_cast<std::size_t>(set_id)).mirror; }
std::size_t Simulator::primary_size(int rack) const { return impl_->racks.at(static_cast<std::size_t>(rack)).primary.size(); }
std::size_t Simulator::backup_size(int rack) const { return impl_->racks.at(static_cast<std::size_t>(rack)).backup.size(); }
const std::vector<std::uint64_t>& Simulator::service_order(int rack) const {
    return impl_->racks.at(static_cast<std::size_t>(rack)).order;
}
SimReport Simulator::report() const { return impl_->report(); }

SimReport run_simulation(const ValidatedConfig& config, const SimOptions& options) {
    Simulator sim(config, options);
    sim.run_until(options.duration);
    return sim.report();
}

double mean_flow_throughput(const SimReport& report, RackClass klass) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& f : report.per_flow)
        if (f.klass == klass) {
            sum += f.throughput;
            ++n;
        }
    return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

double mean_class_wait(const SimReport& report, RackClass klass) {
    double sum = 0.0;
    std::uint64_t n = 0;
    for (const auto& s : report.per_set)
        if (s.klass == klass) {
            sum += s.mean_wait * static_cast<double>(s.waits_observed);
            n += s.waits_observed;
        }
    return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

double class_throughput(const SimReport& report, RackClass klass) {
    double sum = 0.0;
    for (const auto& s : report.per_set)
        if (s.klass == klass) sum += s.throughput;
    return sum;
}

std::uint64_t total_served(const SimReport& report) {
    std::uint64_t n = 0;
    for (const auto& s : report.per_set) n += s.served;
    return n;
}

}  // namespace f4tele
