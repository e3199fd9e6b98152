#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "f4tele/model.hpp"

namespace f4tele {

using Rng = std::mt19937_64;

// Independent, reproducible stream for (seed, rack, purpose).
Rng make_stream(std::uint64_t seed, std::uint64_t rack, std::uint64_t purpose);

enum class Transport { TcpLike, UdpLike, RawPacket };

const char* to_string(Transport t);

struct FlowSpec {
    int flow_id = 0;
    int source_rack = 0;
    double start_time = 0.0;
    double size = 0.0;  // bytes
    Transport transport = Transport::RawPacket;
};

// Arrival instants on [0, duration) with i.i.d. exponential gaps of mean 1/rate.
std::vector<double> poisson_stream(double rate, double duration, std::uint64_t seed);

class PoissonArrivals {
public:
    PoissonArrivals(double rate, Rng rng) : rate_(rate), rng_(std::move(rng)) {}
    // Next arrival strictly after `now`; +inf for rate 0.
    double next(double now);

private:
    double rate_;
    Rng rng_;
    std::exponential_distribution<double> gap_{1.0};
};

double sample_flow_size(const FlowSizeLaw& law, Rng& rng, double packet_bytes = 1500.0);
double mean_flow_size(const FlowSizeLaw& law, double packet_bytes = 1500.0);

int packet_count(double bytes, double mss);

struct Emission {
    double time = 0.0;
    double bytes = 0.0;
};

/// Open-loop packetisation: MSS-sized packets (last one shorter) leave every
/// mss·8/rate seconds from the flow start, whatever happens downstream.
std::vector<Emission> udp_source(const FlowSpec& flow, double rate, double mss = 1500.0);

/// Window-limited AIMD sender with cumulative acknowledgements.
///
/// Below ssthresh the window grows by one packet per ack (doubling per RTT),
/// above it by 1/window per ack. A loss signal (three duplicate acks)
/// multiplies the window by `loss_response` and sets ssthresh to the result;
/// a retransmission timeout also
/// sets ssthresh that way but restarts from one packet. Sequence numbers are
/// packet indices.
///
/// The timeout follows the standard smoothed estimator, SRTT + 4·RTTVAR from
/// echoed send times, floored at 2·RTT and capped at 60 s; each consecutive
/// expiry doubles it.
///
/// Each transmission carries the sender's timeout count (its epoch) and acks
/// echo the epoch of the segment that triggered them. An ack that advances
/// with an epoch from before the first timeout of a series shows the timeout
/// was spurious (the originals were delayed, not lost): the window, ssthresh
/// and send point from before the series are restored. Acks triggered by
/// duplicate segments do not count towards fast retransmit.
class TcpAimdSender {
public:
    TcpAimdSender(const FlowSpec& flow, const AimdParams& params);

    int total_packets() const { return total_; }
    double window() const { return cwnd_; }
    double ssthresh() const { return ssthresh_; }
    int in_flight() const { return next_seq_ - snd_una_; }
    int acked() const { return snd_una_; }
    bool done() const { return snd_una_ >= total_; }
    double packet_bytes(int seq) const;

    // Packets the window currently allows, in send order. Each is in flight
    // until acknowledged.
    std::vector<int> sendable();

    // Cumulative ack: every packet below `next_expected` was received.
    // `rtt_sample` is the age of the echoed send time (<= 0: none).
    // Returns a sequence number to retransmit, or -1.
    int on_ack(int next_expected, int echo_epoch = -1, bool duplicate_segment = false, double rtt_sample = -1.0);
    // Epoch stamped on packets sent now.
    int epoch() const { return timeouts_; }

    // Returns the packet to retransmit.
    int on_timeout();

    double rto() const { return rto_; }
    int timeouts() const { return timeouts_; }
    int losses() const { return losses_; }
    int spurious_timeouts() const { return spurious_; }

    static constexpr double kMaxRto = 60.0;

private:
    void cut_window();
    void sample_rtt(double r);

    AimdParams params_;
    double flow_bytes_;
    int total_;
    double cwnd_;
    double ssthresh_;
    int snd_una_ = 0;
    int next_seq_ = 0;
    int dup_acks_ = 0;
    int recover_ = -1;  // fast-recovery high-water mark
    double rto_;
    double base_rto_;
    double srtt_ = -1.0;
    double rttvar_ = 0.0;
    int timeouts_ = 0;
    int losses_ = 0;
    int spurious_ = 0;
    // State saved at the first timeout of a series, for undo.
    bool undo_armed_ = false;
    int undo_epoch_ = 0;
    double saved_cwnd_ = 0.0;
    double saved_ssthresh_ = 0.0;
    int saved_next_ = 0;
};

// Receiver side: tracks delivered packets and returns the cumulative ack.
class TcpReceiver {
public:
    explicit TcpReceiver(int total) : got_(static_cast<std::size_t>(total), false) {}
    // Returns true when `seq` is new.
    bool deliver(int seq);
    int next_expected() const { return next_; }
    bool complete() const { return next_ >= static_cast<int>(got_.size()); }

private:
    std::vector<bool> got_;
    int next_ = 0;
};

}  // namespace f4tele
