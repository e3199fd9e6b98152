#include "f4tele/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace f4tele {

Rng make_stream(std::uint64_t seed, std::uint64_t rack, std::uint64_t purpose) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(rack), static_cast<std::uint32_t>(rack >> 32),
                      static_cast<std::uint32_t>(purpose), 0x46345465u};
    return Rng(seq);
}

const char* to_string(Transport t) {
    switch (t) {
    case Transport::TcpLike: return "tcp";
    case Transport::UdpLike: return "udp";
    case Transport::RawPacket: return "raw";
    }
    return "raw";
}

double PoissonArrivals::next(double now) {
    if (!(rate_ > 0.0)) return std::numeric_limits<double>::infinity();
    return now + gap_(rng_) / rate_;
}

std::vector<double> poisson_stream(double rate, double duration, std::uint64_t seed) {
    std::vector<double> out;
    if (!(rate > 0.0) || !(duration > 0.0)) return out;
    out.reserve(static_cast<std::size_t>(rate * duration * 1.1) + 16);
    PoissonArrivals arrivals(rate, make_stream(seed, 0, 0));
    for (double t = arrivals.next(0.0); t < duration; t = arrivals.next(t)) out.push_back(t);
    return out;
}

double sample_flow_size(const FlowSizeLaw& law, Rng& rng, double packet_bytes) {
    if (const auto* u = std::get_if<UniformBytes>(&law)) {
        if (u->max_bytes <= u->min_bytes) return u->min_bytes;
        return std::uniform_real_distribution<double>(u->min_bytes, u->max_bytes)(rng);
    }
    return std::get<FixedPackets>(law).packets * packet_bytes;
}

double mean_flow_size(const FlowSizeLaw& law, double packet_bytes) {
    if (const auto* u = std::get_if<UniformBytes>(&law)) return 0.5 * (u->min_bytes + u->max_bytes);
    return std::get<FixedPackets>(law).packets * packet_bytes;
}

int packet_count(double bytes, double mss) { return std::max(1, static_cast<int>(std::ceil(bytes / mss - 1e-9))); }

std::vector<Emission> udp_source(const FlowSpec& flow, double rate, double mss) {
    const int n = packet_count(flow.size, mss);
    const double interval = mss * 8.0 / rate;
    std::vector<Emission> out;
    out.reserve(static_cast<std::size_t>(n));
    double remaining = flow.size;
    for (int i = 0; i < n; ++i) {
        const double bytes = std::min(mss, remaining);
        out.push_back({flow.start_time + i * interval, bytes});
        remaining -= bytes;
    }
    return out;
}

TcpAimdSender::TcpAimdSender(const FlowSpec& flow, const AimdParams& params)
    : params_(params),
      flow_bytes_(flow.size),
      total_(packet_count(flow.size, params.mss)),
      cwnd_(std::min(params.initial_window, params.max_window)),
      ssthresh_(params.ssthresh),
      rto_(2.0 * params.rtt),
      base_rto_(2.0 * params.rtt) {}

double TcpAimdSender::packet_bytes(int seq) const {
    if (seq < total_ - 1) return params_.mss;
    return flow_bytes_ - params_.mss * (total_ - 1);
}

std::vector<int> TcpAimdSender::sendable() {
    std::vector<int> out;
    const int limit = static_cast<int>(std::floor(cwnd_ + 1e-9));
    while (next_seq_ < total_ && in_flight() < limit) out.push_back(next_seq_++);
    return out;
}

void TcpAimdSender::cut_window() {
    cwnd_ = std::max(1.0, cwnd_ * params_.loss_response);
    ssthresh_ = std::max(cwnd_, 2.0);
    ++losses_;
}

void TcpAimdSender::sample_rtt(double r) {
    if (srtt_ < 0.0) {
        srtt_ = r;
        rttvar_ = r / 2.0;
    } else {
        rttvar_ = 0.75 * rttvar_ + 0.25 * std::abs(srtt_ - r);
        srtt_ = 0.875 * srtt_ + 0.125 * r;
    }
    base_rto_ = std::clamp(srtt_ + 4.0 * rttvar_, 2.0 * params_.rtt, kMaxRto);
}

int TcpAimdSender::on_ack(int next_expected, int echo_epoch, bool duplicate_segment, double rtt_sample) {
    if (next_expected > snd_una_) {
        if (rtt_sample > 0.0 && !duplicate_segment) sample_rtt(rtt_sample);
        if (undo_armed_ && echo_epoch >= 0) {
            undo_armed_ = false;
            if (echo_epoch <= undo_epoch_) {
                cwnd_ = saved_cwnd_;
                ssthresh_ = saved_ssthresh_;
                next_seq_ = std::max(next_seq_, saved_next_);
                ++spurious_;
            }
        }
        const int newly = next_expected - snd_una_;
        snd_una_ = next_expected;
        next_seq_ = std::max(next_seq_, snd_una_);
        dup_acks_ = 0;
        rto_ = base_rto_;
        if (recover_ >= 0) {
            if (snd_una_ > recover_) {
                recover_ = -1;
            } else {
                return snd_una_;  // partial ack: next hole
            }
        }
        for (int i = 0; i < newly; ++i) cwnd_ += cwnd_ < ssthresh_ ? 1.0 : 1.0 / cwnd_;
        cwnd_ = std::min(cwnd_, params_.max_window);
        return -1;
    }
    if (in_flight() > 0 && !done() && !duplicate_segment) {
        ++dup_acks_;
        if (dup_acks_ == 3 && recover_ < 0) {
            cut_window();
            recover_ = next_seq_ - 1;
            return snd_una_;
        }
    }
    return -1;
}

int TcpAimdSender::on_timeout() {
    if (!undo_armed_) {
        undo_armed_ = true;
        undo_epoch_ = timeouts_;
        saved_cwnd_ = cwnd_;
        saved_ssthresh_ = ssthresh_;
        saved_next_ = next_seq_;
    }
    ssthresh_ = std::max(cwnd_ * params_.loss_response, 2.0);
    cwnd_ = 1.0;
    ++timeouts_;
    dup_acks_ = 0;
    recover_ = -1;
    next_seq_ = std::min(snd_una_ + 1, total_);
    rto_ = std::min(rto_ * 2.0, kMaxRto);
    return snd_una_;
}

bool TcpReceiver::deliver(int seq) {
    if (seq < 0 || seq >= static_cast<int>(got_.size()) || got_[static_cast<std::size_t>(seq)]) return false;
    got_[static_cast<std::size_t>(seq)] = true;
    while (next_ < static_cast<int>(got_.size()) && got_[static_cast<std::size_t>(next_)]) ++next_;
    return true;
}

}  // namespace f4tele
