#ifndef SEMLINK_FEC_HPP
#define SEMLINK_FEC_HPP

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "semlink/bits.hpp"
#include "semlink/tokenizer.hpp"

namespace semlink {

/// Rate-1/2, K=7 convolutional code with generators 133/171 (octal) and
/// zero-tail termination. Free distance 10.
struct ConvCodeSpec {
    uint32_t g1 = 0133;
    uint32_t g2 = 0171;
    static constexpr int constraint_length = 7;
    static constexpr int flush_bits = 6;
    static constexpr int free_distance = 10;
    static constexpr int states = 64;
};

namespace detail {

inline int parity32(uint32_t v) { return std::popcount(v) & 1; }

// Register layout: bit 6 = current input, bit 0 = oldest. The carried state
// is reg >> 1 (newest 6 inputs, newest at bit 5).
struct ConvStep {
    uint8_t out1, out2, next_state;
};

inline ConvStep conv_step(uint32_t state, int bit, const ConvCodeSpec& spec) {
    uint32_t reg = state | (static_cast<uint32_t>(bit) << 6);
    return {static_cast<uint8_t>(parity32(reg & spec.g1)),
            static_cast<uint8_t>(parity32(reg & spec.g2)),
            static_cast<uint8_t>(reg >> 1)};
}

}  // namespace detail

/// Encodes message bits plus 6 flush zeros; output holds 2*(n+6) bits,
/// generator g1's output first at each step.
inline BitVec conv_encode(std::span<const uint8_t> bits, const ConvCodeSpec& spec = {}) {
    if (bits.empty()) throw std::invalid_argument("conv_encode: empty input");
    BitVec out;
    out.reserve(2 * (bits.size() + ConvCodeSpec::flush_bits));
    uint32_t state = 0;
    auto push = [&](int b) {
        auto st = detail::conv_step(state, b, spec);
        out.push_back(st.out1);
        out.push_back(st.out2);
        state = st.next_state;
    };
    for (uint8_t b : bits) push(b & 1);
    for (int i = 0; i < ConvCodeSpec::flush_bits; ++i) push(0);
    return out;
}

/// Soft-decision Viterbi over the 64-state trellis, zero state at both ends.
/// LLR convention: positive means bit 0 more likely. Max-log path metric.
inline BitVec viterbi_decode(std::span<const double> llrs, const ConvCodeSpec& spec = {}) {
    if (llrs.size() % 2 != 0 || llrs.size() < 2 * (1 + ConvCodeSpec::flush_bits))
        throw std::invalid_argument("viterbi_decode: llr count must be 2*(message+6)");
    const size_t steps = llrs.size() / 2;
    const size_t msg_len = steps - ConvCodeSpec::flush_bits;
    constexpr double kNeg = -std::numeric_limits<double>::infinity();

    std::vector<double> metric(ConvCodeSpec::states, kNeg), next(ConvCodeSpec::states);
    metric[0] = 0.0;
    std::vector<uint8_t> back(steps * ConvCodeSpec::states);

    for (size_t t = 0; t < steps; ++t) {
        std::fill(next.begin(), next.end(), kNeg);
        const double l1 = llrs[2 * t], l2 = llrs[2 * t + 1];
        const int max_bit = t < msg_len ? 1 : 0;  // flush phase forces zeros
        for (uint32_t s = 0; s < ConvCodeSpec::states; ++s) {
            if (metric[s] == kNeg) continue;
            for (int b = 0; b <= max_bit; ++b) {
                auto st = detail::conv_step(s, b, spec);
                double m = metric[s] + (st.out1 ? -l1 : l1) + (st.out2 ? -l2 : l2);
                if (m > next[st.next_state]) {
                    next[st.next_state] = m;
                    back[t * ConvCodeSpec::states + st.next_state] = static_cast<uint8_t>(s);
                }
            }
        }
        metric.swap(next);
    }

    BitVec decoded(steps);
    uint32_t state = 0;
    for (size_t t = steps; t-- > 0;) {
        decoded[t] = (state >> 5) & 1;  // newest input sits at bit 5 of the state
        state = back[t * ConvCodeSpec::states + state];
    }
    decoded.resize(msg_len);
    return decoded;
}

/// Hard-decision decode: bits mapped to unit LLRs.
inline BitVec viterbi_decode_hard(std::span<const uint8_t> coded, const ConvCodeSpec& spec = {}) {
    std::vector<double> llrs(coded.size());
    for (size_t i = 0; i < coded.size(); ++i) llrs[i] = coded[i] ? -1.0 : 1.0;
    return viterbi_decode(llrs, spec);
}

// ---------------------------------------------------------------------------
// CRC-16/CCITT-FALSE over bit vectors
// ---------------------------------------------------------------------------

struct CrcSpec {
    static constexpr uint16_t polynomial = 0x1021;
    static constexpr uint16_t initial = 0xFFFF;
    static constexpr int width = 16;
};

inline uint16_t crc16(std::span<const uint8_t> bits) {
    uint16_t crc = CrcSpec::initial;
    for (uint8_t b : bits) {
        int msb = (crc >> 15) & 1;
        crc = static_cast<uint16_t>(crc << 1);
        if (msb ^ (b & 1)) crc ^= CrcSpec::polynomial;
    }
    return crc;
}

inline BitVec crc_append(std::span<const uint8_t> bits) {
    if (bits.empty()) throw std::invalid_argument("crc_append: empty payload");
    BitVec out(bits.begin(), bits.end());
    uint16_t crc = crc16(bits);
    for (int i = 15; i >= 0; --i) out.push_back((crc >> i) & 1);
    return out;
}

inline bool crc_check(std::span<const uint8_t> bits_with_crc) {
    if (bits_with_crc.size() <= CrcSpec::width) return false;
    auto payload = bits_with_crc.first(bits_with_crc.size() - CrcSpec::width);
    uint16_t crc = crc16(payload);
    for (int i = 0; i < CrcSpec::width; ++i)
        if (bits_with_crc[payload.size() + i] != ((crc >> (15 - i)) & 1)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// HARQ (type I: each attempt decoded independently)
// ---------------------------------------------------------------------------

struct HarqConfig {
    int max_transmissions = 4;
};

struct HarqOutcome {
    bool delivered = false;
    int attempts = 0;
    BitVec bits;
};

using TransmitFn = std::function<BitVec(const BitVec&)>;

/// Sends the CRC-protected block through `channel` until the check passes
/// or the attempt budget is exhausted.
inline HarqOutcome harq_run(const BitVec& block, const TransmitFn& channel,
                            const HarqConfig& cfg = {}) {
    if (cfg.max_transmissions < 1)
        throw std::invalid_argument("harq_run: max_transmissions must be >= 1");
    BitVec sent = crc_append(block);
    for (int attempt = 1; attempt <= cfg.max_transmissions; ++attempt) {
        BitVec received = channel(sent);
        if (received.size() == sent.size() && crc_check(received)) {
            received.resize(received.size() - CrcSpec::width);
            return {true, attempt, std::move(received)};
        }
    }
    return {false, cfg.max_transmissions, {}};
}

// ---------------------------------------------------------------------------
// Importance-class protection
// ---------------------------------------------------------------------------

enum class Scheme { conv_viterbi, crc_detect, parity8 };

struct ProtectionPolicy {
    Scheme highly_critical = Scheme::conv_viterbi;
    Scheme moderately_robust = Scheme::crc_detect;
    Scheme highly_robust = Scheme::parity8;

    Scheme for_class(TliClass c) const {
        switch (c) {
            case TliClass::highly_critical: return highly_critical;
            case TliClass::moderately_robust: return moderately_robust;
            case TliClass::highly_robust: return highly_robust;
        }
        throw std::invalid_argument("ProtectionPolicy: unknown class");
    }
};

struct ProtectedFrame {
    TliClass cls = TliClass::moderately_robust;
    BitVec coded_bits;
};

enum class UnprotectStatus { ok, corrected, detected_failed, tolerated_errors };

struct UnprotectResult {
    UnprotectStatus status = UnprotectStatus::ok;
    int error_count = 0;
    BitVec bits;
};

namespace detail {

inline BitVec parity8_encode(std::span<const uint8_t> bits) {
    BitVec out;
    out.reserve(bits.size() + bits.size() / 8 + 1);
    size_t i = 0;
    while (i < bits.size()) {
        size_t group = std::min<size_t>(8, bits.size() - i);
        int p = 0;
        for (size_t j = 0; j < group; ++j) {
            out.push_back(bits[i + j]);
            p ^= bits[i + j] & 1;
        }
        out.push_back(static_cast<uint8_t>(p));
        i += group;
    }
    return out;
}

inline UnprotectResult parity8_decode(std::span<const uint8_t> coded) {
    UnprotectResult res;
    size_t i = 0;
    while (i < coded.size()) {
        size_t group = std::min<size_t>(9, coded.size() - i);
        if (group < 2) throw std::invalid_argument("parity8: truncated frame");
        int p = 0;
        for (size_t j = 0; j + 1 < group; ++j) {
            res.bits.push_back(coded[i + j]);
            p ^= coded[i + j] & 1;
        }
        if (p != (coded[i + group - 1] & 1)) ++res.error_count;
        i += group;
    }
    res.status = res.error_count == 0 ? UnprotectStatus::ok : UnprotectStatus::tolerated_errors;
    return res;
}

}  // namespace detail

inline ProtectedFrame protect(const CodingBlock& block, const ProtectionPolicy& policy = {}) {
    if (block.bits.empty()) throw std::invalid_argument("protect: empty block");
    ProtectedFrame f;
    f.cls = block.cls;
    switch (policy.for_class(block.cls)) {
        case Scheme::conv_viterbi: f.coded_bits = conv_encode(block.bits); break;
        case Scheme::crc_detect: f.coded_bits = crc_append(block.bits); break;
        case Scheme::parity8: f.coded_bits = detail::parity8_encode(block.bits); break;
    }
    return f;
}

inline UnprotectResult unprotect(const ProtectedFrame& frame, const ProtectionPolicy& policy = {}) {
    switch (policy.for_class(frame.cls)) {
        case Scheme::conv_viterbi: {
            UnprotectResult res;
            res.bits = viterbi_decode_hard(frame.coded_bits);
            BitVec reencoded = conv_encode(res.bits);
            res.status = reencoded == frame.coded_bits ? UnprotectStatus::ok
                                                       : UnprotectStatus::corrected;
            return res;
        }
        case Scheme::crc_detect: {
            UnprotectResult res;
            if (frame.coded_bits.size() <= CrcSpec::width)
                throw std::invalid_argument("unprotect: frame shorter than CRC");
            res.bits.assign(frame.coded_bits.begin(), frame.coded_bits.end() - CrcSpec::width);
            res.status = crc_check(frame.coded_bits) ? UnprotectStatus::ok
                                                     : UnprotectStatus::detected_failed;
            return res;
        }
        case Scheme::parity8: return detail::parity8_decode(frame.coded_bits);
    }
    throw std::invalid_argument("unprotect: unknown scheme");
}

/// Wire format: 8-bit class tag, 32-bit big-endian payload bit count,
/// payload bits MSB-first, zero padding to a byte boundary.
inline std::vector<uint8_t> serialize_frame(const ProtectedFrame& frame) {
    std::vector<uint8_t> out;
    out.push_back(static_cast<uint8_t>(frame.cls));
    uint32_t n = static_cast<uint32_t>(frame.coded_bits.size());
    for (int i = 24; i >= 0; i -= 8) out.push_back(static_cast<uint8_t>(n >> i));
    auto packed = pack_bits(frame.coded_bits);
    out.insert(out.end(), packed.begin(), packed.end());
    return out;
}

inline ProtectedFrame deserialize_frame(std::span<const uint8_t> bytes) {
    if (bytes.size() < 5) throw std::invalid_argument("deserialize_frame: truncated header");
    uint8_t tag = bytes[0];
    if (tag > 2) throw std::invalid_argument("deserialize_frame: bad class tag");
    uint32_t n = 0;
    for (int i = 1; i <= 4; ++i) n = (n << 8) | bytes[i];
    if (bytes.size() < 5 + (n + 7) / 8)
        throw std::invalid_argument("deserialize_frame: truncated payload");
    ProtectedFrame f;
    f.cls = static_cast<TliClass>(tag);
    f.coded_bits = unpack_bits(bytes.subspan(5), n);
    return f;
}

}  // namespace semlink

#endif
