#ifndef SEMLINK_PHY_HPP
#define SEMLINK_PHY_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "semlink/bits.hpp"
#include "semlink/rng.hpp"

namespace semlink {

using Complex = std::complex<double>;

/// Orthogonal AWGN pipe: linear power gain and noise density per complex
/// symbol.
struct SubChannel {
    int index = 0;
    double gain = 1.0;
    double n0 = 1.0;
};

namespace detail {

// Gray axis labels: bit pair 00,01,11,10 -> -3,-1,+1,+3 (unit-energy scale)
inline double gray_level(int b_hi, int b_lo) {
    static constexpr double lut[4] = {-3.0, -1.0, +3.0, +1.0};
    return lut[(b_hi << 1) | b_lo];
}

inline constexpr double kQamScale = 0.31622776601683794;  // 1/sqrt(10)

}  // namespace detail

/// The 16 constellation points indexed by bit label b3 b2 b1 b0:
/// b3 b2 select I, b1 b0 select Q, both Gray coded. Mean energy is exactly 1.
inline const std::array<Complex, 16>& qam16_constellation() {
    static const std::array<Complex, 16> points = [] {
        std::array<Complex, 16> p;
        for (int label = 0; label < 16; ++label) {
            double i = detail::gray_level((label >> 3) & 1, (label >> 2) & 1);
            double q = detail::gray_level((label >> 1) & 1, label & 1);
            p[label] = Complex(i * detail::kQamScale, q * detail::kQamScale);
        }
        return p;
    }();
    return points;
}

/// Maps bits to 16-QAM symbols, 4 bits per symbol, first bit = b3.
/// A trailing group is zero padded; the caller records the original length.
inline std::vector<Complex> qam16_modulate(std::span<const uint8_t> bits) {
    const auto& points = qam16_constellation();
    std::vector<Complex> symbols((bits.size() + 3) / 4);
    for (size_t s = 0; s < symbols.size(); ++s) {
        int label = 0;
        for (int k = 0; k < 4; ++k) {
            size_t i = 4 * s + k;
            int bit = i < bits.size() ? (bits[i] & 1) : 0;
            label = (label << 1) | bit;
        }
        symbols[s] = points[label];
    }
    return symbols;
}

struct DemodResult {
    std::vector<double> llrs;  // positive -> bit 0 more likely
    BitVec hard_bits;
};

/// Exact max-log LLRs against the constellation scaled by `amplitude`
/// (sqrt(power * gain) at the receiver). noise_var is the total complex
/// noise power N0.
inline DemodResult qam16_demodulate(std::span<const Complex> received, double noise_var,
                                    double amplitude = 1.0) {
    if (!(noise_var > 0.0)) throw std::invalid_argument("qam16_demodulate: noise_var must be > 0");
    const auto& points = qam16_constellation();
    DemodResult out;
    out.llrs.resize(received.size() * 4);
    out.hard_bits.resize(received.size() * 4);
    for (size_t s = 0; s < received.size(); ++s) {
        std::array<double, 16> d2;
        for (int label = 0; label < 16; ++label)
            d2[label] = std::norm(received[s] - amplitude * points[label]);
        for (int k = 0; k < 4; ++k) {
            double min0 = 1e300, min1 = 1e300;
            for (int label = 0; label < 16; ++label) {
                bool bit = (label >> (3 - k)) & 1;
                (bit ? min1 : min0) = std::min(bit ? min1 : min0, d2[label]);
            }
            double llr = (min1 - min0) / noise_var;
            out.llrs[4 * s + k] = llr;
            out.hard_bits[4 * s + k] = llr < 0.0 ? 1 : 0;
        }
    }
    return out;
}

inline double gaussian_q(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

/// Exact bit error probability of Gray-mapped 16-QAM over AWGN at the given
/// Es/N0 (linear).
inline double ber_theoretical_16qam(double snr_linear) {
    if (!(snr_linear > 0.0))
        throw std::invalid_argument("ber_theoretical_16qam: snr must be > 0");
    double a = std::sqrt(snr_linear / 5.0);
    return 0.75 * gaussian_q(a) + 0.5 * gaussian_q(3.0 * a) - 0.25 * gaussian_q(5.0 * a);
}

/// received = sqrt(power * gain) * symbol + n, n circular complex Gaussian
/// with total variance n0. Deterministic for a given generator state.
inline std::vector<Complex> transmit(std::span<const Complex> symbols, double power,
                                     const SubChannel& chan, Philox& rng) {
    if (power < 0.0) throw std::invalid_argument("transmit: negative power");
    if (!(chan.gain > 0.0) || !(chan.n0 > 0.0))
        throw std::invalid_argument("transmit: gain and n0 must be > 0");
    const double amp = std::sqrt(power * chan.gain);
    const double sigma = std::sqrt(chan.n0 / 2.0);
    std::vector<Complex> out(symbols.size());
    for (size_t i = 0; i < symbols.size(); ++i) {
        double nr = sigma * rng.gaussian();
        double ni = sigma * rng.gaussian();
        out[i] = amp * symbols[i] + Complex(nr, ni);
    }
    return out;
}

/// A bank of orthogonal sub-channel gains normalized so that equal-power
/// allocation of `total_power` meets the target mean per-subchannel SNR.
struct ChannelRealization {
    std::vector<double> gains;
    double n0 = 1.0;
    double total_power = 1.0;
    double average_snr_db = 0.0;  // 10 log10( mean_i( (P/M) g_i / n0 ) )

    SubChannel subchannel(int i) const { return {i, gains[i], n0}; }
};

namespace detail {

inline void normalize_to_snr(ChannelRealization& ch, double avg_snr_db) {
    const double target = std::pow(10.0, avg_snr_db / 10.0);
    const double p_eq = ch.total_power / static_cast<double>(ch.gains.size());
    double mean = 0.0;
    for (double g : ch.gains) mean += p_eq * g / ch.n0;
    mean /= static_cast<double>(ch.gains.size());
    const double scale = target / mean;
    for (double& g : ch.gains) g *= scale;
    double check = 0.0;
    for (double g : ch.gains) check += p_eq * g / ch.n0;
    ch.average_snr_db = 10.0 * std::log10(check / static_cast<double>(ch.gains.size()));
}

}  // namespace detail

/// Deterministic gain spread g_i = 0.4 + 1.2 * ((7 i mod M) / (M - 1)),
/// then scaled to the requested average SNR.
inline ChannelRealization fixed_channel(int n_subchannels, double total_power, double n0,
                                        double avg_snr_db) {
    if (n_subchannels < 1) throw std::invalid_argument("fixed_channel: need >= 1 subchannel");
    ChannelRealization ch;
    ch.n0 = n0;
    ch.total_power = total_power;
    ch.gains.resize(n_subchannels);
    const double den = n_subchannels > 1 ? static_cast<double>(n_subchannels - 1) : 1.0;
    for (int i = 0; i < n_subchannels; ++i)
        ch.gains[i] = 0.4 + 1.2 * (static_cast<double>((7 * i) % n_subchannels) / den);
    detail::normalize_to_snr(ch, avg_snr_db);
    return ch;
}

/// Seeded Rayleigh draw: g_i = |h|^2 with h ~ CN(0, 1), then scaled to the
/// requested average SNR.
inline ChannelRealization rayleigh_channel(int n_subchannels, double total_power, double n0,
                                           double avg_snr_db, Philox& rng) {
    if (n_subchannels < 1) throw std::invalid_argument("rayleigh_channel: need >= 1 subchannel");
    ChannelRealization ch;
    ch.n0 = n0;
    ch.total_power = total_power;
    ch.gains.resize(n_subchannels);
    for (int i = 0; i < n_subchannels; ++i) {
        double re = rng.gaussian() / std::sqrt(2.0);
        double im = rng.gaussian() / std::sqrt(2.0);
        ch.gains[i] = re * re + im * im;
        if (ch.gains[i] < 1e-6) ch.gains[i] = 1e-6;  // keep gains strictly positive
    }
    detail::normalize_to_snr(ch, avg_snr_db);
    return ch;
}

}  // namespace semlink

#endif
