#ifndef SEMLINK_RATE_DISTORTION_HPP
#define SEMLINK_RATE_DISTORTION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace semlink {

/// Per-segment Gaussian source model: empirical variance and sample count.
struct RdModel {
    std::vector<double> variances;
    std::vector<size_t> lengths;

    void validate() const {
        if (variances.empty() || variances.size() != lengths.size())
            throw std::invalid_argument("RdModel: variances/lengths mismatch");
        for (double v : variances)
            if (!(v > 0.0)) throw std::invalid_argument("RdModel: variance must be > 0");
        for (size_t n : lengths)
            if (n == 0) throw std::invalid_argument("RdModel: zero-length segment");
    }
};

/// Distortion allocation under a shared rate budget. `water_level` is the
/// common lambda of the active segments.
struct DistortionBudget {
    std::vector<double> per_segment_D;
    double total_rate_bits_per_sample = 0.0;
    double water_level = 0.0;
};

/// Mean squared error per sample.
template <typename T, typename U>
double empirical_sed(std::span<const T> x, std::span<const U> x_hat) {
    if (x.size() != x_hat.size() || x.empty())
        throw std::invalid_argument("empirical_sed: need equal non-empty vectors");
    double acc = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        double d = static_cast<double>(x[i]) - static_cast<double>(x_hat[i]);
        acc += d * d;
    }
    return acc / static_cast<double>(x.size());
}

inline double empirical_sed(const std::vector<double>& x, const std::vector<double>& y) {
    return empirical_sed(std::span<const double>(x), std::span<const double>(y));
}
inline double empirical_sed(const std::vector<uint8_t>& x, const std::vector<uint8_t>& y) {
    return empirical_sed(std::span<const uint8_t>(x), std::span<const uint8_t>(y));
}

/// Gaussian rate-distortion function, max(0, 1/2 log2(sigma^2 / D)).
inline double gaussian_rd(double variance, double distortion) {
    if (!(variance > 0.0) || !(distortion > 0.0))
        throw std::invalid_argument("gaussian_rd: variance and distortion must be > 0");
    if (distortion >= variance) return 0.0;
    return 0.5 * std::log2(variance / distortion);
}

namespace detail {

inline double budget_rate(const RdModel& m, double lambda) {
    double bits = 0.0, samples = 0.0;
    for (size_t l = 0; l < m.variances.size(); ++l) {
        double d = std::min(lambda, m.variances[l]);
        bits += static_cast<double>(m.lengths[l]) * gaussian_rd(m.variances[l], d);
        samples += static_cast<double>(m.lengths[l]);
    }
    return bits / samples;
}

}  // namespace detail

/// Distributes a total rate budget (bits per sample, length-weighted)
/// across segments: D_l = min(lambda, sigma_l^2), with lambda found by
/// bisection so the realized mean rate meets the budget.
inline DistortionBudget reverse_waterfill(const RdModel& model, double total_rate_bits_per_sample) {
    model.validate();
    if (total_rate_bits_per_sample < 0.0)
        throw std::invalid_argument("reverse_waterfill: negative rate budget");

    double hi = *std::max_element(model.variances.begin(), model.variances.end());
    DistortionBudget out;
    out.total_rate_bits_per_sample = total_rate_bits_per_sample;

    if (total_rate_bits_per_sample == 0.0) {
        out.per_segment_D = model.variances;
        out.water_level = hi;
        return out;
    }

    // rate(lambda) is continuous and strictly decreasing until it hits 0 at
    // lambda = max variance; bracket below by a level that overshoots.
    double lo = hi;
    while (detail::budget_rate(model, lo) < total_rate_bits_per_sample) lo *= 0.5;

    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double r = detail::budget_rate(model, mid);
        if (r > total_rate_bits_per_sample)
            lo = mid;
        else
            hi = mid;
        if (std::abs(r - total_rate_bits_per_sample) < 1e-9) break;
    }
    double lambda = 0.5 * (lo + hi);
    out.water_level = lambda;
    out.per_segment_D.reserve(model.variances.size());
    for (double v : model.variances) out.per_segment_D.push_back(std::min(lambda, v));
    return out;
}

/// Length-weighted mean distortion across segments.
inline double aggregate_sed(std::span<const double> distortions, std::span<const size_t> lengths) {
    if (distortions.empty() || distortions.size() != lengths.size())
        throw std::invalid_argument("aggregate_sed: need equal non-empty lists");
    double num = 0.0, den = 0.0;
    for (size_t l = 0; l < distortions.size(); ++l) {
        if (lengths[l] == 0) throw std::invalid_argument("aggregate_sed: zero length");
        num += distortions[l] * static_cast<double>(lengths[l]);
        den += static_cast<double>(lengths[l]);
    }
    return num / den;
}

inline double aggregate_sed(const std::vector<double>& d, const std::vector<size_t>& n) {
    return aggregate_sed(std::span<const double>(d), std::span<const size_t>(n));
}

/// Gain of segment-level compression over whole-object compression.
inline double segment_gain(double d_bar, double d_min) {
    if (d_bar < 0.0 || d_min < 0.0)
        throw std::invalid_argument("segment_gain: distortions must be >= 0");
    return d_bar - d_min;
}

}  // namespace semlink

#endif
