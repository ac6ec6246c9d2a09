#ifndef SEMLINK_METRICS_HPP
#define SEMLINK_METRICS_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "semlink/image.hpp"
#include "semlink/tokenizer.hpp"

namespace semlink {

/// Standard multi-scale SSIM constants (Wang, Simoncelli, Bovik 2003).
struct MsSsimConfig {
    int scales = 5;
    std::array<double, 5> scale_weights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
    int window = 11;
    double window_sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 255.0;
};

struct MsSsimResult {
    double score = 0.0;
    int scales_used = 0;  // < cfg.scales when the image is too small
};

namespace detail {

struct Plane {
    int w = 0, h = 0;
    std::vector<double> v;
};

inline Plane to_plane(const Image& img) {
    Plane p{img.width, img.height, std::vector<double>(img.pixels.size())};
    for (size_t i = 0; i < img.pixels.size(); ++i) p.v[i] = static_cast<double>(img.pixels[i]);
    return p;
}

inline std::vector<double> gaussian_kernel(int size, double sigma) {
    std::vector<double> k(size);
    const double c = (size - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        k[i] = std::exp(-0.5 * (i - c) * (i - c) / (sigma * sigma));
        sum += k[i];
    }
    for (double& x : k) x /= sum;
    return k;
}

// separable 'valid' convolution
inline Plane conv_valid(const Plane& in, const std::vector<double>& k) {
    const int n = static_cast<int>(k.size());
    Plane mid{in.w - n + 1, in.h, {}};
    mid.v.resize(static_cast<size_t>(mid.w) * mid.h);
    for (int y = 0; y < in.h; ++y)
        for (int x = 0; x < mid.w; ++x) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += k[i] * in.v[static_cast<size_t>(y) * in.w + x + i];
            mid.v[static_cast<size_t>(y) * mid.w + x] = acc;
        }
    Plane out{mid.w, in.h - n + 1, {}};
    out.v.resize(static_cast<size_t>(out.w) * out.h);
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) acc += k[i] * mid.v[static_cast<size_t>(y + i) * mid.w + x];
            out.v[static_cast<size_t>(y) * out.w + x] = acc;
        }
    return out;
}

inline Plane downsample2(const Plane& in) {
    Plane out{in.w / 2, in.h / 2, {}};
    out.v.resize(static_cast<size_t>(out.w) * out.h);
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x) {
            size_t base = static_cast<size_t>(2 * y) * in.w + 2 * x;
            out.v[static_cast<size_t>(y) * out.w + x] =
                0.25 * (in.v[base] + in.v[base + 1] + in.v[base + in.w] + in.v[base + in.w + 1]);
        }
    return out;
}

struct SsimMeans {
    double ssim = 0.0;  // luminance * contrast-structure
    double cs = 0.0;    // contrast-structure only
};

inline SsimMeans ssim_scale(const Plane& a, const Plane& b, const MsSsimConfig& cfg) {
    auto k = gaussian_kernel(cfg.window, cfg.window_sigma);
    Plane mu1 = conv_valid(a, k), mu2 = conv_valid(b, k);
    Plane a2 = a, b2 = b, ab = a;
    for (size_t i = 0; i < a.v.size(); ++i) {
        a2.v[i] = a.v[i] * a.v[i];
        b2.v[i] = b.v[i] * b.v[i];
        ab.v[i] = a.v[i] * b.v[i];
    }
    Plane e_a2 = conv_valid(a2, k), e_b2 = conv_valid(b2, k), e_ab = conv_valid(ab, k);

    const double c1 = (cfg.k1 * cfg.dynamic_range) * (cfg.k1 * cfg.dynamic_range);
    const double c2 = (cfg.k2 * cfg.dynamic_range) * (cfg.k2 * cfg.dynamic_range);
    double ssim_sum = 0.0, cs_sum = 0.0;
    for (size_t i = 0; i < mu1.v.size(); ++i) {
        double m1 = mu1.v[i], m2 = mu2.v[i];
        double s1 = e_a2.v[i] - m1 * m1;
        double s2 = e_b2.v[i] - m2 * m2;
        double s12 = e_ab.v[i] - m1 * m2;
        double cs = (2.0 * s12 + c2) / (s1 + s2 + c2);
        double lum = (2.0 * m1 * m2 + c1) / (m1 * m1 + m2 * m2 + c1);
        cs_sum += cs;
        ssim_sum += lum * cs;
    }
    double n = static_cast<double>(mu1.v.size());
    return {ssim_sum / n, cs_sum / n};
}

inline double signed_pow(double v, double e) {
    return std::copysign(std::pow(std::abs(v), e), v);
}

}  // namespace detail

/// Multi-scale SSIM: contrast-structure means of scales 1..S-1 and the full
/// SSIM mean at the coarsest scale, combined with the published exponents
/// (sign-preserving powers). Images smaller than window * 2^(scales-1) use
/// fewer scales with the leading weights renormalized; scales_used records
/// the choice.
inline MsSsimResult ms_ssim_detail(const Image& a, const Image& b, const MsSsimConfig& cfg = {}) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("ms_ssim: image dimensions differ");
    if (a.width < 16 || a.height < 16) throw std::invalid_argument("ms_ssim: min side is 16");

    int min_side = std::min(a.width, a.height);
    int scales = 1;
    while (scales < cfg.scales && (min_side >> scales) >= cfg.window) ++scales;

    double weight_sum = 0.0;
    for (int j = 0; j < scales; ++j) weight_sum += cfg.scale_weights[j];

    detail::Plane pa = detail::to_plane(a), pb = detail::to_plane(b);
    double score = 1.0;
    for (int j = 0; j < scales; ++j) {
        auto means = detail::ssim_scale(pa, pb, cfg);
        double w = cfg.scale_weights[j] / weight_sum;
        score *= detail::signed_pow(j == scales - 1 ? means.ssim : means.cs, w);
        if (j + 1 < scales) {
            pa = detail::downsample2(pa);
            pb = detail::downsample2(pb);
        }
    }
    return {score, scales};
}

inline double ms_ssim(const Image& a, const Image& b, const MsSsimConfig& cfg = {}) {
    return ms_ssim_detail(a, b, cfg).score;
}

inline double bit_error_rate(std::span<const uint8_t> tx, std::span<const uint8_t> rx) {
    if (tx.size() != rx.size() || tx.empty())
        throw std::invalid_argument("bit_error_rate: need equal non-empty streams");
    size_t errors = 0;
    for (size_t i = 0; i < tx.size(); ++i)
        if ((tx[i] & 1) != (rx[i] & 1)) ++errors;
    return static_cast<double>(errors) / static_cast<double>(tx.size());
}

/// A token is in error when any of its bits is wrong.
inline double token_error_rate(std::span<const Token> tx, std::span<const Token> rx) {
    if (tx.size() != rx.size() || tx.empty())
        throw std::invalid_argument("token_error_rate: need equal non-empty streams");
    size_t errors = 0;
    for (size_t i = 0; i < tx.size(); ++i)
        if (tx[i].value != rx[i].value) ++errors;
    return static_cast<double>(errors) / static_cast<double>(tx.size());
}

inline double weighted_sed(std::span<const double> distortions, std::span<const double> weights) {
    if (distortions.size() != weights.size() || distortions.empty())
        throw std::invalid_argument("weighted_sed: need aligned non-empty lists");
    double acc = 0.0;
    for (size_t i = 0; i < distortions.size(); ++i) acc += weights[i] * distortions[i];
    return acc;
}

}  // namespace semlink

#endif
