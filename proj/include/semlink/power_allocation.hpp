#ifndef SEMLINK_POWER_ALLOCATION_HPP
#define SEMLINK_POWER_ALLOCATION_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "semlink/phy.hpp"
#include "semlink/scene.hpp"

namespace semlink {

struct AllocationProblem {
    std::vector<double> gains;
    double n0 = 1.0;
    double total_power = 1.0;
    std::vector<double> weights;  // per stream, >= 0, normalized to sum 1

    void validate(bool need_weights) const {
        if (gains.empty()) throw std::invalid_argument("AllocationProblem: no streams");
        if (!(total_power > 0.0)) throw std::invalid_argument("AllocationProblem: P must be > 0");
        if (!(n0 > 0.0)) throw std::invalid_argument("AllocationProblem: n0 must be > 0");
        for (double g : gains)
            if (!(g > 0.0)) throw std::invalid_argument("AllocationProblem: gains must be > 0");
        if (need_weights) {
            if (weights.size() != gains.size())
                throw std::invalid_argument("AllocationProblem: weights/gains mismatch");
            double sum = 0.0;
            for (double w : weights) {
                if (w < 0.0) throw std::invalid_argument("AllocationProblem: negative weight");
                sum += w;
            }
            if (sum <= 0.0) throw std::invalid_argument("AllocationProblem: all weights zero");
            if (std::abs(sum - 1.0) > 1e-6)
                throw std::invalid_argument("AllocationProblem: weights must sum to 1");
        }
    }
};

/// Powers plus the policy's own objective: sum capacity for equal and
/// water-filling, weighted uncoded BER for the importance policy.
struct AllocationResult {
    std::vector<double> powers;
    double objective_value = 0.0;
};

inline double capacity_objective(const AllocationProblem& prob, std::span<const double> powers) {
    double c = 0.0;
    for (size_t i = 0; i < powers.size(); ++i)
        c += std::log2(1.0 + powers[i] * prob.gains[i] / prob.n0);
    return c;
}

namespace detail {

inline double ber16_safe(double snr) { return snr > 0.0 ? ber_theoretical_16qam(snr) : 0.5; }

// d/dx of ber_theoretical_16qam; strictly negative for x > 0.
inline double ber16_derivative(double x) {
    const double inv_sqrt_2pi = 0.3989422804014327;
    double a = std::sqrt(x / 5.0);
    auto phi = [&](double u) { return inv_sqrt_2pi * std::exp(-0.5 * u * u); };
    double bracket = 0.75 * phi(a) + 1.5 * phi(3.0 * a) - 1.25 * phi(5.0 * a);
    return -bracket / (2.0 * std::sqrt(5.0 * x));
}

// Marginal objective decrease per unit power on stream i; infinite at p = 0,
// strictly decreasing in p.
inline double importance_marginal(const AllocationProblem& prob, size_t i, double p) {
    double gn = prob.gains[i] / prob.n0;
    return -prob.weights[i] * ber16_derivative(p * gn) * gn;
}

// Power at which stream i's marginal equals lambda, capped to [0, p_cap].
inline double importance_inverse_marginal(const AllocationProblem& prob, size_t i, double lambda,
                                          double p_cap) {
    if (prob.weights[i] == 0.0) return 0.0;
    if (importance_marginal(prob, i, p_cap) >= lambda) return p_cap;
    double lo = 0.0, hi = p_cap;
    for (int it = 0; it < 100; ++it) {
        double mid = 0.5 * (lo + hi);
        if (importance_marginal(prob, i, mid) > lambda)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Euclidean projection onto { p >= 0, sum p = total }.
inline std::vector<double> project_simplex(std::vector<double> p, double total) {
    std::vector<double> u = p;
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0.0, theta = 0.0;
    size_t rho = 0;
    for (size_t j = 0; j < u.size(); ++j) {
        css += u[j];
        double t = (css - total) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) {
            rho = j + 1;
            theta = t;
        }
    }
    (void)rho;
    for (double& v : p) v = std::max(0.0, v - theta);
    return p;
}

}  // namespace detail

inline double weighted_ber_objective(const AllocationProblem& prob,
                                     std::span<const double> powers) {
    double f = 0.0;
    for (size_t i = 0; i < powers.size(); ++i)
        f += prob.weights[i] * detail::ber16_safe(powers[i] * prob.gains[i] / prob.n0);
    return f;
}

inline AllocationResult allocate_equal(const AllocationProblem& prob) {
    prob.validate(false);
    AllocationResult res;
    res.powers.assign(prob.gains.size(), prob.total_power / static_cast<double>(prob.gains.size()));
    res.objective_value = capacity_objective(prob, res.powers);
    return res;
}

/// Classic water-filling: p_i = max(0, mu - n0/g_i) with mu chosen so the
/// powers spend exactly the budget. Bisection plus a final Newton step on
/// the piecewise-linear power sum.
inline AllocationResult allocate_waterfilling(const AllocationProblem& prob) {
    prob.validate(false);
    const size_t m = prob.gains.size();
    std::vector<double> floors(m);
    for (size_t i = 0; i < m; ++i) floors[i] = prob.n0 / prob.gains[i];
    const double floor_min = *std::min_element(floors.begin(), floors.end());

    auto power_sum = [&](double mu) {
        double s = 0.0;
        for (double f : floors) s += std::max(0.0, mu - f);
        return s;
    };

    double lo = floor_min, hi = floor_min + prob.total_power;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (power_sum(mid) < prob.total_power)
            lo = mid;
        else
            hi = mid;
    }
    double mu = 0.5 * (lo + hi);
    for (int pass = 0; pass < 2; ++pass) {
        int active = 0;
        for (double f : floors)
            if (mu > f) ++active;
        if (active > 0) mu += (prob.total_power - power_sum(mu)) / active;
    }

    AllocationResult res;
    res.powers.resize(m);
    for (size_t i = 0; i < m; ++i) res.powers[i] = std::max(0.0, mu - floors[i]);
    res.objective_value = capacity_objective(prob, res.powers);
    return res;
}

/// Importance-aware allocation: minimize sum_i w_i * BER16(p_i g_i / n0)
/// over the power simplex. The marginal benefit of power diverges at p = 0,
/// so every positively weighted stream is interior and shares the Lagrange
/// multiplier; zero-weight streams get nothing. Falls back to projected
/// gradient descent if the bisection solution fails the stationarity check.
inline AllocationResult allocate_importance(const AllocationProblem& prob) {
    prob.validate(true);
    const size_t m = prob.gains.size();
    const double P = prob.total_power;

    auto powers_at = [&](double lambda) {
        std::vector<double> p(m);
        for (size_t i = 0; i < m; ++i)
            p[i] = detail::importance_inverse_marginal(prob, i, lambda, P);
        return p;
    };
    auto sum = [](const std::vector<double>& p) {
        return std::accumulate(p.begin(), p.end(), 0.0);
    };

    double lambda_lo = 1e300, lambda_hi = 0.0;
    for (size_t i = 0; i < m; ++i) {
        if (prob.weights[i] == 0.0) continue;
        double marg = detail::importance_marginal(prob, i, P);
        lambda_lo = std::min(lambda_lo, marg);
        lambda_hi = std::max(lambda_hi, marg);
    }
    while (sum(powers_at(lambda_hi)) > P) lambda_hi *= 2.0;

    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lambda_lo + lambda_hi);
        if (sum(powers_at(mid)) > P)
            lambda_lo = mid;
        else
            lambda_hi = mid;
    }
    const double lambda = 0.5 * (lambda_lo + lambda_hi);
    std::vector<double> p = powers_at(lambda);
    double s = sum(p);
    if (s > 0.0)
        for (double& v : p) v *= P / s;

    // stationarity: interior streams must share the multiplier
    bool stationary = true;
    for (size_t i = 0; i < m; ++i) {
        if (p[i] <= 1e-9 * P) continue;
        if (std::abs(detail::importance_marginal(prob, i, p[i]) - lambda) > 1e-6 * lambda) {
            stationary = false;
            break;
        }
    }

    if (!stationary) {
        double f = weighted_ber_objective(prob, p);
        double step = P;
        for (int it = 0; it < 10000; ++it) {
            std::vector<double> trial(m);
            for (size_t i = 0; i < m; ++i) {
                double gn = prob.gains[i] / prob.n0;
                double grad = p[i] > 0.0 ? prob.weights[i] * detail::ber16_derivative(p[i] * gn) * gn
                                         : -detail::importance_marginal(prob, i, 1e-12 * P);
                trial[i] = p[i] - step * grad;
            }
            trial = detail::project_simplex(std::move(trial), P);
            double ft = weighted_ber_objective(prob, trial);
            if (ft < f) {
                bool converged = f - ft < 1e-9;
                p.swap(trial);
                f = ft;
                if (converged) break;
            } else {
                step *= 0.5;
                if (step < 1e-18 * P) break;
            }
        }
    }

    AllocationResult res;
    res.powers = std::move(p);
    res.objective_value = weighted_ber_objective(prob, res.powers);
    return res;
}

/// Per-stream weights w_{l,b} = sli_l * base^b / Z for segment l, plane b,
/// streams ordered segment-major with planes ascending (LSB first).
inline std::vector<double> stream_weights(const ImportanceProfile& profile, size_t n_segments,
                                          int n_planes = 8) {
    profile.validate(n_segments);
    if (n_planes < 1) throw std::invalid_argument("stream_weights: need >= 1 plane");
    if (!(profile.bli_exponent_base > 0.0))
        throw std::invalid_argument("stream_weights: bli base must be > 0");
    std::vector<double> w;
    w.reserve(n_segments * static_cast<size_t>(n_planes));
    double z = 0.0;
    for (size_t l = 0; l < n_segments; ++l) {
        double plane_w = 1.0;
        for (int b = 0; b < n_planes; ++b) {
            w.push_back(profile.sli[l] * plane_w);
            z += w.back();
            plane_w *= profile.bli_exponent_base;
        }
    }
    for (double& v : w) v /= z;
    return w;
}

}  // namespace semlink

#endif
