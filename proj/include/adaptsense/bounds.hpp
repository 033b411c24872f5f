#pragma once

// Exact binomial numerics and closed-form lower bounds for adaptive sensing.
//
// Conventions: per-coordinate MSE is (1/n) E||xhat - x||^2, Hamming error is
// E|S_hat Δ S|. Every evaluator is a pure function of its arguments.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "adaptsense/errors.hpp"

namespace adaptsense {

enum class FormulaId {
    thm1_mse,
    thm3_hamming,
    prop1_hamming,
    mse1_bayes,
    bennett_tail,
    binom_tail,
    gamma_exact,
    gamma_upper,
    minimax_ck,
};

inline std::string_view to_string(FormulaId id) {
    switch (id) {
        case FormulaId::thm1_mse: return "thm1_mse";
        case FormulaId::thm3_hamming: return "thm3_hamming";
        case FormulaId::prop1_hamming: return "prop1_hamming";
        case FormulaId::mse1_bayes: return "mse1_bayes";
        case FormulaId::bennett_tail: return "bennett_tail";
        case FormulaId::binom_tail: return "binom_tail";
        case FormulaId::gamma_exact: return "gamma_exact";
        case FormulaId::gamma_upper: return "gamma_upper";
        case FormulaId::minimax_ck: return "minimax_ck";
    }
    return "unknown";
}

struct BoundReport {
    FormulaId formula_id;
    double value = 0.0;
    std::vector<std::pair<std::string, double>> parameters;
    /// Hamming-type bounds at or below zero say nothing; they are reported
    /// unclamped with this flag set.
    bool vacuous = false;
};

inline BoundReport make_report(FormulaId id, double value, std::vector<std::pair<std::string, double>> parameters) {
    const bool can_be_vacuous = id == FormulaId::thm3_hamming || id == FormulaId::prop1_hamming ||
                                id == FormulaId::mse1_bayes;
    return BoundReport{id, value, std::move(parameters), can_be_vacuous && value <= 0.0};
}

// ---------------------------------------------------------------------------
// Binomial numerics (log-gamma in extended precision).

/// log P(Bin(n, p) = j); -inf outside the support.
inline long double log_binom_pmf(std::size_t n, double p, std::size_t j) {
    constexpr long double neg_inf = -std::numeric_limits<long double>::infinity();
    if (j > n) {
        return neg_inf;
    }
    if (p <= 0.0) {
        return j == 0 ? 0.0L : neg_inf;
    }
    if (p >= 1.0) {
        return j == n ? 0.0L : neg_inf;
    }
    const auto nl = static_cast<long double>(n);
    const auto jl = static_cast<long double>(j);
    const long double log_choose = std::lgamma(nl + 1.0L) - std::lgamma(jl + 1.0L) - std::lgamma(nl - jl + 1.0L);
    return log_choose + jl * std::log(static_cast<long double>(p)) +
           (nl - jl) * std::log1p(-static_cast<long double>(p));
}

namespace detail {

inline void check_probability(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ConfigError(fmt::format("probability must lie in [0,1] (got {})", p));
    }
}

inline std::size_t binom_mode(std::size_t n, double p) {
    const auto mode = static_cast<std::size_t>(std::floor((static_cast<double>(n) + 1.0) * p));
    return std::min(mode, n);
}

/// Sum of weight(i) * pmf(i) over i = first..n, stopping once past the
/// mode and the terms have become negligible.
template <class Weight>
long double upper_sum(std::size_t n, double p, std::size_t first, Weight weight) {
    const std::size_t mode = binom_mode(n, p);
    long double total = 0.0L;
    for (std::size_t i = first; i <= n; ++i) {
        const long double term = weight(i) * std::exp(log_binom_pmf(n, p, i));
        total += term;
        if (i >= mode && term <= total * 1e-21L) {
            break;
        }
    }
    return total;
}

}  // namespace detail

/// P(Bin(n, p) >= j).
inline double binom_tail(std::size_t n, double p, std::size_t j) {
    detail::check_probability(p);
    if (j == 0) {
        return 1.0;
    }
    if (j > n) {
        return 0.0;
    }
    if (p == 0.0) {
        return 0.0;
    }
    if (p == 1.0) {
        return 1.0;
    }
    const double mean = static_cast<double>(n) * p;
    if (static_cast<double>(j) > mean) {
        return static_cast<double>(detail::upper_sum(n, p, j, [](std::size_t) { return 1.0L; }));
    }
    // Lower tail 0..j-1, walked downward from j-1 where the terms are largest.
    const std::size_t mode = detail::binom_mode(n, p);
    long double lower = 0.0L;
    for (std::size_t i = j; i-- > 0;) {
        const long double term = std::exp(log_binom_pmf(n, p, i));
        lower += term;
        if (i <= mode && term <= lower * 1e-21L) {
            break;
        }
    }
    return static_cast<double>(1.0L - lower);
}

/// Bennett's inequality for the binomial upper tail:
/// P(Bin(m, p) >= j) <= exp(-j log(j / (m p)) + j - m p), for j > m p > 0.
inline double bennett_tail_bound(std::size_t m, double p, double j) {
    detail::check_probability(p);
    const double mean = static_cast<double>(m) * p;
    if (!(mean > 0.0) || !(j > mean)) {
        throw DomainError(fmt::format("Bennett bound requires j > m p > 0 (got j={}, m p={})", j, mean));
    }
    return std::exp(-j * std::log(j / mean) + j - mean);
}

/// beta = alpha - 1 - log(alpha), positive for alpha in (0, 1).
inline double bennett_beta(double alpha) {
    return alpha - 1.0 - std::log(alpha);
}

namespace detail {

inline void check_gamma_args(std::size_t n, std::size_t k, double alpha) {
    if (k < 1 || 2 * k > n) {
        throw ConfigError(fmt::format("gamma needs 1 <= k <= n/2 (got n={}, k={})", n, k));
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ConfigError(fmt::format("alpha must lie in (0,1) (got {})", alpha));
    }
}

}  // namespace detail

/// gamma_{n,k}(alpha) = (1/alpha) sum_{j=k+1}^{n} (2 + (j-1)/k) P(Bin(n, alpha k/n) = j).
inline double gamma_exact(std::size_t n, std::size_t k, double alpha) {
    detail::check_gamma_args(n, k, alpha);
    const double p = alpha * static_cast<double>(k) / static_cast<double>(n);
    const auto kl = static_cast<long double>(k);
    const long double sum = detail::upper_sum(n, p, k + 1, [kl](std::size_t j) {
        return 2.0L + (static_cast<long double>(j) - 1.0L) / kl;
    });
    return static_cast<double>(sum / static_cast<long double>(alpha));
}

/// (3k + 1) e^{-(k+1) beta} / (alpha k), an upper bound on gamma_{n,k}(alpha)
/// for every n, valid when beta >= log 2.
inline double gamma_upper(std::size_t k, double alpha) {
    if (k < 1) {
        throw ConfigError("gamma_upper needs k >= 1");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ConfigError(fmt::format("alpha must lie in (0,1) (got {})", alpha));
    }
    const double beta = bennett_beta(alpha);
    if (beta < std::numbers::ln2) {
        throw DomainError(fmt::format("gamma_upper requires beta >= log 2 (alpha={} gives beta={})", alpha, beta));
    }
    const auto kd = static_cast<double>(k);
    return (3.0 * kd + 1.0) * std::exp(-(kd + 1.0) * beta) / (alpha * kd);
}

// ---------------------------------------------------------------------------
// Lower bounds.

/// Per-coordinate MSE floor under the Bernoulli prior at mu = (4/3) sqrt(n/m):
/// (4/27) (k/m) sigma^2.
inline double thm1_mse_lower(double k, double m, double sigma) {
    return (4.0 / 27.0) * (k / m) * sigma * sigma;
}

/// Expected Hamming error floor under the Bernoulli prior:
/// k (1 - (mu/2) sqrt(m/n)). Negative values are vacuous.
inline double thm3_hamming_lower(double k, double mu, double m, double n) {
    return k * (1.0 - (mu / 2.0) * std::sqrt(m / n));
}

/// Hamming floor under the conditional Bernoulli prior:
/// alpha k (1 - gamma_{n,k}(alpha) - (mu/2) sqrt(m/n)).
inline double prop1_hamming_lower(std::size_t n, std::size_t k, double alpha, double mu, double m) {
    const double gamma = gamma_exact(n, k, alpha);
    return alpha * static_cast<double>(k) *
           (1.0 - gamma - (mu / 2.0) * std::sqrt(m / static_cast<double>(n)));
}

/// Amplitude maximizing (mu^2/4) * prop1_hamming_lower over mu:
/// (4/3)(1 - gamma) sqrt(n/m).
inline double mse1_optimal_mu(std::size_t n, std::size_t k, double alpha, double m) {
    const double gamma = gamma_exact(n, k, alpha);
    return (4.0 / 3.0) * (1.0 - gamma) * std::sqrt(static_cast<double>(n) / m);
}

/// Per-coordinate MSE floor under the conditional Bernoulli prior, obtained
/// by substituting the optimal amplitude into (mu^2/4) * prop1_hamming_lower
/// and dividing by n: (4/27) alpha (1 - gamma)^3 k / m.
inline double mse1_bayes_lower(std::size_t n, std::size_t k, double alpha, double m) {
    const double gamma = gamma_exact(n, k, alpha);
    const double keep = 1.0 - gamma;
    return (4.0 / 27.0) * alpha * keep * keep * keep * static_cast<double>(k) / m;
}

struct MinimaxConstant {
    double alpha_star = 0.0;
    double product = 0.0;  // max over alpha of alpha (1 - gamma_{n,k}(alpha))
    double c_k = 0.0;      // (4/27) * product
};

/// Maximizes alpha (1 - gamma_{n,k}(alpha)) over (0,1): best point of a
/// grid with `grid_points` interior nodes, then golden-section search on the
/// two neighbouring cells down to 1e-9 in alpha.
inline MinimaxConstant minimax_constant(std::size_t n, std::size_t k, std::size_t grid_points = 1000) {
    if (n < 2 || k < 1 || 2 * k > n) {
        throw ConfigError(fmt::format("minimax_constant needs n >= 2 and 1 <= k <= n/2 (got n={}, k={})", n, k));
    }
    if (grid_points < 2) {
        throw ConfigError("minimax_constant needs at least two grid points");
    }
    auto objective = [n, k](double alpha) { return alpha * (1.0 - gamma_exact(n, k, alpha)); };

    const double step = 1.0 / static_cast<double>(grid_points + 1);
    std::size_t best = 1;
    double best_value = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i <= grid_points; ++i) {
        const double value = objective(static_cast<double>(i) * step);
        if (value > best_value) {
            best_value = value;
            best = i;
        }
    }

    double lo = static_cast<double>(best - 1) * step;
    double hi = static_cast<double>(best + 1) * step;
    lo = std::max(lo, 1e-12);
    hi = std::min(hi, 1.0 - 1e-12);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = objective(x1);
    double f2 = objective(x2);
    while (hi - lo > 1e-9) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = objective(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = objective(x1);
        }
    }
    MinimaxConstant out;
    out.alpha_star = 0.5 * (lo + hi);
    out.product = objective(out.alpha_star);
    if (best_value > out.product) {
        out.alpha_star = static_cast<double>(best) * step;
        out.product = best_value;
    }
    out.c_k = (4.0 / 27.0) * out.product;
    return out;
}

/// Smallest k with minimax_constant(n_per_k * k, k).c_k >= target, searched
/// over [1, k_max] by doubling then bisection. Assumes c_k is eventually
/// non-decreasing in k; returns 0 when k_max is not enough.
inline std::size_t smallest_k_for_constant(double target, std::size_t n_per_k, std::size_t k_max) {
    if (n_per_k < 2) {
        throw ConfigError("n_per_k must be >= 2");
    }
    auto reaches = [&](std::size_t k) { return minimax_constant(n_per_k * k, k).c_k >= target; };
    std::size_t hi = 1;
    while (!reaches(hi)) {
        if (hi >= k_max) {
            return 0;
        }
        hi = std::min(2 * hi, k_max);
    }
    std::size_t lo = hi / 2;  // lo == 0 or fails
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (reaches(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

}  // namespace adaptsense
