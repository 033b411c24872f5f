#pragma once

// Problem instance, signal priors and the noisy linear measurement channel
//
//     y_i = <a_i, x> + sigma * z_i,   z_i ~ N(0, 1),   ||a_i||_2 <= 1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <fmt/format.h>

#include "adaptsense/errors.hpp"
#include "adaptsense/rng.hpp"

namespace adaptsense {

/// Sorted, duplicate-free, zero-based coordinate indices.
using IndexSet = std::vector<std::size_t>;

inline constexpr double kNormTolerance = 1e-9;

struct ProblemDims {
    std::size_t n = 0;    // ambient dimension
    std::size_t m = 0;    // measurement budget
    double sigma = 1.0;   // noise standard deviation

    // sigma == 0 is accepted for noiseless checks; anything that forms a
    // likelihood rejects it separately.
    void validate() const {
        if (n < 2) {
            throw ConfigError(fmt::format("dimension n must be >= 2 (got {})", n));
        }
        if (m < 1) {
            throw ConfigError("measurement budget m must be >= 1");
        }
        if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
            throw ConfigError(fmt::format("noise level sigma must be finite and >= 0 (got {})", sigma));
        }
    }
};

/// Each coordinate independently equals mu with probability k/n.
struct BernoulliPrior {
    std::size_t k = 1;
    double mu = 1.0;
};

/// Bernoulli prior with success probability alpha*k/n, conditioned on at
/// most k nonzero coordinates.
struct ConditionalBernoulliPrior {
    std::size_t k = 1;
    double alpha = 0.5;
    double mu = 1.0;
};

/// Exactly one coordinate, uniform over {0..n-1}, equals mu.
struct OneSparseUniformPrior {
    double mu = 1.0;
};

using PriorSpec = std::variant<BernoulliPrior, ConditionalBernoulliPrior, OneSparseUniformPrior>;

inline double amplitude(const PriorSpec& prior) {
    return std::visit([](const auto& p) { return p.mu; }, prior);
}

inline PriorSpec with_amplitude(PriorSpec prior, double mu) {
    std::visit([mu](auto& p) { p.mu = mu; }, prior);
    return prior;
}

/// Sparsity level a prior is built around (1 for the one-sparse prior).
inline std::size_t nominal_sparsity(const PriorSpec& prior) {
    return std::visit(
        [](const auto& p) -> std::size_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(p)>, OneSparseUniformPrior>) {
                return 1;
            } else {
                return p.k;
            }
        },
        prior);
}

inline void validate(const PriorSpec& prior, std::size_t n) {
    if (n < 1) {
        throw ConfigError("dimension n must be >= 1");
    }
    const double mu = amplitude(prior);
    if (!(mu > 0.0) || !std::isfinite(mu)) {
        throw ConfigError(fmt::format("amplitude mu must be finite and > 0 (got {})", mu));
    }
    auto check_k = [n](std::size_t k) {
        if (k < 1 || 2 * k > n) {
            throw ConfigError(fmt::format("sparsity k must satisfy 1 <= k <= n/2 (got k={}, n={})", k, n));
        }
    };
    if (const auto* b = std::get_if<BernoulliPrior>(&prior)) {
        check_k(b->k);
    } else if (const auto* c = std::get_if<ConditionalBernoulliPrior>(&prior)) {
        check_k(c->k);
        if (!(c->alpha > 0.0 && c->alpha < 1.0)) {
            throw ConfigError(fmt::format("thinning factor alpha must lie in (0,1) (got {})", c->alpha));
        }
    }
}

struct SparseSignal {
    std::vector<double> amplitudes;
    IndexSet support;

    static SparseSignal from_amplitudes(std::vector<double> values) {
        SparseSignal s;
        for (std::size_t j = 0; j < values.size(); ++j) {
            if (values[j] != 0.0) {
                s.support.push_back(j);
            }
        }
        s.amplitudes = std::move(values);
        return s;
    }

    std::size_t size() const { return amplitudes.size(); }
};

/// A query obeying the power constraint ||a||_2 <= 1 (up to kNormTolerance).
class SensingVector {
public:
    SensingVector() = default;

    explicit SensingVector(std::vector<double> entries) : entries_(std::move(entries)) {
        const double norm = this->norm();
        if (!(norm <= 1.0 + kNormTolerance)) {
            throw UsageError(fmt::format("sensing vector violates the power constraint: ||a|| = {:.17g}", norm));
        }
    }

    static SensingVector basis(std::size_t n, std::size_t index) {
        if (index >= n) {
            throw UsageError(fmt::format("basis index {} out of range for n={}", index, n));
        }
        std::vector<double> e(n, 0.0);
        e[index] = 1.0;
        return SensingVector(std::move(e));
    }

    std::span<const double> entries() const { return entries_; }
    double operator[](std::size_t j) const { return entries_[j]; }
    std::size_t size() const { return entries_.size(); }

    double norm() const {
        double sum = 0.0;
        for (double v : entries_) {
            sum += v * v;
        }
        return std::sqrt(sum);
    }

private:
    std::vector<double> entries_;
};

struct MeasurementRecord {
    SensingVector vector;
    double observation = 0.0;
};

namespace detail {

inline void sample_independent(std::vector<double>& values, double probability, double mu, Rng& rng) {
    for (double& v : values) {
        v = rng.uniform() < probability ? mu : 0.0;
    }
}

}  // namespace detail

inline SparseSignal sample_signal(const PriorSpec& prior, std::size_t n, Rng& rng) {
    validate(prior, n);
    std::vector<double> values(n, 0.0);
    if (const auto* b = std::get_if<BernoulliPrior>(&prior)) {
        detail::sample_independent(values, static_cast<double>(b->k) / static_cast<double>(n), b->mu, rng);
    } else if (const auto* c = std::get_if<ConditionalBernoulliPrior>(&prior)) {
        // Exact rejection sampling. Acceptance probability is
        // P(Bin(n, alpha k / n) <= k) > 1/2 whenever alpha < 1.
        const double p = c->alpha * static_cast<double>(c->k) / static_cast<double>(n);
        for (;;) {
            detail::sample_independent(values, p, c->mu, rng);
            const auto count = static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](double v) { return v != 0.0; }));
            if (count <= c->k) {
                break;
            }
        }
    } else {
        const auto& u = std::get<OneSparseUniformPrior>(prior);
        values[rng.uniform_index(n)] = u.mu;
    }
    return SparseSignal::from_amplitudes(std::move(values));
}

inline SparseSignal sample_signal(const PriorSpec& prior, const ProblemDims& dims, Seed seed) {
    Rng rng(seed);
    return sample_signal(prior, dims.n, rng);
}

/// Noiseless response <a, x>; sums over the support only, which is
/// bit-identical to the dense inner product.
inline double inner(const SparseSignal& signal, const SensingVector& vector) {
    if (vector.size() != signal.size()) {
        throw UsageError(fmt::format("sensing vector has length {} but the signal has length {}", vector.size(), signal.size()));
    }
    double sum = 0.0;
    for (std::size_t j : signal.support) {
        sum += vector[j] * signal.amplitudes[j];
    }
    return sum;
}

inline double measure(const SparseSignal& signal, const SensingVector& vector, double sigma, Rng& noise) {
    const double clean = inner(signal, vector);
    const double z = noise.gaussian();
    return clean + sigma * z;
}

inline double measure(const SparseSignal& signal, const SensingVector& vector, double sigma, Seed seed) {
    Rng noise(seed);
    return measure(signal, vector, sigma, noise);
}

}  // namespace adaptsense
