#pragma once

// Sequential sensing policies. Each strategy is a copyable value: call
// next_vector() to get the query, measure it, and feed the answer back with
// observe(). Copying a strategy snapshots its whole state, RNG included.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <fmt/format.h>

#include "adaptsense/errors.hpp"
#include "adaptsense/model.hpp"
#include "adaptsense/rng.hpp"

namespace adaptsense {

// ---------------------------------------------------------------------------
// Posterior update for the one-sparse model with known amplitude.

namespace detail {

inline void check_likelihood_params(double mu, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw ConfigError(fmt::format("posterior computations need sigma > 0 (got {})", sigma));
    }
    if (!std::isfinite(mu)) {
        throw ConfigError("amplitude mu must be finite");
    }
}

/// Shift by the max and exponentiate; returns the normalized probabilities.
inline std::vector<double> normalize_log_weights(std::span<const double> log_weights) {
    const double top = *std::max_element(log_weights.begin(), log_weights.end());
    if (!std::isfinite(top)) {
        throw NumericalError("posterior has no finite log-weight");
    }
    std::vector<double> p(log_weights.size());
    double total = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        p[j] = std::exp(log_weights[j] - top);
        total += p[j];
    }
    for (double& v : p) {
        v /= total;
    }
    return p;
}

/// Adds the log-likelihood of one observation, -(y - mu a_j)^2 / (2 sigma^2).
inline void accumulate_log_likelihood(std::span<double> log_weights, std::span<const double> a, double y, double mu,
                                      double sigma) {
    const double scale = 1.0 / (2.0 * sigma * sigma);
    for (std::size_t j = 0; j < log_weights.size(); ++j) {
        const double r = y - mu * a[j];
        log_weights[j] -= r * r * scale;
    }
}

}  // namespace detail

/// p'_j ∝ p_j exp(-(y - mu a_j)^2 / (2 sigma^2)), evaluated in log space.
inline std::vector<double> bayes_update(std::span<const double> p, const SensingVector& a, double y, double mu,
                                        double sigma) {
    detail::check_likelihood_params(mu, sigma);
    if (a.size() != p.size()) {
        throw UsageError(fmt::format("posterior has length {} but sensing vector has length {}", p.size(), a.size()));
    }
    std::vector<double> log_w(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) {
        log_w[j] = p[j] > 0.0 ? std::log(p[j]) : -std::numeric_limits<double>::infinity();
    }
    detail::accumulate_log_likelihood(log_w, a.entries(), y, mu, sigma);
    return detail::normalize_log_weights(log_w);
}

// ---------------------------------------------------------------------------
// Stage schedule for recursive bisection.

/// m_s = ceil(beta / 2^s) for s = 1..log2(n), with beta the largest value
/// keeping the total within m. Every breakpoint of the step function
/// beta -> sum_s ceil(beta / 2^s) is an integer, so the search runs over
/// integers and is exact.
inline std::vector<std::size_t> stage_allocation(std::size_t m, std::size_t n) {
    if (n < 2 || !std::has_single_bit(n)) {
        throw ConfigError(fmt::format("bisection needs n to be a power of two >= 2 (got {})", n));
    }
    const auto stages = static_cast<std::size_t>(std::countr_zero(n));
    if (m < stages) {
        throw ConfigError(fmt::format("budget m={} cannot give each of the {} stages one measurement", m, stages));
    }
    auto counts_for = [stages](std::size_t beta) {
        std::vector<std::size_t> counts(stages);
        for (std::size_t s = 1; s <= stages; ++s) {
            const std::size_t block = std::size_t{1} << std::min<std::size_t>(s, 63);
            counts[s - 1] = (beta + block - 1) / block;
        }
        return counts;
    };
    auto total_for = [&](std::size_t beta) {
        std::size_t total = 0;
        for (std::size_t c : counts_for(beta)) {
            total += c;
        }
        return total;
    };
    // total_for(1) == stages <= m; total_for(2m + 1) > m.
    std::size_t lo = 1;
    std::size_t hi = 2 * m + 1;
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (total_for(mid) <= m) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return counts_for(lo);
}

// ---------------------------------------------------------------------------
// Strategies.

/// Rows with i.i.d. +-1/sqrt(n) entries, fixed independently of the answers.
class NonadaptiveRademacher {
public:
    NonadaptiveRademacher(std::size_t n, std::size_t budget, Seed seed) : n_(n), budget_(budget), rng_(seed) {
        if (n < 1) {
            throw ConfigError("dimension n must be >= 1");
        }
    }

    SensingVector next_vector() {
        if (pending_) {
            return *pending_;
        }
        if (rows_emitted_ >= budget_) {
            throw ProtocolError("measurement budget exhausted");
        }
        const double scale = 1.0 / std::sqrt(static_cast<double>(n_));
        std::vector<double> row(n_);
        for (double& v : row) {
            v = scale * rng_.rademacher();
        }
        pending_ = SensingVector(std::move(row));
        return *pending_;
    }

    void observe(double /*y*/) {
        if (!pending_) {
            throw ProtocolError("observe called without a pending sensing vector");
        }
        pending_.reset();
        ++rows_emitted_;
    }

    std::size_t dimension() const { return n_; }
    std::size_t budget() const { return budget_; }
    std::size_t consumed() const { return rows_emitted_; }
    bool exhausted() const { return rows_emitted_ >= budget_; }

private:
    std::size_t n_;
    std::size_t budget_;
    Rng rng_;
    std::size_t rows_emitted_ = 0;
    std::optional<SensingVector> pending_;
};

/// Posterior-weighted random rows a_j = b_j sqrt(p_j), b_j = +-1, with an
/// exact Bayes update of p after each answer.
class BayesianAdaptive {
public:
    BayesianAdaptive(std::size_t n, std::size_t budget, double mu, double sigma, Seed seed)
        : budget_(budget),
          mu_(mu),
          sigma_(sigma),
          rng_(seed),
          posterior_(n, 1.0 / static_cast<double>(n)),
          log_weights_(n, 0.0) {
        if (n < 1) {
            throw ConfigError("dimension n must be >= 1");
        }
        detail::check_likelihood_params(mu, sigma);
    }

    SensingVector next_vector() {
        if (pending_) {
            return *pending_;
        }
        if (consumed_ >= budget_) {
            throw ProtocolError("measurement budget exhausted");
        }
        std::vector<double> row(posterior_.size());
        for (std::size_t j = 0; j < row.size(); ++j) {
            row[j] = rng_.rademacher() * std::sqrt(posterior_[j]);
        }
        pending_ = SensingVector(std::move(row));
        return *pending_;
    }

    void observe(double y) {
        if (!pending_) {
            throw ProtocolError("observe called without a pending sensing vector");
        }
        detail::accumulate_log_likelihood(log_weights_, pending_->entries(), y, mu_, sigma_);
        // Keep the running log-weights bounded; only differences matter.
        const double top = *std::max_element(log_weights_.begin(), log_weights_.end());
        for (double& w : log_weights_) {
            w -= top;
        }
        posterior_ = detail::normalize_log_weights(log_weights_);
        pending_.reset();
        ++consumed_;
    }

    /// Argmax of the posterior, lowest index on exact ties.
    std::size_t finalize_support() const {
        if (consumed_ < budget_) {
            throw ProtocolError("finalize_support called before the budget was consumed");
        }
        return static_cast<std::size_t>(std::max_element(posterior_.begin(), posterior_.end()) - posterior_.begin());
    }

    std::span<const double> posterior() const { return posterior_; }
    double mu() const { return mu_; }
    double sigma() const { return sigma_; }
    std::size_t dimension() const { return posterior_.size(); }
    std::size_t budget() const { return budget_; }
    std::size_t consumed() const { return consumed_; }
    bool exhausted() const { return consumed_ >= budget_; }

private:
    std::size_t budget_;
    double mu_;
    double sigma_;
    Rng rng_;
    std::vector<double> posterior_;
    std::vector<double> log_weights_;
    std::size_t consumed_ = 0;
    std::optional<SensingVector> pending_;
};

/// Half-open index range [first, last).
struct IndexRange {
    std::size_t first = 0;
    std::size_t last = 0;

    std::size_t size() const { return last - first; }
    bool contains(std::size_t j) const { return j >= first && j < last; }
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// Recursive bisection for a one-sparse signal with positive amplitude.
///
/// Stage s queries (1/sqrt 2)(|J1|^-1/2 1_J1 - |J2|^-1/2 1_J2) m_s times, sums
/// the answers into w, and keeps J1 when w >= 0, J2 otherwise. The factor
/// 1/sqrt 2 puts the row on the unit sphere.
class RecursiveBisection {
public:
    RecursiveBisection(std::size_t n, std::vector<std::size_t> schedule) : n_(n), schedule_(std::move(schedule)) {
        if (n < 2 || !std::has_single_bit(n)) {
            throw ConfigError(fmt::format("bisection needs n to be a power of two >= 2 (got {})", n));
        }
        if (schedule_.size() != static_cast<std::size_t>(std::countr_zero(n))) {
            throw ConfigError(fmt::format("bisection over n={} needs {} stages, schedule has {}", n, std::countr_zero(n),
                                          schedule_.size()));
        }
        for (std::size_t c : schedule_) {
            if (c == 0) {
                throw ConfigError("every bisection stage needs at least one measurement");
            }
            budget_ += c;
        }
        j1_ = {0, n / 2};
        j2_ = {n / 2, n};
    }

    /// Schedule from stage_allocation(budget, n); any remainder the step
    /// function leaves unused goes to stage 1 so exactly `budget` rows are
    /// emitted. The schedule stays non-increasing.
    static RecursiveBisection with_budget(std::size_t n, std::size_t budget) {
        auto schedule = stage_allocation(budget, n);
        std::size_t used = 0;
        for (std::size_t c : schedule) {
            used += c;
        }
        schedule.front() += budget - used;
        return RecursiveBisection(n, std::move(schedule));
    }

    SensingVector next_vector() {
        if (survivor_) {
            throw ProtocolError("measurement budget exhausted");
        }
        pending_ = true;
        std::vector<double> row(n_, 0.0);
        const double c1 = 1.0 / std::sqrt(2.0 * static_cast<double>(j1_.size()));
        const double c2 = 1.0 / std::sqrt(2.0 * static_cast<double>(j2_.size()));
        for (std::size_t j = j1_.first; j < j1_.last; ++j) {
            row[j] = c1;
        }
        for (std::size_t j = j2_.first; j < j2_.last; ++j) {
            row[j] = -c2;
        }
        return SensingVector(std::move(row));
    }

    void observe(double y) {
        if (!pending_) {
            throw ProtocolError("observe called without a pending sensing vector");
        }
        pending_ = false;
        w_ += y;
        ++within_stage_;
        ++consumed_;
        if (within_stage_ < schedule_[stage_]) {
            return;
        }
        const bool keep_first = w_ >= 0.0;
        sign_history_.push_back(keep_first);
        const IndexRange kept = keep_first ? j1_ : j2_;
        if (kept.size() == 1) {
            survivor_ = kept.first;
            return;
        }
        const std::size_t mid = kept.first + kept.size() / 2;
        j1_ = {kept.first, mid};
        j2_ = {mid, kept.last};
        ++stage_;
        within_stage_ = 0;
        w_ = 0.0;
    }

    std::size_t finalize_support() const {
        if (!survivor_) {
            throw ProtocolError("finalize_support called before the final stage completed");
        }
        return *survivor_;
    }

    const IndexRange& first_half() const { return j1_; }
    const IndexRange& second_half() const { return j2_; }
    std::size_t stage() const { return stage_; }
    std::size_t within_stage() const { return within_stage_; }
    double stage_sum() const { return w_; }
    std::span<const std::size_t> schedule() const { return schedule_; }
    /// true = the first half was kept at that stage.
    const std::vector<bool>& sign_history() const { return sign_history_; }
    std::size_t dimension() const { return n_; }
    std::size_t budget() const { return budget_; }
    std::size_t consumed() const { return consumed_; }
    bool exhausted() const { return survivor_.has_value(); }

private:
    std::size_t n_;
    std::vector<std::size_t> schedule_;
    std::size_t budget_ = 0;
    IndexRange j1_;
    IndexRange j2_;
    std::size_t stage_ = 0;
    std::size_t within_stage_ = 0;
    double w_ = 0.0;
    std::vector<bool> sign_history_;
    std::size_t consumed_ = 0;
    bool pending_ = false;
    std::optional<std::size_t> survivor_;
};

/// Repeated direct samples of one coordinate along e_target.
class DirectedEstimation {
public:
    DirectedEstimation(std::size_t n, std::size_t target, std::size_t budget) : n_(n), target_(target), budget_(budget) {
        if (target >= n) {
            throw ConfigError(fmt::format("target index {} out of range for n={}", target, n));
        }
    }

    SensingVector next_vector() {
        if (samples_.size() >= budget_) {
            throw ProtocolError("measurement budget exhausted");
        }
        pending_ = true;
        return SensingVector::basis(n_, target_);
    }

    void observe(double y) {
        if (!pending_) {
            throw ProtocolError("observe called without a pending sensing vector");
        }
        pending_ = false;
        samples_.push_back(y);
    }

    std::size_t finalize_support() const { return target_; }

    std::size_t target() const { return target_; }
    std::span<const double> samples() const { return samples_; }
    std::size_t dimension() const { return n_; }
    std::size_t budget() const { return budget_; }
    std::size_t consumed() const { return samples_.size(); }
    bool exhausted() const { return samples_.size() >= budget_; }

private:
    std::size_t n_;
    std::size_t target_;
    std::size_t budget_;
    std::vector<double> samples_;
    bool pending_ = false;
};

using StrategyState = std::variant<NonadaptiveRademacher, BayesianAdaptive, RecursiveBisection, DirectedEstimation>;

inline SensingVector next_vector(StrategyState& state) {
    return std::visit([](auto& s) { return s.next_vector(); }, state);
}

inline void observe(StrategyState& state, double y) {
    std::visit([y](auto& s) { s.observe(y); }, state);
}

inline bool exhausted(const StrategyState& state) {
    return std::visit([](const auto& s) { return s.exhausted(); }, state);
}

inline std::size_t consumed(const StrategyState& state) {
    return std::visit([](const auto& s) { return s.consumed(); }, state);
}

/// Support index a strategy commits to. Nonadaptive rows carry no decision
/// rule of their own; use an estimator over the records instead.
inline std::size_t finalize_support(const StrategyState& state) {
    return std::visit(
        [](const auto& s) -> std::size_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, NonadaptiveRademacher>) {
                throw ProtocolError("nonadaptive sensing has no built-in support decision");
            } else {
                return s.finalize_support();
            }
        },
        state);
}

}  // namespace adaptsense
