#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "adaptsense/errors.hpp"
#include "adaptsense/model.hpp"
#include "adaptsense/strategies.hpp"

namespace adaptsense {

struct EstimateReport {
    std::vector<double> xhat;
    IndexSet support_estimate;
    /// Set when a least-squares refit met rank-deficient columns and fell
    /// back to the minimum-norm solution.
    bool degenerate = false;
};

namespace detail {

inline std::size_t record_dimension(std::span<const MeasurementRecord> records) {
    if (records.empty()) {
        throw UsageError("at least one measurement record is required");
    }
    const std::size_t n = records.front().vector.size();
    for (const auto& r : records) {
        if (r.vector.size() != n) {
            throw UsageError(fmt::format("records mix sensing vectors of length {} and {}", n, r.vector.size()));
        }
    }
    return n;
}

inline std::size_t argmax_lowest(std::span<const double> values) {
    return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

}  // namespace detail

/// Unnormalized log posterior of the one-sparse model under a uniform prior:
/// -||y - mu A e_j||^2 / (2 sigma^2).
inline std::vector<double> log_posterior_from_batch(std::span<const MeasurementRecord> records, double mu,
                                                    double sigma) {
    detail::check_likelihood_params(mu, sigma);
    const std::size_t n = detail::record_dimension(records);
    std::vector<double> log_w(n, 0.0);
    for (const auto& r : records) {
        detail::accumulate_log_likelihood(log_w, r.vector.entries(), r.observation, mu, sigma);
    }
    return log_w;
}

inline std::vector<double> posterior_from_batch(std::span<const MeasurementRecord> records, double mu, double sigma) {
    return detail::normalize_log_weights(log_posterior_from_batch(records, mu, sigma));
}

/// argmin_j ||y - mu A e_j||^2, the posterior mode for every sigma > 0 and
/// its limit as sigma -> 0. Lowest index on ties.
inline std::size_t posterior_mode(std::span<const MeasurementRecord> records, double mu) {
    const std::size_t n = detail::record_dimension(records);
    std::vector<double> score(n, 0.0);
    for (const auto& r : records) {
        const auto a = r.vector.entries();
        for (std::size_t j = 0; j < n; ++j) {
            const double residual = r.observation - mu * a[j];
            score[j] -= residual * residual;
        }
    }
    return detail::argmax_lowest(score);
}

/// p_{j*} / max_{j != j*} p_j; +infinity when every other entry is zero.
inline double lambda_ratio(std::span<const double> p, std::size_t j_star) {
    if (p.size() < 2 || j_star >= p.size()) {
        throw UsageError("lambda_ratio needs n >= 2 and j* in range");
    }
    double runner_up = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        if (j != j_star) {
            runner_up = std::max(runner_up, p[j]);
        }
    }
    if (runner_up == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return p[j_star] / runner_up;
}

/// Same ratio from unnormalized log-weights; immune to underflow.
inline double lambda_ratio_from_log(std::span<const double> log_weights, std::size_t j_star) {
    if (log_weights.size() < 2 || j_star >= log_weights.size()) {
        throw UsageError("lambda_ratio needs n >= 2 and j* in range");
    }
    double runner_up = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < log_weights.size(); ++j) {
        if (j != j_star) {
            runner_up = std::max(runner_up, log_weights[j]);
        }
    }
    return std::exp(log_weights[j_star] - runner_up);
}

/// Orthogonal matching pursuit: k rounds of picking the column with the
/// largest |<A e_j, residual>| (lowest index on ties, unnormalized columns),
/// each followed by a least-squares refit on every selected column.
inline EstimateReport omp(std::span<const MeasurementRecord> records, std::size_t k) {
    const std::size_t n = detail::record_dimension(records);
    const std::size_t m = records.size();
    if (k > m) {
        throw UsageError(fmt::format("OMP with k={} needs at least k records (got {})", k, m));
    }
    if (k > n) {
        throw UsageError(fmt::format("OMP with k={} exceeds the dimension n={}", k, n));
    }
    EstimateReport report;
    report.xhat.assign(n, 0.0);
    if (k == 0) {
        return report;
    }

    Eigen::MatrixXd a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    Eigen::VectorXd y(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        const auto row = records[i].vector.entries();
        for (std::size_t j = 0; j < n; ++j) {
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
        }
        y(static_cast<Eigen::Index>(i)) = records[i].observation;
    }

    std::vector<Eigen::Index> selected;
    std::vector<bool> taken(n, false);
    Eigen::VectorXd residual = y;
    Eigen::VectorXd coefficients;
    for (std::size_t round = 0; round < k; ++round) {
        const Eigen::VectorXd correlation = a.transpose() * residual;
        Eigen::Index best = -1;
        double best_value = -1.0;
        for (Eigen::Index j = 0; j < correlation.size(); ++j) {
            if (taken[static_cast<std::size_t>(j)]) {
                continue;
            }
            const double value = std::abs(correlation(j));
            if (value > best_value) {
                best_value = value;
                best = j;
            }
        }
        selected.push_back(best);
        taken[static_cast<std::size_t>(best)] = true;

        Eigen::MatrixXd sub(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(selected.size()));
        for (std::size_t c = 0; c < selected.size(); ++c) {
            sub.col(static_cast<Eigen::Index>(c)) = a.col(selected[c]);
        }
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(sub);
        if (cod.rank() < static_cast<Eigen::Index>(selected.size())) {
            report.degenerate = true;
        }
        coefficients = cod.solve(y);
        residual = y - sub * coefficients;
    }

    for (std::size_t c = 0; c < selected.size(); ++c) {
        report.xhat[static_cast<std::size_t>(selected[c])] = coefficients(static_cast<Eigen::Index>(c));
    }
    for (Eigen::Index j : selected) {
        report.support_estimate.push_back(static_cast<std::size_t>(j));
    }
    std::sort(report.support_estimate.begin(), report.support_estimate.end());
    return report;
}

/// { j : |xhat_j| >= mu/2 }.
inline IndexSet threshold_support(std::span<const double> xhat, double mu) {
    if (!(mu > 0.0)) {
        throw ConfigError(fmt::format("threshold_support needs mu > 0 (got {})", mu));
    }
    IndexSet s;
    const double cut = mu / 2.0;
    for (std::size_t j = 0; j < xhat.size(); ++j) {
        if (std::abs(xhat[j]) >= cut) {
            s.push_back(j);
        }
    }
    return s;
}

/// Keeps estimates of size <= 2k - 1, replaces larger ones by the empty set.
inline IndexSet truncate_support(IndexSet s_hat, std::size_t k) {
    if (k < 1) {
        throw ConfigError("truncate_support needs k >= 1");
    }
    if (s_hat.size() > 2 * k - 1) {
        return {};
    }
    return s_hat;
}

/// Sample mean of the directed samples placed at coordinate j_hat.
inline EstimateReport two_stage_estimate(std::size_t j_hat, std::span<const double> samples, std::size_t n) {
    if (samples.empty()) {
        throw UsageError("two_stage_estimate needs at least one sample");
    }
    if (j_hat >= n) {
        throw UsageError(fmt::format("detected index {} out of range for n={}", j_hat, n));
    }
    EstimateReport report;
    report.xhat.assign(n, 0.0);
    report.xhat[j_hat] = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
    report.support_estimate = {j_hat};
    return report;
}

/// |A Δ B| for sorted index sets.
inline std::size_t symmetric_difference_size(const IndexSet& a, const IndexSet& b) {
    IndexSet out;
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out.size();
}

}  // namespace adaptsense
