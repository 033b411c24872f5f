#pragma once

// Seeded Monte Carlo engine.
//
// A pipeline is a sensing strategy followed by an estimator. Every trial
// derives three independent streams from (master_seed, mu_index,
// trial_index): the signal draw, the measurement noise, and the strategy's
// own randomness. Trials share nothing and run on a worker pool; results are
// stored by trial index and reduced in a fixed order, so aggregates do not
// depend on scheduling.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "adaptsense/bounds.hpp"
#include "adaptsense/errors.hpp"
#include "adaptsense/estimators.hpp"
#include "adaptsense/model.hpp"
#include "adaptsense/rng.hpp"
#include "adaptsense/strategies.hpp"

namespace adaptsense {

enum class StrategyId { nonadaptive, bayesian, bisection };

/// omp        OMP over every record, sparsity from the prior.
/// two_stage  detect with a fraction p of the budget, then sample the
///            detected coordinate directly with the rest and average.
/// detect_only  spend the whole budget detecting; xhat = mu e_{j_hat}.
enum class EstimatorId { omp, two_stage, detect_only };

inline std::string_view to_string(StrategyId id) {
    switch (id) {
        case StrategyId::nonadaptive: return "nonadaptive";
        case StrategyId::bayesian: return "bayesian";
        case StrategyId::bisection: return "bisection";
    }
    return "unknown";
}

inline std::string_view to_string(EstimatorId id) {
    switch (id) {
        case EstimatorId::omp: return "omp";
        case EstimatorId::two_stage: return "two_stage";
        case EstimatorId::detect_only: return "detect_only";
    }
    return "unknown";
}

inline std::optional<StrategyId> parse_strategy(std::string_view name) {
    for (auto id : {StrategyId::nonadaptive, StrategyId::bayesian, StrategyId::bisection}) {
        if (name == to_string(id)) {
            return id;
        }
    }
    return std::nullopt;
}

inline std::optional<EstimatorId> parse_estimator(std::string_view name) {
    for (auto id : {EstimatorId::omp, EstimatorId::two_stage, EstimatorId::detect_only}) {
        if (name == to_string(id)) {
            return id;
        }
    }
    return std::nullopt;
}

inline std::string pipeline_name(StrategyId strategy, EstimatorId estimator) {
    return fmt::format("{}_{}", to_string(strategy), to_string(estimator));
}

struct ExperimentConfig {
    ProblemDims dims;
    PriorSpec prior = OneSparseUniformPrior{};
    StrategyId strategy = StrategyId::nonadaptive;
    EstimatorId estimator = EstimatorId::omp;
    /// Amplitudes swept by run_sweep; empty means the prior's own mu.
    std::vector<double> mu_grid;
    std::size_t trials = 1;
    Seed master_seed = 0;
    double detect_fraction = 0.5;
    double clip_lambda = 1e4;
    /// OMP iterations; defaults to the prior's sparsity.
    std::optional<std::size_t> omp_sparsity;
    /// Record the posterior ratio lambda (needs a one-sparse signal).
    bool compute_lambda = false;
    /// 0 = ADAPTSENSE_WORKERS or the hardware concurrency.
    std::size_t workers = 0;

    std::size_t detection_budget() const {
        if (estimator != EstimatorId::two_stage) {
            return dims.m;
        }
        return static_cast<std::size_t>(std::floor(detect_fraction * static_cast<double>(dims.m)));
    }

    void validate() const {
        dims.validate();
        for (double mu : mu_grid) {
            adaptsense::validate(with_amplitude(prior, mu), dims.n);
        }
        if (mu_grid.empty()) {
            adaptsense::validate(prior, dims.n);
        }
        if (trials < 1) {
            throw ConfigError("trials must be >= 1");
        }
        for (std::size_t i = 1; i < mu_grid.size(); ++i) {
            if (!(mu_grid[i] > mu_grid[i - 1])) {
                throw ConfigError("mu grid must be strictly increasing");
            }
        }
        if (!(clip_lambda > 0.0)) {
            throw ConfigError("clip_lambda must be > 0");
        }
        if (estimator == EstimatorId::two_stage) {
            if (!(detect_fraction > 0.0 && detect_fraction < 1.0)) {
                throw ConfigError(fmt::format("detect fraction p must lie in (0,1) (got {})", detect_fraction));
            }
            const std::size_t detect = detection_budget();
            if (detect < 1 || detect >= dims.m) {
                throw ConfigError(fmt::format("two-stage split of m={} at p={} leaves an empty stage", dims.m,
                                              detect_fraction));
            }
        }
        if (strategy == StrategyId::bisection) {
            // Throws when n is not a power of two or the budget is too small.
            (void)stage_allocation(detection_budget(), dims.n);
        }
        if ((strategy == StrategyId::bayesian || compute_lambda) && !(dims.sigma > 0.0)) {
            throw ConfigError("the Bayesian strategy and lambda need sigma > 0");
        }
        if (estimator == EstimatorId::omp && omp_k() > dims.m) {
            throw ConfigError(fmt::format("OMP sparsity {} exceeds the budget m={}", omp_k(), dims.m));
        }
    }

    std::size_t omp_k() const { return omp_sparsity.value_or(nominal_sparsity(prior)); }
};

struct TrialResult {
    /// (1/n) ||xhat - x||^2
    double mse_per_coordinate = 0.0;
    /// |threshold_support(xhat, mu) Δ S|
    std::size_t hamming_error = 0;
    /// p_{j*} / max_{j != j*} p_j from the batch posterior over every record.
    std::optional<double> lambda;
    /// The estimator's own support estimate equals S.
    bool support_correct = false;
    std::size_t measurements_used = 0;

    friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

struct Aggregate {
    double mean_mse = 0.0;
    double stderr_mse = 0.0;
    /// NaN when no trial recorded lambda.
    double median_lambda = 0.0;
    double mean_hamming = 0.0;
    double stderr_hamming = 0.0;
    double support_rate = 0.0;
    std::size_t trials = 0;
};

struct SweepPoint {
    double mu = 0.0;
    Aggregate aggregate;
};

inline constexpr std::uint64_t kSignalStream = 0;
inline constexpr std::uint64_t kNoiseStream = 1;
inline constexpr std::uint64_t kStrategyStream = 2;

// ---------------------------------------------------------------------------
// Reductions.

/// Pairwise (cascade) summation: blocks of 8 summed left to right, then
/// halves combined recursively. The tree depends only on the length.
inline double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) {
            s += v;
        }
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
};

/// Mean and sample-sd / sqrt(count); the error is 0 for a single value.
inline MeanStderr mean_and_stderr(std::span<const double> values) {
    MeanStderr out;
    if (values.empty()) {
        return out;
    }
    const auto count = static_cast<double>(values.size());
    out.mean = pairwise_sum(values) / count;
    if (values.size() < 2) {
        return out;
    }
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - out.mean;
        sq[i] = d * d;
    }
    const double variance = pairwise_sum(sq) / (count - 1.0);
    out.stderr_ = std::sqrt(variance / count);
    return out;
}

/// Exact median by full sort; average of the middle pair for even counts.
inline double median(std::vector<double> values) {
    if (values.empty()) {
        return std::nan("");
    }
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) {
        return values[mid];
    }
    return 0.5 * (values[mid - 1] + values[mid]);
}

inline Aggregate aggregate(std::span<const TrialResult> results, double clip_lambda) {
    Aggregate agg;
    agg.trials = results.size();
    std::vector<double> mse;
    std::vector<double> hamming;
    std::vector<double> lambdas;
    mse.reserve(results.size());
    hamming.reserve(results.size());
    std::size_t correct = 0;
    for (const auto& r : results) {
        mse.push_back(r.mse_per_coordinate);
        hamming.push_back(static_cast<double>(r.hamming_error));
        if (r.lambda) {
            lambdas.push_back(std::min(*r.lambda, clip_lambda));
        }
        correct += r.support_correct ? 1 : 0;
    }
    const auto m = mean_and_stderr(mse);
    const auto h = mean_and_stderr(hamming);
    agg.mean_mse = m.mean;
    agg.stderr_mse = m.stderr_;
    agg.mean_hamming = h.mean;
    agg.stderr_hamming = h.stderr_;
    agg.median_lambda = median(std::move(lambdas));
    agg.support_rate = results.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(results.size());
    return agg;
}

// ---------------------------------------------------------------------------
// Workers.

inline std::size_t resolve_workers(std::size_t requested) {
    if (requested > 0) {
        return requested;
    }
    if (const char* env = std::getenv("ADAPTSENSE_WORKERS")) {
        char* end = nullptr;
        const unsigned long value = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && value > 0) {
            return static_cast<std::size_t>(value);
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, count) on up to `workers` threads. The first
/// exception thrown by any task is rethrown on the calling thread.
inline void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& body) {
    workers = std::min(resolve_workers(workers), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) {
                return;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                failed.store(true);
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back(worker);
    }
    pool.clear();
    if (error) {
        std::rethrow_exception(error);
    }
}

// ---------------------------------------------------------------------------
// Trials.

namespace detail {

inline StrategyState make_strategy(const ExperimentConfig& config, std::size_t budget, Seed seed) {
    const std::size_t n = config.dims.n;
    switch (config.strategy) {
        case StrategyId::nonadaptive:
            return NonadaptiveRademacher(n, budget, seed);
        case StrategyId::bayesian:
            return BayesianAdaptive(n, budget, amplitude(config.prior), config.dims.sigma, seed);
        case StrategyId::bisection:
            return RecursiveBisection::with_budget(n, budget);
    }
    throw ConfigError("unknown strategy");
}

inline void run_to_budget(StrategyState& state, const SparseSignal& signal, double sigma, Rng& noise,
                          std::vector<MeasurementRecord>& records) {
    while (!exhausted(state)) {
        SensingVector v = next_vector(state);
        const double y = measure(signal, v, sigma, noise);
        observe(state, y);
        records.push_back(MeasurementRecord{std::move(v), y});
    }
}

inline std::size_t detected_index(const StrategyState& state, std::span<const MeasurementRecord> records, double mu) {
    if (std::holds_alternative<NonadaptiveRademacher>(state)) {
        return posterior_mode(records, mu);
    }
    return finalize_support(state);
}

}  // namespace detail

/// One trial at the prior's amplitude. Deterministic in
/// (config, trial_index, mu_index).
inline TrialResult run_trial(const ExperimentConfig& config, std::uint64_t trial_index, std::uint64_t mu_index = 0) {
    const std::size_t n = config.dims.n;
    const std::size_t m = config.dims.m;
    const double sigma = config.dims.sigma;
    const double mu = amplitude(config.prior);

    Rng signal_rng(derive_seed(config.master_seed, {mu_index, trial_index, kSignalStream}));
    Rng noise_rng(derive_seed(config.master_seed, {mu_index, trial_index, kNoiseStream}));
    const Seed strategy_seed = derive_seed(config.master_seed, {mu_index, trial_index, kStrategyStream});

    const SparseSignal signal = sample_signal(config.prior, n, signal_rng);

    std::vector<MeasurementRecord> records;
    records.reserve(m);
    const std::size_t detect_budget = config.detection_budget();
    StrategyState state = detail::make_strategy(config, detect_budget, strategy_seed);
    detail::run_to_budget(state, signal, sigma, noise_rng, records);

    EstimateReport report;
    switch (config.estimator) {
        case EstimatorId::omp:
            report = omp(records, config.omp_k());
            break;
        case EstimatorId::two_stage: {
            const std::size_t j_hat = detail::detected_index(state, records, mu);
            StrategyState directed = DirectedEstimation(n, j_hat, m - detect_budget);
            detail::run_to_budget(directed, signal, sigma, noise_rng, records);
            report = two_stage_estimate(j_hat, std::get<DirectedEstimation>(directed).samples(), n);
            break;
        }
        case EstimatorId::detect_only: {
            const std::size_t j_hat = detail::detected_index(state, records, mu);
            report.xhat.assign(n, 0.0);
            report.xhat[j_hat] = mu;
            report.support_estimate = {j_hat};
            break;
        }
    }

    if (records.size() != m) {
        throw std::logic_error(fmt::format("pipeline consumed {} measurements, budget is {}", records.size(), m));
    }

    TrialResult result;
    result.measurements_used = records.size();
    double sq = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double d = report.xhat[j] - signal.amplitudes[j];
        sq += d * d;
    }
    result.mse_per_coordinate = sq / static_cast<double>(n);
    result.hamming_error = symmetric_difference_size(threshold_support(report.xhat, mu), signal.support);
    result.support_correct = report.support_estimate == signal.support;
    if (config.compute_lambda && signal.support.size() == 1) {
        const auto log_w = log_posterior_from_batch(records, mu, sigma);
        result.lambda = lambda_ratio_from_log(log_w, signal.support.front());
    }
    return result;
}

inline std::vector<TrialResult> run_trials(const ExperimentConfig& config, std::uint64_t mu_index = 0) {
    std::vector<TrialResult> results(config.trials);
    parallel_for(config.trials, config.workers, [&](std::size_t i) { results[i] = run_trial(config, i, mu_index); });
    return results;
}

inline std::vector<SweepPoint> run_sweep(const ExperimentConfig& config) {
    config.validate();
    std::vector<double> grid = config.mu_grid;
    if (grid.empty()) {
        grid.push_back(amplitude(config.prior));
    }
    std::vector<SweepPoint> points;
    points.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        ExperimentConfig at = config;
        at.prior = with_amplitude(config.prior, grid[i]);
        const auto results = run_trials(at, i);
        points.push_back(SweepPoint{grid[i], aggregate(results, config.clip_lambda)});
    }
    return points;
}

// ---------------------------------------------------------------------------
// Experiments.

/// `points` amplitudes log-spaced over [lo_factor, hi_factor] * sqrt(n/m).
inline std::vector<double> log_spaced_mu_grid(std::size_t n, std::size_t m, std::size_t points, double lo_factor = 0.1,
                                              double hi_factor = 10.0) {
    if (points < 1 || !(lo_factor > 0.0) || !(hi_factor >= lo_factor)) {
        throw ConfigError("mu grid needs points >= 1 and 0 < lo <= hi");
    }
    if (points > 1 && !(hi_factor > lo_factor)) {
        throw ConfigError("mu grid with several points needs lo < hi");
    }
    const double scale = std::sqrt(static_cast<double>(n) / static_cast<double>(m));
    std::vector<double> grid(points);
    if (points == 1) {
        grid[0] = lo_factor * scale;
        return grid;
    }
    const double log_lo = std::log(lo_factor);
    const double log_hi = std::log(hi_factor);
    for (std::size_t i = 0; i < points; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(points - 1);
        grid[i] = scale * std::exp(log_lo + t * (log_hi - log_lo));
    }
    return grid;
}

inline std::vector<double> scaled_mu_grid(std::size_t n, std::size_t m, std::span<const double> factors) {
    const double scale = std::sqrt(static_cast<double>(n) / static_cast<double>(m));
    std::vector<double> grid;
    grid.reserve(factors.size());
    for (double f : factors) {
        grid.push_back(f * scale);
    }
    return grid;
}

struct MuGridOptions {
    std::size_t points = 40;
    double lo_factor = 0.1;
    double hi_factor = 10.0;
    /// When nonempty, overrides the log grid: mu = factor * sqrt(n/m).
    std::vector<double> factors;

    std::vector<double> build(std::size_t n, std::size_t m) const {
        if (!factors.empty()) {
            return scaled_mu_grid(n, m, factors);
        }
        return log_spaced_mu_grid(n, m, points, lo_factor, hi_factor);
    }
};

struct Figure1Options {
    std::size_t n = 512;
    double sigma = 1.0;
    std::vector<std::size_t> m_list{64, 128, 256};
    std::size_t trials = 2000;
    Seed seed = 1;
    MuGridOptions grid;
    double clip_lambda = 1e4;
    std::size_t workers = 0;
};

struct Figure1Row {
    std::string strategy;
    std::size_t m = 0;
    double mu = 0.0;
    double median_lambda = 0.0;
    std::size_t trials = 0;
    Seed seed = 0;
};

/// Median posterior ratio lambda versus mu for nonadaptive rows and both
/// adaptive strategies, one-sparse uniform prior, full budget on detection.
inline std::vector<Figure1Row> figure1_experiment(const Figure1Options& options) {
    std::vector<Figure1Row> rows;
    for (auto strategy : {StrategyId::nonadaptive, StrategyId::bayesian, StrategyId::bisection}) {
        for (std::size_t m : options.m_list) {
            ExperimentConfig config;
            config.dims = ProblemDims{options.n, m, options.sigma};
            config.prior = OneSparseUniformPrior{1.0};
            config.strategy = strategy;
            config.estimator = EstimatorId::detect_only;
            config.mu_grid = options.grid.build(options.n, m);
            config.trials = options.trials;
            config.master_seed = derive_seed(options.seed, {static_cast<std::uint64_t>(strategy), m});
            config.clip_lambda = options.clip_lambda;
            config.compute_lambda = true;
            config.workers = options.workers;
            for (const auto& point : run_sweep(config)) {
                rows.push_back(Figure1Row{std::string(to_string(strategy)), m, point.mu, point.aggregate.median_lambda,
                                          options.trials, options.seed});
            }
        }
    }
    return rows;
}

struct Figure2Options {
    std::size_t n = 512;
    std::size_t m = 128;
    double detect_fraction = 0.5;
    double sigma = 1.0;
    std::size_t trials = 10000;
    Seed seed = 1;
    MuGridOptions grid;
    std::size_t workers = 0;
};

struct Figure2Row {
    std::string pipeline;
    double mu = 0.0;
    double mean_mse = 0.0;
    double stderr_mse = 0.0;
    std::size_t trials = 0;
    Seed seed = 0;
};

struct Figure2Result {
    std::vector<Figure2Row> rows;
    double oracle_mn = 0.0;   // sigma^2 / (m n): support known, all m on the amplitude
    double me_n = 0.0;        // sigma^2 / (m_e n): two-stage with a correct detection
    double thm2_bound = 0.0;  // (1/33) (k/m) sigma^2 with k = 1
};

/// Universal minimax constant: inf_k C_k >= 1/33.
inline constexpr double kUniversalMinimaxConstant = 1.0 / 33.0;

inline std::vector<std::pair<StrategyId, EstimatorId>> figure2_pipelines() {
    return {{StrategyId::bayesian, EstimatorId::two_stage},
            {StrategyId::bisection, EstimatorId::two_stage},
            {StrategyId::nonadaptive, EstimatorId::omp}};
}

/// Per-coordinate MSE versus mu for both two-stage adaptive pipelines and
/// nonadaptive rows + OMP, one-sparse uniform prior.
inline Figure2Result figure2_experiment(const Figure2Options& options) {
    Figure2Result out;
    const auto n = static_cast<double>(options.n);
    const auto m = static_cast<double>(options.m);
    const double var = options.sigma * options.sigma;
    const std::vector<double> grid = options.grid.build(options.n, options.m);
    for (const auto& [strategy, estimator] : figure2_pipelines()) {
        ExperimentConfig config;
        config.dims = ProblemDims{options.n, options.m, options.sigma};
        config.prior = OneSparseUniformPrior{1.0};
        config.strategy = strategy;
        config.estimator = estimator;
        config.mu_grid = grid;
        config.trials = options.trials;
        config.master_seed = derive_seed(options.seed, {static_cast<std::uint64_t>(strategy),
                                                        static_cast<std::uint64_t>(estimator)});
        config.detect_fraction = options.detect_fraction;
        config.workers = options.workers;
        for (const auto& point : run_sweep(config)) {
            out.rows.push_back(Figure2Row{pipeline_name(strategy, estimator), point.mu, point.aggregate.mean_mse,
                                          point.aggregate.stderr_mse, options.trials, options.seed});
        }
    }
    ExperimentConfig split;
    split.dims = ProblemDims{options.n, options.m, options.sigma};
    split.estimator = EstimatorId::two_stage;
    split.detect_fraction = options.detect_fraction;
    const auto m_e = static_cast<double>(options.m - split.detection_budget());
    out.oracle_mn = var / (m * n);
    out.me_n = var / (m_e * n);
    out.thm2_bound = kUniversalMinimaxConstant * (1.0 / m) * var;
    return out;
}

struct BoundCheckOptions {
    std::size_t n = 512;
    std::size_t k = 8;
    std::size_t m = 128;
    double sigma = 1.0;
    std::size_t trials = 2000;
    Seed seed = 7;
    std::size_t workers = 0;
};

struct BoundCheckEntry {
    std::string pipeline;
    double mse_mu = 0.0;
    double mse_mean = 0.0;
    double mse_stderr = 0.0;
    double mse_bound = 0.0;
    bool mse_pass = false;
    double hamming_mu = 0.0;
    double hamming_mean = 0.0;
    double hamming_stderr = 0.0;
    double hamming_bound = 0.0;
    bool hamming_pass = false;
};

struct BoundCheckReport {
    std::vector<BoundCheckEntry> entries;

    bool all_passed() const {
        return std::all_of(entries.begin(), entries.end(),
                           [](const BoundCheckEntry& e) { return e.mse_pass && e.hamming_pass; });
    }
};

/// An empirical mean is compatible with a lower bound when it is no more
/// than three standard errors below it.
inline bool complies_with_lower_bound(double mean, double stderr_, double bound) {
    return mean >= bound - 3.0 * stderr_;
}

/// Every pipeline this library can assemble for (n, m).
inline std::vector<std::pair<StrategyId, EstimatorId>> shipped_pipelines(std::size_t n) {
    std::vector<std::pair<StrategyId, EstimatorId>> out;
    for (auto s : {StrategyId::nonadaptive, StrategyId::bayesian, StrategyId::bisection}) {
        if (s == StrategyId::bisection && !std::has_single_bit(n)) {
            continue;
        }
        for (auto e : {EstimatorId::omp, EstimatorId::two_stage, EstimatorId::detect_only}) {
            out.emplace_back(s, e);
        }
    }
    return out;
}

/// Empirical check of the Bernoulli-prior bounds for every shipped pipeline:
/// per-coordinate MSE at mu = (4/3) sqrt(n/m) against (4/27)(k/m) sigma^2,
/// and the Hamming error of threshold_support at mu = sqrt(n/m) against
/// k (1 - (mu/2) sqrt(m/n)) = k/2.
inline BoundCheckReport bound_check_experiment(const BoundCheckOptions& options) {
    const auto n = static_cast<double>(options.n);
    const auto m = static_cast<double>(options.m);
    const auto k = static_cast<double>(options.k);
    const double mu_mse = (4.0 / 3.0) * std::sqrt(n / m);
    const double mu_hamming = std::sqrt(n / m);

    BoundCheckReport report;
    for (const auto& [strategy, estimator] : shipped_pipelines(options.n)) {
        ExperimentConfig config;
        config.dims = ProblemDims{options.n, options.m, options.sigma};
        config.prior = BernoulliPrior{options.k, mu_mse};
        config.strategy = strategy;
        config.estimator = estimator;
        config.mu_grid = {mu_hamming, mu_mse};
        config.trials = options.trials;
        config.master_seed = derive_seed(options.seed, {static_cast<std::uint64_t>(strategy),
                                                        static_cast<std::uint64_t>(estimator)});
        config.workers = options.workers;
        const auto points = run_sweep(config);

        BoundCheckEntry e;
        e.pipeline = pipeline_name(strategy, estimator);
        e.hamming_mu = points[0].mu;
        e.hamming_mean = points[0].aggregate.mean_hamming;
        e.hamming_stderr = points[0].aggregate.stderr_hamming;
        e.hamming_bound = thm3_hamming_lower(k, mu_hamming, m, n);
        e.hamming_pass = complies_with_lower_bound(e.hamming_mean, e.hamming_stderr, e.hamming_bound);
        e.mse_mu = points[1].mu;
        e.mse_mean = points[1].aggregate.mean_mse;
        e.mse_stderr = points[1].aggregate.stderr_mse;
        e.mse_bound = thm1_mse_lower(k, m, options.sigma);
        e.mse_pass = complies_with_lower_bound(e.mse_mean, e.mse_stderr, e.mse_bound);
        report.entries.push_back(std::move(e));
    }
    return report;
}

}  // namespace adaptsense
