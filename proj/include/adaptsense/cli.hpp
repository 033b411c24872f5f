#pragma once

// Command-line front end: fig1, fig2, bounds, check, sweep.
//
// Exit codes: 0 success, 1 a bound check failed, 2 bad flags or
// configuration. Options may also come from a `--config` file of
// `key = value` lines (key = long flag name without dashes, '#' starts a
// comment); a flag given on the command line wins over the file.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "adaptsense/bounds.hpp"
#include "adaptsense/errors.hpp"
#include "adaptsense/harness.hpp"

namespace adaptsense::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;

inline constexpr std::size_t kFigure1Trials = 2000;
inline constexpr std::size_t kFigure2Trials = 10000;
inline constexpr std::size_t kFigure1FullTrials = 10000;
inline constexpr std::size_t kFigure2FullTrials = 100000;

/// Round-trip float formatting used by every CSV writer.
inline std::string fmt_real(double value) { return fmt::format("{:.17g}", value); }

// ---------------------------------------------------------------------------
// Config files.

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

inline std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline ConfigEntries parse_config(std::istream& in, const std::string& origin = "config") {
    ConfigEntries entries;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(fmt::format("{}:{}: expected `key = value`", origin, number));
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || key.starts_with("-")) {
            throw ConfigError(fmt::format("{}:{}: bad key `{}`", origin, number, key));
        }
        entries.emplace_back(std::move(key), std::move(value));
    }
    return entries;
}

inline ConfigEntries read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("--config: cannot open `{}`", path));
    }
    return parse_config(in, path);
}

/// Appends `--key value` for every file entry whose flag the command line
/// does not already set. `true`/`false` values toggle bare flags.
inline std::vector<std::string> merge_config(std::vector<std::string> args, const ConfigEntries& entries) {
    auto given = [&args](const std::string& key) {
        const std::string flag = "--" + key;
        return std::any_of(args.begin(), args.end(),
                           [&](const std::string& a) { return a == flag || a.starts_with(flag + "="); });
    };
    std::vector<std::string> extra;
    for (const auto& [key, value] : entries) {
        if (key == "config") {
            throw ConfigError("--config: config files cannot include other config files");
        }
        if (given(key)) {
            continue;
        }
        if (value == "true") {
            extra.push_back("--" + key);
        } else if (value == "false") {
            continue;
        } else {
            extra.push_back("--" + key);
            extra.push_back(value);
        }
    }
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
}

// ---------------------------------------------------------------------------
// Writers.

inline void write_figure1_csv(std::ostream& out, const std::vector<Figure1Row>& rows) {
    out << "strategy,m,mu,median_lambda,trials,seed\n";
    for (const auto& r : rows) {
        out << fmt::format("{},{},{},{},{},{}\n", r.strategy, r.m, fmt_real(r.mu), fmt_real(r.median_lambda),
                           r.trials, r.seed);
    }
}

inline void write_figure2_csv(std::ostream& out, const Figure2Result& result) {
    out << "pipeline,mu,mean_mse,stderr_mse,trials,seed\n";
    for (const auto& r : result.rows) {
        out << fmt::format("{},{},{},{},{},{}\n", r.pipeline, fmt_real(r.mu), fmt_real(r.mean_mse),
                           fmt_real(r.stderr_mse), r.trials, r.seed);
    }
    out << fmt::format("reference,oracle_mn,{}\n", fmt_real(result.oracle_mn));
    out << fmt::format("reference,me_n,{}\n", fmt_real(result.me_n));
    out << fmt::format("reference,thm2_bound,{}\n", fmt_real(result.thm2_bound));
}

inline void write_sweep_csv(std::ostream& out, const ExperimentConfig& config, const std::vector<SweepPoint>& points) {
    out << "strategy,estimator,mu,mean_mse,stderr_mse,mean_hamming,stderr_hamming,median_lambda,support_rate,"
           "trials,seed\n";
    for (const auto& p : points) {
        const auto& a = p.aggregate;
        out << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", to_string(config.strategy),
                           to_string(config.estimator), fmt_real(p.mu), fmt_real(a.mean_mse), fmt_real(a.stderr_mse),
                           fmt_real(a.mean_hamming), fmt_real(a.stderr_hamming), fmt_real(a.median_lambda),
                           fmt_real(a.support_rate), a.trials, config.master_seed);
    }
}

inline std::string format_params(const BoundReport& report) {
    std::string s;
    for (const auto& [name, value] : report.parameters) {
        if (!s.empty()) {
            s += ';';
        }
        s += fmt::format("{}={}", name, fmt::format("{:g}", value));
    }
    return s;
}

inline void write_bounds_table(std::ostream& out, const std::vector<BoundReport>& reports) {
    std::size_t id_width = std::string_view("formula").size();
    std::size_t param_width = std::string_view("parameters").size();
    for (const auto& r : reports) {
        id_width = std::max(id_width, to_string(r.formula_id).size());
        param_width = std::max(param_width, format_params(r).size());
    }
    out << fmt::format("{:<{}}  {:<{}}  {:>14}  {:>14}  {}\n", "formula", id_width, "parameters", param_width, "value",
                       "value_sci", "note");
    for (const auto& r : reports) {
        out << fmt::format("{:<{}}  {:<{}}  {:>14.6f}  {:>14.6e}  {}\n", to_string(r.formula_id), id_width,
                           format_params(r), param_width, r.value, r.value, r.vacuous ? "vacuous" : "");
    }
}

inline void write_bounds_csv(std::ostream& out, const std::vector<BoundReport>& reports) {
    out << "formula_id,params,value,vacuous_flag\n";
    for (const auto& r : reports) {
        out << fmt::format("{},{},{},{}\n", to_string(r.formula_id), format_params(r), fmt_real(r.value),
                           r.vacuous ? 1 : 0);
    }
}

/// thm1, thm3, prop1, mse1, gamma (exact and upper when defined) and C_k for
/// one (n, k, m). alpha defaults to the maximizer behind C_k, mu to
/// sqrt(n/m).
inline std::vector<BoundReport> bound_table(std::size_t n, std::size_t k, std::size_t m, std::optional<double> alpha,
                                            std::optional<double> mu, double sigma) {
    if (n < 2 || k < 1 || 2 * k > n) {
        throw ConfigError(fmt::format("--k: need 1 <= k <= n/2 (got n={}, k={})", n, k));
    }
    if (m < 1) {
        throw ConfigError("--m: need m >= 1");
    }
    if (!(sigma >= 0.0)) {
        throw ConfigError("--sigma: need sigma >= 0");
    }
    const auto nd = static_cast<double>(n);
    const auto kd = static_cast<double>(k);
    const auto md = static_cast<double>(m);
    const MinimaxConstant ck = minimax_constant(n, k);
    const double a = alpha.value_or(ck.alpha_star);
    if (!(a > 0.0 && a < 1.0)) {
        throw ConfigError(fmt::format("--alpha: need 0 < alpha < 1 (got {})", a));
    }
    const double amp = mu.value_or(std::sqrt(nd / md));
    if (!(amp > 0.0)) {
        throw ConfigError(fmt::format("--mu: need mu > 0 (got {})", amp));
    }

    std::vector<BoundReport> out;
    out.push_back(make_report(FormulaId::thm1_mse, thm1_mse_lower(kd, md, sigma),
                              {{"k", kd}, {"m", md}, {"sigma", sigma}}));
    out.push_back(make_report(FormulaId::thm3_hamming, thm3_hamming_lower(kd, amp, md, nd),
                              {{"k", kd}, {"mu", amp}, {"m", md}, {"n", nd}}));
    out.push_back(make_report(FormulaId::prop1_hamming, prop1_hamming_lower(n, k, a, amp, md),
                              {{"n", nd}, {"k", kd}, {"alpha", a}, {"mu", amp}, {"m", md}}));
    out.push_back(make_report(FormulaId::mse1_bayes, mse1_bayes_lower(n, k, a, md) * sigma * sigma,
                              {{"n", nd}, {"k", kd}, {"alpha", a}, {"m", md}, {"sigma", sigma}}));
    out.push_back(make_report(FormulaId::gamma_exact, gamma_exact(n, k, a), {{"n", nd}, {"k", kd}, {"alpha", a}}));
    if (bennett_beta(a) >= std::log(2.0)) {
        out.push_back(make_report(FormulaId::gamma_upper, gamma_upper(k, a), {{"k", kd}, {"alpha", a}}));
    }
    out.push_back(make_report(FormulaId::minimax_ck, ck.c_k, {{"n", nd}, {"k", kd}, {"alpha_star", ck.alpha_star}}));
    return out;
}

inline void write_check_report(std::ostream& out, const BoundCheckReport& report) {
    std::size_t width = std::string_view("pipeline").size();
    for (const auto& e : report.entries) {
        width = std::max(width, e.pipeline.size());
    }
    out << fmt::format("{:<{}}  {:>12} {:>12} {:>12} {:>5}  {:>10} {:>10} {:>10} {:>5}\n", "pipeline", width, "mse",
                       "stderr", "bound", "ok", "hamming", "stderr", "bound", "ok");
    for (const auto& e : report.entries) {
        out << fmt::format("{:<{}}  {:>12.6g} {:>12.3g} {:>12.6f} {:>5}  {:>10.4f} {:>10.4f} {:>10.4f} {:>5}\n",
                           e.pipeline, width, e.mse_mean, e.mse_stderr, e.mse_bound, e.mse_pass ? "PASS" : "FAIL",
                           e.hamming_mean, e.hamming_stderr, e.hamming_bound, e.hamming_pass ? "PASS" : "FAIL");
    }
    out << (report.all_passed() ? "all pipelines comply\n" : "bound violated\n");
}

// ---------------------------------------------------------------------------
// Dispatch.

namespace detail {

inline std::string one_line(std::string message) {
    std::replace(message.begin(), message.end(), '\n', ' ');
    return trim(message);
}

/// Writes to --output when given, otherwise to `out`.
template <typename Writer>
void emit(const std::string& path, std::ostream& out, Writer&& writer) {
    if (path.empty()) {
        writer(out);
        return;
    }
    std::ofstream file(path);
    if (!file) {
        throw ConfigError(fmt::format("--output: cannot write `{}`", path));
    }
    writer(file);
}

struct GridFlags {
    std::size_t points = 40;
    double lo = 0.1;
    double hi = 10.0;
    std::vector<double> factors;

    void attach(CLI::App* app) {
        app->add_option("--mu-points", points, "log-spaced amplitudes per sweep")->check(CLI::PositiveNumber);
        app->add_option("--mu-lo", lo, "lowest amplitude, in units of sqrt(n/m)")->check(CLI::PositiveNumber);
        app->add_option("--mu-hi", hi, "highest amplitude, in units of sqrt(n/m)")->check(CLI::PositiveNumber);
        app->add_option("--mu-factors", factors, "explicit amplitudes in units of sqrt(n/m); overrides the log grid")
            ->delimiter(',');
    }

    MuGridOptions options() const {
        MuGridOptions grid{points, lo, hi, factors};
        std::sort(grid.factors.begin(), grid.factors.end());
        return grid;
    }
};

}  // namespace detail

/// Parses `args` (without the program name) and runs the chosen subcommand.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Adaptive versus nonadaptive sparse sensing experiments", "adaptsense"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "expand every subcommand's help");

    std::string config_path;
    std::string output_path;
    bool full_scale = false;

    // fig1
    Figure1Options f1;
    detail::GridFlags f1_grid;
    auto* fig1 = app.add_subcommand("fig1", "median posterior ratio versus amplitude, CSV");
    fig1->add_option("--n", f1.n, "dimension")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
    fig1->add_option("--sigma", f1.sigma, "noise standard deviation");
    fig1->add_option("--m-list", f1.m_list, "comma-separated budgets")->delimiter(',');
    auto* f1_trials = fig1->add_option("--trials", f1.trials, "trials per point")->check(CLI::PositiveNumber);
    fig1->add_option("--seed", f1.seed, "master seed");
    fig1->add_option("--clip", f1.clip_lambda, "clip for the median ratio")->check(CLI::PositiveNumber);
    fig1->add_flag("--full-scale", full_scale, "10000 trials per point unless --trials is given");
    f1_grid.attach(fig1);

    // fig2
    Figure2Options f2;
    detail::GridFlags f2_grid;
    auto* fig2 = app.add_subcommand("fig2", "per-coordinate MSE versus amplitude, CSV");
    fig2->add_option("--n", f2.n, "dimension");
    fig2->add_option("--m", f2.m, "budget");
    fig2->add_option("--p", f2.detect_fraction, "fraction of the budget spent on detection");
    fig2->add_option("--sigma", f2.sigma, "noise standard deviation");
    auto* f2_trials = fig2->add_option("--trials", f2.trials, "trials per point")->check(CLI::PositiveNumber);
    fig2->add_option("--seed", f2.seed, "master seed");
    fig2->add_flag("--full-scale", full_scale, "100000 trials per point unless --trials is given");
    f2_grid.attach(fig2);

    // bounds
    std::size_t b_n = 0;
    std::size_t b_k = 0;
    std::size_t b_m = 0;
    std::optional<double> b_alpha;
    std::optional<double> b_mu;
    double b_sigma = 1.0;
    std::string b_csv;
    auto* bounds = app.add_subcommand("bounds", "evaluate the lower bounds for one (n, k, m)");
    bounds->add_option("--n", b_n, "dimension")->required();
    bounds->add_option("--k", b_k, "sparsity")->required();
    bounds->add_option("--m", b_m, "budget")->required();
    bounds->add_option("--alpha", b_alpha, "thinning factor; default maximizes alpha (1 - gamma)");
    bounds->add_option("--mu", b_mu, "amplitude for the Hamming bounds; default sqrt(n/m)");
    bounds->add_option("--sigma", b_sigma, "noise standard deviation");
    bounds->add_option("--csv", b_csv, "also write formula_id,params,value,vacuous_flag here");

    // check
    BoundCheckOptions c;
    auto* check = app.add_subcommand("check", "empirical bound compliance of every pipeline");
    check->add_option("--n", c.n, "dimension")->required();
    check->add_option("--k", c.k, "sparsity")->required();
    check->add_option("--m", c.m, "budget")->required();
    check->add_option("--sigma", c.sigma, "noise standard deviation");
    check->add_option("--trials", c.trials, "trials per pipeline and amplitude")->check(CLI::PositiveNumber);
    check->add_option("--seed", c.seed, "master seed");

    // sweep
    std::string s_strategy;
    std::string s_estimator;
    std::string s_prior = "one_sparse";
    std::size_t s_n = 0;
    std::size_t s_m = 0;
    std::size_t s_k = 1;
    double s_alpha = 0.5;
    double s_sigma = 1.0;
    double s_p = 0.5;
    std::size_t s_trials = 1000;
    Seed s_seed = 1;
    std::vector<double> s_mu;
    bool s_lambda = false;
    std::optional<std::size_t> s_omp_k;
    detail::GridFlags s_grid;
    auto* sweep = app.add_subcommand("sweep", "one strategy/estimator pipeline over an amplitude grid, CSV");
    sweep->add_option("--strategy", s_strategy, "nonadaptive | bayesian | bisection")->required();
    sweep->add_option("--estimator", s_estimator, "omp | two_stage | detect_only")->required();
    sweep->add_option("--prior", s_prior, "one_sparse | bernoulli | conditional");
    sweep->add_option("--n", s_n, "dimension")->required();
    sweep->add_option("--m", s_m, "budget")->required();
    sweep->add_option("--k", s_k, "sparsity (Bernoulli priors)");
    sweep->add_option("--alpha", s_alpha, "thinning factor (conditional prior)");
    sweep->add_option("--sigma", s_sigma, "noise standard deviation");
    sweep->add_option("--p", s_p, "detection fraction (two_stage)");
    sweep->add_option("--trials", s_trials, "trials per point")->check(CLI::PositiveNumber);
    sweep->add_option("--seed", s_seed, "master seed");
    sweep->add_option("--mu", s_mu, "explicit amplitudes; overrides the grid flags")->delimiter(',');
    sweep->add_option("--omp-k", s_omp_k, "OMP iterations; default the prior's sparsity");
    sweep->add_flag("--lambda", s_lambda, "record the posterior ratio (one-sparse signals)");
    s_grid.attach(sweep);

    for (auto* sub : {fig1, fig2, bounds, check, sweep}) {
        sub->add_option("--config", config_path, "file of `key = value` defaults");
    }
    for (auto* sub : {fig1, fig2, sweep}) {
        sub->add_option("--output", output_path, "write the CSV here instead of stdout");
    }

    try {
        std::vector<std::string> argv = args;
        const auto cfg = std::find_if(argv.begin(), argv.end(),
                                      [](const std::string& a) { return a == "--config" || a.starts_with("--config="); });
        if (cfg != argv.end()) {
            std::string path;
            if (*cfg == "--config") {
                if (cfg + 1 == argv.end()) {
                    throw ConfigError("--config: missing file name");
                }
                path = *(cfg + 1);
            } else {
                path = cfg->substr(std::string("--config=").size());
            }
            argv = merge_config(argv, read_config_file(path));
        }
        std::reverse(argv.begin(), argv.end());
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "adaptsense: " << detail::one_line(e.what()) << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "adaptsense: " << detail::one_line(e.what()) << '\n';
        return kExitConfigError;
    }

    try {
        if (fig1->parsed()) {
            if (full_scale && f1_trials->count() == 0) {
                f1.trials = kFigure1FullTrials;
            }
            f1.grid = f1_grid.options();
            const auto rows = figure1_experiment(f1);
            detail::emit(output_path, out, [&](std::ostream& o) { write_figure1_csv(o, rows); });
        } else if (fig2->parsed()) {
            if (full_scale && f2_trials->count() == 0) {
                f2.trials = kFigure2FullTrials;
            }
            f2.grid = f2_grid.options();
            const auto result = figure2_experiment(f2);
            detail::emit(output_path, out, [&](std::ostream& o) { write_figure2_csv(o, result); });
        } else if (bounds->parsed()) {
            const auto reports = bound_table(b_n, b_k, b_m, b_alpha, b_mu, b_sigma);
            write_bounds_table(out, reports);
            if (!b_csv.empty()) {
                detail::emit(b_csv, out, [&](std::ostream& o) { write_bounds_csv(o, reports); });
            }
        } else if (check->parsed()) {
            const auto report = bound_check_experiment(c);
            write_check_report(out, report);
            return report.all_passed() ? kExitOk : kExitCheckFailed;
        } else if (sweep->parsed()) {
            ExperimentConfig config;
            config.dims = ProblemDims{s_n, s_m, s_sigma};
            const auto strategy = parse_strategy(s_strategy);
            if (!strategy) {
                throw ConfigError(fmt::format("--strategy: unknown strategy `{}`", s_strategy));
            }
            const auto estimator = parse_estimator(s_estimator);
            if (!estimator) {
                throw ConfigError(fmt::format("--estimator: unknown estimator `{}`", s_estimator));
            }
            config.strategy = *strategy;
            config.estimator = *estimator;
            if (s_prior == "one_sparse") {
                config.prior = OneSparseUniformPrior{1.0};
            } else if (s_prior == "bernoulli") {
                config.prior = BernoulliPrior{s_k, 1.0};
            } else if (s_prior == "conditional") {
                config.prior = ConditionalBernoulliPrior{s_k, s_alpha, 1.0};
            } else {
                throw ConfigError(fmt::format("--prior: unknown prior `{}`", s_prior));
            }
            if (!s_mu.empty()) {
                std::sort(s_mu.begin(), s_mu.end());
                config.mu_grid = s_mu;
            } else {
                config.mu_grid = s_grid.options().build(s_n, s_m);
            }
            config.trials = s_trials;
            config.master_seed = s_seed;
            config.detect_fraction = s_p;
            config.omp_sparsity = s_omp_k;
            config.compute_lambda = s_lambda;
            const auto points = run_sweep(config);
            detail::emit(output_path, out, [&](std::ostream& o) { write_sweep_csv(o, config, points); });
        }
    } catch (const std::invalid_argument& e) {
        err << "adaptsense: " << detail::one_line(e.what()) << '\n';
        return kExitConfigError;
    } catch (const std::domain_error& e) {
        err << "adaptsense: " << detail::one_line(e.what()) << '\n';
        return kExitConfigError;
    }
    return kExitOk;
}

}  // namespace adaptsense::cli
