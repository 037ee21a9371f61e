#pragma once
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <new>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <huge/estimators.hpp>
#include <huge/io.hpp>
#include <huge/parallel.hpp>

namespace huge {

struct BenchmarkScenario {
    Eigen::Index d = 0;
    Eigen::Index n = 0;
    Method method = Method::mb;
    Screening screening = Screening::none;

    /// Row label such as "huge-MB (lossy)".
    std::string label() const {
        std::string name = method == Method::mb ? "huge-MB" : method == Method::glasso ? "huge-glasso" : "huge-ct";
        if (screening != Screening::none) name += " (" + std::string(to_string(screening)) + ")";
        return name;
    }
};

/// Parses "d:n:method[:screening]", e.g. "2000:150:mb:lossy".
inline BenchmarkScenario parse_scenario(std::string_view text) {
    auto cells = std::vector<std::string_view>{};
    for (;;) {
        const auto pos = text.find(':');
        cells.push_back(text.substr(0, pos));
        if (pos == std::string_view::npos) break;
        text.remove_prefix(pos + 1);
    }
    if (cells.size() < 3 || cells.size() > 4) throw ParameterError("scenario must look like d:n:method[:screening]");
    BenchmarkScenario s;
    std::size_t d = 0, n = 0;
    if (!detail::parse_number(cells[0], d) || !detail::parse_number(cells[1], n) || d < 2 || n < 2)
        throw ParameterError("scenario dimensions must be integers >= 2");
    s.d = static_cast<Eigen::Index>(d);
    s.n = static_cast<Eigen::Index>(n);
    s.method = parse_method(cells[2]);
    if (cells.size() == 4) s.screening = parse_screening(cells[3]);
    return s;
}

struct BenchmarkOptions {
    std::size_t reps = 3;
    std::size_t nlambda = 10;
    /// Edge density the smallest lambda aims for.
    double target_sparsity = 0.03;
    /// Overrides the tuned range when set.
    std::optional<double> lambda_min_ratio;
    std::size_t workers = 1;
};

struct BenchmarkRow {
    BenchmarkScenario scenario;
    double mean_seconds = 0.0;
    double sd_seconds = 0.0;
    double sparsity_max = 0.0;
    double lambda_max = 0.0;
    double lambda_min = 0.0;
    std::size_t nonconverged = 0;
    std::string status = "ok";
};

/**
 * Smallest lambda of the benchmark range: the (1 - target) quantile of the
 * off-diagonal |S_ij|, i.e. the level at which correlation thresholding
 * keeps a `target` fraction of all pairs.
 */
inline double tuned_lambda_min(const CovarianceSummary& summary, double target) {
    std::vector<double> mags;
    mags.reserve(static_cast<std::size_t>(summary.d() * (summary.d() - 1) / 2));
    for (Eigen::Index j = 0; j < summary.d(); ++j)
        for (Eigen::Index i = 0; i < j; ++i) mags.push_back(std::abs(summary.s(i, j)));
    const auto keep = static_cast<std::size_t>(std::floor(target * static_cast<double>(mags.size())));
    const auto pos = mags.size() - 1 - std::min(keep, mags.size() - 1);
    std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(pos), mags.end());
    return mags[pos];
}

/// The 10-point (by default) benchmark path for one covariance summary.
inline LambdaSequence benchmark_lambdas(const CovarianceSummary& summary, const BenchmarkOptions& opts) {
    const double lambda_max = summary.max_off_diagonal();
    double ratio = opts.lambda_min_ratio.value_or(tuned_lambda_min(summary, opts.target_sparsity) / lambda_max);
    ratio = std::clamp(ratio, 1e-6, 1.0 - 1e-6);
    return lambda_sequence(summary, opts.nlambda, ratio);
}

/// N(0, I_d) data with n rows.
inline Dataset standard_normal_data(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> normal;
    Matrix z(n, d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < n; ++i) z(i, j) = normal(rng);
    return Dataset::with_default_labels(std::move(z));
}

/**
 * Times each scenario over `reps` runs of the full path (screening
 * included, correlation matrix excluded). A failing scenario is reported
 * in its row's status and the remaining rows still run.
 */
inline std::vector<BenchmarkRow> benchmark(const std::vector<BenchmarkScenario>& scenarios,
                                           const BenchmarkOptions& opts, std::uint64_t seed) {
    std::vector<BenchmarkRow> rows;
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
        BenchmarkRow row;
        row.scenario = scenarios[s];
        try {
            const auto& sc = scenarios[s];
            const auto summary = correlation_matrix(standard_normal_data(sc.n, sc.d, stream_seed(seed, s)));
            const auto lambdas = benchmark_lambdas(summary, opts);
            row.lambda_max = lambdas[0];
            row.lambda_min = lambdas[lambdas.size() - 1];

            EstimateOptions est;
            est.method = sc.method;
            est.screening = sc.screening;
            est.workers = opts.workers;
            std::vector<double> seconds;
            for (std::size_t r = 0; r < std::max<std::size_t>(1, opts.reps); ++r) {
                const auto start = std::chrono::steady_clock::now();
                const auto path = estimate_path(summary, lambdas, est);
                seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
                row.sparsity_max = *std::max_element(path.base.sparsity.begin(), path.base.sparsity.end());
                row.nonconverged = 0;
                for (auto f : path.base.nonconverged) row.nonconverged += f;
            }
            double mean = 0.0;
            for (double t : seconds) mean += t;
            mean /= static_cast<double>(seconds.size());
            double var = 0.0;
            for (double t : seconds) var += (t - mean) * (t - mean);
            row.mean_seconds = mean;
            row.sd_seconds = seconds.size() > 1 ? std::sqrt(var / static_cast<double>(seconds.size() - 1)) : 0.0;
        } catch (const std::bad_alloc&) {
            row.status = "out-of-memory";
        } catch (const std::exception& e) {
            row.status = std::string("error: ") + e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Time of the unscreened run of the same (d, n, method) divided by this row's time; empty if unavailable.
inline std::optional<double> speedup_vs_unscreened(const std::vector<BenchmarkRow>& rows, std::size_t index) {
    const auto& row = rows[index];
    if (row.status != "ok" || row.scenario.screening == Screening::none || !(row.mean_seconds > 0.0)) return {};
    for (const auto& other : rows)
        if (other.status == "ok" && other.scenario.screening == Screening::none &&
            other.scenario.method == row.scenario.method && other.scenario.d == row.scenario.d &&
            other.scenario.n == row.scenario.n)
            return other.mean_seconds / row.mean_seconds;
    return {};
}

inline std::string format_benchmark_csv(const std::vector<BenchmarkRow>& rows) {
    std::string out = "method,d,n,mean_seconds,sd_seconds,cell,sparsity_max,lambda_max,lambda_min,nonconverged,"
                      "speedup_vs_unscreened,status\n";
    char buf[64];
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        std::snprintf(buf, sizeof buf, "%.4g(%.3g)", row.mean_seconds, row.sd_seconds);
        const auto speedup = speedup_vs_unscreened(rows, r);
        std::string status = row.status;
        std::replace(status.begin(), status.end(), ',', ';');
        out += row.scenario.label() + "," + std::to_string(row.scenario.d) + "," + std::to_string(row.scenario.n) +
               "," + detail::format_double(row.mean_seconds) + "," + detail::format_double(row.sd_seconds) + "," +
               buf + "," + detail::format_double(row.sparsity_max) + "," + detail::format_double(row.lambda_max) +
               "," + detail::format_double(row.lambda_min) + "," + std::to_string(row.nonconverged) + "," +
               (speedup ? detail::format_double(*speedup) : std::string()) + "," + status + "\n";
    }
    return out;
}

}  // namespace huge
