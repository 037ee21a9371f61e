#pragma once
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <huge/estimators.hpp>
#include <huge/parallel.hpp>
#include <huge/types.hpp>

namespace huge {

enum class Criterion { stars, ric, ebic };

inline std::string_view to_string(Criterion c) {
    switch (c) {
        case Criterion::stars: return "stars";
        case Criterion::ric: return "ric";
        case Criterion::ebic: return "ebic";
    }
    return "?";
}

inline Criterion parse_criterion(std::string_view s) {
    if (s == "stars") return Criterion::stars;
    if (s == "ric") return Criterion::ric;
    if (s == "ebic") return Criterion::ebic;
    throw ParameterError("unknown selection criterion: " + std::string(s));
}

/**
 * Outcome of a regularization selector.
 *
 * `scores` holds the per-lambda instability (StARS), the per-lambda EBIC
 * values (EBIC) or the per-replication permutation levels (RIC). RIC picks
 * an off-grid lambda; its `lambda_index` is 0 and refers to the one-point
 * refit path.
 */
struct SelectionResult {
    Criterion criterion = Criterion::stars;
    std::size_t lambda_index = 0;
    double lambda = 0.0;
    AdjacencyMatrix graph;
    std::vector<double> scores;
    /// StARS only: running maximum of `scores` along the descending lambdas.
    std::vector<double> monotone_scores;
    /// StARS: even the largest lambda exceeded the instability threshold.
    bool boundary = false;
    /// Precision estimate of the selected model (glasso only).
    std::optional<SparseMatrix> theta;
};

/// log det(theta) - trace(S theta).
inline double gaussian_loglik(const Matrix& theta, const CovarianceSummary& summary) {
    if (theta.rows() != summary.d() || theta.cols() != summary.d())
        throw ParameterError("precision estimate has the wrong shape");
    Eigen::LLT<Matrix> llt(theta);
    if (llt.info() != Eigen::Success) throw NumericError("precision estimate is not positive definite");
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    return log_det - summary.s.cwiseProduct(theta).sum();
}

inline double gaussian_loglik(const SparseMatrix& theta, const CovarianceSummary& summary) {
    return gaussian_loglik(Matrix(theta), summary);
}

// ---------------------------------------------------------------------------
// StARS

struct StarsConfig {
    /// Subsample size; unset selects min(floor(10 sqrt(n)), n - 1).
    std::optional<Eigen::Index> subsample_size;
    std::size_t reps = 20;
    double beta = 0.1;

    Eigen::Index resolved_size(Eigen::Index n) const {
        if (subsample_size) return *subsample_size;
        const auto b = static_cast<Eigen::Index>(std::floor(10.0 * std::sqrt(static_cast<double>(n))));
        return std::min(b, n - 1);
    }

    void validate(Eigen::Index n) const {
        const auto b = resolved_size(n);
        if (b < 1 || b >= n) throw ParameterError("StARS subsample size must lie in [1, n-1]");
        if (reps < 2) throw ParameterError("StARS needs at least 2 subsamples");
        if (!(beta > 0.0 && beta <= 0.5)) throw ParameterError("StARS beta must lie in (0, 0.5]");
    }
};

/// Sum over pairs i < j of 2 xi_ij (1 - xi_ij), divided by d(d-1)/2. `freq` is read above the diagonal.
inline double total_instability(const Matrix& freq) {
    const Eigen::Index d = freq.rows();
    if (d < 2) return 0.0;
    double sum = 0.0;
    for (Eigen::Index j = 1; j < d; ++j)
        for (Eigen::Index i = 0; i < j; ++i) sum += 2.0 * freq(i, j) * (1.0 - freq(i, j));
    return sum / (0.5 * static_cast<double>(d) * static_cast<double>(d - 1));
}

/// Running maximum along the path.
inline std::vector<double> monotonize(const std::vector<double>& v) {
    std::vector<double> out(v.size());
    double run = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < v.size(); ++k) out[k] = run = std::max(run, v[k]);
    return out;
}

/// Largest index whose monotone instability is at most beta; {0, true} if there is none.
inline std::pair<std::size_t, bool> stars_choose(const std::vector<double>& monotone, double beta) {
    std::optional<std::size_t> pick;
    for (std::size_t k = 0; k < monotone.size(); ++k)
        if (monotone[k] <= beta) pick = k;
    if (!pick) return {0, true};
    return {*pick, false};
}

/// Rows `rows` of x (rows kept in the given order).
inline Dataset take_rows(const Dataset& x, const std::vector<Eigen::Index>& rows) {
    Dataset out{Matrix(static_cast<Eigen::Index>(rows.size()), x.d()), x.labels};
    for (std::size_t r = 0; r < rows.size(); ++r) out.values.row(static_cast<Eigen::Index>(r)) = x.values.row(rows[r]);
    return out;
}

/**
 * Stability selection: fits the path on `reps` subsamples drawn without
 * replacement, measures how often each edge appears per lambda, and keeps
 * the least regularized lambda whose (monotonized) instability stays at or
 * below beta. The chosen model is refit on the full data. Subsample r uses
 * its own RNG stream, so the result depends only on `seed`.
 */
inline SelectionResult stars_select(const Dataset& x, const LambdaSequence& lambdas, const EstimateOptions& est,
                                    const StarsConfig& config, std::uint64_t seed) {
    config.validate(x.n());
    const Eigen::Index n = x.n();
    const Eigen::Index b = config.resolved_size(n);
    const auto d = static_cast<std::size_t>(x.d());
    const std::size_t nl = lambdas.size();

    EstimateOptions inner = est;
    inner.workers = 1;
    std::vector<std::vector<AdjacencyMatrix>> graphs(config.reps);
    parallel_for(config.reps, est.workers, [&](std::size_t r) {
        auto rng = make_stream(seed, r);
        std::vector<Eigen::Index> all(static_cast<std::size_t>(n)), rows;
        std::iota(all.begin(), all.end(), Eigen::Index{0});
        std::sample(all.begin(), all.end(), std::back_inserter(rows), b, rng);
        const auto summary = correlation_matrix(take_rows(x, rows));
        graphs[r] = estimate_path(summary, lambdas, inner).base.graphs;
    });

    SelectionResult out;
    out.criterion = Criterion::stars;
    const auto dd = static_cast<Eigen::Index>(d);
    for (std::size_t k = 0; k < nl; ++k) {
        Matrix freq = Matrix::Zero(dd, dd);
        for (const auto& rep : graphs)
            for (const auto& e : rep[k].edges()) freq(static_cast<Eigen::Index>(e.i), static_cast<Eigen::Index>(e.j)) += 1.0;
        freq /= static_cast<double>(config.reps);
        out.scores.push_back(total_instability(freq));
    }
    out.monotone_scores = monotonize(out.scores);
    std::tie(out.lambda_index, out.boundary) = stars_choose(out.monotone_scores, config.beta);
    out.lambda = lambdas[out.lambda_index];

    auto full = estimate_path(correlation_matrix(x), lambdas, est);
    out.graph = full.base.graphs[out.lambda_index];
    if (!full.thetas.empty()) out.theta = full.thetas[out.lambda_index];
    return out;
}

// ---------------------------------------------------------------------------
// RIC

/// Largest off-diagonal |correlation| after shuffling every column independently.
inline double permutation_level(const Dataset& x, Rng& rng) {
    Dataset shuffled = x;
    std::vector<double> col(static_cast<std::size_t>(x.n()));
    for (Eigen::Index j = 0; j < x.d(); ++j) {
        for (Eigen::Index i = 0; i < x.n(); ++i) col[static_cast<std::size_t>(i)] = x.values(i, j);
        std::shuffle(col.begin(), col.end(), rng);
        for (Eigen::Index i = 0; i < x.n(); ++i) shuffled.values(i, j) = col[static_cast<std::size_t>(i)];
    }
    return correlation_matrix(shuffled).max_off_diagonal();
}

/**
 * Permutation calibration: replication r shuffles each column of x with
 * its own RNG stream and records the largest spurious |correlation|; the
 * selected lambda is the mean over replications, refit on the original data.
 */
inline SelectionResult ric_select(const Dataset& x, const EstimateOptions& est, std::size_t reps, std::uint64_t seed) {
    if (reps < 1) throw ParameterError("RIC needs at least one replication");
    SelectionResult out;
    out.criterion = Criterion::ric;
    out.scores.resize(reps);
    parallel_for(reps, est.workers, [&](std::size_t r) {
        auto rng = make_stream(seed, r);
        out.scores[r] = permutation_level(x, rng);
    });
    out.lambda = std::accumulate(out.scores.begin(), out.scores.end(), 0.0) / static_cast<double>(reps);

    auto full = estimate_path(correlation_matrix(x), LambdaSequence({out.lambda}), est);
    out.graph = full.base.graphs.front();
    if (!full.thetas.empty()) out.theta = full.thetas.front();
    return out;
}

// ---------------------------------------------------------------------------
// EBIC

/// -n loglik + |E| log n + 4 gamma |E| log d, with |E| the undirected edge count.
inline double ebic_score(double loglik, std::size_t edges, Eigen::Index n, Eigen::Index d, double gamma) {
    const double e = static_cast<double>(edges);
    return -static_cast<double>(n) * loglik + e * std::log(static_cast<double>(n)) +
           4.0 * gamma * e * std::log(static_cast<double>(d));
}

/// Minimizes EBIC over a glasso path; ties go to the larger lambda.
inline SelectionResult ebic_select(const PrecisionPath& path, const CovarianceSummary& summary, double gamma = 0.5) {
    if (path.base.method != Method::glasso || path.thetas.size() != path.base.size() || path.thetas.empty())
        throw ParameterError("EBIC selection needs a graphical lasso path");
    if (!(gamma >= 0.0)) throw ParameterError("EBIC gamma must be non-negative");

    SelectionResult out;
    out.criterion = Criterion::ebic;
    for (std::size_t k = 0; k < path.size(); ++k) {
        double loglik = 0.0;
        try {
            loglik = gaussian_loglik(path.thetas[k], summary);
        } catch (const NumericError&) {
            throw NumericError("precision estimate at path index " + std::to_string(k) + " is not positive definite");
        }
        out.scores.push_back(ebic_score(loglik, path.base.graphs[k].edge_count(), summary.n, summary.d(), gamma));
        if (out.scores[k] < out.scores[out.lambda_index]) out.lambda_index = k;
    }
    out.lambda = path.base.lambdas[out.lambda_index];
    out.graph = path.base.graphs[out.lambda_index];
    out.theta = path.thetas[out.lambda_index];
    return out;
}

}  // namespace huge
