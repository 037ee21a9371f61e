#pragma once
#include <algorithm>
#include <cmath>
#include <optional>
#include <string_view>
#include <vector>

#include <huge/lasso.hpp>
#include <huge/parallel.hpp>
#include <huge/screening.hpp>
#include <huge/types.hpp>

namespace huge {

/// Pearson correlation of the columns (centered, scaled by the divisor-n standard deviation).
inline CovarianceSummary correlation_matrix(const Dataset& x) {
    const Eigen::Index n = x.n();
    if (n < 2) throw InputError("correlation needs at least 2 rows");
    x.require_finite();

    Matrix z = x.values.rowwise() - x.values.colwise().mean();
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        const double sd = std::sqrt(z.col(j).squaredNorm() / static_cast<double>(n));
        if (!(sd > 0.0)) throw DegenerateColumnError(x.label(j));
        z.col(j) /= sd;
    }
    CovarianceSummary out;
    out.n = n;
    out.s = Matrix(z.cols(), z.cols());
    out.s.setZero();
    out.s.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose(), 1.0 / static_cast<double>(n));
    out.s.triangularView<Eigen::StrictlyUpper>() = out.s.transpose();
    out.s = out.s.cwiseMax(-1.0).cwiseMin(1.0);
    out.s.diagonal().setOnes();
    return out;
}

/// nlambda values log-spaced from max |S_ij| down to ratio * max |S_ij|.
inline LambdaSequence lambda_sequence(const CovarianceSummary& summary, std::size_t nlambda = 10, double ratio = 0.1) {
    if (nlambda < 1) throw ParameterError("nlambda must be at least 1");
    if (!(ratio > 0.0 && ratio < 1.0)) throw ParameterError("lambda-min-ratio must lie in (0, 1)");
    const double lambda_max = summary.max_off_diagonal();
    if (!(lambda_max > 0.0)) throw NumericError("degenerate path: all off-diagonal correlations are zero");
    std::vector<double> values(nlambda);
    for (std::size_t k = 0; k < nlambda; ++k)
        values[k] = nlambda == 1 ? lambda_max
                                 : lambda_max * std::pow(ratio, static_cast<double>(k) / static_cast<double>(nlambda - 1));
    return LambdaSequence(std::move(values));
}

// ---------------------------------------------------------------------------
// Neighborhood selection (node-wise lasso)

enum class Symmetrization { either, both };

inline Symmetrization parse_symmetrization(std::string_view s) {
    if (s == "or") return Symmetrization::either;
    if (s == "and") return Symmetrization::both;
    throw ParameterError("symmetrization must be 'or' or 'and'");
}

struct MbOptions {
    Symmetrization sym = Symmetrization::either;
    LassoOptions lasso{};
    std::size_t workers = 1;
    bool record_kkt = false;
};

namespace detail {

inline AdjacencyMatrix merge_neighborhoods(std::size_t d, const std::vector<std::vector<std::size_t>>& support,
                                           Symmetrization sym) {
    std::vector<Edge> pairs;
    for (std::size_t j = 0; j < d; ++j)
        for (auto i : support[j]) pairs.push_back({std::min(i, j), std::max(i, j)});
    std::sort(pairs.begin(), pairs.end());
    if (sym == Symmetrization::both) {
        std::vector<Edge> kept;
        for (std::size_t a = 0; a + 1 < pairs.size(); ++a)
            if (pairs[a] == pairs[a + 1]) kept.push_back(pairs[a++]);
        pairs = std::move(kept);
    }
    return AdjacencyMatrix(d, std::move(pairs));
}

}  // namespace detail

/**
 * Node-wise lasso path. Node j is regressed on its candidate set (every
 * other node when no plan is given) with warm starts along the descending
 * lambdas; the graph keeps (i, j) when either regression selects the other
 * node (`both`: when both do).
 */
inline GraphPath mb_path(const CovarianceSummary& summary, const LambdaSequence& lambdas,
                         const NeighborhoodPlan* plan = nullptr, const MbOptions& opts = {}) {
    const auto d = static_cast<std::size_t>(summary.d());
    if (plan && plan->dim() != d) throw ParameterError("neighborhood plan dimension does not match the data");
    const std::size_t nl = lambdas.size();

    // support[k][j]: selected neighbors of node j at lambda k.
    std::vector<std::vector<std::vector<std::size_t>>> support(nl, std::vector<std::vector<std::size_t>>(d));
    std::vector<std::vector<char>> failed(nl, std::vector<char>(d, 0));
    std::vector<std::vector<double>> kkt(opts.record_kkt ? nl : 0, std::vector<double>(d, 0.0));

    parallel_for(d, opts.workers, [&](std::size_t j) {
        std::vector<std::size_t> idx;
        if (plan) {
            idx = plan->candidates[j];
        } else {
            idx.reserve(d - 1);
            for (std::size_t i = 0; i < d; ++i)
                if (i != j) idx.push_back(i);
        }
        const IndexedGram gram(summary.s, idx);
        Vector c(static_cast<Eigen::Index>(idx.size()));
        for (std::size_t a = 0; a < idx.size(); ++a)
            c(static_cast<Eigen::Index>(a)) = summary.s(static_cast<Eigen::Index>(idx[a]), static_cast<Eigen::Index>(j));

        Vector warm;
        for (std::size_t k = 0; k < nl; ++k) {
            auto sol = lasso_cd(gram, c, lambdas[k], opts.lasso, warm);
            for (auto a : sol.active) support[k][j].push_back(idx[static_cast<std::size_t>(a)]);
            failed[k][j] = sol.converged ? 0 : 1;
            if (opts.record_kkt) kkt[k][j] = lasso_kkt_residual(gram, c, sol.beta, lambdas[k]);
            warm = std::move(sol.beta);
        }
    });

    GraphPath path;
    path.lambdas = lambdas;
    path.method = Method::mb;
    for (std::size_t k = 0; k < nl; ++k) {
        const auto failures = static_cast<std::size_t>(std::count(failed[k].begin(), failed[k].end(), 1));
        path.push(detail::merge_neighborhoods(d, support[k], opts.sym), failures);
        if (opts.record_kkt) path.kkt_residual.push_back(*std::max_element(kkt[k].begin(), kkt[k].end()));
    }
    return path;
}

// ---------------------------------------------------------------------------
// Correlation thresholding

/// Edge (i, j) at lambda iff |S_ij| > lambda.
inline AdjacencyMatrix threshold_graph(const CovarianceSummary& summary, double lambda) {
    std::vector<Edge> edges;
    for (Eigen::Index j = 0; j < summary.d(); ++j)
        for (Eigen::Index i = 0; i < j; ++i)
            if (std::abs(summary.s(i, j)) > lambda) edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j)});
    return AdjacencyMatrix(static_cast<std::size_t>(summary.d()), std::move(edges));
}

inline GraphPath correlation_threshold_path(const CovarianceSummary& summary, const LambdaSequence& lambdas) {
    GraphPath path;
    path.lambdas = lambdas;
    path.method = Method::correlation;
    for (double lambda : lambdas) path.push(threshold_graph(summary, lambda), 0);
    return path;
}

// ---------------------------------------------------------------------------
// Graphical lasso

struct GlassoOptions {
    /// Outer stop: mean |change| of W's off-diagonals below tol * mean |S_ij| (i != j).
    /// At 1e-4 the estimates are only good to about 1e-5, too loose for block-wise
    /// and joint solves to agree to 1e-6.
    double tol = 1e-7;
    /// Coordinate-move tolerance of the column lasso sub-problems.
    double inner_tol = 1e-7;
    std::size_t max_outer = 100;
    std::size_t max_sweeps = 10000;
    bool lossless = true;
    std::size_t workers = 1;
};

struct GlassoFit {
    SparseMatrix theta;
    /// Column regression coefficients (column j regresses node j on the others); warm start for the next lambda.
    Matrix coefficients;
    std::size_t blocks = 0;
    std::size_t nonconverged_blocks = 0;
};

namespace detail {

struct BlockFit {
    Matrix theta;
    Matrix coefficients;
    bool converged = true;
};

// Block coordinate descent over the columns of W = inverse(Theta) for one
// connected block. `allowed[j]` lists the local nodes column j may use
// (empty optional = all others).
inline BlockFit glasso_block(const Matrix& s, double lambda, const Matrix& warm,
                             const std::vector<std::vector<std::size_t>>* allowed, const GlassoOptions& opts) {
    const Eigen::Index m = s.rows();
    BlockFit fit;
    fit.coefficients = warm.size() == m * m ? warm : Matrix::Zero(m, m);

    Matrix w = s;
    w.diagonal().array() += lambda;

    double mean_abs_s = 0.0;
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i < m; ++i)
            if (i != j) mean_abs_s += std::abs(s(i, j));
    mean_abs_s /= static_cast<double>(m * (m - 1));
    if (!(mean_abs_s > 0.0)) mean_abs_s = 1.0;

    std::vector<std::vector<std::size_t>> others(static_cast<std::size_t>(m));
    for (Eigen::Index j = 0; j < m; ++j) {
        if (allowed) {
            others[static_cast<std::size_t>(j)] = (*allowed)[static_cast<std::size_t>(j)];
        } else {
            for (Eigen::Index i = 0; i < m; ++i)
                if (i != j) others[static_cast<std::size_t>(j)].push_back(static_cast<std::size_t>(i));
        }
    }

    const LassoOptions lasso_opts{opts.inner_tol, opts.max_sweeps};
    Vector c, init, w12(m);
    fit.converged = false;
    for (std::size_t iter = 0; iter < opts.max_outer; ++iter) {
        double change = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto& idx = others[static_cast<std::size_t>(j)];
            const auto p = static_cast<Eigen::Index>(idx.size());
            c.resize(p);
            init.resize(p);
            for (Eigen::Index a = 0; a < p; ++a) {
                const auto i = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(a)]);
                c(a) = s(i, j);
                init(a) = fit.coefficients(i, j);
            }
            const auto sol = lasso_cd(IndexedGram(w, idx), c, lambda, lasso_opts, init);

            fit.coefficients.col(j).setZero();
            w12.setZero();
            for (auto a : sol.active) {
                const auto col = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(a)]);
                fit.coefficients(col, j) = sol.beta(a);
                w12 += w.col(col) * sol.beta(a);
            }
            for (Eigen::Index i = 0; i < m; ++i) {
                if (i == j) continue;
                change += std::abs(w12(i) - w(i, j));
                w(i, j) = w12(i);
                w(j, i) = w12(i);
            }
        }
        change /= static_cast<double>(m * (m - 1));
        if (change < opts.tol * mean_abs_s) {
            fit.converged = true;
            break;
        }
    }

    fit.theta = Matrix::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        double fitted = 0.0;
        for (Eigen::Index i = 0; i < m; ++i)
            if (i != j) fitted += w(i, j) * fit.coefficients(i, j);
        const double diag = 1.0 / (w(j, j) - fitted);
        fit.theta(j, j) = diag;
        for (Eigen::Index i = 0; i < m; ++i)
            if (i != j && fit.coefficients(i, j) != 0.0) fit.theta(i, j) = -fit.coefficients(i, j) * diag;
    }
    fit.theta = 0.5 * (fit.theta + fit.theta.transpose()).eval();
    return fit;
}

}  // namespace detail

/**
 * Graphical lasso at a single penalty (lambda >= 0; the diagonal is
 * penalized too). With `opts.lossless` the nodes are first split into the
 * connected components of the |S_ij| > lambda graph and each component is
 * solved on its own; isolated nodes get Theta_jj = 1 / (S_jj + lambda).
 * With a plan, Theta_ij is held at zero outside the symmetrized candidate
 * sets.
 */
inline GlassoFit glasso_solve(const CovarianceSummary& summary, double lambda, const GlassoOptions& opts = {},
                              const NeighborhoodPlan* plan = nullptr, const Matrix* warm = nullptr) {
    if (!(lambda >= 0.0)) throw ParameterError("glasso penalty must be non-negative");
    const auto d = static_cast<std::size_t>(summary.d());
    if (plan && plan->dim() != d) throw ParameterError("neighborhood plan dimension does not match the data");

    BlockPartition partition;
    if (opts.lossless) {
        partition = lossless_partition(summary, lambda);
    } else {
        partition.blocks.emplace_back(d);
        for (std::size_t j = 0; j < d; ++j) partition.blocks[0][j] = j;
    }
    const auto neighbors = plan ? plan->symmetric_neighbors() : std::vector<std::vector<std::size_t>>{};

    const std::size_t nb = partition.blocks.size();
    std::vector<detail::BlockFit> fits(nb);
    parallel_for(nb, opts.workers, [&](std::size_t b) {
        const auto& block = partition.blocks[b];
        const auto m = static_cast<Eigen::Index>(block.size());
        auto& fit = fits[b];
        if (m == 1) {
            const auto j = static_cast<Eigen::Index>(block[0]);
            fit.theta = Matrix::Constant(1, 1, 1.0 / (summary.s(j, j) + lambda));
            fit.coefficients = Matrix::Zero(1, 1);
            return;
        }
        Matrix s(m, m), start;
        if (warm) start.resize(m, m);
        for (Eigen::Index a = 0; a < m; ++a)
            for (Eigen::Index c = 0; c < m; ++c) {
                const auto i = static_cast<Eigen::Index>(block[static_cast<std::size_t>(a)]);
                const auto k = static_cast<Eigen::Index>(block[static_cast<std::size_t>(c)]);
                s(a, c) = summary.s(i, k);
                if (warm) start(a, c) = (*warm)(i, k);
            }

        std::vector<std::vector<std::size_t>> allowed;
        if (plan) {
            // Map global neighbor ids into block-local positions.
            std::vector<std::ptrdiff_t> local(d, -1);
            for (std::size_t a = 0; a < block.size(); ++a) local[block[a]] = static_cast<std::ptrdiff_t>(a);
            allowed.resize(block.size());
            for (std::size_t a = 0; a < block.size(); ++a)
                for (auto g : neighbors[block[a]])
                    if (local[g] >= 0) allowed[a].push_back(static_cast<std::size_t>(local[g]));
        }
        fit = detail::glasso_block(s, lambda, start, plan ? &allowed : nullptr, opts);
    });

    GlassoFit out;
    out.blocks = nb;
    out.coefficients = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t b = 0; b < nb; ++b) {
        const auto& block = partition.blocks[b];
        const auto& fit = fits[b];
        if (!fit.converged) ++out.nonconverged_blocks;
        for (std::size_t a = 0; a < block.size(); ++a)
            for (std::size_t c = 0; c < block.size(); ++c) {
                const auto ai = static_cast<Eigen::Index>(a);
                const auto ci = static_cast<Eigen::Index>(c);
                const auto gi = static_cast<Eigen::Index>(block[a]);
                const auto gc = static_cast<Eigen::Index>(block[c]);
                if (fit.theta(ai, ci) != 0.0) triplets.emplace_back(gi, gc, fit.theta(ai, ci));
                out.coefficients(gi, gc) = fit.coefficients(ai, ci);
            }
    }
    out.theta.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    out.theta.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

/// Warm-started glasso along the path; graphs are the off-diagonal supports of the estimates.
inline PrecisionPath glasso_path(const CovarianceSummary& summary, const LambdaSequence& lambdas,
                                 const GlassoOptions& opts = {}, const NeighborhoodPlan* plan = nullptr) {
    PrecisionPath out;
    out.base.lambdas = lambdas;
    out.base.method = Method::glasso;
    Matrix warm;
    for (double lambda : lambdas) {
        auto fit = glasso_solve(summary, lambda, opts, plan, warm.size() ? &warm : nullptr);
        out.base.push(support_graph(fit.theta), fit.nonconverged_blocks);
        out.thetas.push_back(std::move(fit.theta));
        warm = std::move(fit.coefficients);
    }
    return out;
}

/**
 * Largest violation of the glasso optimality conditions over off-diagonal
 * entries, with W = inverse(theta): |W_ij - S_ij| <= lambda where
 * theta_ij = 0, and W_ij - S_ij = lambda sign(theta_ij) elsewhere.
 */
inline double glasso_kkt_residual(const Matrix& theta, const CovarianceSummary& summary, double lambda) {
    const Eigen::Index d = theta.rows();
    if (theta.cols() != d || d != summary.d()) throw ParameterError("precision estimate has the wrong shape");
    Eigen::LLT<Matrix> llt(theta);
    if (llt.info() != Eigen::Success) throw NumericError("precision estimate is not positive definite");
    const Matrix w = llt.solve(Matrix::Identity(d, d));
    double worst = 0.0;
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i) {
            if (i == j) continue;
            const double r = w(i, j) - summary.s(i, j);
            const double t = theta(i, j);
            const double v = t == 0.0 ? std::max(0.0, std::abs(r) - lambda) : std::abs(r - lambda * (t > 0.0 ? 1.0 : -1.0));
            worst = std::max(worst, v);
        }
    return worst;
}

inline double glasso_kkt_residual(const SparseMatrix& theta, const CovarianceSummary& summary, double lambda) {
    return glasso_kkt_residual(Matrix(theta), summary, lambda);
}

// ---------------------------------------------------------------------------
// Dispatch used by model selection and the pipeline

enum class Screening { none, lossless, lossy };

inline std::string_view to_string(Screening s) {
    switch (s) {
        case Screening::none: return "none";
        case Screening::lossless: return "lossless";
        case Screening::lossy: return "lossy";
    }
    return "?";
}

inline Screening parse_screening(std::string_view s) {
    if (s == "none") return Screening::none;
    if (s == "lossless") return Screening::lossless;
    if (s == "lossy") return Screening::lossy;
    throw ParameterError("unknown screening rule: " + std::string(s));
}

struct EstimateOptions {
    Method method = Method::mb;
    Screening screening = Screening::none;
    /// Lossy neighborhood size; 0 selects min(n-1, d-1).
    std::size_t k = 0;
    Symmetrization sym = Symmetrization::either;
    /// Lasso tolerance for MB.
    double tol = 1e-4;
    double glasso_tol = GlassoOptions{}.tol;
    std::size_t workers = 1;
};

/// Path from the configured estimator; `thetas` is filled for glasso only.
inline PrecisionPath estimate_path(const CovarianceSummary& summary, const LambdaSequence& lambdas,
                                   const EstimateOptions& opts) {
    if (opts.screening == Screening::lossless && opts.method != Method::glasso)
        throw ParameterError("lossless screening applies to glasso only");
    if (opts.screening == Screening::lossy && opts.method == Method::correlation)
        throw ParameterError("lossy screening does not apply to correlation thresholding");
    std::optional<NeighborhoodPlan> plan;
    if (opts.screening == Screening::lossy)
        plan = lossy_neighborhoods(summary, opts.k ? opts.k : default_screening_size(summary));

    PrecisionPath out;
    switch (opts.method) {
        case Method::mb: {
            MbOptions mb;
            mb.sym = opts.sym;
            mb.lasso.tol = opts.tol;
            mb.workers = opts.workers;
            out.base = mb_path(summary, lambdas, plan ? &*plan : nullptr, mb);
            break;
        }
        case Method::glasso: {
            GlassoOptions gl;
            gl.tol = opts.glasso_tol;
            gl.lossless = opts.screening == Screening::lossless;
            gl.workers = opts.workers;
            out = glasso_path(summary, lambdas, gl, plan ? &*plan : nullptr);
            break;
        }
        case Method::correlation:
            out.base = correlation_threshold_path(summary, lambdas);
            break;
    }
    return out;
}

}  // namespace huge
