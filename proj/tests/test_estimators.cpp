#include <gtest/gtest.h>

#include <huge/datagen.hpp>
#include <huge/estimators.hpp>

#include <numeric>
#include <random>

using namespace huge;

namespace {

Dataset gaussian_data(const AdjacencyMatrix& adj, Eigen::Index n, std::uint64_t seed) {
    return sample_dataset(build_covariance_model(adj), n, seed).data;
}

AdjacencyMatrix random_graph(std::size_t d, std::uint64_t seed) {
    GraphStructureSpec spec;
    spec.structure = GraphStructure::random;
    spec.d = d;
    return generate_structure(spec, seed);
}

double correlation_oracle(const Matrix& x, Eigen::Index a, Eigen::Index b) {
    const auto n = static_cast<double>(x.rows());
    double ma = 0, mb = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        ma += x(i, a);
        mb += x(i, b);
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        sab += (x(i, a) - ma) * (x(i, b) - mb);
        saa += (x(i, a) - ma) * (x(i, a) - ma);
        sbb += (x(i, b) - mb) * (x(i, b) - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

CovarianceSummary permuted(const CovarianceSummary& s, const std::vector<std::size_t>& perm) {
    const auto d = s.d();
    Matrix out(d, d);
    for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = 0; b < d; ++b)
            out(a, b) = s.s(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(a)]),
                            static_cast<Eigen::Index>(perm[static_cast<std::size_t>(b)]));
    return {out, s.n};
}

AdjacencyMatrix relabel(const AdjacencyMatrix& g, const std::vector<std::size_t>& perm) {
    std::vector<std::size_t> inverse(perm.size());
    for (std::size_t a = 0; a < perm.size(); ++a) inverse[perm[a]] = a;
    std::vector<Edge> edges;
    for (const auto& e : g.edges()) edges.push_back({inverse[e.i], inverse[e.j]});
    return AdjacencyMatrix(g.dim(), std::move(edges));
}

double max_abs(const SparseMatrix& a, const SparseMatrix& b) {
    return (Matrix(a) - Matrix(b)).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(CorrelationMatrix, OrthogonalColumnsGiveIdentity) {
    Matrix x(4, 2);
    x << 1, 1, -1, 1, 1, -1, -1, -1;
    const auto s = correlation_matrix(Dataset::with_default_labels(x));
    EXPECT_LT((s.s - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(s.n, 4);
}

TEST(CorrelationMatrix, IdenticalColumns) {
    Matrix x(5, 2);
    x.col(0) << 0.3, 1.7, -2, 4, 0.1;
    x.col(1) = x.col(0);
    EXPECT_NEAR(correlation_matrix(Dataset::with_default_labels(x)).s(0, 1), 1.0, 1e-15);
}

TEST(CorrelationMatrix, MatchesDoubleLoopOracle) {
    Matrix x(5, 3);
    x << 1.5, 2.0, -0.3, 2.5, 1.0, 0.8, -0.5, 4.2, 1.1, 3.3, -1.0, 0.0, 0.7, 0.6, 2.9;
    const auto s = correlation_matrix(Dataset::with_default_labels(x));
    for (Eigen::Index a = 0; a < 3; ++a)
        for (Eigen::Index b = 0; b < 3; ++b) EXPECT_NEAR(s.s(a, b), correlation_oracle(x, a, b), 1e-12);
    EXPECT_EQ(s.s, s.s.transpose());
}

TEST(CorrelationMatrix, ConstantColumnIsRejected) {
    Matrix x(4, 2);
    x << 1, 2, 2, 2, 3, 2, 4, 2;
    EXPECT_THROW(correlation_matrix(Dataset::with_default_labels(x)), DegenerateColumnError);
}

TEST(LambdaSequence, SinglePoint) {
    Matrix s = Matrix::Identity(3, 3);
    s(0, 2) = s(2, 0) = -0.6;
    const auto l = lambda_sequence({s, 10}, 1, 0.1);
    EXPECT_EQ(l.values(), std::vector<double>{0.6});
}

TEST(LambdaSequence, LogSpacing) {
    Matrix s = Matrix::Identity(3, 3);
    s(0, 1) = s(1, 0) = 0.8;
    s(1, 2) = s(2, 1) = 0.1;
    const auto l = lambda_sequence({s, 10}, 4, 0.4);
    ASSERT_EQ(l.size(), 4u);
    EXPECT_NEAR(l[0], 0.8, 1e-12);
    EXPECT_NEAR(l[3], 0.32, 1e-12);
    EXPECT_NEAR(l[1], 0.589445, 1e-6);
    EXPECT_NEAR(l[2], 0.434307, 1e-6);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(l[k], 0.8 * std::pow(0.4, double(k) / 3.0), 1e-12);
}

TEST(LambdaSequence, RejectsDiagonalAndBadArguments) {
    EXPECT_THROW(lambda_sequence({Matrix::Identity(3, 3), 10}), NumericError);
    Matrix s = Matrix::Identity(2, 2);
    s(0, 1) = s(1, 0) = 0.5;
    EXPECT_THROW(lambda_sequence({s, 10}, 0, 0.1), ParameterError);
    EXPECT_THROW(lambda_sequence({s, 10}, 5, 1.0), ParameterError);
    EXPECT_THROW(LambdaSequence({0.5, 0.5}), ParameterError);
}

TEST(MbPath, EmptyAtLambdaMaxAndPlanNoOp) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto s = correlation_matrix(gaussian_data(random_graph(25, seed), 60, seed));
        const auto lambdas = lambda_sequence(s);
        const auto full = mb_path(s, lambdas);
        EXPECT_EQ(full.graphs.front().edge_count(), 0u);
        EXPECT_EQ(full.size(), lambdas.size());
        for (double sp : full.sparsity) {
            EXPECT_GE(sp, 0.0);
            EXPECT_LE(sp, 1.0);
        }
        const auto plan = lossy_neighborhoods(s, 24);
        EXPECT_EQ(mb_path(s, lambdas, &plan).graphs, full.graphs);
    }
}

TEST(MbPath, ChainRecovery) {
    const AdjacencyMatrix chain(3, {{0, 1}, {1, 2}});
    const auto s = correlation_matrix(gaussian_data(chain, 5000, 21));
    const LambdaSequence lambdas({s.max_off_diagonal(), 0.1});
    const auto mb = mb_path(s, lambdas);
    EXPECT_EQ(mb.graphs[1], chain);
    const auto gl = glasso_path(s, lambdas);
    EXPECT_EQ(gl.base.graphs[1], chain);
}

TEST(MbPath, AndIsSubsetOfOr) {
    const auto s = correlation_matrix(gaussian_data(random_graph(30, 4), 50, 4));
    const auto lambdas = lambda_sequence(s);
    MbOptions both;
    both.sym = Symmetrization::both;
    const auto a = mb_path(s, lambdas, nullptr, both);
    const auto o = mb_path(s, lambdas);
    for (std::size_t k = 0; k < lambdas.size(); ++k)
        for (const auto& e : a.graphs[k].edges()) EXPECT_TRUE(o.graphs[k].contains(e.i, e.j));
}

TEST(MbPath, KktRecordedWithinTolerance) {
    const auto s = correlation_matrix(gaussian_data(random_graph(40, 8), 30, 8));
    MbOptions opts;
    opts.record_kkt = true;
    const auto path = mb_path(s, lambda_sequence(s, 10, 0.05), nullptr, opts);
    ASSERT_EQ(path.kkt_residual.size(), 10u);
    for (std::size_t k = 0; k < 10; ++k)
        if (path.converged(k)) EXPECT_LE(path.kkt_residual[k], 1e-4);
}

TEST(MbPath, ParallelMatchesSerial) {
    const auto s = correlation_matrix(gaussian_data(random_graph(40, 9), 35, 9));
    const auto lambdas = lambda_sequence(s);
    MbOptions par;
    par.workers = 4;
    EXPECT_EQ(mb_path(s, lambdas, nullptr, par).graphs, mb_path(s, lambdas).graphs);
}

TEST(Estimators, PermutationEquivariance) {
    const auto s = correlation_matrix(gaussian_data(random_graph(20, 12), 40, 12));
    std::vector<std::size_t> perm(20);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(5));
    const auto ps = permuted(s, perm);
    const auto lambdas = lambda_sequence(s, 6, 0.2);
    for (auto method : {Method::mb, Method::glasso, Method::correlation}) {
        EstimateOptions opts;
        opts.method = method;
        const auto a = estimate_path(s, lambdas, opts).base.graphs;
        const auto b = estimate_path(ps, lambdas, opts).base.graphs;
        for (std::size_t k = 0; k < lambdas.size(); ++k)
            EXPECT_EQ(relabel(a[k], perm), b[k]) << to_string(method) << " k=" << k;
    }
}

TEST(CorrelationThreshold, NestedAndTopEdges) {
    Matrix s = Matrix::Identity(4, 4);
    s(0, 1) = s(1, 0) = 0.9;
    s(2, 3) = s(3, 2) = -0.7;
    s(0, 3) = s(3, 0) = 0.4;
    s(1, 2) = s(2, 1) = 0.2;
    const CovarianceSummary cs{s, 10};
    EXPECT_EQ(threshold_graph(cs, 0.95).edge_count(), 0u);
    EXPECT_EQ(threshold_graph(cs, 0.5), AdjacencyMatrix(4, {{0, 1}, {2, 3}}));

    const auto s2 = correlation_matrix(gaussian_data(random_graph(30, 2), 40, 2));
    const auto path = correlation_threshold_path(s2, lambda_sequence(s2, 15, 0.05));
    EXPECT_EQ(path.graphs.front().edge_count(), 0u);
    for (std::size_t k = 1; k < path.size(); ++k)
        for (const auto& e : path.graphs[k - 1].edges()) EXPECT_TRUE(path.graphs[k].contains(e.i, e.j));
}

TEST(CorrelationThreshold, ZeroLambdaComplete) {
    Matrix s = Matrix::Constant(4, 4, 0.1);
    s.diagonal().setOnes();
    EXPECT_EQ(threshold_graph({s, 5}, 0.0).edge_count(), 6u);
}

TEST(Glasso, AboveLambdaMaxIsDiagonal) {
    const auto s = correlation_matrix(gaussian_data(random_graph(15, 3), 40, 3));
    const double lambda = s.max_off_diagonal() * 1.01;
    for (bool lossless : {true, false}) {
        GlassoOptions opts;
        opts.lossless = lossless;
        const Matrix theta(glasso_solve(s, lambda, opts).theta);
        EXPECT_LT((theta - Matrix::Identity(15, 15) / (1.0 + lambda)).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(Glasso, UnpenalizedTwoByTwo) {
    Matrix s(2, 2);
    s << 1, 0.5, 0.5, 1;
    Matrix expected(2, 2);
    expected << 4.0 / 3, -2.0 / 3, -2.0 / 3, 4.0 / 3;
    for (bool lossless : {true, false}) {
        GlassoOptions opts;
        opts.lossless = lossless;
        const Matrix theta(glasso_solve({s, 10}, 0.0, opts).theta);
        EXPECT_LT((theta - expected).cwiseAbs().maxCoeff(), 1e-4);
    }
}

TEST(Glasso, LosslessScreeningIsExact) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto s = correlation_matrix(gaussian_data(random_graph(30, seed), 40, seed));
        const auto lambdas = lambda_sequence(s, 5, 0.2);
        GlassoOptions on, off;
        off.lossless = false;
        const auto a = glasso_path(s, lambdas, on);
        const auto b = glasso_path(s, lambdas, off);
        for (std::size_t k = 0; k < 5; ++k) {
            EXPECT_EQ(a.base.graphs[k], b.base.graphs[k]);
            EXPECT_LE(max_abs(a.thetas[k], b.thetas[k]), 1e-6);
        }
    }
}

TEST(Glasso, PathInvariants) {
    const auto s = correlation_matrix(gaussian_data(random_graph(30, 6), 25, 6));
    const auto lambdas = lambda_sequence(s, 8, 0.1);
    const auto path = glasso_path(s, lambdas);
    EXPECT_EQ(path.base.graphs.front().edge_count(), 0u);
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        const Matrix theta(path.thetas[k]);
        EXPECT_LT((theta - theta.transpose()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_EQ(Eigen::LLT<Matrix>(theta).info(), Eigen::Success);
        EXPECT_EQ(support_graph(path.thetas[k]), path.base.graphs[k]);
        if (path.base.converged(k))
            EXPECT_LE(glasso_kkt_residual(path.thetas[k], s, lambdas[k]), 1e-4 * std::max(1.0, lambdas[k]));
    }
}

TEST(Glasso, WarmAndColdStartsAgree) {
    const auto s = correlation_matrix(gaussian_data(random_graph(25, 10), 30, 10));
    const auto lambdas = lambda_sequence(s, 6, 0.15);
    const auto warm = glasso_path(s, lambdas);
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        const auto cold = glasso_solve(s, lambdas[k]);
        EXPECT_EQ(support_graph(cold.theta), warm.base.graphs[k]);
        EXPECT_LE(max_abs(cold.theta, warm.thetas[k]), 1e-5);
    }
}

TEST(Glasso, LossyPlanRestrictsSupport) {
    const auto s = correlation_matrix(gaussian_data(random_graph(30, 13), 20, 13));
    const auto lambdas = lambda_sequence(s, 6, 0.1);
    const auto plan = lossy_neighborhoods(s, 3);
    const auto nb = plan.symmetric_neighbors();
    const auto path = glasso_path(s, lambdas, {}, &plan);
    for (const auto& g : path.base.graphs)
        for (const auto& e : g.edges())
            EXPECT_TRUE(std::binary_search(nb[e.i].begin(), nb[e.i].end(), e.j));

    const auto full_plan = lossy_neighborhoods(s, 29);
    const auto a = glasso_path(s, lambdas, {}, &full_plan);
    const auto b = glasso_path(s, lambdas);
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        EXPECT_EQ(a.base.graphs[k], b.base.graphs[k]);
        EXPECT_LE(max_abs(a.thetas[k], b.thetas[k]), 1e-6);
    }
}

TEST(GlassoKkt, ExactSolutionsHaveZeroResidual) {
    const auto s = correlation_matrix(gaussian_data(random_graph(10, 1), 100, 1));
    const double lambda = s.max_off_diagonal() + 0.05;
    const Matrix diag = Matrix::Identity(10, 10) / (1.0 + lambda);
    EXPECT_LE(glasso_kkt_residual(diag, s, lambda), 1e-12);
    const Matrix inverse = s.s.inverse();
    EXPECT_LE(glasso_kkt_residual(inverse, s, 0.0), 1e-8);
}

TEST(GlassoKkt, PerturbationIsDetected) {
    const auto s = correlation_matrix(gaussian_data(random_graph(10, 2), 100, 2));
    Matrix theta = s.s.inverse();
    theta(0, 1) += 0.01;
    theta(1, 0) += 0.01;
    EXPECT_GE(glasso_kkt_residual(theta, s, 0.0), 1e-3);

    const double lambda = 0.5 * s.max_off_diagonal();
    GlassoOptions tight;
    tight.tol = 1e-10;
    tight.inner_tol = 1e-10;
    Matrix solved(glasso_solve(s, lambda, tight).theta);
    EXPECT_LE(glasso_kkt_residual(solved, s, lambda), 1e-6);
    solved(2, 3) += 0.01;
    solved(3, 2) += 0.01;
    EXPECT_GE(glasso_kkt_residual(solved, s, lambda), 1e-3);
}

TEST(GlassoKkt, RejectsNonPositiveDefinite) {
    Matrix theta(2, 2);
    theta << 1, 2, 2, 1;
    EXPECT_THROW(glasso_kkt_residual(theta, {Matrix::Identity(2, 2), 5}, 0.1), NumericError);
}

TEST(EstimatePath, RejectsInvalidScreeningCombinations) {
    const auto s = correlation_matrix(gaussian_data(random_graph(10, 1), 30, 1));
    const auto lambdas = lambda_sequence(s, 3);
    EstimateOptions opts;
    opts.screening = Screening::lossless;
    EXPECT_THROW(estimate_path(s, lambdas, opts), ParameterError);
    opts.method = Method::correlation;
    opts.screening = Screening::lossy;
    EXPECT_THROW(estimate_path(s, lambdas, opts), ParameterError);
}
