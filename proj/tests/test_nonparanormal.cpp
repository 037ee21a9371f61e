#include <gtest/gtest.h>

#include <huge/datagen.hpp>
#include <huge/estimators.hpp>
#include <huge/nonparanormal.hpp>

#include <numbers>
#include <random>

using namespace huge;

namespace {

// Standard normal quantile by bisection on the complementary error function.
double normal_quantile_oracle(double p) {
    long double lo = -40.0L, hi = 40.0L;
    for (int it = 0; it < 200; ++it) {
        const long double mid = 0.5L * (lo + hi);
        const long double cdf = 0.5L * std::erfc(-mid / std::sqrt(2.0L));
        (cdf < p ? lo : hi) = mid;
    }
    return static_cast<double>(0.5L * (lo + hi));
}

double sample_sd(const Vector& v) {
    const double mean = v.mean();
    return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
}

Dataset normal_table(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Matrix m(n, d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < n; ++i) m(i, j) = normal(rng);
    return Dataset::with_default_labels(std::move(m));
}

}  // namespace

TEST(NpnTruncation, TruncationLevelForFiveRows) {
    EXPECT_NEAR(npn_truncation_level(5), 0.0743507677613431, 1e-12);
}

TEST(NpnTruncation, OneToFiveColumn) {
    Matrix x(5, 2);
    x.col(0) << 1, 2, 3, 4, 5;
    x.col(1) << 5, 3, 1, 2, 4;
    const auto out = npn_truncation(Dataset::with_default_labels(x));

    const double delta = npn_truncation_level(5);
    const std::vector<double> cdf = {0.2, 0.4, 0.6, 0.8, 1.0 - delta};
    Vector q(5);
    for (int i = 0; i < 5; ++i) q[i] = normal_quantile_oracle(cdf[static_cast<std::size_t>(i)]);
    EXPECT_NEAR(q[0], -0.8416212335729143, 1e-12);
    EXPECT_NEAR(q[1], -0.2533471031357997, 1e-12);
    EXPECT_NEAR(q[4], 1.4441331119158357, 1e-12);

    const Vector expected = q / sample_sd(q);
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(out.values(i, 0), expected[i], 1e-10);
    EXPECT_NEAR(out.values(0, 1), expected[4], 1e-10);
    EXPECT_NEAR(out.values(2, 1), expected[0], 1e-10);
    EXPECT_EQ(out.labels, (std::vector<std::string>{"V1", "V2"}));
}

TEST(NpnTruncation, InvariantUnderMonotoneMaps) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto x = normal_table(60, 4, seed);
        Dataset fx = x;
        fx.values.col(0) = x.values.col(0).array().exp();
        fx.values.col(1) = x.values.col(1).array().cube() + x.values.col(1).array();
        fx.values.col(2) = 3.0 * x.values.col(2).array() - 7.0;
        fx.values.col(3) = (x.values.col(3).array() / 2.0).tanh();
        EXPECT_EQ(npn_truncation(x).values, npn_truncation(fx).values);
    }
}

TEST(NpnTruncation, Idempotent) {
    const auto once = npn_truncation(normal_table(80, 3, 4));
    const auto twice = npn_truncation(once);
    EXPECT_LT((once.values - twice.values).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(NpnTruncation, UnitSdAndTheoreticalMean) {
    const auto x = normal_table(123, 5, 9);
    const auto out = npn_truncation(x);
    const Eigen::Index n = x.n();
    const double delta = npn_truncation_level(n);
    Vector q(n);
    for (Eigen::Index i = 0; i < n; ++i)
        q[i] = normal_quantile_oracle(std::clamp(double(i + 1) / double(n), delta, 1.0 - delta));
    const double mean = q.mean() / sample_sd(q);
    for (Eigen::Index j = 0; j < out.d(); ++j) {
        EXPECT_NEAR(sample_sd(out.values.col(j)), 1.0, 1e-8);
        EXPECT_NEAR(out.values.col(j).mean(), mean, 1e-8);
    }
}

TEST(NpnTruncation, PreservesOrderingAndTies) {
    Matrix x(6, 2);
    x.col(0) << 3, 1, 3, 2, 5, 3;
    x.col(1) << 0.5, -1, 2, 8, 8, 1;
    const auto out = npn_truncation(Dataset::with_default_labels(x));
    for (Eigen::Index j = 0; j < 2; ++j)
        for (Eigen::Index a = 0; a < 6; ++a)
            for (Eigen::Index b = 0; b < 6; ++b) {
                if (x(a, j) < x(b, j)) EXPECT_LT(out.values(a, j), out.values(b, j));
                if (x(a, j) == x(b, j)) EXPECT_EQ(out.values(a, j), out.values(b, j));
            }
}

TEST(NpnTruncation, AverageRanks) {
    Vector v(5);
    v << 10, 20, 10, 5, 10;
    EXPECT_EQ(average_ranks(v), (std::vector<double>{3, 5, 3, 1, 3}));
}

TEST(NpnTruncation, RejectsDegenerateInput) {
    Matrix x(4, 3);
    x << 1, 2, 7, 2, 2, 1, 3, 2, 4, 4, 2, 0;
    try {
        npn_truncation(Dataset{x, {"a", "flat", "c"}});
        FAIL() << "expected a degenerate-column error";
    } catch (const DegenerateColumnError& e) {
        EXPECT_NE(std::string(e.what()).find("flat"), std::string::npos);
    }
    x(0, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(npn_truncation(Dataset::with_default_labels(x)), InputError);
    EXPECT_THROW(npn_truncation(Dataset::with_default_labels(Matrix::Ones(1, 3))), InputError);
}

TEST(NpnTruncation, DownstreamMbPathInvariant) {
    const auto model = build_covariance_model(AdjacencyMatrix(6, {{0, 1}, {1, 2}, {3, 4}}));
    const auto x = sample_dataset(model, 150, 77).data;
    Dataset fx = x;
    fx.values = x.values.array().exp();
    const auto sa = correlation_matrix(npn_truncation(x));
    const auto sb = correlation_matrix(npn_truncation(fx));
    const auto lambdas = lambda_sequence(sa, 10, 0.1);
    EXPECT_EQ(mb_path(sa, lambdas).graphs, mb_path(sb, lambdas).graphs);
}
