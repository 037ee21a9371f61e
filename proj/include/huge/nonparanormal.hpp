#pragma once
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include <huge/types.hpp>

namespace huge {

/// Truncation level 1 / (4 n^{1/4} sqrt(pi log n)) for the empirical CDF.
inline double npn_truncation_level(Eigen::Index n) {
    const double nn = static_cast<double>(n);
    return 1.0 / (4.0 * std::pow(nn, 0.25) * std::sqrt(std::numbers::pi * std::log(nn)));
}

/// Ranks 1..n of `col`, ties sharing their average rank.
inline std::vector<double> average_ranks(const Eigen::Ref<const Vector>& col) {
    const auto n = static_cast<std::size_t>(col.size());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return col(static_cast<Eigen::Index>(a)) < col(static_cast<Eigen::Index>(b));
    });
    std::vector<double> ranks(n);
    for (std::size_t start = 0; start < n;) {
        std::size_t stop = start + 1;
        while (stop < n && col(static_cast<Eigen::Index>(order[stop])) == col(static_cast<Eigen::Index>(order[start])))
            ++stop;
        const double avg = 0.5 * static_cast<double>(start + 1 + stop);
        for (std::size_t k = start; k < stop; ++k) ranks[order[k]] = avg;
        start = stop;
    }
    return ranks;
}

/**
 * Nonparanormal (truncated empirical CDF) transform. Each column is mapped
 * through its empirical CDF, clamped to [delta, 1 - delta], pushed through
 * the standard normal quantile and rescaled to unit sample standard
 * deviation. The result depends on the data only through within-column ranks.
 */
inline Dataset npn_truncation(const Dataset& x) {
    const Eigen::Index n = x.n();
    if (n < 2) throw InputError("nonparanormal transform needs at least 2 rows");
    x.require_finite();

    const double delta = npn_truncation_level(n);
    const boost::math::normal_distribution<double> standard;
    Dataset out{Matrix(n, x.d()), x.labels};

    for (Eigen::Index j = 0; j < x.d(); ++j) {
        const auto ranks = average_ranks(x.values.col(j));
        auto dst = out.values.col(j);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double cdf = std::clamp(ranks[static_cast<std::size_t>(i)] / static_cast<double>(n), delta, 1.0 - delta);
            dst(i) = boost::math::quantile(standard, cdf);
        }
        const double mean = dst.mean();
        const double sd = std::sqrt((dst.array() - mean).square().sum() / static_cast<double>(n - 1));
        if (!(sd > 0.0)) throw DegenerateColumnError(x.label(j));
        dst /= sd;
    }
    return out;
}

}  // namespace huge
