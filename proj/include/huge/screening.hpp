#pragma once
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <huge/types.hpp>

namespace huge {

/// Disjoint node blocks covering 0..d-1; each block sorted, blocks ordered by smallest member.
struct BlockPartition {
    std::vector<std::vector<std::size_t>> blocks;
    double lambda = 0.0;

    /// block_of[j] = index of the block containing node j.
    std::vector<std::size_t> membership(std::size_t d) const {
        std::vector<std::size_t> out(d);
        for (std::size_t b = 0; b < blocks.size(); ++b)
            for (auto j : blocks[b]) out[j] = b;
        return out;
    }
};

/// Candidate neighbors per node; each list sorted ascending.
struct NeighborhoodPlan {
    std::vector<std::vector<std::size_t>> candidates;
    std::size_t k = 0;

    std::size_t dim() const noexcept { return candidates.size(); }

    /// Symmetrized union of the candidate lists, as a per-node sorted neighbor list.
    std::vector<std::vector<std::size_t>> symmetric_neighbors() const {
        std::vector<std::vector<std::size_t>> out(candidates.size());
        for (std::size_t j = 0; j < candidates.size(); ++j)
            for (auto i : candidates[j]) {
                out[j].push_back(i);
                out[i].push_back(j);
            }
        for (auto& v : out) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        }
        return out;
    }
};

namespace detail {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<unsigned> rank_;
};

}  // namespace detail

/// Connected components of the graph with edge (i, j) iff |S_ij| > lambda.
inline BlockPartition lossless_partition(const CovarianceSummary& summary, double lambda) {
    if (!(lambda >= 0.0)) throw ParameterError("screening threshold must be non-negative");
    const auto d = static_cast<std::size_t>(summary.d());
    detail::DisjointSets sets(d);
    for (Eigen::Index j = 0; j < summary.d(); ++j)
        for (Eigen::Index i = 0; i < j; ++i)
            if (std::abs(summary.s(i, j)) > lambda) sets.unite(static_cast<std::size_t>(i), static_cast<std::size_t>(j));

    BlockPartition out;
    out.lambda = lambda;
    std::vector<std::size_t> block_of_root(d, d);
    for (std::size_t j = 0; j < d; ++j) {
        const auto root = sets.find(j);
        if (block_of_root[root] == d) {
            block_of_root[root] = out.blocks.size();
            out.blocks.emplace_back();
        }
        out.blocks[block_of_root[root]].push_back(j);
    }
    return out;
}

/// Top-k neighbors of every node by |S_ij|, ties going to the smaller index.
inline NeighborhoodPlan lossy_neighborhoods(const CovarianceSummary& summary, std::size_t k) {
    const auto d = static_cast<std::size_t>(summary.d());
    if (k < 1 || k + 1 > d) throw ParameterError("neighborhood size k must lie in [1, d-1]");

    NeighborhoodPlan plan;
    plan.k = k;
    plan.candidates.resize(d);
    std::vector<std::size_t> order;
    for (std::size_t j = 0; j < d; ++j) {
        order.clear();
        for (std::size_t i = 0; i < d; ++i)
            if (i != j) order.push_back(i);
        const auto col = summary.s.col(static_cast<Eigen::Index>(j));
        auto stronger = [&](std::size_t a, std::size_t b) {
            const double ma = std::abs(col(static_cast<Eigen::Index>(a)));
            const double mb = std::abs(col(static_cast<Eigen::Index>(b)));
            return ma > mb || (ma == mb && a < b);
        };
        std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1), order.end(), stronger);
        plan.candidates[j].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
        std::sort(plan.candidates[j].begin(), plan.candidates[j].end());
    }
    return plan;
}

/// Default lossy neighborhood size min(n-1, d-1).
inline std::size_t default_screening_size(const CovarianceSummary& summary) {
    return static_cast<std::size_t>(std::min(summary.n - 1, summary.d() - 1));
}

}  // namespace huge
