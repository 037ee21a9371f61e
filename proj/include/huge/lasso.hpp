#pragma once
#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <vector>

#include <huge/types.hpp>

namespace huge {

/// Symmetric inner-product matrix accessed by coordinate.
template <class G>
concept GramMatrix = requires(const G& g, Eigen::Index i) {
    { g.size() } -> std::convertible_to<Eigen::Index>;
    { g(i, i) } -> std::convertible_to<double>;
};

/// Gram matrix backed by a dense matrix.
class DenseGram {
public:
    explicit DenseGram(const Matrix& m) : m_(&m) {}
    Eigen::Index size() const noexcept { return m_->rows(); }
    double operator()(Eigen::Index i, Eigen::Index k) const { return (*m_)(i, k); }

private:
    const Matrix* m_;
};

/// Principal submatrix m[idx, idx] without copying.
class IndexedGram {
public:
    IndexedGram(const Matrix& m, std::span<const std::size_t> idx) : m_(&m), idx_(idx) {}
    Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(idx_.size()); }
    double operator()(Eigen::Index i, Eigen::Index k) const {
        return (*m_)(static_cast<Eigen::Index>(idx_[static_cast<std::size_t>(i)]),
                     static_cast<Eigen::Index>(idx_[static_cast<std::size_t>(k)]));
    }

private:
    const Matrix* m_;
    std::span<const std::size_t> idx_;
};

struct LassoOptions {
    double tol = 1e-4;
    std::size_t max_sweeps = 10000;
};

struct LassoSolution {
    Vector beta;
    std::vector<Eigen::Index> active;
    bool converged = false;
    std::size_t iterations = 0;
};

inline double soft_threshold(double z, double lambda) {
    if (z > lambda) return z - lambda;
    if (z < -lambda) return z + lambda;
    return 0.0;
}

/**
 * Minimizes (1/2) b'Gb - b'c + lambda |b|_1 by cyclic coordinate descent.
 *
 * Runs a full sweep to fix the active set, iterates on the active set until
 * the largest coordinate move drops below tol, then repeats the full sweep;
 * it stops once a full sweep moves no coordinate by tol or more and the
 * KKT violation is at most tol. The gradient c - Gb is kept up to date
 * after every coordinate move (covariance updates), so no sweep ever forms
 * a residual.
 */
template <GramMatrix G>
LassoSolution lasso_cd(const G& gram, const Eigen::Ref<const Vector>& c, double lambda,
                       const LassoOptions& opts = {}, const Eigen::Ref<const Vector>& init = Vector()) {
    const Eigen::Index p = gram.size();
    if (c.size() != p) throw ParameterError("lasso: gradient length does not match Gram dimension");
    if (!(lambda >= 0.0)) throw ParameterError("lasso: penalty must be non-negative");

    LassoSolution sol;
    sol.beta = Vector::Zero(p);
    Vector grad = c;
    if (init.size() == p) {
        for (Eigen::Index k = 0; k < p; ++k) {
            const double b = init(k);
            if (b == 0.0) continue;
            sol.beta(k) = b;
            for (Eigen::Index m = 0; m < p; ++m) grad(m) -= gram(m, k) * b;
        }
    }

    auto update = [&](Eigen::Index k) {
        const double gkk = gram(k, k);
        const double old = sol.beta(k);
        const double next = soft_threshold(grad(k) + gkk * old, lambda) / gkk;
        const double delta = next - old;
        if (delta != 0.0) {
            sol.beta(k) = next;
            for (Eigen::Index m = 0; m < p; ++m) grad(m) -= gram(m, k) * delta;
        }
        return std::abs(delta);
    };

    // KKT violation read off the maintained gradient.
    auto violation = [&] {
        double worst = 0.0;
        for (Eigen::Index k = 0; k < p; ++k) {
            const double b = sol.beta(k);
            worst = std::max(worst, b == 0.0 ? std::abs(grad(k)) - lambda
                                             : std::abs(grad(k) - (b > 0.0 ? lambda : -lambda)));
        }
        return worst;
    };

    std::vector<Eigen::Index> active;
    while (sol.iterations < opts.max_sweeps) {
        double full_move = 0.0;
        for (Eigen::Index k = 0; k < p; ++k) full_move = std::max(full_move, update(k));
        ++sol.iterations;
        if (full_move < opts.tol && violation() <= opts.tol) {
            sol.converged = true;
            break;
        }

        active.clear();
        for (Eigen::Index k = 0; k < p; ++k)
            if (sol.beta(k) != 0.0) active.push_back(k);
        while (sol.iterations < opts.max_sweeps) {
            double move = 0.0;
            for (auto k : active) move = std::max(move, update(k));
            ++sol.iterations;
            if (move < opts.tol) break;
        }
    }

    for (Eigen::Index k = 0; k < p; ++k)
        if (sol.beta(k) != 0.0) sol.active.push_back(k);
    return sol;
}

/**
 * Largest violation of the lasso optimality conditions at beta:
 * |c_j - (Gb)_j| <= lambda where b_j = 0, and c_j - (Gb)_j = lambda sign(b_j) elsewhere.
 * The gradient is recomputed from scratch.
 */
template <GramMatrix G>
double lasso_kkt_residual(const G& gram, const Eigen::Ref<const Vector>& c, const Eigen::Ref<const Vector>& beta,
                          double lambda) {
    const Eigen::Index p = gram.size();
    Vector fitted = Vector::Zero(p);
    for (Eigen::Index k = 0; k < p; ++k) {
        if (beta(k) == 0.0) continue;
        for (Eigen::Index m = 0; m < p; ++m) fitted(m) += gram(m, k) * beta(k);
    }
    double worst = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
        const double r = c(j) - fitted(j);
        const double v = beta(j) == 0.0 ? std::max(0.0, std::abs(r) - lambda)
                                         : std::abs(r - lambda * (beta(j) > 0.0 ? 1.0 : -1.0));
        worst = std::max(worst, v);
    }
    return worst;
}

}  // namespace huge
