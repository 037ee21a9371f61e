#pragma once
#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <huge/error.hpp>

namespace huge {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Undirected edge stored with i < j.
struct Edge {
    std::size_t i = 0;
    std::size_t j = 0;

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/**
 * Undirected simple graph on nodes 0..d-1, stored as a canonical edge list
 * (i < j, lexicographically sorted, no duplicates).
 */
class AdjacencyMatrix {
public:
    AdjacencyMatrix() = default;

    explicit AdjacencyMatrix(std::size_t d) : d_(d) {}

    /// Takes edges in any order or orientation; rejects self-loops and out-of-range nodes.
    AdjacencyMatrix(std::size_t d, std::vector<Edge> edges) : d_(d), edges_(std::move(edges)) {
        for (auto& e : edges_) {
            if (e.i == e.j) throw ParameterError("self-loop on node " + std::to_string(e.i));
            if (e.i > e.j) std::swap(e.i, e.j);
            if (e.j >= d_) throw ParameterError("edge endpoint " + std::to_string(e.j) + " out of range");
        }
        std::sort(edges_.begin(), edges_.end());
        edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    }

    std::size_t dim() const noexcept { return d_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    std::size_t edge_count() const noexcept { return edges_.size(); }

    bool contains(std::size_t i, std::size_t j) const {
        if (i > j) std::swap(i, j);
        return std::binary_search(edges_.begin(), edges_.end(), Edge{i, j});
    }

    /// Fraction of the d(d-1)/2 possible edges that are present.
    double density() const noexcept {
        if (d_ < 2) return 0.0;
        return static_cast<double>(edges_.size()) / (0.5 * static_cast<double>(d_) * static_cast<double>(d_ - 1));
    }

    /// Dense 0/1 symmetric matrix.
    Matrix dense() const {
        Matrix a = Matrix::Zero(static_cast<Eigen::Index>(d_), static_cast<Eigen::Index>(d_));
        for (const auto& e : edges_) {
            a(static_cast<Eigen::Index>(e.i), static_cast<Eigen::Index>(e.j)) = 1.0;
            a(static_cast<Eigen::Index>(e.j), static_cast<Eigen::Index>(e.i)) = 1.0;
        }
        return a;
    }

    friend bool operator==(const AdjacencyMatrix&, const AdjacencyMatrix&) = default;

private:
    std::size_t d_ = 0;
    std::vector<Edge> edges_;
};

/// n x d observation matrix (column-major) with one label per column.
struct Dataset {
    Matrix values;
    std::vector<std::string> labels;

    Eigen::Index n() const noexcept { return values.rows(); }
    Eigen::Index d() const noexcept { return values.cols(); }

    static std::vector<std::string> default_labels(std::size_t d) {
        std::vector<std::string> out;
        out.reserve(d);
        for (std::size_t j = 0; j < d; ++j) out.push_back("V" + std::to_string(j + 1));
        return out;
    }

    static Dataset with_default_labels(Matrix values) {
        auto labels = default_labels(static_cast<std::size_t>(values.cols()));
        return Dataset{std::move(values), std::move(labels)};
    }

    std::string label(Eigen::Index j) const {
        return j < static_cast<Eigen::Index>(labels.size()) ? labels[static_cast<std::size_t>(j)]
                                                            : "V" + std::to_string(j + 1);
    }

    /// Throws InputError when a value is NaN or infinite.
    void require_finite() const {
        for (Eigen::Index j = 0; j < d(); ++j)
            for (Eigen::Index i = 0; i < n(); ++i)
                if (!std::isfinite(values(i, j)))
                    throw InputError("non-finite value at row " + std::to_string(i + 1) + ", column " + label(j));
    }
};

/// Sample correlation matrix with its sample size.
struct CovarianceSummary {
    Matrix s;
    Eigen::Index n = 0;

    Eigen::Index d() const noexcept { return s.rows(); }

    /// Largest off-diagonal |S_ij|; the smallest penalty giving an empty graph.
    double max_off_diagonal() const {
        double m = 0.0;
        for (Eigen::Index j = 0; j < d(); ++j)
            for (Eigen::Index i = 0; i < j; ++i) m = std::max(m, std::abs(s(i, j)));
        return m;
    }
};

/// Strictly decreasing sequence of positive penalty levels.
class LambdaSequence {
public:
    LambdaSequence() = default;

    explicit LambdaSequence(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty()) throw ParameterError("lambda sequence is empty");
        for (std::size_t k = 0; k < values_.size(); ++k) {
            if (!(values_[k] > 0.0) || !std::isfinite(values_[k]))
                throw ParameterError("lambda values must be positive and finite");
            if (k > 0 && !(values_[k] < values_[k - 1]))
                throw ParameterError("lambda sequence must be strictly decreasing");
        }
    }

    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t k) const { return values_[k]; }
    auto begin() const noexcept { return values_.begin(); }
    auto end() const noexcept { return values_.end(); }

    friend bool operator==(const LambdaSequence&, const LambdaSequence&) = default;

private:
    std::vector<double> values_;
};

enum class Method { mb, glasso, correlation };

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::mb: return "mb";
        case Method::glasso: return "glasso";
        case Method::correlation: return "correlation";
    }
    return "?";
}

inline Method parse_method(std::string_view s) {
    if (s == "mb") return Method::mb;
    if (s == "glasso") return Method::glasso;
    if (s == "correlation" || s == "ct") return Method::correlation;
    throw ParameterError("unknown estimation method: " + std::string(s));
}

/// One estimated graph per lambda, plus per-lambda solver diagnostics.
struct GraphPath {
    LambdaSequence lambdas;
    std::vector<AdjacencyMatrix> graphs;
    std::vector<double> sparsity;
    Method method = Method::mb;
    /// Number of sub-problems (nodes for MB, blocks for glasso) that hit an iteration cap, per lambda.
    std::vector<std::size_t> nonconverged;
    /// Largest KKT residual over sub-problems, per lambda; empty unless requested.
    std::vector<double> kkt_residual;

    std::size_t size() const noexcept { return graphs.size(); }

    bool converged(std::size_t k) const { return nonconverged.empty() || nonconverged[k] == 0; }

    void push(AdjacencyMatrix g, std::size_t failures) {
        sparsity.push_back(g.density());
        graphs.push_back(std::move(g));
        nonconverged.push_back(failures);
    }
};

/// Graphical-lasso path: graphs plus the sparse symmetric precision estimates.
struct PrecisionPath {
    GraphPath base;
    std::vector<SparseMatrix> thetas;

    std::size_t size() const noexcept { return thetas.size(); }
};

/// Sparse symmetric matrix from a dense one, dropping exact zeros.
inline SparseMatrix to_sparse(const Matrix& dense) {
    return dense.sparseView(0.0, 0.0);
}

/// Graph given by the off-diagonal support of a symmetric matrix.
inline AdjacencyMatrix support_graph(const SparseMatrix& m) {
    std::vector<Edge> edges;
    for (Eigen::Index col = 0; col < m.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(m, col); it; ++it)
            if (it.row() < col && it.value() != 0.0)
                edges.push_back({static_cast<std::size_t>(it.row()), static_cast<std::size_t>(col)});
    return AdjacencyMatrix(static_cast<std::size_t>(m.rows()), std::move(edges));
}

}  // namespace huge
