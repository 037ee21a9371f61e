#pragma once
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <huge/parallel.hpp>
#include <huge/types.hpp>

namespace huge {

enum class GraphStructure { hub, cluster, band, scale_free, random };

inline std::string_view to_string(GraphStructure s) {
    switch (s) {
        case GraphStructure::hub: return "hub";
        case GraphStructure::cluster: return "cluster";
        case GraphStructure::band: return "band";
        case GraphStructure::scale_free: return "scale-free";
        case GraphStructure::random: return "random";
    }
    return "?";
}

inline GraphStructure parse_structure(std::string_view s) {
    if (s == "hub") return GraphStructure::hub;
    if (s == "cluster") return GraphStructure::cluster;
    if (s == "band") return GraphStructure::band;
    if (s == "scale-free" || s == "scale_free") return GraphStructure::scale_free;
    if (s == "random") return GraphStructure::random;
    throw ParameterError("unknown graph structure: " + std::string(s));
}

/// Unset optional fields take their size-dependent defaults (see the accessors).
struct GraphStructureSpec {
    GraphStructure structure = GraphStructure::random;
    std::size_t d = 0;
    std::optional<std::size_t> groups;
    std::size_t bandwidth = 1;
    std::optional<double> edge_prob;
    double intra_prob = 0.3;

    std::size_t group_count() const { return groups.value_or((d + 19) / 20); }
    double edge_probability() const {
        return edge_prob.value_or(d == 0 ? 1.0 : std::min(1.0, 3.0 / static_cast<double>(d)));
    }

    void validate() const {
        if (d < 2) throw ParameterError("graph dimension must be at least 2");
        const auto g = group_count();
        if (g < 1 || g > d) throw ParameterError("group count must lie in [1, d]");
        if (structure == GraphStructure::band && (bandwidth < 1 || bandwidth > d - 1))
            throw ParameterError("bandwidth must lie in [1, d-1]");
        auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
        if (!prob_ok(edge_probability())) throw ParameterError("edge probability must lie in [0, 1]");
        if (!prob_ok(intra_prob)) throw ParameterError("intra-group probability must lie in [0, 1]");
    }
};

/// Boundaries of g contiguous groups over 0..d-1: group k is [bounds[k], bounds[k+1]).
inline std::vector<std::size_t> group_bounds(std::size_t d, std::size_t g) {
    std::vector<std::size_t> bounds(g + 1);
    for (std::size_t k = 0; k <= g; ++k) bounds[k] = k * d / g;
    return bounds;
}

inline AdjacencyMatrix generate_structure(const GraphStructureSpec& spec, std::uint64_t seed) {
    spec.validate();
    const std::size_t d = spec.d;
    Rng rng(seed);
    std::vector<Edge> edges;

    switch (spec.structure) {
        case GraphStructure::band:
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = i + 1; j < d && j - i <= spec.bandwidth; ++j) edges.push_back({i, j});
            break;
        case GraphStructure::hub: {
            auto bounds = group_bounds(d, spec.group_count());
            for (std::size_t k = 0; k + 1 < bounds.size(); ++k)
                for (std::size_t j = bounds[k] + 1; j < bounds[k + 1]; ++j) edges.push_back({bounds[k], j});
            break;
        }
        case GraphStructure::cluster: {
            auto bounds = group_bounds(d, spec.group_count());
            std::bernoulli_distribution coin(spec.intra_prob);
            for (std::size_t k = 0; k + 1 < bounds.size(); ++k)
                for (std::size_t i = bounds[k]; i < bounds[k + 1]; ++i)
                    for (std::size_t j = i + 1; j < bounds[k + 1]; ++j)
                        if (coin(rng)) edges.push_back({i, j});
            break;
        }
        case GraphStructure::random: {
            std::bernoulli_distribution coin(spec.edge_probability());
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = i + 1; j < d; ++j)
                    if (coin(rng)) edges.push_back({i, j});
            break;
        }
        case GraphStructure::scale_free: {
            // Preferential attachment: sampling a uniform entry of the endpoint
            // list picks a node with probability proportional to its degree.
            std::vector<std::size_t> endpoints{0, 1};
            edges.push_back({0, 1});
            for (std::size_t node = 2; node < d; ++node) {
                std::uniform_int_distribution<std::size_t> pick(0, endpoints.size() - 1);
                std::size_t target = endpoints[pick(rng)];
                edges.push_back({target, node});
                endpoints.push_back(target);
                endpoints.push_back(node);
            }
            break;
        }
    }
    return AdjacencyMatrix(d, std::move(edges));
}

/**
 * Gaussian model with a prescribed conditional-independence graph.
 * `sigma` has unit diagonal and `omega` is its exact inverse; `omega_unscaled`
 * is the precision matrix before the correlation rescale.
 */
struct CovarianceModel {
    Matrix omega;
    Matrix sigma;
    Matrix omega_unscaled;
    AdjacencyMatrix truth;

    Eigen::Index dim() const noexcept { return sigma.rows(); }
};

/// Off-diagonal magnitude v on every edge, then a diagonal shift making the smallest eigenvalue 0.1 + u.
inline CovarianceModel build_covariance_model(const AdjacencyMatrix& adj, double v = 0.3, double u = 0.1) {
    if (!(v > 0.0)) throw ParameterError("off-diagonal magnitude v must be positive");
    if (!(u >= 0.0)) throw ParameterError("diagonal boost u must be non-negative");
    const auto d = static_cast<Eigen::Index>(adj.dim());
    if (d < 1) throw ParameterError("empty graph dimension");

    Matrix omega = v * adj.dense() + Matrix::Identity(d, d);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(omega, Eigen::EigenvaluesOnly);
    const double shift = std::max(0.0, -eig.eigenvalues().minCoeff()) + 0.1 + u;
    omega.diagonal().array() += shift;

    Eigen::LLT<Matrix> llt(omega);
    if (llt.info() != Eigen::Success) throw NumericError("precision matrix is not positive definite");
    Matrix cov = llt.solve(Matrix::Identity(d, d));
    cov = 0.5 * (cov + cov.transpose());

    const Vector scale = cov.diagonal().array().sqrt();
    const Vector inv_scale = scale.cwiseInverse();
    CovarianceModel model;
    model.sigma = inv_scale.asDiagonal() * cov * inv_scale.asDiagonal();
    model.sigma.diagonal().setOnes();
    model.omega = scale.asDiagonal() * omega * scale.asDiagonal();
    model.omega_unscaled = std::move(omega);
    model.truth = adj;
    return model;
}

struct SyntheticDataset {
    Dataset data;
    CovarianceModel model;
    std::uint64_t seed = 0;
};

/// Rows drawn i.i.d. from N(0, sigma) as L z with sigma = L L^T.
inline SyntheticDataset sample_dataset(const CovarianceModel& model, Eigen::Index n, std::uint64_t seed) {
    if (n < 1) throw ParameterError("sample count must be at least 1");
    const Eigen::Index d = model.dim();
    Eigen::LLT<Matrix> llt(model.sigma);
    if (llt.info() != Eigen::Success) throw NumericError("covariance matrix failed Cholesky factorization");

    Rng rng(seed);
    std::normal_distribution<double> normal;
    Matrix z(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) z(i, j) = normal(rng);

    SyntheticDataset out;
    out.data = Dataset::with_default_labels(z * llt.matrixL().transpose());
    out.model = model;
    out.seed = seed;
    return out;
}

}  // namespace huge
