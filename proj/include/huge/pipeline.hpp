#pragma once
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include <huge/datagen.hpp>
#include <huge/estimators.hpp>
#include <huge/io.hpp>
#include <huge/nonparanormal.hpp>
#include <huge/selection.hpp>

namespace huge {

enum class Transform { none, npn_truncation };

inline std::string_view to_string(Transform t) { return t == Transform::none ? "none" : "npn-truncation"; }

inline Transform parse_transform(std::string_view s) {
    if (s == "none") return Transform::none;
    if (s == "npn-truncation" || s == "npn" || s == "truncation") return Transform::npn_truncation;
    throw ParameterError("unknown transform: " + std::string(s));
}

/// Simulated input for the pipeline.
struct GeneratorInput {
    GraphStructureSpec spec;
    Eigen::Index n = 100;
    double v = 0.3;
    double u = 0.1;
};

struct PipelineConfig {
    std::optional<std::filesystem::path> input;
    bool has_header = true;
    std::optional<GeneratorInput> generator;
    Transform transform = Transform::none;
    EstimateOptions estimate{};
    std::size_t nlambda = 10;
    double lambda_min_ratio = 0.1;
    std::optional<Criterion> selector;
    StarsConfig stars{};
    std::size_t ric_reps = 20;
    double ebic_gamma = 0.5;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "huge-out";

    /// Rejects inconsistent combinations before any work is done.
    void validate() const {
        if (input.has_value() == generator.has_value())
            throw ConfigError("exactly one of an input file and a generator spec must be given");
        const auto method = estimate.method;
        if (estimate.screening == Screening::lossless && method != Method::glasso)
            throw ConfigError("lossless screening is only valid with glasso");
        if (estimate.screening == Screening::lossy && method == Method::correlation)
            throw ConfigError("lossy screening is not valid with correlation thresholding");
        if (selector == Criterion::ebic && method != Method::glasso)
            throw ConfigError("ebic selection is only valid with glasso");
        if (nlambda < 1) throw ConfigError("nlambda must be at least 1");
        if (!(lambda_min_ratio > 0.0 && lambda_min_ratio < 1.0))
            throw ConfigError("lambda-min-ratio must lie in (0, 1)");
        if (selector == Criterion::stars && (stars.reps < 2 || !(stars.beta > 0.0 && stars.beta <= 0.5)))
            throw ConfigError("StARS needs reps >= 2 and beta in (0, 0.5]");
        if (selector == Criterion::ric && ric_reps < 1) throw ConfigError("RIC needs at least one replication");
        if (!(ebic_gamma >= 0.0)) throw ConfigError("ebic gamma must be non-negative");
        if (generator) {
            try {
                generator->spec.validate();
            } catch (const ParameterError& e) {
                throw ConfigError(e.what());
            }
            if (generator->n < 2) throw ConfigError("generator sample count must be at least 2");
        }
    }
};

struct SelectionSummary {
    std::string criterion;
    double lambda = 0.0;
    std::size_t lambda_index = 0;
    std::size_t edges = 0;
    bool boundary = false;
    std::vector<double> scores;

    friend bool operator==(const SelectionSummary&, const SelectionSummary&) = default;
};

/// Machine-readable record of a pipeline run (summary.json).
struct PipelineSummary {
    std::string method;
    std::string screening;
    std::string transform;
    std::int64_t n = 0;
    std::int64_t d = 0;
    std::uint64_t seed = 0;
    std::vector<double> lambdas;
    std::vector<double> sparsity;
    std::vector<std::size_t> edges;
    std::vector<std::size_t> nonconverged;
    std::optional<SelectionSummary> selection;
    /// Wall-clock seconds per stage; the only non-deterministic field.
    std::map<std::string, double> timings;

    friend bool operator==(const PipelineSummary&, const PipelineSummary&) = default;
};

inline void to_json(nlohmann::json& j, const SelectionSummary& s) {
    j = {{"criterion", s.criterion}, {"lambda", s.lambda}, {"lambda_index", s.lambda_index},
         {"edges", s.edges},         {"boundary", s.boundary}, {"scores", s.scores}};
}

inline void from_json(const nlohmann::json& j, SelectionSummary& s) {
    j.at("criterion").get_to(s.criterion);
    j.at("lambda").get_to(s.lambda);
    j.at("lambda_index").get_to(s.lambda_index);
    j.at("edges").get_to(s.edges);
    j.at("boundary").get_to(s.boundary);
    j.at("scores").get_to(s.scores);
}

inline void to_json(nlohmann::json& j, const PipelineSummary& s) {
    j = {{"method", s.method},   {"screening", s.screening}, {"transform", s.transform},
         {"n", s.n},             {"d", s.d},                 {"seed", s.seed},
         {"lambdas", s.lambdas}, {"sparsity", s.sparsity},   {"edges", s.edges},
         {"nonconverged", s.nonconverged}};
    j["selection"] = s.selection ? nlohmann::json(*s.selection) : nlohmann::json(nullptr);
    j["timings"] = s.timings;
}

inline void from_json(const nlohmann::json& j, PipelineSummary& s) {
    j.at("method").get_to(s.method);
    j.at("screening").get_to(s.screening);
    j.at("transform").get_to(s.transform);
    j.at("n").get_to(s.n);
    j.at("d").get_to(s.d);
    j.at("seed").get_to(s.seed);
    j.at("lambdas").get_to(s.lambdas);
    j.at("sparsity").get_to(s.sparsity);
    j.at("edges").get_to(s.edges);
    j.at("nonconverged").get_to(s.nonconverged);
    if (j.contains("selection") && !j["selection"].is_null())
        s.selection = j["selection"].get<SelectionSummary>();
    else
        s.selection.reset();
    if (j.contains("timings")) j["timings"].get_to(s.timings);
}

inline std::string format_summary(const PipelineSummary& s) { return nlohmann::json(s).dump(2) + "\n"; }

inline PipelineSummary parse_summary(std::string_view text) {
    try {
        return nlohmann::json::parse(text).get<PipelineSummary>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed summary: ") + e.what());
    }
}

inline PipelineSummary read_summary(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_summary(buf.str());
}

/// "path_007.edges" style file name for path index k.
inline std::string path_file_name(std::size_t k, std::string_view ext = ".edges") {
    char buf[32];
    std::snprintf(buf, sizeof buf, "path_%03zu", k);
    return std::string(buf) + std::string(ext);
}

namespace detail {

/// Runs one pipeline stage, prefixing any library error with the stage name (error type preserved).
template <class Fn>
auto run_stage(std::string_view stage, std::map<std::string, double>& timings, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    auto prefix = [&](const std::exception& e) { return std::string(stage) + " stage failed: " + e.what(); };
    auto finish = [&] {
        timings[std::string(stage)] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    try {
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            finish();
        } else {
            auto result = fn();
            finish();
            return result;
        }
    } catch (const ConfigError& e) {
        throw ConfigError(prefix(e));
    } catch (const InputError& e) {
        throw InputError(prefix(e));
    } catch (const NumericError& e) {
        throw NumericError(prefix(e));
    } catch (const ParameterError& e) {
        throw ParameterError(prefix(e));
    }
}

}  // namespace detail

/**
 * Read or simulate -> transform -> estimate (with screening) -> select ->
 * export. Writes into `config.output_dir`:
 *   path_NNN.edges   one edge list per lambda
 *   summary.json     PipelineSummary
 *   truth.edges      the generating graph (simulated input only)
 *   selected.edges, selected.dot   the chosen graph (when a selector is set)
 */
inline PipelineSummary run_pipeline(const PipelineConfig& config) {
    config.validate();
    namespace fs = std::filesystem;
    PipelineSummary summary;
    auto& timings = summary.timings;
    summary.seed = config.seed;

    std::optional<AdjacencyMatrix> truth;
    Dataset data = detail::run_stage("input", timings, [&] {
        if (config.input) return read_dataset_csv(*config.input, config.has_header);
        const auto& g = *config.generator;
        const auto adj = generate_structure(g.spec, stream_seed(config.seed, 0));
        auto sim = sample_dataset(build_covariance_model(adj, g.v, g.u), g.n, stream_seed(config.seed, 1));
        truth = adj;
        return std::move(sim.data);
    });
    if (data.n() < 2 || data.d() < 2) throw InputError("input stage failed: need at least 2 rows and 2 columns");
    summary.n = data.n();
    summary.d = data.d();

    if (config.transform == Transform::npn_truncation)
        data = detail::run_stage("transform", timings, [&] { return npn_truncation(data); });
    summary.transform = std::string(to_string(config.transform));

    const auto cov = detail::run_stage("correlation", timings, [&] { return correlation_matrix(data); });
    const auto lambdas =
        detail::run_stage("lambda", timings, [&] { return lambda_sequence(cov, config.nlambda, config.lambda_min_ratio); });
    const auto path = detail::run_stage("estimate", timings, [&] { return estimate_path(cov, lambdas, config.estimate); });

    summary.method = std::string(to_string(config.estimate.method));
    summary.screening = std::string(to_string(config.estimate.screening));
    summary.lambdas = lambdas.values();
    summary.sparsity = path.base.sparsity;
    summary.nonconverged = path.base.nonconverged;
    for (const auto& g : path.base.graphs) summary.edges.push_back(g.edge_count());

    std::optional<SelectionResult> chosen;
    if (config.selector) {
        chosen = detail::run_stage("select", timings, [&] {
            switch (*config.selector) {
                case Criterion::stars: return stars_select(data, lambdas, config.estimate, config.stars, config.seed);
                case Criterion::ric: return ric_select(data, config.estimate, config.ric_reps, config.seed);
                case Criterion::ebic: return ebic_select(path, cov, config.ebic_gamma);
            }
            throw ConfigError("unknown selector");
        });
        SelectionSummary sel;
        sel.criterion = std::string(to_string(chosen->criterion));
        sel.lambda = chosen->lambda;
        sel.lambda_index = chosen->lambda_index;
        sel.edges = chosen->graph.edge_count();
        sel.boundary = chosen->boundary;
        sel.scores = chosen->scores;
        summary.selection = sel;
    }

    detail::run_stage("export", timings, [&] {
        fs::create_directories(config.output_dir);
        for (std::size_t k = 0; k < path.base.size(); ++k)
            write_graph_edgelist(path.base.graphs[k], data.labels, config.output_dir / path_file_name(k));
        if (truth) write_graph_edgelist(*truth, data.labels, config.output_dir / "truth.edges");
        if (chosen) {
            write_graph_edgelist(chosen->graph, data.labels, config.output_dir / "selected.edges");
            write_text(config.output_dir / "selected.dot", export_dot(chosen->graph, data.labels));
        }
    });
    write_text(config.output_dir / "summary.json", format_summary(summary));
    return summary;
}

}  // namespace huge
