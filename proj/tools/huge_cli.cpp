// Command-line front end: generate, npn, estimate, select, export-dot, benchmark, pipeline.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <huge/huge.hpp>

namespace fs = std::filesystem;
using namespace huge;

namespace {

enum ExitCode : int { ok = 0, failure = 1, input_error = 2, config_error = 3, numeric_error = 4 };

struct DataArgs {
    std::string input;
    bool no_header = false;

    void add(CLI::App* cmd) {
        cmd->add_option("--input", input, "CSV dataset (rows = observations)")->required();
        cmd->add_flag("--no-header", no_header, "first row holds data, not labels");
    }
    Dataset read() const { return read_dataset_csv(input, !no_header); }
};

struct PathArgs {
    std::string method = "mb";
    std::string screening = "auto";
    std::size_t k = 0;
    std::string sym = "or";
    std::size_t nlambda = 10;
    double ratio = 0.1;
    double tol = 1e-4;
    std::size_t workers = 0;

    void add(CLI::App* cmd) {
        cmd->add_option("--method", method, "mb | glasso | correlation")->capture_default_str();
        cmd->add_option("--screening", screening, "auto | none | lossless | lossy (auto: lossless for glasso)")->capture_default_str();
        cmd->add_option("--k", k, "lossy neighborhood size (0 = min(n-1, d-1))")->capture_default_str();
        cmd->add_option("--sym", sym, "MB symmetrization: or | and")->capture_default_str();
        cmd->add_option("--nlambda", nlambda, "path length")->capture_default_str();
        cmd->add_option("--lambda-min-ratio", ratio, "smallest lambda as a fraction of lambda_max")->capture_default_str();
        cmd->add_option("--tol", tol, "MB lasso convergence tolerance")->capture_default_str();
        cmd->add_option("--workers", workers, "worker threads (0 = all processors)")->capture_default_str();
    }

    EstimateOptions options() const {
        EstimateOptions est;
        est.method = parse_method(method);
        if (screening == "auto")
            est.screening = est.method == Method::glasso ? Screening::lossless : Screening::none;
        else
            est.screening = parse_screening(screening);
        est.k = k;
        est.sym = parse_symmetrization(sym);
        est.tol = tol;
        est.workers = workers;
        return est;
    }
};

struct SelectArgs {
    std::string selector = "stars";
    std::optional<Eigen::Index> stars_subsample;
    std::size_t stars_reps = 20;
    double stars_beta = 0.1;
    std::size_t ric_reps = 20;
    double ebic_gamma = 0.5;

    void add(CLI::App* cmd, bool with_selector) {
        if (with_selector) cmd->add_option("--selector", selector, "stars | ric | ebic")->capture_default_str();
        cmd->add_option("--stars-subsample", stars_subsample, "StARS subsample size (default min(10 sqrt(n), n-1))");
        cmd->add_option("--stars-reps", stars_reps, "StARS subsample count")->capture_default_str();
        cmd->add_option("--stars-beta", stars_beta, "StARS instability threshold")->capture_default_str();
        cmd->add_option("--ric-reps", ric_reps, "RIC permutation replications")->capture_default_str();
        cmd->add_option("--ebic-gamma", ebic_gamma, "EBIC gamma")->capture_default_str();
    }

    StarsConfig stars() const {
        StarsConfig c;
        c.subsample_size = stars_subsample;
        c.reps = stars_reps;
        c.beta = stars_beta;
        return c;
    }
};

struct GeneratorArgs {
    std::string structure = "random";
    std::size_t d = 50;
    Eigen::Index n = 100;
    std::optional<std::size_t> groups;
    std::size_t bandwidth = 1;
    std::optional<double> edge_prob;
    double intra_prob = 0.3;
    double v = 0.3;
    double u = 0.1;

    void add(CLI::App* cmd, const std::string& prefix) {
        cmd->add_option("--" + prefix + "structure", structure, "hub | cluster | band | scale-free | random")
            ->capture_default_str();
        cmd->add_option("--" + prefix + "d", d, "number of variables")->capture_default_str();
        cmd->add_option("--" + prefix + "n", n, "number of samples")->capture_default_str();
        cmd->add_option("--" + prefix + "groups", groups, "hub/cluster group count (default ceil(d/20))");
        cmd->add_option("--" + prefix + "bandwidth", bandwidth, "band graph bandwidth")->capture_default_str();
        cmd->add_option("--" + prefix + "edge-prob", edge_prob, "random graph edge probability (default min(1, 3/d))");
        cmd->add_option("--" + prefix + "intra-prob", intra_prob, "cluster within-group edge probability")
            ->capture_default_str();
        cmd->add_option("--" + prefix + "v", v, "off-diagonal precision magnitude")->capture_default_str();
        cmd->add_option("--" + prefix + "u", u, "diagonal boost")->capture_default_str();
    }

    GeneratorInput input() const {
        GeneratorInput g;
        g.spec.structure = parse_structure(structure);
        g.spec.d = d;
        g.spec.groups = groups;
        g.spec.bandwidth = bandwidth;
        g.spec.edge_prob = edge_prob;
        g.spec.intra_prob = intra_prob;
        g.n = n;
        g.v = v;
        g.u = u;
        return g;
    }
};

void write_or_print(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-")
        std::cout << text;
    else
        write_text(path, text);
}

nlohmann::json selection_json(const SelectionResult& r) {
    return {{"criterion", to_string(r.criterion)},
            {"lambda", r.lambda},
            {"lambda_index", r.lambda_index},
            {"edges", r.graph.edge_count()},
            {"boundary", r.boundary},
            {"scores", r.scores},
            {"monotone_scores", r.monotone_scores}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"High-dimensional undirected graph estimation"};
    app.require_subcommand(1);
    std::uint64_t seed = 0;

    // generate
    auto* gen = app.add_subcommand("generate", "simulate a graph, its Gaussian model and a dataset");
    GeneratorArgs gen_args;
    gen_args.add(gen, "");
    std::string gen_out, gen_truth;
    gen->add_option("--seed", seed, "random seed")->capture_default_str();
    gen->add_option("--out", gen_out, "dataset CSV")->required();
    gen->add_option("--truth", gen_truth, "true graph edge list");

    // npn
    auto* npn = app.add_subcommand("npn", "nonparanormal (truncation) transform of a dataset");
    DataArgs npn_data;
    npn_data.add(npn);
    std::string npn_out;
    npn->add_option("--out", npn_out, "transformed CSV (- for stdout)")->required();

    // estimate
    auto* est = app.add_subcommand("estimate", "estimate a regularization path");
    DataArgs est_data;
    PathArgs est_path;
    std::string est_dir;
    est_data.add(est);
    est_path.add(est);
    est->add_option("--output-dir", est_dir, "directory for path_NNN.edges and path.json")->required();

    // select
    auto* sel = app.add_subcommand("select", "choose a regularization level");
    DataArgs sel_data;
    PathArgs sel_path;
    SelectArgs sel_args;
    std::string sel_dir;
    sel_data.add(sel);
    sel_path.add(sel);
    sel_args.add(sel, true);
    sel->add_option("--seed", seed, "random seed")->capture_default_str();
    sel->add_option("--output-dir", sel_dir, "directory for selection.json, selected.edges, selected.dot")->required();

    // export-dot
    auto* dot = app.add_subcommand("export-dot", "convert an edge list to DOT (or GraphML)");
    std::string dot_graph, dot_labels, dot_out, dot_format = "dot";
    dot->add_option("--graph", dot_graph, "edge list file")->required();
    dot->add_option("--labels-from", dot_labels, "CSV whose header supplies node labels");
    dot->add_option("--format", dot_format, "dot | graphml")->capture_default_str();
    dot->add_option("--out", dot_out, "output file (default stdout)");

    // benchmark
    auto* bench = app.add_subcommand("benchmark", "time estimators on N(0, I) data");
    std::vector<std::string> scenarios{"50:100:mb:none", "50:100:mb:lossy"};
    BenchmarkOptions bench_opts;
    std::optional<double> bench_ratio;
    std::string bench_out;
    bench->add_option("--scenario", scenarios, "d:n:method[:screening], repeatable")->capture_default_str();
    bench->add_option("--reps", bench_opts.reps, "timed runs per scenario")->capture_default_str();
    bench->add_option("--nlambda", bench_opts.nlambda, "path length")->capture_default_str();
    bench->add_option("--target-sparsity", bench_opts.target_sparsity, "edge density aimed for at the smallest lambda")
        ->capture_default_str();
    bench->add_option("--lambda-min-ratio", bench_ratio, "fixed lambda range instead of the tuned one");
    bench->add_option("--workers", bench_opts.workers, "worker threads (0 = all processors)")->capture_default_str();
    bench->add_option("--seed", seed, "random seed")->capture_default_str();
    bench->add_option("--out", bench_out, "CSV output (default stdout)");

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "read/simulate -> transform -> estimate -> select -> export");
    std::string pipe_input, pipe_transform = "none", pipe_selector = "none", pipe_dir = "huge-out";
    bool pipe_no_header = false;
    bool pipe_generate = false;
    GeneratorArgs pipe_gen;
    PathArgs pipe_path;
    SelectArgs pipe_sel;
    pipe->add_option("--input", pipe_input, "CSV dataset");
    pipe->add_flag("--no-header", pipe_no_header, "first row holds data, not labels");
    pipe->add_flag("--generate", pipe_generate, "simulate the input instead of reading a file");
    pipe_gen.add(pipe, "gen-");
    pipe->add_option("--transform", pipe_transform, "none | npn-truncation")->capture_default_str();
    pipe_path.add(pipe);
    pipe->add_option("--selector", pipe_selector, "none | stars | ric | ebic")->capture_default_str();
    pipe_sel.add(pipe, false);
    pipe->add_option("--seed", seed, "random seed")->capture_default_str();
    pipe->add_option("--output-dir", pipe_dir, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return config_error;
    }

    try {
        if (*gen) {
            auto g = gen_args.input();
            const auto adj = generate_structure(g.spec, stream_seed(seed, 0));
            const auto sim = sample_dataset(build_covariance_model(adj, g.v, g.u), g.n, stream_seed(seed, 1));
            write_dataset_csv(gen_out, sim.data);
            if (!gen_truth.empty()) write_graph_edgelist(adj, sim.data.labels, gen_truth);
        } else if (*npn) {
            const auto out = npn_truncation(npn_data.read());
            if (npn_out == "-")
                write_dataset_csv(std::cout, out);
            else
                write_dataset_csv(npn_out, out);
        } else if (*est) {
            const auto data = est_data.read();
            const auto cov = correlation_matrix(data);
            const auto lambdas = lambda_sequence(cov, est_path.nlambda, est_path.ratio);
            const auto path = estimate_path(cov, lambdas, est_path.options());
            fs::create_directories(est_dir);
            nlohmann::json j;
            j["method"] = to_string(path.base.method);
            j["lambdas"] = lambdas.values();
            j["sparsity"] = path.base.sparsity;
            j["nonconverged"] = path.base.nonconverged;
            for (std::size_t k = 0; k < path.base.size(); ++k) {
                write_graph_edgelist(path.base.graphs[k], data.labels, fs::path(est_dir) / path_file_name(k));
                j["edges"].push_back(path.base.graphs[k].edge_count());
            }
            write_text(fs::path(est_dir) / "path.json", j.dump(2) + "\n");
        } else if (*sel) {
            const auto data = sel_data.read();
            const auto opts = sel_path.options();
            const auto cov = correlation_matrix(data);
            const auto lambdas = lambda_sequence(cov, sel_path.nlambda, sel_path.ratio);
            SelectionResult result;
            switch (parse_criterion(sel_args.selector)) {
                case Criterion::stars: result = stars_select(data, lambdas, opts, sel_args.stars(), seed); break;
                case Criterion::ric: result = ric_select(data, opts, sel_args.ric_reps, seed); break;
                case Criterion::ebic:
                    if (opts.method != Method::glasso) throw ConfigError("ebic selection is only valid with glasso");
                    result = ebic_select(estimate_path(cov, lambdas, opts), cov, sel_args.ebic_gamma);
                    break;
            }
            fs::create_directories(sel_dir);
            write_text(fs::path(sel_dir) / "selection.json", selection_json(result).dump(2) + "\n");
            write_graph_edgelist(result.graph, data.labels, fs::path(sel_dir) / "selected.edges");
            write_text(fs::path(sel_dir) / "selected.dot", export_dot(result.graph, data.labels));
        } else if (*dot) {
            const auto graph = read_graph_edgelist(dot_graph);
            auto labels = Dataset::default_labels(graph.dim());
            if (!dot_labels.empty()) {
                auto in = std::ifstream(dot_labels);
                std::string header;
                std::getline(in, header);
                labels.clear();
                for (auto cell : detail::split_commas(header)) labels.emplace_back(cell);
                if (labels.size() != graph.dim()) throw InputError("label count does not match graph dimension");
            }
            if (dot_format == "dot")
                write_or_print(dot_out, export_dot(graph, labels));
            else if (dot_format == "graphml")
                write_or_print(dot_out, export_graphml(graph, labels));
            else
                throw ConfigError("unknown export format: " + dot_format);
        } else if (*bench) {
            std::vector<BenchmarkScenario> parsed;
            for (const auto& s : scenarios) parsed.push_back(parse_scenario(s));
            bench_opts.lambda_min_ratio = bench_ratio;
            write_or_print(bench_out, format_benchmark_csv(benchmark(parsed, bench_opts, seed)));
        } else if (*pipe) {
            PipelineConfig config;
            if (!pipe_input.empty()) config.input = pipe_input;
            if (pipe_generate) config.generator = pipe_gen.input();
            config.has_header = !pipe_no_header;
            config.transform = parse_transform(pipe_transform);
            config.estimate = pipe_path.options();
            config.nlambda = pipe_path.nlambda;
            config.lambda_min_ratio = pipe_path.ratio;
            if (pipe_selector != "none") config.selector = parse_criterion(pipe_selector);
            config.stars = pipe_sel.stars();
            config.ric_reps = pipe_sel.ric_reps;
            config.ebic_gamma = pipe_sel.ebic_gamma;
            config.seed = seed;
            config.output_dir = pipe_dir;
            const auto summary = run_pipeline(config);
            std::cout << "wrote " << summary.lambdas.size() << " path graphs to " << pipe_dir << "\n";
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const ParameterError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return input_error;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return numeric_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return failure;
    }
    return ok;
}
