#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "config.hpp"
#include "tvart/bundle.hpp"
#include "tvart/csv.hpp"
#include "tvart/error.hpp"
#include "tvart/evaluation.hpp"
#include "tvart/solver.hpp"
#include "tvart/synthetic.hpp"
#include "tvart/windowing.hpp"

namespace tvart::cli {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using csv::format_number;

struct Common {
    std::uint64_t seed = 0;
    std::string out = ".";
    std::string config;
    bool verbose = false;
};

// Doubles get an exact default string so the manifest reproduces them bit for bit.
CLI::Option* add_real(CLI::App& app, const std::string& name, double& value, const std::string& help) {
    return app.add_option(name, value, help)->default_str(format_number(value));
}

void add_common(CLI::App& app, Common& c) {
    app.add_option("--seed", c.seed, "Random seed");
    app.add_option("--out", c.out, "Output directory");
    app.add_option("--config", c.config, "Flat key=value file; command-line flags override it");
    app.add_flag("--verbose", c.verbose, "Progress messages on stderr");
}

// ---------------------------------------------------------------- generator

struct GeneratorOptions {
    std::string benchmark;
    std::optional<Eigen::Index> tau;
    std::optional<double> sigma;
    double theta1 = kDefaultTheta1;
    double theta2 = kDefaultTheta2;
    double lengthscale = 30.0;
    double jitter = 0.001;
};

void add_generator(CLI::App& app, GeneratorOptions& g) {
    app.add_option("--benchmark", g.benchmark, "Synthetic problem")
        ->check(CLI::IsMember({"switching", "smooth"}));
    app.add_option("--tau", g.tau, "Transitions (default 200 switching, 160 smooth)");
    app.add_option("--sigma", g.sigma, "Observation noise (default 0.5 switching, 0.2 smooth)");
    add_real(app, "--theta1", g.theta1, "Rotation angle before the switch");
    add_real(app, "--theta2", g.theta2, "Rotation angle after the switch");
    add_real(app, "--lengthscale", g.lengthscale, "Angle process length scale (smooth)");
    add_real(app, "--jitter", g.jitter, "Angle process diagonal jitter (smooth)");
}

GroundTruth generate(const GeneratorOptions& g, Eigen::Index n, std::uint64_t seed) {
    if (g.benchmark == "switching")
        return simulate_switching(n, g.tau.value_or(200), g.sigma.value_or(0.5), g.theta1, g.theta2, seed);
    if (g.benchmark == "smooth")
        return simulate_smooth(n, g.tau.value_or(160), g.sigma.value_or(0.2), seed, g.lengthscale,
                               g.jitter);
    throw Error(ErrorKind::InvalidArgument, "--benchmark must be switching or smooth");
}

// ------------------------------------------------------------------- solver

struct SolverOptions {
    std::string preset = "auto";
    std::optional<int> rank;
    std::optional<Eigen::Index> window;
    std::optional<double> eta;
    std::optional<double> beta;
    std::optional<std::string> reg;
    Eigen::Index lags = 1;
    bool affine = false;
    double rtol = 1e-4;
    double atol = 1e-6;
    int max_iters = 1000;
    int cg_max_iters = 24;
    int pg_max_iters = 40;
    double cg_tol = 1e-9;
    std::optional<int> warm_restart_at;
    std::optional<double> init_noise_spatial;
    std::optional<double> init_noise_temporal;
};

void add_solver(CLI::App& app, SolverOptions& s, bool with_rank) {
    app.add_option("--preset", s.preset, "Parameter defaults: auto follows --benchmark")
        ->check(CLI::IsMember({"auto", "none", "switching", "smooth"}));
    if (with_rank)
        app.add_option("--rank", s.rank, "CP rank R");
    app.add_option("--window", s.window, "Window length M");
    app.add_option("--eta", s.eta, "Tikhonov strength eta (default from preset)");
    app.add_option("--beta", s.beta, "Temporal smoothing strength (default from preset)");
    app.add_option("--reg", s.reg, "Temporal regularizer")->check(CLI::IsMember({"none", "tv", "spline"}));
    app.add_option("--lags", s.lags, "Autoregressive order P");
    app.add_flag("--affine", s.affine, "Fit a per-window offset");
    add_real(app, "--rtol", s.rtol, "Relative cost-change tolerance");
    add_real(app, "--atol", s.atol, "Absolute cost-change tolerance");
    app.add_option("--max-iters", s.max_iters, "Outer iteration cap");
    app.add_option("--cg-max-iters", s.cg_max_iters, "Iteration cap of the inner conjugate-gradient solves");
    app.add_option("--pg-max-iters", s.pg_max_iters, "Iteration cap of the inner proximal-gradient solve");
    add_real(app, "--cg-tol", s.cg_tol, "Relative residual tolerance of the inner solves");
    app.add_option("--warm-restart-at", s.warm_restart_at,
                   "Copy U1 into U2 and restart after this many iterations");
    app.add_option("--init-noise-spatial", s.init_noise_spatial, "Initial perturbation of U1 and U2");
    app.add_option("--init-noise-temporal", s.init_noise_temporal, "Initial perturbation of U3");
}

struct Resolved {
    std::string preset;
    Eigen::Index window = 1;
    Hyperparams params;
};

// Switching: M=20, R=4, eta=1/N, TV with beta 5 (fit) or 1 (comparison sweep).
// Smooth: M=1, R=4, eta=6/N, spline with beta = 600 log10(N)^2.
Resolved resolve(const SolverOptions& s, const std::string& benchmark, Eigen::Index n, bool comparison) {
    Resolved r;
    r.preset = s.preset == "auto" ? (benchmark.empty() ? "none" : benchmark) : s.preset;
    const double nn = static_cast<double>(n);
    if (r.preset == "switching") {
        r.window = 20;
        r.params.rank = 4;
        r.params.eta = 1.0 / nn;
        r.params.reg = {Regularizer::TV, comparison ? 1.0 : 5.0};
    } else if (r.preset == "smooth") {
        r.window = 1;
        r.params.rank = 4;
        r.params.eta = 6.0 / nn;
        const double lg = std::log10(nn);
        r.params.reg = {Regularizer::Spline, 600.0 * lg * lg};
    }
    if (s.window)
        r.window = *s.window;
    if (s.rank)
        r.params.rank = *s.rank;
    if (s.eta)
        r.params.eta = *s.eta;
    if (s.reg)
        r.params.reg.kind = parse_regularizer(*s.reg);
    if (s.beta)
        r.params.reg.beta = *s.beta;
    r.params.rtol = s.rtol;
    r.params.atol = s.atol;
    r.params.max_outer_iters = s.max_iters;
    r.params.cg_max_iters = s.cg_max_iters;
    r.params.pg_max_iters = s.pg_max_iters;
    r.params.cg_tol = s.cg_tol;
    r.params.init_noise_spatial = s.init_noise_spatial;
    r.params.init_noise_temporal = s.init_noise_temporal;
    if (s.warm_restart_at)
        r.params.warm_restart = WarmRestart{*s.warm_restart_at, true};
    return r;
}

std::vector<std::string> numbered(const std::string& prefix, Eigen::Index count) {
    std::vector<std::string> names;
    for (Eigen::Index i = 1; i <= count; ++i)
        names.push_back(fmt::format("{}{}", prefix, i));
    return names;
}

void write_labels(const fs::path& path, const std::vector<int>& labels, const std::string& first_column,
                  const std::string& manifest) {
    Eigen::MatrixXd table(static_cast<Eigen::Index>(labels.size()), 2);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        table(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i + 1);
        table(static_cast<Eigen::Index>(i), 1) = labels[i];
    }
    csv::write(path, table, {first_column, "label"}, manifest);
}

std::string single_line(std::string text) {
    std::replace(text.begin(), text.end(), '\n', ' ');
    std::replace(text.begin(), text.end(), ',', ';');
    return text;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// ----------------------------------------------------------------- generate

struct GenerateOptions {
    Common common;
    GeneratorOptions gen;
    Eigen::Index n = 10;
};

int run_generate(const GenerateOptions& o, const KeyValues& options) {
    const auto truth = generate(o.gen, o.n, o.common.seed);
    const auto manifest = manifest_line("generate", options);
    const fs::path out = o.common.out;
    fs::create_directories(out);
    csv::write_series(out / "series.csv", truth.series, manifest);
    write_truth_bundle(out, truth, manifest);
    write_manifest_file(out, "generate", options);
    if (o.common.verbose)
        std::cerr << fmt::format("generated {} benchmark: N={} tau={} -> {}\n", o.gen.benchmark,
                                 truth.series.channels(), truth.steps(), out.string());
    return kExitOk;
}

// ---------------------------------------------------------------------- fit

struct FitOptions {
    Common common;
    GeneratorOptions gen;
    Eigen::Index n = 10;
    std::string input;
    std::string truth;
    bool standardize = false;
    SolverOptions solver;
    std::optional<int> clusters;
    int restarts = 100;
    double rank_threshold = 0.1;
};

int run_fit(const FitOptions& o, const KeyValues& options) {
    if (o.input.empty() == o.gen.benchmark.empty())
        throw Error(ErrorKind::InvalidArgument, "fit needs exactly one of --input and --benchmark");

    TimeSeries series;
    std::optional<GroundTruth> truth;
    if (!o.input.empty()) {
        series = csv::read_series(o.input);
        if (!o.truth.empty())
            truth = read_truth_bundle(o.truth);
    } else {
        truth = generate(o.gen, o.n, o.common.seed);
        series = truth->series;
    }
    std::optional<Standardization> scaling;
    if (o.standardize) {
        auto [standardized, transform] = standardize(series);
        series = std::move(standardized);
        scaling = std::move(transform);
    }

    auto resolved = resolve(o.solver, o.gen.benchmark, series.channels(), false);
    resolved.params.seed = o.common.seed;
    const auto data = build_snapshots(series, resolved.window, o.solver.lags, o.solver.affine);

    FitObserver observer;
    if (o.common.verbose)
        observer = [](int it, double c, double r) {
            std::cerr << fmt::format("iter {:4d}  cost {}  rmse {}\n", it, format_number(c), format_number(r));
        };
    const auto [model, report] = fit(data, resolved.params, observer);
    const auto normalized = normalize(model);
    const auto& nf = normalized.factors;

    const auto manifest = manifest_line("fit", options);
    const fs::path out = o.common.out;
    fs::create_directories(out);
    csv::write(out / "U1.csv", nf.U1, numbered("u", nf.rank()), manifest);
    csv::write(out / "U2.csv", nf.U2, numbered("u", nf.rank()), manifest);
    csv::write(out / "U3.csv", nf.U3, numbered("u", nf.rank()), manifest);
    csv::write(out / "lambda.csv", Eigen::MatrixXd(normalized.lambda), {"lambda"}, manifest);

    Eigen::MatrixXd trace(report.iterations, 3);
    for (int i = 0; i < report.iterations; ++i)
        trace.row(i) << i + 1, report.cost_trace[static_cast<std::size_t>(i)],
            report.rmse_trace[static_cast<std::size_t>(i)];
    csv::write(out / "trace.csv", trace, {"iteration", "cost", "rmse"}, manifest);

    if (scaling) {
        Eigen::MatrixXd table(scaling->mean.size(), 2);
        table << scaling->mean, scaling->sd;
        csv::write(out / "standardization.csv", table, {"mean", "sd"}, manifest);
    }
    if (o.clusters)
        write_labels(out / "clusters.csv", cluster_temporal_modes(model.U3, *o.clusters, o.common.seed, o.restarts),
                     "window", manifest);

    const double final_rmse = report.rmse_trace.empty() ? rmse(model, data) : report.rmse_trace.back();
    const int eff = effective_rank(model, o.rank_threshold);
    std::optional<double> error;
    if (truth && !scaling && !data.affine && data.lags == 1)
        error = operator_norm_error(tvart_estimate(model), window_truth(*truth, data));

    std::ofstream summary(out / "summary.txt");
    summary << "# " << manifest << '\n';
    summary << fmt::format("preset: {}\n", resolved.preset);
    summary << fmt::format("rank: {}\nwindow: {}\nwindows: {}\ndropped_samples: {}\n", resolved.params.rank,
                           data.window, data.windows(), data.dropped_samples);
    summary << fmt::format("eta: {}\nregularizer: {}\nbeta: {}\n", format_number(resolved.params.eta),
                           to_string(resolved.params.reg.kind), format_number(resolved.params.reg.beta));
    summary << fmt::format("iterations: {}\ntermination: {}\n", report.iterations, to_string(report.termination));
    summary << fmt::format("initial_cost: {}\n", format_number(report.initial_cost));
    if (!report.cost_trace.empty())
        summary << fmt::format("final_cost: {}\n", format_number(report.cost_trace.back()));
    summary << fmt::format("rmse: {}\n", format_number(final_rmse));
    summary << fmt::format("effective_rank: {}\nrank_threshold: {}\n", eff, format_number(o.rank_threshold));
    if (report.restart_iteration)
        summary << fmt::format("restart_iteration: {}\n", *report.restart_iteration);
    if (error)
        summary << fmt::format("mean_operator_norm_error: {}\n", format_number(*error));
    summary << fmt::format("wall_seconds: {}\n", format_number(report.wall_seconds));
    if (!summary)
        throw Error(ErrorKind::Io, fmt::format("cannot write {}", (out / "summary.txt").string()));
    write_manifest_file(out, "fit", options);

    std::cout << fmt::format("iterations={} termination={} rmse={} effective_rank={}\n", report.iterations,
                             to_string(report.termination), format_number(final_rmse), eff);
    return kExitOk;
}

// ------------------------------------------------------------------ compare

struct CompareOptions {
    Common common;
    GeneratorOptions gen;
    std::string sizes = "10";
    std::string seeds;
    std::string methods = "tvart-r4,indep-full,indep-r4";
    std::string input;
    std::string truth;
    SolverOptions solver;
    int jobs = 1;
    bool no_timing = false;
};

struct MethodSpec {
    EstimateMethod kind = EstimateMethod::IndependentFull;
    int rank = 0;
    std::string label;
};

MethodSpec parse_method(const std::string& name) {
    const auto rank_of = [&](std::string_view digits) {
        const auto ranks = parse_integer_list(digits, "method rank");
        if (ranks.size() != 1 || ranks.front() < 1)
            throw Error(ErrorKind::InvalidArgument, fmt::format("bad method '{}'", name));
        return static_cast<int>(ranks.front());
    };
    if (name == "indep-full")
        return {EstimateMethod::IndependentFull, 0, name};
    if (name.rfind("indep-r", 0) == 0)
        return {EstimateMethod::IndependentTruncated, rank_of(name.substr(7)), name};
    if (name.rfind("tvart-r", 0) == 0)
        return {EstimateMethod::Tvart, rank_of(name.substr(7)), name};
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("unknown method '{}' (expected tvart-rR, indep-full or indep-rR)", name));
}

struct CompareRow {
    std::string method;
    Eigen::Index n = 0;
    std::uint64_t seed = 0;
    std::optional<double> error;
    std::optional<double> rmse;
    double wall_seconds = 0.0;
    std::string status = "ok";
    int iterations = 0;
};

struct Case {
    Eigen::Index n = 0; // 0 in file mode until the input is read
    std::uint64_t seed = 0;
};

std::vector<CompareRow> run_case(const CompareOptions& o, const Case& c, const std::vector<MethodSpec>& methods) {
    std::vector<CompareRow> rows;
    for (const auto& m : methods)
        rows.push_back({m.label, c.n, c.seed, {}, {}, 0.0, "ok", 0});
    try {
        TimeSeries series;
        std::optional<GroundTruth> truth;
        if (o.input.empty()) {
            truth = generate(o.gen, c.n, c.seed);
            series = truth->series;
        } else {
            series = csv::read_series(o.input);
            if (!o.truth.empty())
                truth = read_truth_bundle(o.truth);
        }
        auto resolved = resolve(o.solver, o.gen.benchmark, series.channels(), true);
        const auto data = build_snapshots(series, resolved.window, o.solver.lags, o.solver.affine);
        std::optional<std::vector<Eigen::MatrixXd>> target;
        if (truth && !data.affine && data.lags == 1)
            target = window_truth(*truth, data);

        for (std::size_t i = 0; i < methods.size(); ++i) {
            auto& row = rows[i];
            row.n = series.channels();
            try {
                const auto start = Clock::now();
                WindowedEstimate est;
                if (methods[i].kind == EstimateMethod::Tvart) {
                    auto params = resolved.params;
                    params.rank = methods[i].rank;
                    params.seed = c.seed;
                    const auto [model, report] = fit(data, params);
                    est = tvart_estimate(model);
                    row.iterations = report.iterations;
                } else {
                    est = independent_fit(data, methods[i].kind == EstimateMethod::IndependentTruncated
                                                    ? std::optional<int>(methods[i].rank)
                                                    : std::nullopt);
                }
                row.wall_seconds = seconds_since(start);
                row.rmse = estimate_rmse(est, data);
                if (target)
                    row.error = operator_norm_error(est, *target);
            } catch (const std::exception& e) {
                row.status = "failed: " + single_line(e.what());
            }
        }
    } catch (const std::exception& e) {
        for (auto& row : rows)
            row.status = "failed: " + single_line(e.what());
    }
    return rows;
}

int run_compare(const CompareOptions& o, const KeyValues& options) {
    if (!o.input.empty() && !o.gen.benchmark.empty())
        throw Error(ErrorKind::InvalidArgument, "compare takes either --input or --benchmark, not both");
    if (o.input.empty() && o.gen.benchmark.empty())
        throw Error(ErrorKind::InvalidArgument, "compare needs --benchmark or --input");
    if (!o.truth.empty() && o.input.empty())
        throw Error(ErrorKind::InvalidArgument, "--truth only applies to --input");
    if (o.jobs < 1)
        throw Error(ErrorKind::InvalidArgument, "--jobs must be at least 1");

    std::vector<MethodSpec> methods;
    for (const auto& name : split_list(o.methods))
        methods.push_back(parse_method(name));
    if (methods.empty())
        throw Error(ErrorKind::InvalidArgument, "--methods is empty");

    std::vector<long long> seeds = o.seeds.empty() ? std::vector<long long>{static_cast<long long>(o.common.seed)}
                                                   : parse_integer_list(o.seeds, "--seeds");
    std::vector<long long> sizes = o.input.empty() ? parse_integer_list(o.sizes, "--N") : std::vector<long long>{0};
    std::vector<Case> cases;
    for (long long n : sizes)
        for (long long s : seeds) {
            if (s < 0)
                throw Error(ErrorKind::InvalidArgument, "--seeds must be nonnegative");
            cases.push_back({static_cast<Eigen::Index>(n), static_cast<std::uint64_t>(s)});
        }

    std::vector<std::vector<CompareRow>> results(cases.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cases.size(); i = next++)
            results[i] = run_case(o, cases[i], methods);
    };
    const auto width = std::min<std::size_t>(static_cast<std::size_t>(o.jobs), cases.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < width; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();

    const auto manifest = manifest_line("compare", options);
    const fs::path out = o.common.out;
    fs::create_directories(out);
    std::ofstream table(out / "comparison.csv");
    std::ofstream log(out / "compare_log.txt");
    table << "# " << manifest << '\n';
    table << "method,N,seed,mean_operator_norm_error,rmse,wall_seconds,status\n";
    log << "# " << manifest << '\n';
    bool all_ok = true;
    for (const auto& rows : results)
        for (const auto& r : rows) {
            const auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
            const auto wall = o.no_timing || r.status != "ok" ? std::string() : format_number(r.wall_seconds);
            table << fmt::format("{},{},{},{},{},{},{}\n", r.method, r.n, r.seed, opt(r.error), opt(r.rmse), wall,
                                 r.status);
            const auto line = fmt::format("method={} N={} seed={} status={} iterations={} error={} rmse={} "
                                          "wall_seconds={}",
                                          r.method, r.n, r.seed, r.status, r.iterations, opt(r.error), opt(r.rmse),
                                          format_number(r.wall_seconds));
            log << line << '\n';
            if (o.common.verbose)
                std::cerr << line << '\n';
            all_ok = all_ok && r.status == "ok";
        }
    if (!table || !log)
        throw Error(ErrorKind::Io, fmt::format("cannot write results to {}", out.string()));
    write_manifest_file(out, "compare", options);
    return all_ok ? kExitOk : kExitRunFailed;
}

// ------------------------------------------------------------------ cluster

struct ClusterOptions {
    Common common;
    std::string input;
    int k = 2;
    int restarts = 100;
};

int run_cluster(const ClusterOptions& o, const KeyValues& options) {
    const auto table = csv::read(o.input);
    const auto labels = cluster_temporal_modes(table.values, o.k, o.common.seed, o.restarts);
    const fs::path out = o.common.out;
    fs::create_directories(out);
    write_labels(out / "clusters.csv", labels, "row", manifest_line("cluster", options));
    write_manifest_file(out, "cluster", options);
    if (o.common.verbose)
        std::cerr << fmt::format("clustered {} rows into {} groups\n", labels.size(), o.k);
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Time-varying autoregression with low-rank tensors", "tvart"};
    app.set_version_flag("--version", std::string("tvart ") + TVART_VERSION);
    app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    GenerateOptions gen;
    auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic benchmark and its truth bundle");
    gen.gen.benchmark = "switching";
    add_common(*gen_cmd, gen.common);
    add_generator(*gen_cmd, gen.gen);
    gen_cmd->add_option("--N", gen.n, "State dimension");

    FitOptions fitopt;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a model to a CSV series or a generated benchmark");
    add_common(*fit_cmd, fitopt.common);
    fit_cmd->add_option("--input", fitopt.input, "Series CSV, one row per sample");
    fit_cmd->add_option("--truth", fitopt.truth, "Truth bundle directory for --input");
    add_generator(*fit_cmd, fitopt.gen);
    fit_cmd->add_option("--N", fitopt.n, "State dimension of a generated benchmark");
    fit_cmd->add_flag("--standardize", fitopt.standardize, "Center and scale every channel first");
    add_solver(*fit_cmd, fitopt.solver, true);
    fit_cmd->add_option("--clusters", fitopt.clusters, "Cluster the temporal modes into this many groups");
    fit_cmd->add_option("--restarts", fitopt.restarts, "k-means restarts");
    add_real(*fit_cmd, "--rank-threshold", fitopt.rank_threshold, "Effective-rank cutoff relative to the largest weight");

    CompareOptions cmp;
    auto* cmp_cmd = app.add_subcommand("compare", "Error sweep of TVART against independent windowed fits");
    add_common(*cmp_cmd, cmp.common);
    add_generator(*cmp_cmd, cmp.gen);
    cmp_cmd->add_option("--N", cmp.sizes, "Comma-separated state dimensions");
    cmp_cmd->add_option("--seeds", cmp.seeds, "Comma-separated seeds (default: --seed)");
    cmp_cmd->add_option("--methods", cmp.methods, "Comma-separated tvart-rR, indep-full, indep-rR");
    cmp_cmd->add_option("--input", cmp.input, "Series CSV instead of a generated benchmark");
    cmp_cmd->add_option("--truth", cmp.truth, "Truth bundle directory for --input");
    add_solver(*cmp_cmd, cmp.solver, false);
    cmp_cmd->add_option("--jobs", cmp.jobs, "Worker threads");
    cmp_cmd->add_flag("--no-timing", cmp.no_timing, "Leave the wall_seconds column empty");

    ClusterOptions clu;
    auto* clu_cmd = app.add_subcommand("cluster", "k-means on the rows of a matrix CSV");
    add_common(*clu_cmd, clu.common);
    clu_cmd->add_option("--input", clu.input, "Matrix CSV, one row per point")->required();
    clu_cmd->add_option("--k", clu.k, "Number of clusters");
    clu_cmd->add_option("--restarts", clu.restarts, "k-means restarts");

    try {
        auto expanded = expand_config(args, app);
        std::reverse(expanded.begin() + 1, expanded.end()); // CLI11 consumes the vector from the back
        expanded.erase(expanded.begin());
        app.parse(std::move(expanded));
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*gen_cmd)
            return run_generate(gen, effective_options(*gen_cmd));
        if (*fit_cmd)
            return run_fit(fitopt, effective_options(*fit_cmd));
        if (*cmp_cmd)
            return run_compare(cmp, effective_options(*cmp_cmd));
        if (*clu_cmd)
            return run_cluster(clu, effective_options(*clu_cmd));
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.kind() == ErrorKind::InvalidArgument || e.kind() == ErrorKind::Parse ? kExitUsage
                                                                                     : kExitRunFailed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRunFailed;
    }
    return kExitUsage;
}

} // namespace tvart::cli
