#include "sumdist/coreset.hpp"
#include "sumdist/densefast.hpp"
#include "sumdist/dimreduce.hpp"
#include "sumdist/experiment.hpp"
#include "sumdist/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace sumdist;

struct CommonOpts {
    std::string input;
    std::string format = "csv";
    Index k = 1;
    double eps = 0.5;
    std::uint64_t seed = 0;
    std::string path = "sparse";
    Index blocks = 0;
    std::string out;
    bool stats = false;
    bool exact_cost_flag = false;
    bool deterministic_istar = false;
    std::string config_overrides;

    void attach(CLI::App* app, bool needs_input) {
        auto* in = app->add_option("--input", input, "input points file");
        if (needs_input) in->required();
        app->add_option("--format", format, "input format")->check(CLI::IsMember({"csv", "mm"}));
        app->add_option("--k", k, "shape dimension parameter");
        app->add_option("--eps", eps, "accuracy parameter in (0,1)");
        app->add_option("--seed", seed, "random seed");
        app->add_option("--path", path, "pipeline variant")
            ->check(CLI::IsMember({"sparse", "dense"}));
        app->add_option("--blocks", blocks, "dense path block count (0 = formula)");
        app->add_option("--out", out, "output path");
        app->add_flag("--stats", stats, "emit instrumentation (timings, counters)");
        app->add_flag("--exact-cost", exact_cost_flag, "exact trial selection (verification mode)");
        app->add_flag("--deterministic-istar", deterministic_istar,
                      "fix i* at floor(10/eps)+1 for reproducible benchmarking");
        app->add_option("--config", config_overrides, "key=value[,key=value...] constant overrides");
    }

    [[nodiscard]] Config make_config() const {
        Config cfg;
        if (!config_overrides.empty()) cfg.apply_overrides(config_overrides);
        cfg.exact_cost_selection = cfg.exact_cost_selection || exact_cost_flag;
        cfg.deterministic_istar = cfg.deterministic_istar || deterministic_istar;
        return cfg;
    }

    [[nodiscard]] InputFormat input_format() const {
        return format == "mm" ? InputFormat::MatrixMarket : InputFormat::Csv;
    }
};

int cmd_synth(const CommonOpts& opts, Index n, Index d, Index per_center,
              const std::string& noise, double scale, const std::string& centers_out) {
    const NoiseKind kind = noise == "gaussian" ? NoiseKind::Gaussian : NoiseKind::Cauchy;
    SynthData data = synth_generate(n, d, opts.k, per_center, kind, scale, RngConfig{opts.seed, 0});
    write_csv(opts.out, data.points.to_dense());
    if (!centers_out.empty()) write_csv(centers_out, data.centers);
    std::cout << "wrote " << n << "x" << d << " points to " << opts.out << "\n";
    return 0;
}

int cmd_reduce(const CommonOpts& opts) {
    const Config cfg = opts.make_config();
    PointMatrix a = ingest(opts.input, opts.input_format());
    ReducedRep rep;
    SampleStats stats;
    const RngConfig rng{opts.seed, 0};
    if (opts.path == "dense") {
        const double inner = opts.eps * opts.eps / cfg.c_eps_inner;
        Basis b;
        if (opts.blocks > 0) {
            const double delta = inner / 10.0;
            DensePrecompute pre =
                make_dense_precompute(a, opts.blocks, opts.k, delta, rng.fork(1), cfg);
            BicriteriaResult xhat =
                poly_approx_dense(a, Basis::empty(a.cols()), opts.k, delta, pre, rng.fork(2), cfg,
                                  &stats);
            BicriteriaResult u =
                eps_approx_dense(a, Basis::empty(a.cols()), xhat.basis, opts.k, cfg.K_default,
                                 inner, delta, pre, rng.fork(3), cfg, &stats);
            b = u.basis;
        } else {
            b = dimension_reduction_dense(a, opts.k, inner, rng.fork(1), cfg, &stats);
        }
        rep = extract_reduced_rep(a, b, opts.eps, rng.fork(2), cfg);
        rep.seed = opts.seed;
    } else {
        rep = complete_dim_reduce(a, opts.k, opts.eps, rng, cfg);
    }
    write_reduced_rep(opts.out, rep);
    std::cout << "reduced " << rep.point_count() << " points to dimension "
              << rep.basis.subspace_dim() << " (" << opts.out << ")\n";
    if (opts.stats) {
        std::cout << "fallback_rows=" << rep.fallback_rows
                  << " sketch_path=" << (rep.sketch_path ? 1 : 0)
                  << " blocks_probed=" << stats.blocks_probed
                  << " rows_probed=" << stats.rows_probed << "\n";
    }
    return 0;
}

int cmd_coreset(const CommonOpts& opts, const std::string& rep_path, const std::string& kind) {
    const Config cfg = opts.make_config();
    ReducedRep rep = read_reduced_rep(rep_path);
    const RngConfig rng{opts.seed, 0};
    WeightedCoreset cs = kind == "kmedian" ? kmedian_coreset(rep, opts.k, opts.eps, rng, cfg)
                                           : subspace_coreset(rep, opts.k, opts.eps, rng, cfg);
    write_coreset_json(opts.out, cs, rep_path);
    std::cout << "coreset of " << cs.size() << " rows written to " << opts.out << "\n";
    return 0;
}

int cmd_evaluate(const CommonOpts& opts, const std::string& rep_path,
                 const std::string& shapes_path, const std::string& centers_path, bool as_csv) {
    ReducedRep rep = read_reduced_rep(rep_path);
    PointMatrix a = ingest(opts.input, opts.input_format());
    std::vector<Shape> shapes;
    if (!shapes_path.empty()) shapes = read_shapes_json(shapes_path);
    if (!centers_path.empty())
        shapes.emplace_back(CentersShape{ingest(centers_path, InputFormat::Csv).to_dense()});
    if (shapes.empty())
        throw std::runtime_error("evaluate: pass --shapes and/or --centers");
    std::vector<ResultRecord> records;
    for (std::size_t s = 0; s < shapes.size(); ++s) {
        ResultRecord rec;
        rec.method = "paper";
        rec.subspace_dim = rep.basis.subspace_dim();
        rec.shape_id = static_cast<Index>(s);
        rec.approx_cost = reduced_cost(rep, shapes[s]);
        rec.exact_cost = exact_cost(a, shapes[s]);
        rec.ratio = rec.exact_cost > 0.0 ? rec.approx_cost / rec.exact_cost : 1.0;
        records.push_back(std::move(rec));
    }
    std::ofstream out(opts.out);
    if (!out) throw std::runtime_error("cannot write '" + opts.out + "'");
    if (as_csv)
        write_records_csv(out, records);
    else
        write_records_ndjson(out, records);
    std::cout << records.size() << " records written to " << opts.out << "\n";
    return 0;
}

int cmd_experiment(const CommonOpts& opts, Index synth_n, Index synth_d, Index per_center,
                   const std::string& noise, double scale, const std::string& dims_spec,
                   const std::string& shapes_path, Index random_centers, Index random_subspaces,
                   bool as_csv) {
    ExperimentConfig cfg;
    cfg.k = opts.k;
    cfg.eps = opts.eps;
    cfg.seed = opts.seed;
    cfg.path = opts.path == "dense" ? PipelinePath::Dense : PipelinePath::Sparse;
    cfg.blocks = opts.blocks;
    cfg.constants = opts.make_config();
    cfg.emit_stats = opts.stats;
    cfg.random_center_shapes = random_centers;
    cfg.random_subspace_shapes = random_subspaces;
    if (!opts.input.empty()) {
        cfg.input_path = opts.input;
        cfg.format = opts.input_format();
        cfg.query_planted_centers = false;
    } else {
        SynthSpec sp;
        sp.n = synth_n;
        sp.d = synth_d;
        sp.samples_per_center = per_center > 0 ? per_center : synth_n / opts.k;
        sp.noise = noise == "gaussian" ? NoiseKind::Gaussian : NoiseKind::Cauchy;
        sp.scale = scale;
        cfg.synth = sp;
    }
    if (!shapes_path.empty()) cfg.shapes = read_shapes_json(shapes_path);
    if (!dims_spec.empty()) {
        std::stringstream ss(dims_spec);
        std::string tok;
        while (std::getline(ss, tok, ',')) cfg.dims_to_probe.push_back(std::stol(tok));
        std::sort(cfg.dims_to_probe.begin(), cfg.dims_to_probe.end());
    }

    // stream records so partial results survive a mid-run failure
    std::ofstream out(opts.out);
    if (!out) throw std::runtime_error("cannot write '" + opts.out + "'");
    if (as_csv) write_csv_header(out);
    std::size_t written = 0;
    cfg.on_record = [&](const ResultRecord& r) {
        if (as_csv)
            append_record_csv(out, r);
        else
            append_record_ndjson(out, r);
        out.flush();
        ++written;
    };
    try {
        run_experiment(cfg);
    } catch (...) {
        std::cerr << "experiment failed after " << written << " records (partial results kept)\n";
        throw;
    }
    std::cout << written << " records written to " << opts.out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dimensionality reduction for the sum-of-distances metric"};
    app.require_subcommand(1);

    CommonOpts synth_opts, reduce_opts, coreset_opts, eval_opts, exp_opts;

    // synth
    auto* synth = app.add_subcommand("synth", "generate a planted-center dataset");
    synth_opts.attach(synth, false);
    Index synth_n = 1000, synth_d = 50, per_center = 0;
    std::string noise = "cauchy", centers_out;
    double noise_scale = 1.0;
    synth->add_option("--n", synth_n, "number of points")->required();
    synth->add_option("--d", synth_d, "ambient dimension")->required();
    synth->add_option("--per-center", per_center, "samples per center (default n/k)");
    synth->add_option("--noise", noise, "noise family")->check(CLI::IsMember({"cauchy", "gaussian"}));
    synth->add_option("--scale", noise_scale, "noise scale");
    synth->add_option("--centers-out", centers_out, "write planted centers CSV here");

    // reduce
    auto* reduce = app.add_subcommand("reduce", "compute a reduced representation");
    reduce_opts.attach(reduce, true);

    // coreset
    auto* coreset = app.add_subcommand("coreset", "build a coreset from a reduced representation");
    coreset_opts.attach(coreset, false);
    std::string rep_path, coreset_kind = "kmedian";
    coreset->add_option("--rep", rep_path, "reduced representation file")->required();
    coreset->add_option("--kind", coreset_kind, "coreset family")
        ->check(CLI::IsMember({"kmedian", "subspace"}));

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "compare reduced and exact costs on shapes");
    eval_opts.attach(evaluate, true);
    std::string eval_rep, eval_shapes, eval_centers;
    bool eval_csv = false;
    evaluate->add_option("--rep", eval_rep, "reduced representation file")->required();
    evaluate->add_option("--shapes", eval_shapes, "shape spec JSON");
    evaluate->add_option("--centers", eval_centers, "center set CSV (one center per row)");
    evaluate->add_flag("--csv", eval_csv, "flat CSV instead of NDJSON");

    // experiment
    auto* experiment = app.add_subcommand("experiment",
                                          "pipeline vs random and top-SVD subspaces");
    exp_opts.attach(experiment, false);
    Index exp_n = 2000, exp_d = 500, exp_per_center = 0, rnd_centers = 0, rnd_subspaces = 0;
    std::string exp_noise = "cauchy", exp_dims, exp_shapes;
    double exp_scale = 1.0;
    bool exp_csv = false;
    experiment->add_option("--n", exp_n, "synthetic point count");
    experiment->add_option("--d", exp_d, "synthetic dimension");
    experiment->add_option("--per-center", exp_per_center, "samples per center");
    experiment->add_option("--noise", exp_noise, "noise family")
        ->check(CLI::IsMember({"cauchy", "gaussian"}));
    experiment->add_option("--scale", exp_scale, "noise scale");
    experiment->add_option("--dims", exp_dims, "comma list of dimensions to probe");
    experiment->add_option("--shapes", exp_shapes, "shape spec JSON");
    experiment->add_option("--random-center-shapes", rnd_centers, "extra random center queries");
    experiment->add_option("--random-subspace-shapes", rnd_subspaces,
                           "extra random subspace queries");
    experiment->add_flag("--csv", exp_csv, "flat CSV instead of NDJSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            if (synth_opts.out.empty()) throw std::runtime_error("synth: --out is required");
            if (per_center == 0) {
                if (synth_n % synth_opts.k != 0)
                    throw std::runtime_error(
                        "synth: --n must be divisible by --k (or pass --per-center)");
                per_center = synth_n / synth_opts.k;
            }
            return cmd_synth(synth_opts, synth_n, synth_d, per_center, noise, noise_scale,
                             centers_out);
        }
        if (reduce->parsed()) {
            if (reduce_opts.out.empty()) throw std::runtime_error("reduce: --out is required");
            return cmd_reduce(reduce_opts);
        }
        if (coreset->parsed()) {
            if (coreset_opts.out.empty()) throw std::runtime_error("coreset: --out is required");
            return cmd_coreset(coreset_opts, rep_path, coreset_kind);
        }
        if (evaluate->parsed()) {
            if (eval_opts.out.empty()) throw std::runtime_error("evaluate: --out is required");
            return cmd_evaluate(eval_opts, eval_rep, eval_shapes, eval_centers, eval_csv);
        }
        if (experiment->parsed()) {
            if (exp_opts.out.empty()) throw std::runtime_error("experiment: --out is required");
            return cmd_experiment(exp_opts, exp_n, exp_d, exp_per_center, exp_noise, exp_scale,
                                  exp_dims, exp_shapes, rnd_centers, rnd_subspaces, exp_csv);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
