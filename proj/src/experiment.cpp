#include "sumdist/experiment.hpp"

#include "sumdist/coreset.hpp"
#include "sumdist/densefast.hpp"
#include "sumdist/sketch.hpp"

#include <json.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <set>
#include <stdexcept>

namespace sumdist {

BaselineBases baseline_subspaces(const PointMatrix& a, Index dims, const RngConfig& rng) {
    if (dims < 1 || dims > a.cols())
        throw std::invalid_argument("baseline_subspaces: dims must be in [1, d]");
    BaselineBases out;
    DenseSketch g = gaussian_sketch(a.cols(), dims, 1.0, rng);
    out.random = orthonormal_columns(g.entries);
    Eigen::BDCSVD<Matrix> svd(a.to_dense(), Eigen::ComputeThinV);
    out.top_svd = Basis(svd.matrixV().leftCols(std::min(dims, svd.matrixV().cols())));
    return out;
}

namespace {

std::vector<Shape> build_shapes(const ExperimentConfig& cfg, const PointMatrix& a,
                                const Matrix* planted_centers, const RngConfig& rng) {
    std::vector<Shape> shapes = cfg.shapes;
    if (planted_centers != nullptr && cfg.query_planted_centers)
        shapes.emplace_back(CentersShape{*planted_centers});
    if (shapes.empty() && cfg.random_center_shapes == 0 && cfg.random_subspace_shapes == 0) {
        // real-data default: query the center set of a seeded k-median solution
        KMedianSeed seed = kmedian_seed(a.to_dense(), std::min(cfg.k, a.rows()), rng.fork(77),
                                        cfg.constants);
        shapes.emplace_back(CentersShape{seed.centers});
    }
    auto eng = make_engine(rng);
    std::normal_distribution<double> normal(0.0, 1.0);
    // random center sets are scaled to the data's typical row norm so the
    // queries are neither trivially near nor absurdly far
    double scale = 1.0;
    if (cfg.random_center_shapes > 0) {
        Vector norms = a.row_norms();
        std::vector<double> v(norms.data(), norms.data() + norms.size());
        scale = std::max(1e-12, median(std::move(v)) / std::sqrt(static_cast<double>(a.cols())));
    }
    for (Index s = 0; s < cfg.random_center_shapes; ++s) {
        Matrix centers(cfg.k, a.cols());
        for (Index i = 0; i < centers.rows(); ++i)
            for (Index j = 0; j < centers.cols(); ++j) centers(i, j) = scale * normal(eng);
        shapes.emplace_back(CentersShape{std::move(centers)});
    }
    for (Index s = 0; s < cfg.random_subspace_shapes; ++s) {
        Matrix dirs(a.cols(), cfg.k);
        for (Index i = 0; i < dirs.rows(); ++i)
            for (Index j = 0; j < dirs.cols(); ++j) dirs(i, j) = normal(eng);
        shapes.emplace_back(SubspaceShape{orthonormal_columns(dirs)});
    }
    if (shapes.empty()) throw std::invalid_argument("run_experiment: no shapes to evaluate");
    return shapes;
}

} // namespace

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
    if (!(cfg.eps > 0.0 && cfg.eps < 1.0))
        throw std::invalid_argument("run_experiment: eps in (0,1)");
    if (cfg.k < 1) throw std::invalid_argument("run_experiment: k must be >= 1");
    if (!std::is_sorted(cfg.dims_to_probe.begin(), cfg.dims_to_probe.end()))
        throw std::invalid_argument("run_experiment: dims_to_probe must be ascending");
    const RngConfig rng{cfg.seed, 0};

    PointMatrix a;
    Matrix planted;
    const Matrix* planted_ptr = nullptr;
    if (cfg.synth) {
        const SynthSpec& sp = *cfg.synth;
        SynthData synth = synth_generate(sp.n, sp.d, cfg.k, sp.samples_per_center, sp.noise,
                                         sp.scale, rng.fork(1));
        a = std::move(synth.points);
        planted = std::move(synth.centers);
        planted_ptr = &planted;
    } else {
        a = ingest(cfg.input_path, cfg.format);
    }
    const Index d = a.cols();

    std::vector<Shape> shapes = build_shapes(cfg, a, planted_ptr, rng.fork(2));

    // pipeline with intermediate snapshots
    std::vector<Basis> snapshots;
    const double inner_eps = cfg.eps * cfg.eps / cfg.constants.c_eps_inner;
    Basis final_basis;
    if (cfg.path == PipelinePath::Sparse) {
        final_basis = dimension_reduction(a, cfg.k, inner_eps, rng.fork(3), cfg.constants,
                                          &snapshots);
    } else {
        Config dense_cfg = cfg.constants;
        SampleStats stats;
        if (cfg.blocks > 0) {
            // fixed block count: run the loop here with explicit precompute
            const double delta = inner_eps / 10.0;
            const auto imax = static_cast<Index>(std::floor(10.0 / inner_eps)) + 1;
            Index istar = imax;
            if (!dense_cfg.deterministic_istar) {
                auto eng = make_engine(rng.fork(3).fork(0xd1));
                istar = std::uniform_int_distribution<Index>(1, imax)(eng);
            }
            Basis b = Basis::empty(d);
            const double total = a.row_norms().sum();
            for (Index it = 0; it < istar; ++it) {
                if (b.subspace_dim() >= d) break;
                if (residual_row_norms(a, b).sum() <= dense_cfg.residual_stop * total) break;
                const RngConfig round = rng.fork(3).fork(static_cast<std::uint64_t>(it) + 1);
                DensePrecompute pre =
                    make_dense_precompute(a, cfg.blocks, cfg.k, delta, round.fork(0), dense_cfg);
                BicriteriaResult xhat =
                    poly_approx_dense(a, b, cfg.k, delta, pre, round.fork(1), dense_cfg, &stats);
                BicriteriaResult u = eps_approx_dense(a, b, xhat.basis, cfg.k,
                                                      dense_cfg.K_default, inner_eps, delta, pre,
                                                      round.fork(2), dense_cfg, &stats);
                b = concat(b, u.basis);
                snapshots.push_back(b);
            }
            final_basis = b;
        } else {
            final_basis = dimension_reduction_dense(a, cfg.k, inner_eps, rng.fork(3), dense_cfg,
                                                    &stats, &snapshots);
        }
    }

    // probe set: snapshot dimensions plus requested truncations
    std::set<Index> dims;
    for (const Basis& b : snapshots)
        if (b.subspace_dim() > 0) dims.insert(b.subspace_dim());
    for (Index c : cfg.dims_to_probe) {
        if (c < 1 || c > d) throw std::invalid_argument("run_experiment: probed dim out of range");
        dims.insert(std::min(c, final_basis.subspace_dim() > 0 ? final_basis.subspace_dim() : c));
    }
    if (final_basis.subspace_dim() > 0) dims.insert(final_basis.subspace_dim());

    // exact costs are shared across methods
    std::vector<double> exact(shapes.size());
    for (std::size_t s = 0; s < shapes.size(); ++s) exact[s] = exact_cost(a, shapes[s]);

    Eigen::BDCSVD<Matrix> svd(a.to_dense(), Eigen::ComputeThinV);

    ExperimentOutput out;
    out.shapes = shapes;
    out.final_basis = final_basis;

    auto evaluate = [&](const std::string& method, const Basis& basis) {
        const auto t0 = std::chrono::steady_clock::now();
        ReducedRep rep = extract_reduced_rep(a, basis, cfg.eps, rng.fork(5), cfg.constants);
        for (std::size_t s = 0; s < shapes.size(); ++s) {
            ResultRecord rec;
            rec.method = method;
            rec.subspace_dim = basis.subspace_dim();
            rec.shape_id = static_cast<Index>(s);
            rec.approx_cost = reduced_cost(rep, shapes[s]);
            rec.exact_cost = exact[s];
            rec.ratio = exact[s] > 0.0 ? rec.approx_cost / exact[s] : 1.0;
            if (cfg.emit_stats) {
                const auto t1 = std::chrono::steady_clock::now();
                rec.wall_time_ms =
                    std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
            }
            if (cfg.on_record) cfg.on_record(rec);
            out.records.push_back(std::move(rec));
        }
    };

    for (Index c : dims) {
        // paper method: snapshot with this dimension if one exists, else a
        // truncation of the final basis
        const Basis* snap = nullptr;
        for (const Basis& b : snapshots)
            if (b.subspace_dim() == c) snap = &b;
        Basis paper = snap != nullptr ? *snap : final_basis.truncated(c);
        if (paper.subspace_dim() == 0) continue;
        evaluate("paper", paper);

        DenseSketch g = gaussian_sketch(d, c, 1.0, rng.fork(6).fork(static_cast<std::uint64_t>(c)));
        evaluate("random_subspace", orthonormal_columns(g.entries));
        evaluate("top_svd", Basis(svd.matrixV().leftCols(std::min(c, svd.matrixV().cols()))));
    }
    return out;
}

void append_record_ndjson(std::ostream& out, const ResultRecord& r) {
    nlohmann::json j{{"method", r.method},   {"subspace_dim", r.subspace_dim},
                     {"shape_id", r.shape_id}, {"approx_cost", r.approx_cost},
                     {"exact_cost", r.exact_cost}, {"ratio", r.ratio},
                     {"wall_time_ms", r.wall_time_ms}};
    out << j.dump() << '\n';
}

void append_record_csv(std::ostream& out, const ResultRecord& r) {
    out.precision(17);
    out << r.method << ',' << r.subspace_dim << ',' << r.shape_id << ',' << r.approx_cost << ','
        << r.exact_cost << ',' << r.ratio << ',' << r.wall_time_ms << '\n';
}

void write_csv_header(std::ostream& out) {
    out << "method,subspace_dim,shape_id,approx_cost,exact_cost,ratio,wall_time_ms\n";
}

void write_records_ndjson(std::ostream& out, const std::vector<ResultRecord>& records) {
    for (const ResultRecord& r : records) append_record_ndjson(out, r);
}

void write_records_csv(std::ostream& out, const std::vector<ResultRecord>& records) {
    write_csv_header(out);
    for (const ResultRecord& r : records) append_record_csv(out, r);
}

} // namespace sumdist
