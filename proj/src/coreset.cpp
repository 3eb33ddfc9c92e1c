#include "sumdist/coreset.hpp"

#include "sumdist/embed.hpp"
#include "sumdist/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sumdist {

namespace {

Matrix lifted_matrix(const ReducedRep& rep) {
    Matrix apx(rep.point_count(), rep.coords.cols() + 1);
    apx.leftCols(rep.coords.cols()) = rep.coords;
    apx.col(rep.coords.cols()) = rep.residuals;
    return apx;
}

WeightedCoreset identity_coreset(const ReducedRep& rep) {
    WeightedCoreset cs;
    const Index n = rep.point_count();
    cs.rows.resize(static_cast<std::size_t>(n));
    std::iota(cs.rows.begin(), cs.rows.end(), Index{0});
    cs.weights = Vector::Ones(n);
    cs.coords = rep.coords;
    cs.residuals = rep.residuals;
    cs.basis = rep.basis;
    return cs;
}

WeightedCoreset gather_coreset(const ReducedRep& rep, const std::vector<Index>& rows,
                               const Vector& weights) {
    WeightedCoreset cs;
    cs.rows = rows;
    cs.weights = weights;
    cs.basis = rep.basis;
    cs.coords.resize(static_cast<Index>(rows.size()), rep.coords.cols());
    cs.residuals.resize(static_cast<Index>(rows.size()));
    for (Index j = 0; j < cs.size(); ++j) {
        cs.coords.row(j) = rep.coords.row(rows[static_cast<std::size_t>(j)]);
        cs.residuals(j) = rep.residuals(rows[static_cast<std::size_t>(j)]);
    }
    return cs;
}

Index effective_budget(double raw, Index n, const Config& cfg) {
    const auto cap = static_cast<Index>(std::ceil(cfg.coreset_fraction * static_cast<double>(n)));
    const auto budget = static_cast<Index>(std::ceil(raw));
    return std::max<Index>(1, std::min(budget, cap));
}

} // namespace

WeightedCoreset subspace_coreset(const ReducedRep& rep, Index k, double eps, const RngConfig& rng,
                                 const Config& cfg) {
    if (k < 1) throw std::invalid_argument("subspace_coreset: k must be >= 1");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("subspace_coreset: eps in (0,1)");
    const Index n = rep.point_count();
    const double kk = static_cast<double>(k);
    const double raw = cfg.c_subspace_coreset * kk * kk * kk / std::pow(eps, 8.0) *
                       std::log2(static_cast<double>(n) + 2.0);
    const Index m = effective_budget(raw, n, cfg);
    if (m >= n) return identity_coreset(rep);

    Matrix apx = lifted_matrix(rep);
    Matrix reduced = reduce_columns(apx, cfg.rank_threshold);
    if (reduced.cols() == 0) {
        // all-zero representation: any single row carries the (zero) cost
        return gather_coreset(rep, {0}, Vector::Constant(1, static_cast<double>(n)));
    }
    LewisState state = lewis_weights(reduced, cfg.lewis_iterations);
    SamplingMatrix t = lewis_sample(state, m, rng);

    std::vector<Index> rows;
    rows.reserve(t.picks.size());
    Vector weights(t.rows());
    for (Index j = 0; j < t.rows(); ++j) {
        rows.push_back(t.picks[static_cast<std::size_t>(j)].first);
        weights(j) = t.picks[static_cast<std::size_t>(j)].second;
    }
    return gather_coreset(rep, rows, weights);
}

KMedianSeed kmedian_seed(const Eigen::Ref<const Matrix>& points, Index k, const RngConfig& rng,
                         const Config& cfg) {
    const Index n = points.rows();
    if (k < 1 || k > n) throw std::invalid_argument("kmedian_seed: need 1 <= k <= n");
    auto eng = make_engine(rng);

    // JL projection to O(log n) dimensions; skipped when already smaller
    const auto jl_dims = static_cast<Index>(
        std::ceil(cfg.c_gauss_cols * std::log2(static_cast<double>(n) + 2.0)));
    Matrix proj;
    if (points.cols() > jl_dims) {
        DenseSketch g = gaussian_sketch(points.cols(), jl_dims,
                                        1.0 / std::sqrt(static_cast<double>(jl_dims)), rng.fork(1));
        proj = points * g.entries;
    } else {
        proj = points;
    }

    // distance-proportional seeding
    std::vector<Index> centers;
    centers.reserve(static_cast<std::size_t>(k));
    {
        std::uniform_int_distribution<Index> first(0, n - 1);
        centers.push_back(first(eng));
    }
    Vector dist = (proj.rowwise() - proj.row(centers[0])).rowwise().norm();
    while (static_cast<Index>(centers.size()) < k) {
        const double total = dist.sum();
        Index next = 0;
        if (total > 0.0) {
            std::uniform_real_distribution<double> unif(0.0, total);
            double u = unif(eng);
            for (; next < n - 1; ++next) {
                if (u < dist(next)) break;
                u -= dist(next);
            }
        } else {
            std::uniform_int_distribution<Index> any(0, n - 1);
            next = any(eng);
        }
        centers.push_back(next);
        dist = dist.cwiseMin((proj.rowwise() - proj.row(next)).rowwise().norm());
    }

    // one local-search sweep over sampled candidate rows
    Matrix cdist(n, k);
    for (Index j = 0; j < k; ++j)
        cdist.col(j) = (proj.rowwise() - proj.row(centers[static_cast<std::size_t>(j)])).rowwise().norm();
    double current = cdist.rowwise().minCoeff().sum();

    Index pool = cfg.seed_candidates > 0 ? cfg.seed_candidates : 5 * k + 10;
    pool = std::min(pool, n);
    std::vector<Index> candidates(static_cast<std::size_t>(n));
    std::iota(candidates.begin(), candidates.end(), Index{0});
    std::shuffle(candidates.begin(), candidates.end(), eng);
    candidates.resize(static_cast<std::size_t>(pool));

    Vector swap_col(n);
    for (Index cand : candidates) {
        double best_gain = 0.0;
        Index best_slot = -1;
        swap_col = (proj.rowwise() - proj.row(cand)).rowwise().norm();
        for (Index slot = 0; slot < k; ++slot) {
            double cost = 0.0;
            for (Index i = 0; i < n; ++i) {
                double m = swap_col(i);
                for (Index j = 0; j < k; ++j) {
                    if (j == slot) continue;
                    m = std::min(m, cdist(i, j));
                }
                cost += m;
            }
            if (current - cost > best_gain) {
                best_gain = current - cost;
                best_slot = slot;
            }
        }
        if (best_slot >= 0) {
            centers[static_cast<std::size_t>(best_slot)] = cand;
            cdist.col(best_slot) = swap_col;
            current -= best_gain;
        }
    }

    // assignment and cost in the original space
    KMedianSeed seed;
    seed.center_rows = centers;
    seed.centers.resize(k, points.cols());
    for (Index j = 0; j < k; ++j) seed.centers.row(j) = points.row(centers[static_cast<std::size_t>(j)]);
    seed.assignment.resize(static_cast<std::size_t>(n));
    seed.cost = 0.0;
    for (Index i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        Index arg = 0;
        for (Index j = 0; j < k; ++j) {
            const double d = (points.row(i) - seed.centers.row(j)).norm();
            if (d < best) {
                best = d;
                arg = j;
            }
        }
        seed.assignment[static_cast<std::size_t>(i)] = arg;
        seed.cost += best;
    }
    return seed;
}

WeightedCoreset kmedian_coreset(const ReducedRep& rep, Index k, double eps, const RngConfig& rng,
                                const Config& cfg) {
    if (k < 1) throw std::invalid_argument("kmedian_coreset: k must be >= 1");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("kmedian_coreset: eps in (0,1)");
    const Index n = rep.point_count();
    Matrix apx = lifted_matrix(rep);

    // degenerate input: one weighted row represents everything
    if ((apx.rowwise() - apx.row(0)).rowwise().norm().maxCoeff() == 0.0)
        return gather_coreset(rep, {0}, Vector::Constant(1, static_cast<double>(n)));

    KMedianSeed seed = kmedian_seed(apx, std::min(k, n), rng.fork(1), cfg);

    // sensitivity upper bounds from the constant-factor solution
    std::vector<Index> cluster_size(static_cast<std::size_t>(seed.centers.rows()), 0);
    for (Index i = 0; i < n; ++i) ++cluster_size[seed.assignment[static_cast<std::size_t>(i)]];
    Vector sens(n);
    for (Index i = 0; i < n; ++i) {
        const double d = (apx.row(i) - seed.centers.row(seed.assignment[static_cast<std::size_t>(i)])).norm();
        const double frac = seed.cost > 0.0 ? d / seed.cost : 0.0;
        sens(i) = frac + 2.0 / static_cast<double>(cluster_size[seed.assignment[static_cast<std::size_t>(i)]]);
    }
    const double sens_total = sens.sum();

    const double kk = static_cast<double>(k);
    const double raw = cfg.c_kmedian_coreset * (kk / (eps * eps)) * sens_total *
                       std::log2(static_cast<double>(n) + 2.0);
    const Index m = effective_budget(raw, n, cfg);
    if (m >= n) return identity_coreset(rep);

    auto eng = make_engine(rng.fork(2));
    std::vector<double> cumulative(static_cast<std::size_t>(n));
    double acc = 0.0;
    for (Index i = 0; i < n; ++i) {
        acc += sens(i);
        cumulative[static_cast<std::size_t>(i)] = acc;
    }
    std::uniform_real_distribution<double> unif(0.0, acc);
    std::vector<Index> rows;
    rows.reserve(static_cast<std::size_t>(m));
    Vector weights(m);
    for (Index j = 0; j < m; ++j) {
        const double u = unif(eng);
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end()) --it;
        const auto i = static_cast<Index>(it - cumulative.begin());
        const double p = sens(i) / sens_total;
        rows.push_back(i);
        weights(j) = 1.0 / (static_cast<double>(m) * p);
    }
    return gather_coreset(rep, rows, weights);
}

double coreset_query_cost(const WeightedCoreset& cs, const Shape& s) {
    const Index m = cs.size();
    if (m == 0) return 0.0;
    if (cs.basis.ambient_dim() != shape_ambient_dim(s))
        throw std::invalid_argument("coreset_query_cost: dimension mismatch");
    double total = 0.0;
    const Index chunk = 512;
    for (Index begin = 0; begin < m; begin += chunk) {
        const Index len = std::min(chunk, m - begin);
        Matrix lifted = cs.coords.middleRows(begin, len) * cs.basis.cols.transpose();
        Vector dist = shape_distances_rows(lifted, s);
        for (Index i = 0; i < len; ++i) {
            const double v = cs.residuals(begin + i);
            total += cs.weights(begin + i) * std::sqrt(dist(i) * dist(i) + v * v);
        }
    }
    return total;
}

} // namespace sumdist
