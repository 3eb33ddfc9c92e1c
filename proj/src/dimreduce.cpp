#include "sumdist/dimreduce.hpp"

#include "sumdist/sketch.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <optional>
#include <stdexcept>

namespace sumdist {

// ---------------------------------------------------------------------------
// Shapes
// ---------------------------------------------------------------------------

Index shape_ambient_dim(const Shape& s) {
    if (const auto* c = std::get_if<CentersShape>(&s)) return c->points.cols();
    if (const auto* v = std::get_if<SubspaceShape>(&s)) return v->basis.ambient_dim();
    const auto& u = std::get<UnionOfSubspacesShape>(s);
    if (u.parts.empty()) throw std::invalid_argument("union shape needs at least one subspace");
    return u.parts.front().ambient_dim();
}

Vector shape_distances_rows(const Eigen::Ref<const Matrix>& pts, const Shape& s) {
    if (pts.cols() != shape_ambient_dim(s))
        throw std::invalid_argument("shape_distances_rows: dimension mismatch");
    const Index m = pts.rows();
    if (const auto* c = std::get_if<CentersShape>(&s)) {
        if (c->points.rows() == 0) throw std::invalid_argument("centers shape is empty");
        Vector sq = pts.rowwise().squaredNorm();
        Vector c2 = c->points.rowwise().squaredNorm();
        Matrix cross = pts * c->points.transpose(); // m x k
        Vector best = Vector::Constant(m, std::numeric_limits<double>::infinity());
        for (Index j = 0; j < c->points.rows(); ++j) {
            Vector d2 = sq.array() + c2(j) - 2.0 * cross.col(j).array();
            best = best.cwiseMin(d2.cwiseMax(0.0));
        }
        return best.cwiseSqrt();
    }
    if (const auto* v = std::get_if<SubspaceShape>(&s)) {
        Vector sq = pts.rowwise().squaredNorm();
        if (v->basis.is_empty()) return sq.cwiseSqrt();
        Vector proj = (pts * v->basis.cols).rowwise().squaredNorm();
        return (sq - proj).cwiseMax(0.0).cwiseSqrt();
    }
    const auto& u = std::get<UnionOfSubspacesShape>(s);
    Vector best = Vector::Constant(m, std::numeric_limits<double>::infinity());
    for (const Basis& part : u.parts) {
        Vector sq = pts.rowwise().squaredNorm();
        Vector d = part.is_empty()
                       ? Vector(sq.cwiseSqrt())
                       : Vector((sq - (pts * part.cols).rowwise().squaredNorm()).cwiseMax(0.0).cwiseSqrt());
        best = best.cwiseMin(d);
    }
    return best;
}

double shape_distance(const Eigen::Ref<const Vector>& point, const Shape& s) {
    Matrix row = point.transpose();
    return shape_distances_rows(row, s)(0);
}

double exact_cost(const PointMatrix& a, const Shape& s) {
    if (a.cols() != shape_ambient_dim(s))
        throw std::invalid_argument("exact_cost: dimension mismatch");
    const Index n = a.rows();
    if (n == 0) return 0.0;
    Vector sq = a.row_norms().array().square();
    if (const auto* c = std::get_if<CentersShape>(&s)) {
        Vector c2 = c->points.rowwise().squaredNorm();
        Matrix cross = a.multiply(c->points.transpose());
        Vector best = Vector::Constant(n, std::numeric_limits<double>::infinity());
        for (Index j = 0; j < c->points.rows(); ++j) {
            Vector d2 = sq.array() + c2(j) - 2.0 * cross.col(j).array();
            best = best.cwiseMin(d2.cwiseMax(0.0));
        }
        return best.cwiseSqrt().sum();
    }
    if (const auto* v = std::get_if<SubspaceShape>(&s)) {
        if (v->basis.is_empty()) return sq.cwiseSqrt().sum();
        Vector proj = a.multiply(v->basis.cols).rowwise().squaredNorm();
        return (sq - proj).cwiseMax(0.0).cwiseSqrt().sum();
    }
    const auto& u = std::get<UnionOfSubspacesShape>(s);
    Vector best = Vector::Constant(n, std::numeric_limits<double>::infinity());
    for (const Basis& part : u.parts) {
        Vector d = part.is_empty()
                       ? Vector(sq.cwiseSqrt())
                       : Vector((sq - a.multiply(part.cols).rowwise().squaredNorm()).cwiseMax(0.0).cwiseSqrt());
        best = best.cwiseMin(d);
    }
    return best.sum();
}

// ---------------------------------------------------------------------------
// Reduced representation
// ---------------------------------------------------------------------------

double reduced_cost(const ReducedRep& rep, const Shape& s) {
    const Index n = rep.point_count();
    if (n == 0) return 0.0;
    if (rep.basis.ambient_dim() != shape_ambient_dim(s))
        throw std::invalid_argument("reduced_cost: dimension mismatch");
    double total = 0.0;
    const Index chunk = 512;
    for (Index begin = 0; begin < n; begin += chunk) {
        const Index len = std::min(chunk, n - begin);
        Matrix lifted = rep.coords.middleRows(begin, len) * rep.basis.cols.transpose();
        Vector dist = shape_distances_rows(lifted, s);
        for (Index i = 0; i < len; ++i) {
            const double v = rep.residuals(begin + i);
            total += std::sqrt(dist(i) * dist(i) + v * v);
        }
    }
    return total;
}

Vector residual_row_norms(const PointMatrix& a, const Basis& b) {
    Vector sq = a.row_norms().array().square();
    if (b.is_empty()) return sq.cwiseSqrt();
    Vector proj = a.multiply(b.cols).rowwise().squaredNorm();
    return (sq - proj).cwiseMax(0.0).cwiseSqrt();
}

Basis dimension_reduction(const PointMatrix& a, Index k, double eps, const RngConfig& rng,
                          const Config& cfg, std::vector<Basis>* snapshots) {
    if (k < 1) throw std::invalid_argument("dimension_reduction: k must be >= 1");
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("dimension_reduction: eps in (0,1)");
    const Index d = a.cols();
    const auto imax = static_cast<Index>(std::floor(10.0 / eps)) + 1;
    Index istar = imax;
    if (!cfg.deterministic_istar) {
        auto eng = make_engine(rng.fork(0xd1));
        istar = std::uniform_int_distribution<Index>(1, imax)(eng);
    }

    Basis b = Basis::empty(d);
    const double total = a.row_norms().sum();
    for (Index it = 0; it < istar; ++it) {
        if (b.subspace_dim() >= d) break;
        if (residual_row_norms(a, b).sum() <= cfg.residual_stop * total) break;
        const RngConfig round = rng.fork(static_cast<std::uint64_t>(it) + 1);
        BicriteriaResult xhat = poly_approx(a, b, k, eps / 100.0, round.fork(0), cfg);
        BicriteriaResult u = eps_approx(a, b, xhat.basis, k, cfg.K_default, eps, eps / 100.0,
                                        round.fork(1), cfg);
        b = concat(b, u.basis);
        if (snapshots != nullptr) snapshots->push_back(b);
    }
    return b;
}

namespace {

struct RowSketchView {
    Matrix sb;    // r x c, CountSketch applied to B
    Matrix pinv;  // c x r, pseudoinverse of sb
    Matrix sa;    // r x n, CountSketch applied to A^T
};

struct RowSvd {
    Vector d;  // singular values of [SB | Sa_i]
    Matrix v;  // right singular vectors, (c+1) x (c+1)
};

/// Accepts a candidate sketch when at least half of the others see the same
/// geometry: all singular values of D_j V_j^T V_j' D_j'^{-1} within the window.
bool sketches_consistent(const RowSvd& lhs, const RowSvd& rhs, double tol) {
    const Index m = lhs.d.size();
    const double floor_sv = 1e-13 * std::max(lhs.d(0), rhs.d(0));
    for (Index i = 0; i < m; ++i)
        if (rhs.d(i) <= floor_sv || lhs.d(i) <= floor_sv) return false;
    Matrix t = lhs.d.asDiagonal() * lhs.v.transpose() * rhs.v * rhs.d.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Matrix> svd(t);
    const auto& sv = svd.singularValues();
    return sv.maxCoeff() <= 1.0 + tol && sv.minCoeff() >= 1.0 - tol;
}

} // namespace

ReducedRep extract_reduced_rep(const PointMatrix& a, const Basis& b, double eps,
                               const RngConfig& rng, const Config& cfg) {
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("extract_reduced_rep: eps in (0,1)");
    const Index n = a.rows();
    const Index d = a.cols();
    const Index c = b.subspace_dim();

    ReducedRep rep;
    rep.basis = b;
    rep.eps = eps;
    rep.seed = rng.seed;
    rep.coords = Matrix::Zero(n, c);
    rep.residuals = Vector::Zero(n);

    auto exact_row = [&](Index i) {
        Vector ai = a.row(i);
        if (c > 0) rep.coords.row(i) = (b.cols.transpose() * ai).transpose();
        const double sq = ai.squaredNorm() - rep.coords.row(i).squaredNorm();
        rep.residuals(i) = std::sqrt(std::max(0.0, sq));
    };

    const auto r_cs = static_cast<Index>(
        std::ceil(cfg.c_countsketch_rows * static_cast<double>((c + 1) * (c + 1))));
    if (c == 0 || r_cs >= d) {
        // a sketch at least as large as the ambient dimension buys nothing;
        // the exact projection is cheaper and satisfies the contract exactly
        if (c > 0) rep.coords = a.multiply(b.cols);
        Vector sq = a.row_norms().array().square();
        Vector proj = c > 0 ? Vector(rep.coords.rowwise().squaredNorm()) : Vector(Vector::Zero(n));
        rep.residuals = (sq - proj).cwiseMax(0.0).cwiseSqrt();
        return rep;
    }

    rep.sketch_path = true;
    const auto t = static_cast<Index>(
        std::ceil(cfg.c_gauss_cols * std::log2(static_cast<double>(n) + 2.0)));
    std::vector<RowSketchView> views;
    views.reserve(static_cast<std::size_t>(t));
    for (Index j = 0; j < t; ++j) {
        CountSketch sk = make_countsketch(r_cs, d, rng.fork(0x100 + static_cast<std::uint64_t>(j)));
        RowSketchView view;
        view.sb = countsketch_apply(sk, b.cols);
        view.pinv = pseudo_inverse(view.sb, cfg.sv_cutoff);
        view.sa = countsketch_apply_transpose(sk, a);
        views.push_back(std::move(view));
    }

    const double tol = eps * eps / cfg.c_check;
    const Index needed = (t - 1 + 1) / 2; // at least half of the others
    std::vector<std::optional<RowSvd>> svds(static_cast<std::size_t>(t));
    Matrix stacked(r_cs, c + 1);

    for (Index i = 0; i < n; ++i) {
        for (auto& entry : svds) entry.reset();
        auto svd_for = [&](Index j) -> const RowSvd& {
            auto& slot = svds[static_cast<std::size_t>(j)];
            if (!slot) {
                stacked.leftCols(c) = views[static_cast<std::size_t>(j)].sb;
                stacked.col(c) = views[static_cast<std::size_t>(j)].sa.col(i);
                Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeThinV);
                slot = RowSvd{svd.singularValues(), svd.matrixV()};
            }
            return *slot;
        };

        bool accepted = false;
        for (Index j = 0; j < t && !accepted; ++j) {
            const RowSvd& mine = svd_for(j);
            Index agree = 0;
            for (Index other = 0; other < t && agree < needed; ++other) {
                if (other == j) continue;
                if (sketches_consistent(mine, svd_for(other), tol)) ++agree;
            }
            if (agree >= needed) {
                const auto& view = views[static_cast<std::size_t>(j)];
                Vector sa = view.sa.col(i);
                Vector xi = view.pinv * sa;
                rep.coords.row(i) = xi.transpose();
                rep.residuals(i) = (sa - view.sb * xi).norm();
                accepted = true;
            }
        }
        if (!accepted) {
            exact_row(i);
            ++rep.fallback_rows;
        }
    }
    return rep;
}

ReducedRep complete_dim_reduce(const PointMatrix& a, Index k, double eps, const RngConfig& rng,
                               const Config& cfg) {
    const double inner = eps * eps / cfg.c_eps_inner;
    Basis b = dimension_reduction(a, k, inner, rng.fork(1), cfg);
    ReducedRep rep = extract_reduced_rep(a, b, eps, rng.fork(2), cfg);
    rep.seed = rng.seed;
    return rep;
}

} // namespace sumdist
