#include "sumdist/bicriteria.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace sumdist {

Matrix residual_apply(const PointMatrix& a, const Basis& b, const Eigen::Ref<const Matrix>& m) {
    if (m.rows() != a.cols())
        throw std::invalid_argument("residual_apply: dimension mismatch");
    Matrix am = a.multiply(m);
    if (b.is_empty()) return am;
    if (b.ambient_dim() != a.cols())
        throw std::invalid_argument("residual_apply: basis ambient dimension mismatch");
    Matrix ab = a.multiply(b.cols);
    am.noalias() -= ab * (b.cols.transpose() * m);
    return am;
}

Matrix residual_apply2(const PointMatrix& a, const Basis& b, const Basis& xhat,
                       const Eigen::Ref<const Matrix>& m) {
    Matrix first = residual_apply(a, b, m);
    if (xhat.is_empty()) return first;
    // A(I-BB^T) X = A X when X is already orthogonal to B
    Matrix ax = residual_apply(a, b, xhat.cols);
    first.noalias() -= ax * (xhat.cols.transpose() * m);
    return first;
}

double residual_cost_exact(const PointMatrix& a, const Basis& b, const Basis& xhat) {
    Matrix residual = residual_apply2(a, b, xhat, Matrix::Identity(a.cols(), a.cols()));
    return residual.rowwise().norm().sum();
}

double residual_cost_estimate(const PointMatrix& a, const Basis& b, const Basis& xhat,
                              const RngConfig& rng, const Config& cfg) {
    if (cfg.exact_cost_selection) return residual_cost_exact(a, b, xhat);
    const double n = static_cast<double>(a.rows());
    const auto t = static_cast<Index>(std::ceil(cfg.c_gauss_cols * std::log2(n + 2.0)));
    DenseSketch g = gaussian_sketch(a.cols(), t, 1.0 / std::sqrt(static_cast<double>(t)), rng);
    Matrix m = residual_apply2(a, b, xhat, g.entries);
    return m.rowwise().norm().sum();
}

namespace {

Index poly_sketch_cols(Index k, double delta, const Config& cfg) {
    // The per-trial failure probability only needs to be a constant; the
    // best-of-trials selection amplifies it to the requested delta.
    const double d0 = std::max(delta, cfg.trial_delta_floor);
    return static_cast<Index>(std::ceil(cfg.c_sketch_cols * (static_cast<double>(k) + 1.0 / (d0 * d0))));
}

} // namespace

BicriteriaResult poly_approx(const PointMatrix& a, const Basis& b, Index k, double delta,
                             const RngConfig& rng, const Config& cfg) {
    if (k < 1) throw std::invalid_argument("poly_approx: k must be >= 1");
    if (k > a.cols()) throw std::invalid_argument("poly_approx: k exceeds ambient dimension");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("poly_approx: delta in (0,1)");

    const Index d = a.cols();
    const Index cols = poly_sketch_cols(k, delta, cfg);
    const int trials = static_cast<int>(std::ceil(std::log2(1.0 / delta))) + 1;

    BicriteriaResult best;
    best.cost_estimate = std::numeric_limits<double>::infinity();
    best.basis = Basis::empty(d);
    best.trials_run = trials;

    for (int trial = 0; trial < trials; ++trial) {
        const RngConfig tr = rng.fork(static_cast<std::uint64_t>(trial));
        DenseSketch st = gaussian_sketch(d, cols, 1.0, tr.fork(0));
        Matrix sketched = residual_apply(a, b, st.entries); // n x cols

        Basis xhat = Basis::empty(d);
        if (sketched.cwiseAbs().maxCoeff() > 0.0) {
            L1Embedding emb;
            try {
                emb = l1_embedding(sketched, tr.fork(1), EmbeddingPath::LewisSampling, cfg);
            } catch (const std::invalid_argument&) {
                // residual numerically zero in the sketched directions
                emb.op = SamplingMatrix{{{0, 1.0}}, sketched.rows()};
            }
            const SamplingMatrix* sm = std::get_if<SamplingMatrix>(&emb.op);
            if (sm == nullptr)
                throw std::logic_error("poly_approx: expected a sampling-based embedding");
            // rows of A(I-BB^T) indexed by the sample; scales do not change
            // the row space
            Matrix rows = a.gather_rows(sm->picks);
            if (!b.is_empty()) rows.noalias() -= (rows * b.cols) * b.cols.transpose();
            xhat = orthonormal_residual(b, rows.transpose(), cfg.rank_threshold);
        }

        const double cost = residual_cost_estimate(a, b, xhat, tr.fork(2), cfg);
        if (cost < best.cost_estimate) {
            best.cost_estimate = cost;
            best.basis = std::move(xhat);
        }
    }
    return best;
}

Index eps_sample_count(Index n, Index k, double trust_factor, double eps, double delta,
                       const Config& cfg) {
    const double kk = static_cast<double>(k);
    const double raw = cfg.c_eps_samples * trust_factor * kk * kk * kk / (eps * eps) *
                       std::log2(1.0 / delta + 2.0);
    // sampling more rows than exist is pointless
    return std::min<Index>(n, static_cast<Index>(std::ceil(raw)));
}

BicriteriaResult eps_approx(const PointMatrix& a, const Basis& b, const Basis& xhat, Index k,
                            double trust_factor, double eps, double delta, const RngConfig& rng,
                            const Config& cfg) {
    if (k < 1) throw std::invalid_argument("eps_approx: k must be >= 1");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps_approx: eps in (0,1)");
    const Index n = a.rows();
    const Index d = a.cols();

    const auto t = static_cast<Index>(
        std::ceil(cfg.c_gauss_cols * std::log2(static_cast<double>(n) + 2.0)));
    DenseSketch g = gaussian_sketch(d, t, 1.0 / std::sqrt(static_cast<double>(t)), rng.fork(0));
    Matrix m = residual_apply2(a, b, xhat, g.entries);
    Vector p = m.rowwise().norm();
    const double total = p.sum();

    BicriteriaResult result;
    result.trials_run = 1;
    if (total == 0.0) {
        // already exact: the current solution has zero residual
        result.basis = xhat;
        result.cost_estimate = 0.0;
        return result;
    }

    const Index s = eps_sample_count(n, k, trust_factor, eps, delta, cfg);
    auto eng = make_engine(rng.fork(1));
    std::uniform_real_distribution<double> unif(0.0, total);
    std::vector<double> cumulative(static_cast<std::size_t>(n));
    double acc = 0.0;
    for (Index i = 0; i < n; ++i) {
        acc += p(i);
        cumulative[static_cast<std::size_t>(i)] = acc;
    }
    std::set<Index> distinct;
    for (Index j = 0; j < s; ++j) {
        const double u = unif(eng);
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end()) --it;
        distinct.insert(static_cast<Index>(it - cumulative.begin()));
    }

    // span of [xhat | sampled rows] with B projected out; duplicates do not
    // enlarge the span, so only distinct rows are assembled
    std::vector<std::pair<Index, double>> picks;
    picks.reserve(distinct.size());
    for (Index i : distinct) picks.emplace_back(i, 1.0);
    Matrix sampled = a.gather_rows(picks); // |S| x d
    Basis u_first = orthonormal_residual(b, xhat.cols, cfg.rank_threshold);
    Basis u_rest = orthonormal_residual(concat(b, u_first), sampled.transpose(), cfg.rank_threshold);
    result.basis = concat(u_first, u_rest);
    result.cost_estimate = residual_cost_estimate(a, b, result.basis, rng.fork(2), cfg);
    return result;
}

} // namespace sumdist
