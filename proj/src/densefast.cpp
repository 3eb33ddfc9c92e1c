#include "sumdist/densefast.hpp"

#include "sumdist/dimreduce.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace sumdist {

BlockPartition make_partition(Index n, Index b) {
    if (n < 1) throw std::invalid_argument("make_partition: n must be >= 1");
    b = std::clamp<Index>(b, 1, n);
    BlockPartition part;
    part.n = n;
    part.blocks.reserve(static_cast<std::size_t>(b));
    for (Index j = 0; j < b; ++j) {
        const Index begin = j * n / b;
        const Index end = (j + 1) * n / b;
        part.blocks.emplace_back(begin, end);
    }
    return part;
}

std::vector<Matrix> precompute_products(const PointMatrix& a,
                                        const std::vector<StackEntry>& stack) {
    std::vector<Matrix> out;
    out.reserve(stack.size());
    for (const StackEntry& entry : stack) {
        if (entry.sketch == nullptr) throw std::invalid_argument("precompute_products: null sketch");
        const Index len = entry.end - entry.begin;
        if (len < 0 || entry.begin < 0 || entry.end > a.rows() || entry.sketch->cols() != len)
            throw std::invalid_argument("precompute_products: dimension mismatch");
        Matrix block = a.block_dense(entry.begin, entry.end);
        out.emplace_back(*entry.sketch * block);
    }
    return out;
}

namespace {

Index cauchy_rows_for(Index n, Index b, const Config& cfg) {
    const double nb = static_cast<double>(n) * static_cast<double>(std::max<Index>(b, 1));
    return static_cast<Index>(std::ceil(cfg.c_cauchy_rows * std::log2(nb + 2.0)));
}

Index poly_sketch_cols_dense(Index k, double delta, const Config& cfg) {
    const double d0 = std::max(delta, cfg.trial_delta_floor);
    return static_cast<Index>(
        std::ceil(cfg.c_sketch_cols * (static_cast<double>(k) + 1.0 / (d0 * d0))));
}

/// Median of absolute values per column, summed.
double sum_column_median_abs(const Eigen::Ref<const Matrix>& m) {
    double total = 0.0;
    std::vector<double> buf(static_cast<std::size_t>(m.rows()));
    for (Index c = 0; c < m.cols(); ++c) {
        for (Index r = 0; r < m.rows(); ++r)
            buf[static_cast<std::size_t>(r)] = std::abs(m(r, c));
        total += median(buf);
    }
    return total;
}

/// Cauchy-median estimate of ||A (I-BB^T)(I-XX^T)||_{1,2} from the selection
/// sketch: sqrt(pi/2)/t * sum over columns of median(|Csel residual G|).
double dense_cost_estimate(const PointMatrix& a, const Basis& b, const Basis& xhat,
                           const DensePrecompute& pre, const RngConfig& rng, const Config& cfg) {
    if (cfg.exact_cost_selection) return residual_cost_exact(a, b, xhat);
    const auto t = static_cast<Index>(
        std::ceil(cfg.c_gauss_cols * std::log2(static_cast<double>(a.rows()) + 2.0)));
    DenseSketch g = gaussian_sketch(a.cols(), t, 1.0, rng);
    Matrix y = pre.csel_a; // r_sel x d
    if (!b.is_empty()) y -= (y * b.cols) * b.cols.transpose();
    if (!xhat.is_empty()) y -= (y * xhat.cols) * xhat.cols.transpose();
    Matrix m = y * g.entries;
    return std::sqrt(M_PI / 2.0) / static_cast<double>(t) * sum_column_median_abs(m);
}

} // namespace

DensePrecompute make_dense_precompute(const PointMatrix& a, Index b, Index k, double delta,
                                      const RngConfig& rng, const Config& cfg) {
    const Index n = a.rows();
    DensePrecompute pre;
    pre.part = make_partition(n, b);
    const Index bcount = pre.part.count();

    Index max_block = 0;
    for (Index j = 0; j < bcount; ++j) {
        auto [begin, end] = pre.part.block(j);
        max_block = std::max(max_block, end - begin);
    }

    const Index r1 = cauchy_rows_for(n, bcount, cfg);
    pre.c1 = cauchy_sketch(r1, max_block, rng.fork(1));

    std::vector<StackEntry> stack;
    std::vector<Matrix> c1_views(static_cast<std::size_t>(bcount));
    for (Index j = 0; j < bcount; ++j) {
        auto [begin, end] = pre.part.block(j);
        c1_views[static_cast<std::size_t>(j)] = pre.c1.entries.leftCols(end - begin);
        stack.push_back({&c1_views[static_cast<std::size_t>(j)], begin, end});
    }

    const Index m_hat = poly_sketch_cols_dense(k, delta, cfg);
    const double mm = static_cast<double>(m_hat);
    const auto rw = static_cast<Index>(std::ceil(cfg.c_dense_embed * mm * std::log2(mm + 2.0)));
    pre.w = cauchy_sketch(rw, n, rng.fork(2));
    pre.w.scale = 1.0 / static_cast<double>(rw);
    stack.push_back({&pre.w.entries, 0, n});

    const auto r_sel = static_cast<Index>(
        std::ceil(cfg.c_cauchy_rows * std::log2(static_cast<double>(n) + 2.0)));
    pre.csel = cauchy_sketch(r_sel, n, rng.fork(3));
    stack.push_back({&pre.csel.entries, 0, n});

    std::vector<Matrix> products = precompute_products(a, stack);
    pre.c1a_blocks.assign(products.begin(), products.begin() + bcount);
    pre.wa = pre.w.scale * products[static_cast<std::size_t>(bcount)];
    pre.csel_a = std::move(products[static_cast<std::size_t>(bcount) + 1]);
    return pre;
}

BlockEstimates block_l1_leverage_sums(const DensePrecompute& pre, const Basis& b,
                                      const Eigen::Ref<const Matrix>& sketch_t,
                                      const Eigen::Ref<const Matrix>& rinv) {
    const Index bcount = pre.part.count();
    BlockEstimates est;
    est.kind = BlockEstimateKind::L1LeverageSum;
    est.apx = Vector::Zero(bcount);
    for (Index j = 0; j < bcount; ++j) {
        const Matrix& c1a = pre.c1a_blocks[static_cast<std::size_t>(j)];
        Matrix y = c1a * sketch_t; // r1 x cols
        if (!b.is_empty()) y -= (c1a * b.cols) * (b.cols.transpose() * sketch_t);
        Matrix m = y * rinv;
        est.apx(j) = sum_column_median_abs(m);
    }
    return est;
}

BlockEstimates block_residual_norm_sums(const DensePrecompute& pre, const Basis& b,
                                        const Basis& xhat, const DenseSketch& gauss) {
    const Index bcount = pre.part.count();
    const auto t = gauss.cols();
    BlockEstimates est;
    est.kind = BlockEstimateKind::ResidualNormSum;
    est.apx = Vector::Zero(bcount);
    const double factor = std::sqrt(M_PI / 2.0) / static_cast<double>(t);
    for (Index j = 0; j < bcount; ++j) {
        const Matrix& c1a = pre.c1a_blocks[static_cast<std::size_t>(j)];
        Matrix y = c1a;
        if (!b.is_empty()) y -= (y * b.cols) * b.cols.transpose();
        if (!xhat.is_empty()) y -= (y * xhat.cols) * xhat.cols.transpose();
        Matrix m = factor * (y * gauss.entries);
        est.apx(j) = sum_column_median_abs(m);
    }
    return est;
}

SamplingMatrix two_level_sample(const BlockEstimates& estimates, const BlockPartition& part,
                                const std::function<Vector(Index)>& within_block_prob,
                                Index count, const RngConfig& rng, SampleStats* stats) {
    if (count < 1) throw std::invalid_argument("two_level_sample: count must be >= 1");
    if (estimates.apx.size() != part.count())
        throw std::invalid_argument("two_level_sample: estimate/partition mismatch");
    Vector apx = estimates.apx.cwiseMax(0.0);
    double apx_total = apx.sum();
    if (!(apx_total > 0.0)) throw std::invalid_argument("two_level_sample: all estimates are zero");

    struct BlockCache {
        Vector probs;
        std::vector<double> cumulative;
        double total = 0.0;
    };
    std::map<Index, BlockCache> cache;
    auto expand = [&](Index j) -> BlockCache& {
        auto it = cache.find(j);
        if (it == cache.end()) {
            BlockCache bc;
            bc.probs = within_block_prob(j);
            auto [begin, end] = part.block(j);
            if (bc.probs.size() != end - begin)
                throw std::invalid_argument("two_level_sample: callback size mismatch");
            bc.cumulative.resize(static_cast<std::size_t>(bc.probs.size()));
            double acc = 0.0;
            for (Index i = 0; i < bc.probs.size(); ++i) {
                acc += std::max(0.0, bc.probs(i));
                bc.cumulative[static_cast<std::size_t>(i)] = acc;
            }
            bc.total = acc;
            if (stats != nullptr) {
                stats->blocks_probed += 1;
                stats->rows_probed += bc.probs.size();
            }
            it = cache.emplace(j, std::move(bc)).first;
        }
        return it->second;
    };

    auto eng = make_engine(rng);
    SamplingMatrix sm;
    sm.source_rows = part.n;
    sm.picks.reserve(static_cast<std::size_t>(count));

    for (Index draw = 0; draw < count; ++draw) {
        Index j = -1;
        const BlockCache* bc = nullptr;
        // a block whose estimate is positive but whose exact mass is zero is
        // dropped and redrawn
        for (;;) {
            if (!(apx_total > 0.0))
                throw std::runtime_error("two_level_sample: all probed blocks have zero mass");
            std::uniform_real_distribution<double> unif(0.0, apx_total);
            double u = unif(eng);
            j = 0;
            for (; j < apx.size() - 1; ++j) {
                if (u < apx(j)) break;
                u -= apx(j);
            }
            if (apx(j) <= 0.0) continue;
            bc = &expand(j);
            if (bc->total > 0.0) break;
            apx_total -= apx(j);
            apx(j) = 0.0;
        }
        std::uniform_real_distribution<double> unif_row(0.0, bc->total);
        const double ur = unif_row(eng);
        auto it = std::upper_bound(bc->cumulative.begin(), bc->cumulative.end(), ur);
        if (it == bc->cumulative.end()) --it;
        const Index local = static_cast<Index>(it - bc->cumulative.begin());
        auto [begin, end] = part.block(j);
        const double p_hat = (apx(j) / apx_total) * (bc->probs(local) / bc->total);
        sm.picks.emplace_back(begin + local, 1.0 / (static_cast<double>(count) * p_hat));
    }
    return sm;
}

BicriteriaResult poly_approx_dense(const PointMatrix& a, const Basis& b, Index k, double delta,
                                   const DensePrecompute& pre, const RngConfig& rng,
                                   const Config& cfg, SampleStats* stats) {
    if (k < 1) throw std::invalid_argument("poly_approx_dense: k must be >= 1");
    if (k > a.cols()) throw std::invalid_argument("poly_approx_dense: k exceeds ambient dimension");
    const Index d = a.cols();
    const Index n = a.rows();
    const Index cols = poly_sketch_cols_dense(k, delta, cfg);
    const int trials = static_cast<int>(std::ceil(std::log2(1.0 / delta))) + 1;

    const auto samples_raw = static_cast<Index>(std::ceil(
        cfg.c_dense_samples * std::pow(static_cast<double>(k), 3.5) *
        std::log2(static_cast<double>(n) + 2.0)));
    const Index samples = std::min<Index>(n, std::max<Index>(1, samples_raw));

    BicriteriaResult best;
    best.cost_estimate = std::numeric_limits<double>::infinity();
    best.basis = Basis::empty(d);
    best.trials_run = trials;

    for (int trial = 0; trial < trials; ++trial) {
        const RngConfig tr = rng.fork(static_cast<std::uint64_t>(trial) + 1);
        DenseSketch st = gaussian_sketch(d, cols, 1.0, tr.fork(0));

        // conditioner from the precomputed embedding: QR of (W A)(I-BB^T)S^T
        Matrix wy = pre.wa * st.entries;
        if (!b.is_empty()) wy -= (pre.wa * b.cols) * (b.cols.transpose() * st.entries);

        // drop dependent columns (and the matching columns of S^T)
        Eigen::ColPivHouseholderQR<Matrix> rr(wy);
        const Index kmax = std::min(wy.rows(), wy.cols());
        Index rank = 0;
        {
            const double top = std::abs(rr.matrixR()(0, 0));
            for (Index i = 0; i < kmax; ++i)
                if (std::abs(rr.matrixR()(i, i)) > cfg.rank_threshold * std::max(top, 1e-300)) ++rank;
        }
        Basis xhat = Basis::empty(d);
        if (rank > 0) {
            Matrix st_sel(d, rank);
            Matrix wy_sel(wy.rows(), rank);
            const auto& perm = rr.colsPermutation().indices();
            for (Index j = 0; j < rank; ++j) {
                st_sel.col(j) = st.entries.col(perm(j));
                wy_sel.col(j) = wy.col(perm(j));
            }
            Eigen::HouseholderQR<Matrix> qr(wy_sel);
            Matrix r = qr.matrixQR().topRows(rank).triangularView<Eigen::Upper>();
            Matrix rinv = r.inverse();

            BlockEstimates est = block_l1_leverage_sums(pre, b, st_sel, rinv);
            if (est.apx.sum() > 0.0) {
                DenseSketch c = cauchy_sketch(
                    rank, cauchy_rows_for(n, pre.part.count(), cfg), tr.fork(1));
                auto within = [&](Index j) {
                    auto [begin, end] = pre.part.block(j);
                    Matrix block = a.block_dense(begin, end);
                    Matrix y = block * st_sel;
                    if (!b.is_empty()) y -= (block * b.cols) * (b.cols.transpose() * st_sel);
                    Matrix p = y * rinv * c.entries; // block rows x cauchy cols
                    Vector probs(p.rows());
                    std::vector<double> buf(static_cast<std::size_t>(p.cols()));
                    for (Index i = 0; i < p.rows(); ++i) {
                        for (Index cc = 0; cc < p.cols(); ++cc)
                            buf[static_cast<std::size_t>(cc)] = std::abs(p(i, cc));
                        probs(i) = median(buf);
                    }
                    return probs;
                };
                SamplingMatrix l =
                    two_level_sample(est, pre.part, within, samples, tr.fork(2), stats);
                Matrix rows = a.gather_rows(l.picks);
                if (!b.is_empty()) rows -= (rows * b.cols) * b.cols.transpose();
                xhat = orthonormal_residual(b, rows.transpose(), cfg.rank_threshold);
            }
        }

        const double cost = dense_cost_estimate(a, b, xhat, pre, tr.fork(3), cfg);
        if (cost < best.cost_estimate) {
            best.cost_estimate = cost;
            best.basis = std::move(xhat);
        }
    }
    return best;
}

BicriteriaResult eps_approx_dense(const PointMatrix& a, const Basis& b, const Basis& xhat,
                                  Index k, double trust_factor, double eps, double delta,
                                  const DensePrecompute& pre, const RngConfig& rng,
                                  const Config& cfg, SampleStats* stats) {
    if (k < 1) throw std::invalid_argument("eps_approx_dense: k must be >= 1");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps_approx_dense: eps in (0,1)");
    const Index n = a.rows();
    const Index d = a.cols();

    const auto t = static_cast<Index>(
        std::ceil(cfg.c_gauss_cols * std::log2(static_cast<double>(n) + 2.0)));
    DenseSketch g = gaussian_sketch(d, t, 1.0, rng.fork(0));

    BlockEstimates est = block_residual_norm_sums(pre, b, xhat, g);
    BicriteriaResult result;
    result.trials_run = 1;
    if (!(est.apx.sum() > 0.0)) {
        result.basis = xhat;
        result.cost_estimate = 0.0;
        return result;
    }

    auto within = [&](Index j) {
        auto [begin, end] = pre.part.block(j);
        Matrix block = a.block_dense(begin, end);
        Matrix y = block * g.entries;
        if (!b.is_empty()) {
            Matrix bb = block * b.cols;
            y -= bb * (b.cols.transpose() * g.entries);
            if (!xhat.is_empty()) {
                Matrix bx = block * xhat.cols - bb * (b.cols.transpose() * xhat.cols);
                y -= bx * (xhat.cols.transpose() * g.entries);
            }
        } else if (!xhat.is_empty()) {
            y -= (block * xhat.cols) * (xhat.cols.transpose() * g.entries);
        }
        return Vector(y.rowwise().norm());
    };

    const Index s = eps_sample_count(n, k, trust_factor, eps, delta, cfg);
    SamplingMatrix sm = two_level_sample(est, pre.part, within, s, rng.fork(1), stats);

    std::set<Index> distinct;
    for (const auto& [idx, scale] : sm.picks) distinct.insert(idx);
    std::vector<std::pair<Index, double>> picks;
    picks.reserve(distinct.size());
    for (Index i : distinct) picks.emplace_back(i, 1.0);
    Matrix sampled = a.gather_rows(picks);

    Basis u_first = orthonormal_residual(b, xhat.cols, cfg.rank_threshold);
    Basis u_rest = orthonormal_residual(concat(b, u_first), sampled.transpose(), cfg.rank_threshold);
    result.basis = concat(u_first, u_rest);
    result.cost_estimate = dense_cost_estimate(a, b, result.basis, pre, rng.fork(2), cfg);
    return result;
}

Basis dimension_reduction_dense(const PointMatrix& a, Index k, double eps, const RngConfig& rng,
                                const Config& cfg, SampleStats* stats,
                                std::vector<Basis>* snapshots) {
    if (k < 1) throw std::invalid_argument("dimension_reduction_dense: k must be >= 1");
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("dimension_reduction_dense: eps in (0,1)");
    const Index n = a.rows();
    const Index d = a.cols();
    const auto b_raw = static_cast<Index>(
        std::ceil(std::pow(static_cast<double>(k), 3.5) / (eps * eps * eps)));
    const Index bcount = std::clamp<Index>(b_raw, 1, n);
    const double delta = eps / 10.0;

    const auto imax = static_cast<Index>(std::floor(10.0 / eps)) + 1;
    Index istar = imax;
    if (!cfg.deterministic_istar) {
        auto eng = make_engine(rng.fork(0xd1));
        istar = std::uniform_int_distribution<Index>(1, imax)(eng);
    }

    Basis basis = Basis::empty(d);
    const double total = a.row_norms().sum();
    for (Index it = 0; it < istar; ++it) {
        if (basis.subspace_dim() >= d) break;
        if (residual_row_norms(a, basis).sum() <= cfg.residual_stop * total) break;
        const RngConfig round = rng.fork(static_cast<std::uint64_t>(it) + 1);
        DensePrecompute pre = make_dense_precompute(a, bcount, k, delta, round.fork(0), cfg);
        BicriteriaResult xhat = poly_approx_dense(a, basis, k, delta, pre, round.fork(1), cfg, stats);
        BicriteriaResult u = eps_approx_dense(a, basis, xhat.basis, k, cfg.K_default, eps, delta,
                                              pre, round.fork(2), cfg, stats);
        basis = concat(basis, u.basis);
        if (snapshots != nullptr) snapshots->push_back(basis);
    }
    return basis;
}

} // namespace sumdist
