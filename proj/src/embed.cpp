#include "sumdist/embed.hpp"

#include <Eigen/QR>

#include <cmath>
#include <stdexcept>

namespace sumdist {

namespace {

/// Inverse-CDF sampling over nonnegative weights. Deterministic given the
/// engine state; avoids std::discrete_distribution's per-construction setup.
class WeightedSampler {
  public:
    explicit WeightedSampler(const Vector& weights) : cumulative_(weights.size()) {
        double acc = 0.0;
        for (Index i = 0; i < weights.size(); ++i) {
            if (weights(i) < 0.0 || !std::isfinite(weights(i)))
                throw std::invalid_argument("sampling weights must be finite and nonnegative");
            acc += weights(i);
            cumulative_[static_cast<std::size_t>(i)] = acc;
        }
        total_ = acc;
        if (!(total_ > 0.0)) throw std::invalid_argument("sampling weights are all zero");
    }

    [[nodiscard]] double total() const { return total_; }

    Index operator()(std::mt19937_64& eng) const {
        std::uniform_real_distribution<double> unif(0.0, total_);
        const double u = unif(eng);
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it == cumulative_.end()) --it;
        return static_cast<Index>(it - cumulative_.begin());
    }

  private:
    std::vector<double> cumulative_;
    double total_ = 0.0;
};

/// l2 leverage scores: squared row norms of the thin Q factor.
Vector l2_leverage_scores(const Eigen::Ref<const Matrix>& m) {
    Eigen::HouseholderQR<Matrix> qr(m);
    Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
    return q.rowwise().squaredNorm();
}

} // namespace

Matrix SamplingMatrix::apply(const Eigen::Ref<const Matrix>& m) const {
    if (m.rows() != source_rows)
        throw std::invalid_argument("SamplingMatrix::apply: dimension mismatch");
    Matrix out(rows(), m.cols());
    for (Index j = 0; j < rows(); ++j) {
        const auto& [idx, scale] = picks[static_cast<std::size_t>(j)];
        out.row(j) = scale * m.row(idx);
    }
    return out;
}

Matrix reduce_columns(const Eigen::Ref<const Matrix>& m, double rel_tol) {
    if (m.cols() == 0) return m;
    Eigen::ColPivHouseholderQR<Matrix> qr(m);
    const Matrix& r = qr.matrixR();
    const double top = std::abs(r(0, 0));
    if (top == 0.0) return Matrix(m.rows(), 0);
    Index rank = 0;
    const Index kmax = std::min(m.rows(), m.cols());
    for (Index i = 0; i < kmax; ++i)
        if (std::abs(r(i, i)) > rel_tol * top) ++rank;
    if (rank == m.cols()) return m;
    Matrix out(m.rows(), rank);
    const auto& perm = qr.colsPermutation().indices();
    for (Index j = 0; j < rank; ++j) out.col(j) = m.col(perm(j));
    return out;
}

LewisState lewis_weights(const Eigen::Ref<const Matrix>& m, int iterations) {
    const Index n = m.rows();
    const Index d = m.cols();
    if (d == 0 || n < d) throw std::invalid_argument("lewis_weights: need n >= m >= 1");
    {
        Eigen::ColPivHouseholderQR<Matrix> qr(m);
        qr.setThreshold(1e-10);
        if (qr.rank() < d)
            throw std::invalid_argument("lewis_weights: matrix is rank deficient; "
                                        "reduce columns first");
    }
    if (iterations <= 0)
        iterations = static_cast<int>(std::ceil(std::log2(std::log2(static_cast<double>(n) + 4.0)))) + 4;

    LewisState state;
    state.weights = Vector::Ones(n);
    state.iterations = iterations;
    for (int it = 0; it < iterations; ++it) {
        Matrix scaled = state.weights.array().rsqrt().matrix().asDiagonal() * m;
        Vector tau = l2_leverage_scores(scaled);
        state.weights = (state.weights.array() * tau.array()).sqrt().matrix();
        // guard against collapse on degenerate rows (e.g. exact zero rows)
        for (Index i = 0; i < n; ++i)
            if (!(state.weights(i) > 0.0)) state.weights(i) = 1e-300;
    }
    return state;
}

SamplingMatrix lewis_sample(const LewisState& state, Index count, const RngConfig& rng) {
    if (count < 1) throw std::invalid_argument("lewis_sample: count must be >= 1");
    WeightedSampler sampler(state.weights);
    auto eng = make_engine(rng);
    SamplingMatrix sm;
    sm.source_rows = state.weights.size();
    sm.picks.reserve(static_cast<std::size_t>(count));
    const double total = sampler.total();
    for (Index j = 0; j < count; ++j) {
        const Index i = sampler(eng);
        const double p = state.weights(i) / total;
        sm.picks.emplace_back(i, 1.0 / (static_cast<double>(count) * p));
    }
    return sm;
}

L1LeverageScores l1_leverage_scores(const Eigen::Ref<const Matrix>& m,
                                    const Eigen::Ref<const Matrix>& pi_m) {
    if (pi_m.cols() != m.cols())
        throw std::invalid_argument("l1_leverage_scores: column mismatch");
    Eigen::ColPivHouseholderQR<Matrix> qr(pi_m);
    qr.setThreshold(1e-10);
    if (qr.rank() < pi_m.cols())
        throw std::invalid_argument("l1_leverage_scores: sketched matrix is rank deficient");
    Eigen::HouseholderQR<Matrix> plain(pi_m);
    Matrix r = plain.matrixQR().topRows(pi_m.cols()).triangularView<Eigen::Upper>();
    Matrix rinv = r.inverse();
    L1LeverageScores out;
    out.conditioner = std::move(rinv);
    out.scores = (m * out.conditioner).cwiseAbs().rowwise().sum();
    return out;
}

SamplingMatrix leverage_sample(const L1LeverageScores& scores, Index count, double gamma,
                               const RngConfig& rng) {
    if (count < 1) throw std::invalid_argument("leverage_sample: count must be >= 1");
    if (!(gamma > 0.0)) throw std::invalid_argument("leverage_sample: gamma must be > 0");
    WeightedSampler sampler(scores.scores);
    auto eng = make_engine(rng);
    SamplingMatrix sm;
    sm.source_rows = scores.scores.size();
    sm.picks.reserve(static_cast<std::size_t>(count));
    const double total = sampler.total();
    for (Index j = 0; j < count; ++j) {
        const Index i = sampler(eng);
        const double p = scores.scores(i) / total;
        sm.picks.emplace_back(i, 1.0 / (static_cast<double>(count) * p));
    }
    return sm;
}

Matrix L1Embedding::apply(const Eigen::Ref<const Matrix>& m) const {
    if (std::holds_alternative<SamplingMatrix>(op))
        return std::get<SamplingMatrix>(op).apply(m);
    const DenseSketch& sk = std::get<DenseSketch>(op);
    if (sk.cols() != m.rows())
        throw std::invalid_argument("L1Embedding::apply: dimension mismatch");
    return sk.scale * (sk.entries * m);
}

Index L1Embedding::rows() const {
    if (std::holds_alternative<SamplingMatrix>(op))
        return std::get<SamplingMatrix>(op).rows();
    return std::get<DenseSketch>(op).rows();
}

Index lewis_sample_count(Index m_cols, const Config& cfg) {
    const double m = static_cast<double>(std::max<Index>(m_cols, 1));
    return static_cast<Index>(std::ceil(cfg.c_lewis_samples * m * std::log2(m + 2.0)));
}

L1Embedding l1_embedding(const Eigen::Ref<const Matrix>& m, const RngConfig& rng,
                         EmbeddingPath path, const Config& cfg) {
    if (m.cols() > m.rows())
        throw std::invalid_argument("l1_embedding: need m <= n");
    Matrix reduced = reduce_columns(m, cfg.rank_threshold);
    if (reduced.cols() == 0)
        throw std::invalid_argument("l1_embedding: zero matrix has no embedding");

    auto certify = [&](const L1Embedding& emb, const RngConfig& dir_rng) {
        auto eng = make_engine(dir_rng);
        std::normal_distribution<double> normal(0.0, 1.0);
        double alpha = std::numeric_limits<double>::infinity();
        double beta = 0.0;
        Matrix sketched = emb.apply(m);
        for (int t = 0; t < cfg.embed_test_directions; ++t) {
            Vector x(m.cols());
            for (Index i = 0; i < x.size(); ++i) x(i) = normal(eng);
            const double denom = (m * x).cwiseAbs().sum();
            if (denom == 0.0) continue;
            const double ratio = (sketched * x).cwiseAbs().sum() / denom;
            alpha = std::min(alpha, ratio);
            beta = std::max(beta, ratio);
        }
        return std::make_pair(alpha, beta);
    };

    const double alpha_min = path == EmbeddingPath::LewisSampling ? cfg.embed_alpha_min
                                                                  : cfg.cauchy_alpha_min;
    const double beta_max = path == EmbeddingPath::LewisSampling ? cfg.embed_beta_max
                                                                 : cfg.cauchy_beta_max;

    const int attempts = std::max(1, cfg.embed_retries);
    L1Embedding best;
    double best_spread = std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt < attempts; ++attempt) {
        L1Embedding emb;
        const RngConfig r = rng.fork(static_cast<std::uint64_t>(attempt));
        if (path == EmbeddingPath::LewisSampling) {
            LewisState state = lewis_weights(reduced, cfg.lewis_iterations);
            emb.op = lewis_sample(state, lewis_sample_count(reduced.cols(), cfg), r.fork(1));
        } else {
            const double mm = static_cast<double>(reduced.cols());
            const auto rows = static_cast<Index>(
                std::ceil(cfg.c_dense_embed * mm * std::log2(mm + 2.0)));
            DenseSketch sk = cauchy_sketch(rows, m.rows(), r.fork(1));
            sk.scale = 1.0 / static_cast<double>(rows);
            emb.op = std::move(sk);
        }
        auto [alpha, beta] = certify(emb, r.fork(2));
        emb.alpha = alpha;
        emb.beta = beta;
        if (alpha >= alpha_min && beta <= beta_max) return emb;
        const double spread = beta / std::max(alpha, 1e-300);
        if (spread < best_spread) {
            best_spread = spread;
            best = std::move(emb);
        }
    }
    throw std::runtime_error("l1_embedding: certification failed after retries (best alpha=" +
                             std::to_string(best.alpha) + ", beta=" + std::to_string(best.beta) +
                             ")");
}

} // namespace sumdist
