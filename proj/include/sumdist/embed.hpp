#pragma once

#include "sumdist/config.hpp"
#include "sumdist/point_matrix.hpp"
#include "sumdist/rng.hpp"
#include "sumdist/sketch.hpp"

#include <utility>
#include <variant>
#include <vector>

namespace sumdist {

/// Sampling-and-scaling sketch: row j of the sketched matrix is
/// scale_j * M[index_j, :]. Duplicate indices are kept (multiset semantics).
struct SamplingMatrix {
    std::vector<std::pair<Index, double>> picks;
    Index source_rows = 0;

    [[nodiscard]] Index rows() const { return static_cast<Index>(picks.size()); }
    [[nodiscard]] Matrix apply(const Eigen::Ref<const Matrix>& m) const;
};

struct LewisState {
    Vector weights;
    int iterations = 0;
};

struct L1LeverageScores {
    Vector scores;      // ||M_i R^{-1}||_1 per row
    Matrix conditioner; // R^{-1}
};

/// Approximate l1 Lewis weights by the fixed-point iteration
/// w <- sqrt(w .* tau(W^{-1/2} M)) starting from all-ones, where tau are
/// l2 leverage scores. Requires full column rank.
LewisState lewis_weights(const Eigen::Ref<const Matrix>& m, int iterations = 0);

/// `count` i.i.d. picks with probability p_i = w_i / sum(w), scale 1/(count*p_i).
SamplingMatrix lewis_sample(const LewisState& state, Index count, const RngConfig& rng);

/// QR-factor pi_m (an l1 embedding already applied to m); scores are the l1
/// norms of the rows of m * R^{-1}.
L1LeverageScores l1_leverage_scores(const Eigen::Ref<const Matrix>& m,
                                    const Eigen::Ref<const Matrix>& pi_m);

/// N i.i.d. picks from p_i proportional to scores, scale 1/(N*p_i). gamma is
/// the caller's claimed lower bound p_i >= gamma * l_i / sum(l); it is carried
/// through for diagnostics only.
SamplingMatrix leverage_sample(const L1LeverageScores& scores, Index count, double gamma,
                               const RngConfig& rng);

enum class EmbeddingPath { LewisSampling, DenseCauchy };

/// An (alpha, beta) l1 subspace embedding together with its empirically
/// certified distortion pair.
struct L1Embedding {
    std::variant<SamplingMatrix, DenseSketch> op;
    double alpha = 0.0;
    double beta = 0.0;

    [[nodiscard]] Matrix apply(const Eigen::Ref<const Matrix>& m) const;
    [[nodiscard]] Index rows() const;
};

/// Builds an l1 subspace embedding for colspace(m) and certifies (alpha, beta)
/// on random test directions. Lewis-weight sampling is the default; the dense
/// path uses a Cauchy sketch scaled by 1/rows.
L1Embedding l1_embedding(const Eigen::Ref<const Matrix>& m, const RngConfig& rng,
                         EmbeddingPath path = EmbeddingPath::LewisSampling,
                         const Config& cfg = {});

/// Drops numerically dependent columns of m via rank-revealing QR and returns
/// the reduced matrix (same column space). Lewis iteration runs on this.
Matrix reduce_columns(const Eigen::Ref<const Matrix>& m, double rel_tol = 1e-10);

/// Default Lewis sample count: ceil(c * m * log2(m+2)).
Index lewis_sample_count(Index m_cols, const Config& cfg);

} // namespace sumdist
