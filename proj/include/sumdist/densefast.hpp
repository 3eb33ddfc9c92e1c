#pragma once

#include "sumdist/bicriteria.hpp"
#include "sumdist/config.hpp"
#include "sumdist/embed.hpp"
#include "sumdist/linalg.hpp"
#include "sumdist/point_matrix.hpp"
#include "sumdist/rng.hpp"
#include "sumdist/sketch.hpp"

#include <functional>
#include <vector>

namespace sumdist {

/// Disjoint index ranges covering [0, n); sizes differ by at most one.
struct BlockPartition {
    std::vector<std::pair<Index, Index>> blocks; // [begin, end)
    Index n = 0;

    [[nodiscard]] Index count() const { return static_cast<Index>(blocks.size()); }
    [[nodiscard]] std::pair<Index, Index> block(Index j) const {
        return blocks[static_cast<std::size_t>(j)];
    }
};

BlockPartition make_partition(Index n, Index b);

enum class BlockEstimateKind { L1LeverageSum, ResidualNormSum };

struct BlockEstimates {
    Vector apx; // one nonnegative value per block
    BlockEstimateKind kind = BlockEstimateKind::L1LeverageSum;
};

/// Counters from lazy two-level sampling: how much exact probability work
/// the sampler actually did.
struct SampleStats {
    Index blocks_probed = 0; // distinct blocks whose rows were expanded
    Index rows_probed = 0;   // rows with exact probabilities computed
};

/// Everything that is multiplied with A once per outer iteration: a shared
/// Cauchy block sketch, the dense-path l1 embedding, and a Cauchy sketch for
/// candidate selection.
struct DensePrecompute {
    BlockPartition part;
    DenseSketch c1;                 // Cauchy, rows x max block size
    std::vector<Matrix> c1a_blocks; // per block: c1 rows x d
    DenseSketch w;                  // dense-path l1 embedding (Cauchy / rows)
    Matrix wa;                      // w rows x d
    DenseSketch csel;               // Cauchy for cost estimates, rows x n
    Matrix csel_a;                  // csel rows x d
};

/// One pass over A computing sketch * A for a stack of left sketches. Each
/// stack entry is applied either to all of A (cols == n) or to one row block.
struct StackEntry {
    const Matrix* sketch = nullptr; // rows x (end-begin)
    Index begin = 0;
    Index end = 0; // row range of A the sketch consumes
};

std::vector<Matrix> precompute_products(const PointMatrix& a, const std::vector<StackEntry>& stack);

/// k and delta size the dense-path embedding (its row count depends on the
/// number of Gaussian sketch columns the solver will use).
DensePrecompute make_dense_precompute(const PointMatrix& a, Index b, Index k, double delta,
                                      const RngConfig& rng, const Config& cfg);

/// apx_j = sum over columns of median(|M_j column|) for
/// M_j = (C1 A_{I_j})(I - BB^T) S^T R^{-1}: estimates the block sums of l1
/// leverage scores without touching individual rows.
BlockEstimates block_l1_leverage_sums(const DensePrecompute& pre, const Basis& b,
                                      const Eigen::Ref<const Matrix>& sketch_t,
                                      const Eigen::Ref<const Matrix>& rinv);

/// Block sums of residual row norms, estimated through the sqrt(pi/2)/t
/// Gaussian l1-to-l2 conversion composed with Cauchy medians.
BlockEstimates block_residual_norm_sums(const DensePrecompute& pre, const Basis& b,
                                        const Basis& xhat, const DenseSketch& gauss);

/// Two-level sampling: pick a block proportional to its estimate, then a row
/// inside it from the callback's exact probabilities (computed lazily, at most
/// once per block). Scales are 1/(count * p_hat_i) with
/// p_hat_i = (apx_j / sum apx) * (p_i / sum_block p).
SamplingMatrix two_level_sample(const BlockEstimates& estimates, const BlockPartition& part,
                                const std::function<Vector(Index)>& within_block_prob,
                                Index count, const RngConfig& rng, SampleStats* stats = nullptr);

/// Dense-input variant of poly_approx built on block estimates and two-level
/// sampling; candidate selection through Cauchy-median cost estimates.
BicriteriaResult poly_approx_dense(const PointMatrix& a, const Basis& b, Index k, double delta,
                                   const DensePrecompute& pre, const RngConfig& rng,
                                   const Config& cfg = {}, SampleStats* stats = nullptr);

/// Dense-input variant of eps_approx.
BicriteriaResult eps_approx_dense(const PointMatrix& a, const Basis& b, const Basis& xhat,
                                  Index k, double trust_factor, double eps, double delta,
                                  const DensePrecompute& pre, const RngConfig& rng,
                                  const Config& cfg = {}, SampleStats* stats = nullptr);

/// Adaptive loop with the dense sub-solvers; b = clamp(ceil(k^3.5/eps^3), 1, n)
/// blocks and delta = eps/10.
Basis dimension_reduction_dense(const PointMatrix& a, Index k, double eps, const RngConfig& rng,
                                const Config& cfg = {}, SampleStats* stats = nullptr,
                                std::vector<Basis>* snapshots = nullptr);

} // namespace sumdist
