#include "sumdist/densefast.hpp"

#include "oracles.hpp"
#include "sumdist/dimreduce.hpp"

#include <doctest.h>

#include <Eigen/QR>

#include <cmath>
#include <map>

using namespace sumdist;

namespace {

Matrix random_matrix(Index n, Index m, std::uint64_t seed) {
    auto eng = make_engine(RngConfig{seed, 0});
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix out(n, m);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < m; ++j) out(i, j) = normal(eng);
    return out;
}

Basis random_basis(Index d, Index c, std::uint64_t seed) {
    return orthonormal_columns(random_matrix(d, c, seed));
}

// conditioner R^{-1} exactly as poly_approx_dense derives it
Matrix conditioner_for(const DensePrecompute& pre, const Basis& b, const Matrix& sketch_t) {
    Matrix wy = pre.wa * sketch_t;
    if (!b.is_empty()) wy -= (pre.wa * b.cols) * (b.cols.transpose() * sketch_t);
    Eigen::HouseholderQR<Matrix> qr(wy);
    Matrix r = qr.matrixQR().topRows(wy.cols()).triangularView<Eigen::Upper>();
    return r.inverse();
}

} // namespace

TEST_CASE("make_partition splits evenly") {
    BlockPartition part = make_partition(10, 3);
    CHECK(part.count() == 3);
    Index covered = 0;
    for (Index j = 0; j < 3; ++j) {
        auto [b, e] = part.block(j);
        covered += e - b;
        CHECK(e - b >= 3);
        CHECK(e - b <= 4);
    }
    CHECK(covered == 10);
    CHECK(make_partition(5, 99).count() == 5); // clamped to n
}

TEST_CASE("precompute_products matches direct multiplication") {
    Matrix pts = random_matrix(12, 6, 1);
    PointMatrix a(pts);

    SUBCASE("unit row selector") {
        Matrix e1 = Matrix::Zero(1, 12);
        e1(0, 0) = 1.0;
        std::vector<StackEntry> stack{{&e1, 0, 12}};
        auto out = precompute_products(a, stack);
        CHECK((out[0] - pts.row(0)).cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("two sketches, one per block") {
        Matrix s1 = random_matrix(3, 6, 2);
        Matrix s2 = random_matrix(4, 6, 3);
        std::vector<StackEntry> stack{{&s1, 0, 6}, {&s2, 6, 12}};
        auto out = precompute_products(a, stack);
        Matrix d1 = s1 * pts.topRows(6);
        Matrix d2 = s2 * pts.bottomRows(6);
        CHECK((out[0] - d1).cwiseAbs().maxCoeff() <= 1e-12 * d1.cwiseAbs().maxCoeff());
        CHECK((out[1] - d2).cwiseAbs().maxCoeff() <= 1e-12 * d2.cwiseAbs().maxCoeff());
    }

    SUBCASE("empty stack") { CHECK(precompute_products(a, {}).empty()); }

    SUBCASE("bad range") {
        Matrix s(2, 5);
        std::vector<StackEntry> stack{{&s, 0, 6}};
        CHECK_THROWS_AS(precompute_products(a, stack), std::invalid_argument);
    }
}

TEST_CASE("block leverage sums track the exact sums") {
    Config cfg;
    int good = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Matrix pts = random_matrix(80, 10, 100 + seed);
        PointMatrix a(pts);
        Basis b = random_basis(10, 2, 101 + seed);
        DensePrecompute pre = make_dense_precompute(a, 1, 2, 0.3, RngConfig{102 + seed, 0}, cfg);
        Matrix st = gaussian_sketch(10, 5, 1.0, RngConfig{103 + seed, 0}).entries;
        Matrix rinv = conditioner_for(pre, b, st);

        BlockEstimates est = block_l1_leverage_sums(pre, b, st, rinv);
        REQUIRE(est.apx.size() == 1);

        Matrix scores = residual_apply(a, b, st) * rinv;
        const double exact = scores.cwiseAbs().sum();
        if (est.apx(0) >= exact * (1.0 - 1.0 / 3.0) && est.apx(0) <= exact * (1.0 + 1.0 / 3.0))
            ++good;
    }
    CHECK(good >= 19);
}

TEST_CASE("identical blocks get comparable estimates and zero blocks vanish") {
    Config cfg;
    Matrix half = random_matrix(30, 8, 200);
    Matrix pts(60, 8);
    pts << half, half; // block 2 duplicates block 1
    PointMatrix a(pts);
    Basis b = Basis::empty(8);
    int good = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        DensePrecompute pre = make_dense_precompute(a, 2, 2, 0.3, RngConfig{201 + seed, 0}, cfg);
        Matrix st = gaussian_sketch(8, 5, 1.0, RngConfig{202 + seed, 0}).entries;
        Matrix rinv = conditioner_for(pre, b, st);
        BlockEstimates est = block_l1_leverage_sums(pre, b, st, rinv);
        const double ratio = est.apx(0) / est.apx(1);
        if (ratio >= 0.6 && ratio <= 1.67) ++good;
    }
    CHECK(good >= 19);

    Matrix with_zero = pts;
    with_zero.bottomRows(30).setZero();
    PointMatrix az(with_zero);
    DensePrecompute pre = make_dense_precompute(az, 2, 2, 0.3, RngConfig{299, 0}, cfg);
    Matrix st = gaussian_sketch(8, 5, 1.0, RngConfig{298, 0}).entries;
    Matrix rinv = conditioner_for(pre, b, st);
    BlockEstimates est = block_l1_leverage_sums(pre, b, st, rinv);
    CHECK(est.apx(1) <= 1e-9 * est.apx.sum());
}

TEST_CASE("two_level_sample with one block reduces to the callback distribution") {
    BlockPartition part = make_partition(6, 1);
    BlockEstimates est;
    est.apx = Vector::Ones(1);
    Vector weights(6);
    weights << 1, 2, 3, 4, 5, 6;
    auto cb = [&](Index) { return weights; };
    SamplingMatrix sm = two_level_sample(est, part, cb, 30000, RngConfig{7, 0});
    std::vector<double> freq(6, 0.0);
    for (const auto& [idx, scale] : sm.picks) freq[static_cast<std::size_t>(idx)] += 1.0 / 30000.0;
    for (Index i = 0; i < 6; ++i) CHECK(freq[static_cast<std::size_t>(i)] ==
                                        doctest::Approx(weights(i) / 21.0).epsilon(0.1));
}

TEST_CASE("two_level_sample follows dominant block estimates") {
    BlockPartition part = make_partition(20, 2);
    BlockEstimates est;
    est.apx = Vector::Zero(2);
    est.apx(0) = 1.0;
    est.apx(1) = 1e-9;
    auto cb = [&](Index j) {
        auto [b, e] = part.block(j);
        return Vector(Vector::Ones(e - b));
    };
    SamplingMatrix sm = two_level_sample(est, part, cb, 5000, RngConfig{8, 0});
    Index from_first = 0;
    for (const auto& [idx, scale] : sm.picks)
        if (idx < 10) ++from_first;
    CHECK(from_first >= 4950);

    BlockEstimates zero;
    zero.apx = Vector::Zero(2);
    CHECK_THROWS(two_level_sample(zero, part, cb, 10, RngConfig{9, 0}));
}

TEST_CASE("two_level_sample is lazy") {
    BlockPartition part = make_partition(100, 10);
    BlockEstimates est;
    est.apx = Vector::Ones(10);
    Index callback_calls = 0;
    auto cb = [&](Index j) {
        ++callback_calls;
        auto [b, e] = part.block(j);
        return Vector(Vector::Ones(e - b));
    };
    SampleStats stats;
    SamplingMatrix sm = two_level_sample(est, part, cb, 3, RngConfig{10, 0}, &stats);
    CHECK(sm.rows() == 3);
    CHECK(callback_calls <= 3);
    CHECK(stats.blocks_probed <= 3);
    CHECK(stats.rows_probed <= 3 * 10); // (n/b) * count
}

TEST_CASE("two-level sampling stays TV-close to direct sampling") {
    // real block estimates, shared Gaussian: the only distribution error
    // comes from the Cauchy-median block sums
    Config cfg;
    Matrix pts = random_matrix(40, 12, 300);
    PointMatrix a(pts);
    Basis b = random_basis(12, 2, 301);
    Basis xhat = orthonormal_residual(b, random_matrix(12, 2, 302));
    DensePrecompute pre = make_dense_precompute(a, 4, 2, 0.3, RngConfig{303, 0}, cfg);

    const auto t = static_cast<Index>(std::ceil(cfg.c_gauss_cols * std::log2(42.0)));
    DenseSketch g = gaussian_sketch(12, t, 1.0, RngConfig{304, 0});
    BlockEstimates est = block_residual_norm_sums(pre, b, xhat, g);

    Matrix resid = residual_apply2(a, b, xhat, g.entries);
    Vector exact_rows = resid.rowwise().norm();
    Vector direct = exact_rows / exact_rows.sum();

    auto cb = [&](Index j) {
        auto [begin, end] = pre.part.block(j);
        return Vector(exact_rows.segment(begin, end - begin));
    };
    const Index draws = 50000;
    SamplingMatrix sm = two_level_sample(est, pre.part, cb, draws, RngConfig{305, 0});
    Vector freq = Vector::Zero(40);
    for (const auto& [idx, scale] : sm.picks) freq(idx) += 1.0 / static_cast<double>(draws);
    const double tv = 0.5 * (freq - direct).cwiseAbs().sum();
    CHECK(tv <= 0.05);
}

TEST_CASE("poly_approx_dense recovers rank-k input") {
    Config cfg;
    Matrix pts = random_matrix(90, 2, 400) * random_matrix(2, 15, 401);
    PointMatrix a(pts);
    DensePrecompute pre = make_dense_precompute(a, 4, 2, 0.2, RngConfig{402, 0}, cfg);
    BicriteriaResult res = poly_approx_dense(a, Basis::empty(15), 2, 0.2, pre, RngConfig{403, 0}, cfg);
    CHECK(res.basis.orthonormality_defect() <= 1e-8);
    CHECK(oracle::naive_residual_norm(pts, res.basis) <= 1e-6 * pts.rowwise().norm().sum());
}

TEST_CASE("poly_approx_dense handles the zero matrix") {
    Config cfg;
    PointMatrix zero(Matrix::Zero(30, 8));
    DensePrecompute pre = make_dense_precompute(zero, 3, 2, 0.2, RngConfig{404, 0}, cfg);
    BicriteriaResult res = poly_approx_dense(zero, Basis::empty(8), 2, 0.2, pre, RngConfig{405, 0}, cfg);
    CHECK(res.cost_estimate == 0.0);
}

TEST_CASE("dense and sparse constant-factor solvers agree") {
    Config cfg;
    int good = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        oracle::PlantedInstance inst =
            oracle::make_planted(300, 25, 2, 10.0, 0.1, RngConfig{500 + seed, 0});
        PointMatrix a(inst.points);
        DensePrecompute pre = make_dense_precompute(a, 6, 2, 0.2, RngConfig{501 + seed, 0}, cfg);
        BicriteriaResult dense =
            poly_approx_dense(a, Basis::empty(25), 2, 0.2, pre, RngConfig{502 + seed, 0}, cfg);
        BicriteriaResult sparse =
            poly_approx(a, Basis::empty(25), 2, 0.2, RngConfig{503 + seed, 0}, cfg);
        const double dc = oracle::naive_residual_norm(inst.points, dense.basis);
        const double sc = oracle::naive_residual_norm(inst.points, sparse.basis);
        const double lo = std::min(dc, sc);
        const double hi = std::max(dc, sc);
        // bothy near-zero counts as agreement
        if (hi <= 3.0 * lo + 1e-9 + 0.01 * inst.noise_sum) ++good;
    }
    CHECK(good >= 9);
}

TEST_CASE("eps_approx_dense returns the input when optimal and meets planted bound") {
    Config cfg;
    Matrix pts = random_matrix(80, 2, 600) * random_matrix(2, 12, 601);
    PointMatrix a(pts);
    DensePrecompute pre = make_dense_precompute(a, 4, 2, 0.2, RngConfig{602, 0}, cfg);
    BicriteriaResult xhat = poly_approx_dense(a, Basis::empty(12), 2, 0.2, pre, RngConfig{603, 0}, cfg);
    REQUIRE(oracle::naive_residual_norm(pts, xhat.basis) <= 1e-7 * pts.rowwise().norm().sum());
    BicriteriaResult res = eps_approx_dense(a, Basis::empty(12), xhat.basis, 2, 100.0, 0.4, 0.2,
                                            pre, RngConfig{604, 0}, cfg);
    CHECK(oracle::naive_residual_norm(pts, res.basis) <= 1e-6 * pts.rowwise().norm().sum());

    int good = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        oracle::PlantedInstance inst =
            oracle::make_planted(200, 20, 2, 10.0, 0.05, RngConfig{610 + seed, 0});
        PointMatrix ap(inst.points);
        DensePrecompute prep = make_dense_precompute(ap, 5, 2, 0.2, RngConfig{611 + seed, 0}, cfg);
        BicriteriaResult xh =
            poly_approx_dense(ap, Basis::empty(20), 2, 0.2, prep, RngConfig{612 + seed, 0}, cfg);
        BicriteriaResult r = eps_approx_dense(ap, Basis::empty(20), xh.basis, 2, 100.0, 0.5, 0.2,
                                              prep, RngConfig{613 + seed, 0}, cfg);
        if (oracle::naive_residual_norm(inst.points, r.basis) <= 1.5 * inst.noise_sum) ++good;
    }
    CHECK(good >= 9);
}

TEST_CASE("residual block estimates stay within their certified factor") {
    Config cfg;
    int good_blocks = 0;
    int total_blocks = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Matrix pts = random_matrix(200, 15, 700 + seed);
        PointMatrix a(pts);
        Basis b = random_basis(15, 2, 701 + seed);
        Basis xhat = orthonormal_residual(b, random_matrix(15, 2, 702 + seed));
        DensePrecompute pre = make_dense_precompute(a, 5, 2, 0.2, RngConfig{703 + seed, 0}, cfg);
        const auto t = static_cast<Index>(std::ceil(cfg.c_gauss_cols * std::log2(202.0)));
        DenseSketch g = gaussian_sketch(15, t, 1.0, RngConfig{704 + seed, 0});
        BlockEstimates est = block_residual_norm_sums(pre, b, xhat, g);

        Matrix resid = residual_apply2(a, b, xhat, Matrix::Identity(15, 15));
        Vector norms = resid.rowwise().norm();
        for (Index j = 0; j < pre.part.count(); ++j) {
            auto [begin, end] = pre.part.block(j);
            const double exact = norms.segment(begin, end - begin).sum();
            ++total_blocks;
            if (est.apx(j) >= 0.5 * exact && est.apx(j) <= 2.0 * exact) ++good_blocks;
        }
    }
    CHECK(static_cast<double>(good_blocks) >= 0.9 * static_cast<double>(total_blocks));
}

TEST_CASE("dimension_reduction_dense clamps the block count and converges") {
    Config cfg;
    // k^3.5 / eps^3 far exceeds n: partition degenerates to singletons
    Matrix pts = random_matrix(50, 2, 800) * random_matrix(2, 10, 801);
    PointMatrix a(pts);
    Basis b = dimension_reduction_dense(a, 3, 0.3, RngConfig{802, 0}, cfg);
    CHECK(b.orthonormality_defect() <= 1e-8);
    CHECK(oracle::naive_residual_norm(pts, b) <= 1e-6 * pts.rowwise().norm().sum());
}

TEST_CASE("dense and sparse pipelines produce consistent reduced costs") {
    Config cfg;
    oracle::PlantedInstance inst = oracle::make_planted(200, 20, 2, 8.0, 0.1, RngConfig{900, 0});
    PointMatrix a(inst.points);
    const double eps = 0.5;

    ReducedRep sparse_rep = complete_dim_reduce(a, 2, eps, RngConfig{901, 0}, cfg);
    Basis dense_b = dimension_reduction_dense(a, 2, eps * eps / cfg.c_eps_inner,
                                              RngConfig{902, 0}, cfg);
    ReducedRep dense_rep = extract_reduced_rep(a, dense_b, eps, RngConfig{903, 0}, cfg);

    for (std::uint64_t s = 0; s < 5; ++s) {
        Shape shape{CentersShape{random_matrix(2, 20, 910 + s)}};
        const double c1 = reduced_cost(sparse_rep, shape);
        const double c2 = reduced_cost(dense_rep, shape);
        CHECK(std::abs(c1 - c2) <= 0.10 * std::max(c1, c2));
    }
}
