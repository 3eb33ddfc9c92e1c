#include "sumdist/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sumdist {

namespace {

void check_dims(Index rows, Index cols) {
    if (rows < 1 || cols < 1)
        throw std::invalid_argument("sketch dimensions must be positive");
}

} // namespace

DenseSketch gaussian_sketch(Index rows, Index cols, double scale, const RngConfig& rng) {
    check_dims(rows, cols);
    if (!(scale > 0.0)) throw std::invalid_argument("gaussian_sketch: scale must be > 0");
    auto eng = make_engine(rng);
    std::normal_distribution<double> normal(0.0, 1.0);
    DenseSketch sk{SketchKind::Gaussian, scale, Matrix(rows, cols)};
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) sk.entries(i, j) = scale * normal(eng);
    return sk;
}

DenseSketch cauchy_sketch(Index rows, Index cols, const RngConfig& rng) {
    check_dims(rows, cols);
    auto eng = make_engine(rng);
    std::normal_distribution<double> normal(0.0, 1.0);
    DenseSketch sk{SketchKind::Cauchy, 1.0, Matrix(rows, cols)};
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) {
            double denom = 0.0;
            double num = 0.0;
            do {
                num = normal(eng);
                denom = normal(eng);
            } while (denom == 0.0);
            sk.entries(i, j) = num / denom;
        }
    }
    return sk;
}

CountSketch make_countsketch(Index rows, Index cols, const RngConfig& rng) {
    check_dims(rows, cols);
    auto eng = make_engine(rng);
    std::uniform_int_distribution<Index> pick_row(0, rows - 1);
    std::uniform_int_distribution<int> pick_sign(0, 1);
    CountSketch sk;
    sk.rows = rows;
    sk.cols = cols;
    sk.bucket.resize(static_cast<std::size_t>(cols));
    sk.sign.resize(static_cast<std::size_t>(cols));
    for (Index j = 0; j < cols; ++j) {
        sk.bucket[static_cast<std::size_t>(j)] = pick_row(eng);
        sk.sign[static_cast<std::size_t>(j)] = pick_sign(eng) ? 1 : -1;
    }
    return sk;
}

Matrix countsketch_apply(const CountSketch& sk, const Eigen::Ref<const Matrix>& m) {
    if (m.rows() != sk.cols)
        throw std::invalid_argument("countsketch_apply: dimension mismatch");
    Matrix out = Matrix::Zero(sk.rows, m.cols());
    for (Index i = 0; i < m.rows(); ++i) {
        const auto idx = static_cast<std::size_t>(i);
        out.row(sk.bucket[idx]) += static_cast<double>(sk.sign[idx]) * m.row(i);
    }
    return out;
}

Matrix countsketch_apply_transpose(const CountSketch& sk, const PointMatrix& a) {
    if (a.cols() != sk.cols)
        throw std::invalid_argument("countsketch_apply_transpose: dimension mismatch");
    Matrix out = Matrix::Zero(sk.rows, a.rows());
    if (a.is_sparse()) {
        const auto& s = a.sparse();
        for (Index i = 0; i < s.outerSize(); ++i)
            for (SparseMatrix::InnerIterator it(s, i); it; ++it) {
                const auto l = static_cast<std::size_t>(it.col());
                out(sk.bucket[l], i) += static_cast<double>(sk.sign[l]) * it.value();
            }
    } else {
        const auto& d = a.dense();
        for (Index i = 0; i < d.rows(); ++i)
            for (Index l = 0; l < d.cols(); ++l) {
                const auto lu = static_cast<std::size_t>(l);
                out(sk.bucket[lu], i) += static_cast<double>(sk.sign[lu]) * d(i, l);
            }
    }
    return out;
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of empty vector");
    const std::size_t n = values.size();
    const std::size_t k = n / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
    double hi = values[k];
    if (n % 2 == 1) return hi;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     values.begin() + static_cast<std::ptrdiff_t>(k));
    return 0.5 * (hi + values[k - 1]);
}

double median_abs_l1(const DenseSketch& cauchy, const Eigen::Ref<const Vector>& x) {
    if (cauchy.cols() != x.size())
        throw std::invalid_argument("median_abs_l1: dimension mismatch");
    Vector prod = cauchy.entries * x;
    std::vector<double> abs(static_cast<std::size_t>(prod.size()));
    for (Index i = 0; i < prod.size(); ++i) abs[static_cast<std::size_t>(i)] = std::abs(prod(i));
    return median(std::move(abs));
}

double gaussian_l2_estimate(const DenseSketch& gauss, const Eigen::Ref<const Vector>& x) {
    if (gauss.rows() != x.size())
        throw std::invalid_argument("gaussian_l2_estimate: dimension mismatch");
    return (x.transpose() * gauss.entries).norm();
}

double gaussian_l1_to_l2(const DenseSketch& gauss, const Eigen::Ref<const Vector>& x, Index t) {
    if (gauss.rows() != x.size() || gauss.cols() != t)
        throw std::invalid_argument("gaussian_l1_to_l2: dimension mismatch");
    const double l1 = (x.transpose() * gauss.entries).cwiseAbs().sum();
    return std::sqrt(M_PI / 2.0) * l1 / static_cast<double>(t);
}

double norm_p2(const Eigen::Ref<const Matrix>& m, double p) {
    if (p < 1.0) throw std::invalid_argument("norm_p2: p must be >= 1");
    if (m.size() == 0) return 0.0;
    const Vector norms = m.rowwise().norm();
    if (p == 1.0) return norms.sum();
    double acc = 0.0;
    for (Index i = 0; i < norms.size(); ++i) acc += std::pow(norms(i), p);
    return std::pow(acc, 1.0 / p);
}

} // namespace sumdist
