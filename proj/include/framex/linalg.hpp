#pragma once

// Dense linear-algebra helpers shared by the frame modules.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace framex {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = std::size_t;
using IndexList = std::vector<Index>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace linalg {

/// Singular values of `a` in decreasing order (min(rows, cols) of them).
inline Vector singular_values(const Matrix& a)
{
    if (a.size() == 0) return Vector();
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues();
}

/// Largest singular value; 0 for an empty matrix.
inline double sigma_max(const Matrix& a)
{
    if (a.size() == 0) return 0.0;
    return singular_values(a)(0);
}

/// Smallest singular value of the columns viewed as a system: zero whenever
/// there are more columns than rows.
inline double sigma_min_columns(const Matrix& a)
{
    if (a.cols() == 0) return kInf;
    if (a.cols() > a.rows()) return 0.0;
    const Vector s = singular_values(a);
    return s(s.size() - 1);
}

/// Largest eigenvalue of a symmetric matrix.
inline double lambda_max_symmetric(const Matrix& s)
{
    if (s.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(es.eigenvalues().size() - 1);
}

/// Columns of `a` picked by `idx`, in the given order.
inline Matrix select_columns(const Matrix& a, std::span<const Index> idx)
{
    Matrix out(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k)
        out.col(static_cast<Eigen::Index>(k)) = a.col(static_cast<Eigen::Index>(idx[k]));
    return out;
}

/// Principal submatrix a[idx, idx].
inline Matrix principal_submatrix(const Matrix& a, std::span<const Index> idx)
{
    const auto k = static_cast<Eigen::Index>(idx.size());
    Matrix out(k, k);
    for (Eigen::Index r = 0; r < k; ++r)
        for (Eigen::Index c = 0; c < k; ++c)
            out(r, c) = a(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)]),
                          static_cast<Eigen::Index>(idx[static_cast<std::size_t>(c)]));
    return out;
}

/// Orthonormal basis of the column span by modified Gram-Schmidt with one
/// reorthogonalization pass. A column is kept when its residual exceeds
/// `rank_tol` times its own norm. Processing order follows column order.
inline Matrix orthonormal_basis(const Matrix& a, double rank_tol = 1e-10)
{
    Matrix q(a.rows(), a.cols());
    Eigen::Index rank = 0;
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
        const double norm0 = a.col(c).norm();
        if (norm0 == 0.0) continue;
        Vector r = a.col(c);
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index k = 0; k < rank; ++k) r -= q.col(k).dot(r) * q.col(k);
        const double nr = r.norm();
        if (nr > rank_tol * norm0) q.col(rank++) = r / nr;
    }
    return q.leftCols(rank);
}

/// Residual (I - QQ^T) v for an orthonormal Q.
inline Vector residual(const Matrix& q, const Vector& v)
{
    if (q.cols() == 0) return v;
    return v - q * (q.transpose() * v);
}

/// Numerical rank from singular values with an absolute threshold.
inline Index numerical_rank(const Matrix& a, double tol)
{
    if (a.size() == 0) return 0;
    const Vector s = singular_values(a);
    return static_cast<Index>((s.array() > tol).count());
}

/// C(n, k) saturating at UINT64_MAX.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k)
{
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        const std::uint64_t num = n - k + i;
        // r * num / i is exact at every step; guard the multiplication.
        if (r > std::numeric_limits<std::uint64_t>::max() / num)
            return std::numeric_limits<std::uint64_t>::max();
        r = r * num / i;
    }
    return r;
}

/// Visits every k-subset of {0, ..., n-1} in lexicographic order. The visitor
/// returns false to stop early.
template <typename Visitor>
void for_each_combination(Index n, Index k, Visitor&& visit)
{
    if (k > n) return;
    IndexList comb(k);
    for (Index i = 0; i < k; ++i) comb[i] = i;
    while (true) {
        if (!visit(std::span<const Index>(comb))) return;
        if (k == 0) return;
        Index i = k;
        while (i > 0 && comb[i - 1] == n - k + (i - 1)) --i;
        if (i == 0) return;
        ++comb[i - 1];
        for (Index j = i; j < k; ++j) comb[j] = comb[j - 1] + 1;
    }
}

/// Relative tie tolerance used by every subset search.
inline bool nearly_equal(double a, double b)
{
    if (a == b) return true;
    return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace linalg
}  // namespace framex
