#pragma once

// Explicit frames that defeat stronger extraction statements:
//  - a block-banded tight frame (bounds 1 and 2) in which no complete
//    subsequence has uniformly bounded bracket projections;
//  - the Casazza-Christensen tight frame, whose large subsets need
//    equivalence constants growing with the dimension.

#include "framex/frame.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace framex {

/// Block structure of the banded frame, truncated after N blocks. Blocks and
/// coordinates are numbered from 1 in the accessors' arguments; returned
/// positions are 0-based.
class BlockLayout {
public:
    explicit BlockLayout(Index blocks) : blocks_(blocks)
    {
        if (blocks < 2) throw std::invalid_argument("block_layout: need at least 2 blocks");
    }

    Index blocks() const { return blocks_; }

    /// |J(n)| = n.
    Index block_size(Index n) const { return n; }
    /// First vector index of J(n), 0-based.
    Index block_start(Index n) const { return n * (n - 1) / 2; }
    /// i(n), 1-based first coordinate of I(n): 1 for n <= 2, 1 + (n-2)(n-1)/2 after.
    Index anchor(Index n) const { return n <= 2 ? 1 : 1 + (n - 2) * (n - 1) / 2; }
    /// First coordinate of I(n), 0-based.
    Index interval_start(Index n) const { return anchor(n) - 1; }

    Index vector_count() const { return blocks_ * (blocks_ + 1) / 2; }
    Index ambient_dim() const { return anchor(blocks_) + blocks_ - 1; }

    /// Block containing the 0-based vector index j.
    Index block_of(Index j) const
    {
        Index n = 1;
        while (block_start(n + 1) <= j) ++n;
        return n;
    }

private:
    Index blocks_;
};

inline BlockLayout block_layout(Index blocks) { return BlockLayout(blocks); }

/// Orthonormal basis z_1..z_n of R^n (columns of the result) with
/// z_j = U e_j for an orthogonal U sending v to e_1 and w to e_n, where
/// w is the normalized indicator of the first ceil(n/2) coordinates and v
/// that of the last floor(n/2) coordinates. Then e_1 is close to every tail
/// span [z_j : j >= j0], j0 < n/2, and e_n to every head span
/// [z_j : j < j0], j0 >= n/2, even with two indices removed.
inline Matrix either_or_basis(Index n)
{
    if (n < 2) throw std::invalid_argument("either_or_basis: n must be >= 2");
    const auto nn = static_cast<Eigen::Index>(n);
    const Eigen::Index head = (nn + 1) / 2;
    const Eigen::Index last = nn / 2;
    Vector v = Vector::Zero(nn);
    v.tail(last).setConstant(1.0 / std::sqrt(static_cast<double>(last)));
    Vector w = Vector::Zero(nn);
    w.head(head).setConstant(1.0 / std::sqrt(static_cast<double>(head)));

    Matrix seed(nn, nn + 2);
    seed.col(0) = v;
    seed.col(1) = w;
    seed.rightCols(nn) = Matrix::Identity(nn, nn);
    const Matrix q = linalg::orthonormal_basis(seed, 1e-10);
    if (q.cols() != nn) throw std::logic_error("either_or_basis: completion lost rank");

    // Columns of Q: v, w, completion. Reorder to v, completion, w so that
    // Q e_1 = v and Q e_n = w; then U = Q^T and z_j = U e_j is row j of Q.
    Matrix ordered(nn, nn);
    ordered.col(0) = q.col(0);
    ordered.middleCols(1, nn - 2) = q.middleCols(2, nn - 2);
    ordered.col(nn - 1) = q.col(1);
    return ordered.transpose();
}

struct BracketlessFrame {
    Frame frame;
    BlockLayout layout;
};

/// x_j = T_n z_j for j in J(n), n <= N, where T_n shifts R^n onto the
/// coordinates I(n) and the z_j form either_or_basis(n) (z = 1 for n = 1).
inline BracketlessFrame bracketless_frame(Index blocks)
{
    const BlockLayout layout(blocks);
    Matrix x = Matrix::Zero(static_cast<Eigen::Index>(layout.ambient_dim()),
                            static_cast<Eigen::Index>(layout.vector_count()));
    x(0, 0) = 1.0;
    for (Index n = 2; n <= blocks; ++n) {
        const Matrix z = either_or_basis(n);
        x.block(static_cast<Eigen::Index>(layout.interval_start(n)), static_cast<Eigen::Index>(layout.block_start(n)),
                static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) = z;
    }
    return {Frame(std::move(x)), layout};
}

/// Every index except the last one of each block n >= 2. The result spans
/// the truncated space and has exactly ambient_dim vectors.
inline IndexList minimal_complete_subset(const BlockLayout& layout)
{
    IndexList out;
    for (Index n = 1; n <= layout.blocks(); ++n)
        for (Index p = 0; p < n; ++p)
            if (n == 1 || p + 1 < n) out.push_back(layout.block_start(n) + p);
    return out;
}

struct CompletenessReport {
    bool complete = false;
    Index rank = 0;
    std::vector<Index> per_block;  // |J(n) ∩ J| for n = 1..N
    std::vector<Index> violating_blocks;  // blocks with |J(n) ∩ J| < n - 2
};

/// Rank test of the selected columns against the truncated ambient space.
inline CompletenessReport completeness_check(const BracketlessFrame& bf, const IndexList& subset)
{
    const BlockLayout& layout = bf.layout;
    CompletenessReport rep;
    rep.per_block.assign(layout.blocks(), 0);
    for (Index j : subset) {
        if (j >= layout.vector_count()) throw std::invalid_argument("completeness_check: index out of range");
        ++rep.per_block[layout.block_of(j) - 1];
    }
    for (Index n = 1; n <= layout.blocks(); ++n)
        if (n >= 2 && rep.per_block[n - 1] + 2 < n) rep.violating_blocks.push_back(n);
    rep.rank = linalg::numerical_rank(linalg::select_columns(bf.frame.synthesis(), subset), 1e-10);
    rep.complete = rep.rank == layout.ambient_dim();
    return rep;
}

struct BracketDiagnostics {
    Index block = 0;
    Index bracket_point = 0;  // 0-based vector index j0
    Index position = 0;       // 1-based position of j0 inside J(n)
    Index witness = 0;        // 1-based coordinate: i(n) or i(n+1)
    double dist_head = 0.0;   // to F = [x_j : j in J, j < j0]
    double dist_tail = 0.0;   // to E = [x_j : j in J, j >= j0]
    double min_principal_angle = 0.0;
    double projection_norm_lb = kInf;
    /// max(dist_head, dist_tail) * sqrt(n): the measured closeness constant.
    double closeness_constant = 0.0;
};

/// Midpoint bracket of block n: position ceil(n / 2) inside J(n).
inline Index midpoint_bracket(const BlockLayout& layout, Index n) { return layout.block_start(n) + (n + 1) / 2 - 1; }

/// Distances of the coordinate witness to the head and tail spans at the
/// bracket j0, and the smallest principal angle between those spans.
/// 1 / sin(angle) is the norm of the projection onto one span along the
/// other, so it bounds from below any bracket projection at j0.
inline BracketDiagnostics bracket_diagnostics(const BracketlessFrame& bf, const IndexList& subset, Index n,
                                              Index j0)
{
    const BlockLayout& layout = bf.layout;
    if (n < 2 || n + 2 > layout.blocks())
        throw std::invalid_argument("bracket_diagnostics: block must satisfy 2 <= n <= N - 2");
    if (j0 < layout.block_start(n) || j0 >= layout.block_start(n) + n)
        throw std::invalid_argument("bracket_diagnostics: j0 is not in block " + std::to_string(n));
    if (!std::binary_search(subset.begin(), subset.end(), j0))
        throw std::invalid_argument("bracket_diagnostics: j0 is not a selected index");
    if (!completeness_check(bf, subset).complete)
        throw std::invalid_argument("bracket_diagnostics: subset is not complete");

    IndexList head, tail;
    for (Index j : subset) (j < j0 ? head : tail).push_back(j);
    if (head.empty() || tail.empty()) throw std::invalid_argument("bracket_diagnostics: trivial span");

    const Matrix& x = bf.frame.synthesis();
    const Matrix f = linalg::orthonormal_basis(linalg::select_columns(x, head));
    const Matrix e = linalg::orthonormal_basis(linalg::select_columns(x, tail));

    BracketDiagnostics d;
    d.block = n;
    d.bracket_point = j0;
    d.position = j0 - layout.block_start(n) + 1;
    d.witness = 2 * d.position < n ? layout.anchor(n) : layout.anchor(n + 1);
    Vector w = Vector::Zero(x.rows());
    w(static_cast<Eigen::Index>(d.witness - 1)) = 1.0;
    d.dist_head = linalg::residual(f, w).norm();
    d.dist_tail = linalg::residual(e, w).norm();
    d.closeness_constant = std::max(d.dist_head, d.dist_tail) * std::sqrt(static_cast<double>(n));

    // sin of the smallest angle = min over unit f in F of dist(f, E).
    const Matrix r = f - e * (e.transpose() * f);
    const Vector s = linalg::singular_values(r);
    const double sine = f.cols() > 0 ? std::min(1.0, s(s.size() - 1)) : 1.0;
    const double clean = sine <= 1e-12 ? 0.0 : sine;
    d.min_principal_angle = std::asin(clean);
    d.projection_norm_lb = clean > 0.0 ? 1.0 / clean : kInf;
    return d;
}

/// x_j = e_j - (1/n) sum_i e_i for j <= n, x_{n+1} = n^{-1/2} sum_i e_i.
inline Frame casazza_christensen_frame(Index n)
{
    if (n < 2) throw std::invalid_argument("casazza_christensen_frame: n must be >= 2");
    const auto nn = static_cast<Eigen::Index>(n);
    const double dn = static_cast<double>(n);
    Matrix x(nn, nn + 1);
    x.leftCols(nn) = Matrix::Identity(nn, nn) - Matrix::Constant(nn, nn, 1.0 / dn);
    x.col(nn).setConstant(1.0 / std::sqrt(dn));
    return Frame(std::move(x));
}

struct PartialSumCheck {
    Index k = 0;  // ceil((1 - eps) n) - 1
    double norm_sq = 0.0;  // ||x_1 + ... + x_k||^2, computed from the vectors
    double closed_form = 0.0;  // k (n - k) / n
    double bound = 0.0;  // 2 (eps n + 1)
    bool holds = false;
};

/// Squared norm of the first k partial sum of the Casazza-Christensen frame
/// against the bound 2 (eps n + 1).
inline PartialSumCheck casazza_christensen_partial_sum(Index n, double epsilon)
{
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
    const Frame f = casazza_christensen_frame(n);
    const double dn = static_cast<double>(n);
    PartialSumCheck c;
    const double kk = std::ceil((1.0 - epsilon) * dn - 1e-12) - 1.0;
    c.k = kk > 0.0 ? static_cast<Index>(kk) : 0;
    Vector sum = Vector::Zero(static_cast<Eigen::Index>(n));
    for (Index j = 0; j < c.k; ++j) sum += f.vector(j);
    c.norm_sq = sum.squaredNorm();
    const double k = static_cast<double>(c.k);
    c.closed_form = k * (dn - k) / dn;
    c.bound = 2.0 * (epsilon * dn + 1.0);
    c.holds = c.norm_sq <= c.bound + 1e-9;
    return c;
}

}  // namespace framex
