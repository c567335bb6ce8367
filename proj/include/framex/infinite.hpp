#pragma once

// Greedy extraction of an almost orthonormal subsequence from a frame given as
// a stream, with the one-sided distance functional theta and a Gram-based
// stability certificate.

#include "framex/frame.hpp"
#include "framex/random.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace framex {

/// A frame delivered one vector at a time. Vectors are finitely supported;
/// their length may grow along the stream and shorter vectors are implicitly
/// zero-padded.
class FrameSequence {
public:
    virtual ~FrameSequence() = default;
    /// Next vector, or nullopt when the stream ends.
    virtual std::optional<Vector> next() = 0;
    virtual std::optional<double> known_bound() const { return std::nullopt; }
};

/// Replays the vectors of a finite frame, once or cyclically.
class FrameFileSequence final : public FrameSequence {
public:
    FrameFileSequence(Frame frame, bool cyclic) : frame_(std::move(frame)), cyclic_(cyclic) {}

    std::optional<Vector> next() override
    {
        if (frame_.empty()) return std::nullopt;
        if (pos_ == frame_.size()) {
            if (!cyclic_) return std::nullopt;
            pos_ = 0;
        }
        return Vector(frame_.vector(pos_++));
    }

private:
    Frame frame_;
    bool cyclic_;
    Index pos_ = 0;
};

/// Vectors produced by a callable; used for ad-hoc streams.
class FunctionSequence final : public FrameSequence {
public:
    explicit FunctionSequence(std::function<std::optional<Vector>(Index)> fn) : fn_(std::move(fn)) {}
    std::optional<Vector> next() override { return fn_(pos_++); }

private:
    std::function<std::optional<Vector>(Index)> fn_;
    Index pos_ = 0;
};

/// Orthogonal direct sum of finite projected bases: block b occupies
/// coordinates [b * block_dim, (b + 1) * block_dim) and carries the columns
/// P_b e_i of a random rank-`rank` projection P_b drawn from Rng(seed + b).
/// The result is a Parseval frame for an infinite-dimensional subspace of l_2.
class ProjectedBasisSequence final : public FrameSequence {
public:
    ProjectedBasisSequence(std::uint64_t seed, Index block_dim, Index rank)
        : seed_(seed), block_dim_(block_dim), rank_(rank)
    {
        if (block_dim == 0 || rank == 0 || rank > block_dim)
            throw std::invalid_argument("projected-basis generator needs 0 < rank <= ambient dimension");
    }

    std::optional<Vector> next() override
    {
        const Index block = pos_ / block_dim_;
        const Index local = pos_ % block_dim_;
        if (local == 0 || block != block_) {
            Rng rng(seed_ + block);
            projection_ = random::projection(rng, static_cast<Eigen::Index>(block_dim_),
                                             static_cast<Eigen::Index>(rank_));
            block_ = block;
        }
        ++pos_;
        Vector v = Vector::Zero(static_cast<Eigen::Index>((block + 1) * block_dim_));
        v.segment(static_cast<Eigen::Index>(block * block_dim_), static_cast<Eigen::Index>(block_dim_)) =
            projection_.col(static_cast<Eigen::Index>(local));
        return v;
    }

    std::optional<double> known_bound() const override { return 1.0; }

private:
    std::uint64_t seed_;
    Index block_dim_;
    Index rank_;
    Index pos_ = 0;
    Index block_ = static_cast<Index>(-1);
    Matrix projection_;
};

namespace detail {

inline Vector padded(const Vector& v, Eigen::Index len)
{
    if (v.size() >= len) return v;
    Vector out = Vector::Zero(len);
    out.head(v.size()) = v;
    return out;
}

inline Matrix stack_padded(const std::vector<Vector>& vs)
{
    Eigen::Index len = 0;
    for (const Vector& v : vs) len = std::max(len, v.size());
    Matrix out = Matrix::Zero(len, static_cast<Eigen::Index>(vs.size()));
    for (std::size_t c = 0; c < vs.size(); ++c) out.col(static_cast<Eigen::Index>(c)).head(vs[c].size()) = vs[c];
    return out;
}

}  // namespace detail

/// max over points of dist(point, span(subspace_basis)).
inline double theta(const std::vector<Vector>& points, const std::vector<Vector>& subspace_basis)
{
    Eigen::Index len = 0;
    for (const Vector& p : points) len = std::max(len, p.size());
    for (const Vector& b : subspace_basis) len = std::max(len, b.size());
    for (const Vector& p : points)
        if (std::abs(p.norm() - 1.0) > 1e-8) throw std::invalid_argument("theta: points must be unit vectors");
    Matrix basis = Matrix::Zero(len, static_cast<Eigen::Index>(subspace_basis.size()));
    for (std::size_t c = 0; c < subspace_basis.size(); ++c)
        basis.col(static_cast<Eigen::Index>(c)).head(subspace_basis[c].size()) = subspace_basis[c];
    const Matrix q = linalg::orthonormal_basis(basis);
    double worst = 0.0;
    for (const Vector& p : points) worst = std::max(worst, linalg::residual(q, detail::padded(p, len)).norm());
    return worst;
}

enum class GreedyStatus { complete, threshold_unattainable, stream_exhausted };

inline std::string_view to_string(GreedyStatus s)
{
    switch (s) {
        case GreedyStatus::complete: return "complete";
        case GreedyStatus::threshold_unattainable: return "threshold_unattainable";
        case GreedyStatus::stream_exhausted: return "stream_exhausted";
    }
    return "";
}

struct GreedySelection {
    IndexList indices;           // 0-based stream positions, increasing
    std::vector<Vector> vectors;  // normalized selections
    std::vector<double> distances;  // distance to the span of the earlier picks
    GreedyStatus status = GreedyStatus::complete;
    Index scanned = 0;
};

/// Distance threshold for the k-th pick (k >= 2, 1-based): 1 - 2^(-2k).
inline double greedy_threshold(Index k) { return 1.0 - std::ldexp(1.0, -2 * static_cast<int>(k)); }

/// Largest number of terms whose thresholds are distinguishable from 1 in
/// double precision.
inline constexpr Index kMaxGreedyTerms = 26;

/// j_1 = first nonzero vector; for k >= 2 scans forward to the first
/// normalized z_j with dist(z_j, span of earlier picks) > 1 - 2^(-2k).
inline GreedySelection greedy_subsequence(FrameSequence& seq, Index terms, Index scan_limit)
{
    if (terms < 1 || terms > kMaxGreedyTerms)
        throw std::invalid_argument("greedy_subsequence: terms must lie in [1, " +
                                    std::to_string(kMaxGreedyTerms) + "]");
    GreedySelection out;
    std::vector<Vector> basis;  // orthonormal, possibly of different lengths
    out.status = GreedyStatus::threshold_unattainable;
    while (out.scanned < scan_limit) {
        std::optional<Vector> x = seq.next();
        if (!x) {
            out.status = GreedyStatus::stream_exhausted;
            break;
        }
        const Index pos = out.scanned++;
        const double norm = x->norm();
        if (norm == 0.0) continue;
        Vector r = *x / norm;
        const Vector z = r;
        for (int pass = 0; pass < 2; ++pass)
            for (const Vector& q : basis) {
                const Eigen::Index len = std::min(q.size(), r.size());
                const double c = q.head(len).dot(r.head(len));
                if (q.size() > r.size()) r = detail::padded(r, q.size());
                r.head(q.size()) -= c * q;
            }
        const double dist = r.norm();
        const Index k = out.indices.size() + 1;
        if (k == 1 || dist > greedy_threshold(k)) {
            out.indices.push_back(pos);
            out.vectors.push_back(z);
            out.distances.push_back(dist);
            basis.push_back(r / dist);
            if (out.indices.size() == terms) {
                out.status = GreedyStatus::complete;
                break;
            }
        }
    }
    return out;
}

struct StabilityViolation {
    Index i = 0;  // 1-based positions, i < k
    Index k = 0;
    double inner_product = 0.0;
    double bound = 0.0;
};

struct StabilityReport {
    bool stable = true;
    EquivalenceCertificate certificate;
    std::vector<StabilityViolation> violations;
};

/// Checks |<z_i, z_k>| < 2^(-k-1) for all i < k with k >= from_k (1-based)
/// and certifies the selection from its Gram matrix.
inline StabilityReport stability_check(const GreedySelection& sel, Index from_k = 1)
{
    StabilityReport rep;
    if (sel.vectors.empty()) return rep;
    const Matrix z = detail::stack_padded(sel.vectors);
    const Matrix g = gram_matrix(z);
    for (Index k = std::max<Index>(from_k, 2); k <= sel.vectors.size(); ++k) {
        const double bound = std::ldexp(1.0, -static_cast<int>(k) - 1);
        for (Index i = 1; i < k; ++i) {
            const double ip = g(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(k - 1));
            if (!(std::abs(ip) < bound)) rep.violations.push_back({i, k, ip, bound});
        }
    }
    rep.stable = rep.violations.empty();
    // Singular values of Z are the square roots of the Gram eigenvalues.
    Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
    const Vector& ev = es.eigenvalues();
    const double lo = std::max(ev(0), 0.0);
    rep.certificate.hilbertian = std::sqrt(ev(ev.size() - 1));
    rep.certificate.besselian = lo > 0.0 ? 1.0 / std::sqrt(lo) : kInf;
    rep.certificate.constant = rep.certificate.hilbertian * rep.certificate.besselian;
    return rep;
}

/// Selection restricted to picks first..end (1-based first).
inline GreedySelection tail(const GreedySelection& sel, Index first)
{
    GreedySelection out;
    out.status = sel.status;
    out.scanned = sel.scanned;
    for (Index k = first; k <= sel.indices.size(); ++k) {
        out.indices.push_back(sel.indices[k - 1]);
        out.vectors.push_back(sel.vectors[k - 1]);
        out.distances.push_back(sel.distances[k - 1]);
    }
    return out;
}

/// Smallest 1-based k0 such that the picks from k0 on are certified with
/// C <= 1 / (1 - epsilon); nullopt when no nonempty tail qualifies.
inline std::optional<Index> tail_index(const GreedySelection& sel, double epsilon)
{
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("tail_index: epsilon must lie in (0, 1)");
    for (Index k0 = 1; k0 <= sel.indices.size(); ++k0)
        if (stability_check(tail(sel, k0)).certificate.constant <= 1.0 / (1.0 - epsilon)) return k0;
    return std::nullopt;
}

}  // namespace framex
