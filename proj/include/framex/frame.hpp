#pragma once

// Finite frames: bounds, tightening, projection and row-orthonormal views, and
// certificates of equivalence to an orthonormal basis.

#include "framex/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace framex {

/// Raised when an operation needs a genuine frame and the lower frame bound
/// is degenerate.
class NotAFrameError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Scale-relative degeneracy threshold for the lower frame bound.
inline constexpr double kValidityTol = 1e-12;

/// An ordered list of vectors in R^dim, stored as the columns of the
/// synthesis matrix. Validity as a frame is checked on demand.
class Frame {
public:
    Frame() = default;

    explicit Frame(Matrix synthesis) : synthesis_(std::move(synthesis))
    {
        if (synthesis_.rows() == 0) throw std::invalid_argument("frame dimension must be positive");
    }

    Frame(Index dim, const std::vector<std::vector<double>>& vectors)
        : synthesis_(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(vectors.size()))
    {
        if (dim == 0) throw std::invalid_argument("frame dimension must be positive");
        for (std::size_t j = 0; j < vectors.size(); ++j) {
            if (vectors[j].size() != dim)
                throw std::invalid_argument("vector " + std::to_string(j) + " has " +
                                            std::to_string(vectors[j].size()) +
                                            " coordinates, expected " + std::to_string(dim));
            for (std::size_t i = 0; i < dim; ++i)
                synthesis_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vectors[j][i];
        }
    }

    Index dim() const { return static_cast<Index>(synthesis_.rows()); }
    Index size() const { return static_cast<Index>(synthesis_.cols()); }
    bool empty() const { return synthesis_.cols() == 0; }

    auto vector(Index j) const { return synthesis_.col(static_cast<Eigen::Index>(j)); }
    const Matrix& synthesis() const { return synthesis_; }

    /// S = sum_j x_j x_j^T.
    Matrix frame_operator() const { return synthesis_ * synthesis_.transpose(); }

private:
    Matrix synthesis_;
};

struct FrameBounds {
    double lower = 0.0;
    double upper = 0.0;
    /// sqrt(B/A); infinite when A = 0.
    double frame_constant = kInf;
    /// A > kValidityTol * max(B, 1).
    bool is_frame = false;
};

/// Certificate of C-equivalence of a system to an orthonormal basis:
/// h = sigma_max, b = 1/sigma_min, C = h * b.
struct EquivalenceCertificate {
    double hilbertian = 0.0;
    double besselian = kInf;
    double constant = kInf;

    bool finite() const { return std::isfinite(constant); }
};

inline FrameBounds make_bounds(double lower, double upper)
{
    FrameBounds fb;
    fb.lower = std::max(lower, 0.0);
    fb.upper = std::max(upper, fb.lower);
    fb.is_frame = fb.lower > kValidityTol * std::max(fb.upper, 1.0);
    fb.frame_constant = fb.lower > 0.0 ? std::sqrt(fb.upper / fb.lower) : kInf;
    return fb;
}

/// Extreme eigenvalues of the frame operator. Uses the n x n eigenproblem
/// when m > 4n and the SVD of the synthesis matrix otherwise.
inline FrameBounds frame_bounds(const Frame& frame)
{
    if (frame.empty()) throw std::invalid_argument("frame_bounds: empty frame");
    const Index n = frame.dim();
    const Index m = frame.size();
    if (m > 4 * n) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(frame.frame_operator(), Eigen::EigenvaluesOnly);
        const Vector& ev = es.eigenvalues();
        return make_bounds(ev(0), ev(ev.size() - 1));
    }
    const Vector s = linalg::singular_values(frame.synthesis());
    const double upper = s(0) * s(0);
    // Fewer vectors than dimensions: the frame operator is singular.
    const double lower = m < n ? 0.0 : s(s.size() - 1) * s(s.size() - 1);
    return make_bounds(lower, upper);
}

/// B/A <= 1 + tol. Tight up to scale; see is_parseval for A = B = 1.
inline bool is_tight(const Frame& frame, double tol)
{
    const FrameBounds fb = frame_bounds(frame);
    if (fb.lower <= 0.0) return false;
    return fb.upper / fb.lower <= 1.0 + tol;
}

inline bool is_parseval(const Frame& frame, double tol)
{
    const FrameBounds fb = frame_bounds(frame);
    return std::abs(fb.lower - 1.0) <= tol && std::abs(fb.upper - 1.0) <= tol;
}

/// S^{-1/2} through the symmetric eigendecomposition, eigenvalues clamped at
/// the validity tolerance.
inline Matrix inverse_sqrt_frame_operator(const Frame& frame)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(frame.frame_operator());
    const Vector& ev = es.eigenvalues();
    const double top = std::max(ev(ev.size() - 1), 1.0);
    const Vector inv_sqrt =
        ev.unaryExpr([&](double l) { return 1.0 / std::sqrt(std::max(l, kValidityTol * top)); });
    return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
}

/// Canonical Parseval frame (S^{-1/2} x_j).
inline Frame tighten(const Frame& frame)
{
    const FrameBounds fb = frame_bounds(frame);
    if (!fb.is_frame)
        throw NotAFrameError("tighten: not a frame (lower bound " + std::to_string(fb.lower) + ")");
    return Frame(inverse_sqrt_frame_operator(frame) * frame.synthesis());
}

/// The Parseval frame (P e_j) of a symmetric idempotent m x m matrix,
/// expressed in an orthonormal basis of range(P) obtained by Gram-Schmidt on
/// the columns of P in order.
inline Frame frame_from_projection(const Matrix& p)
{
    if (p.rows() != p.cols() || p.rows() == 0)
        throw std::invalid_argument("frame_from_projection: matrix must be square and nonempty");
    if ((p - p.transpose()).cwiseAbs().maxCoeff() > 1e-8)
        throw std::invalid_argument("frame_from_projection: matrix is not symmetric");
    if ((p * p - p).cwiseAbs().maxCoeff() > 1e-8)
        throw std::invalid_argument("frame_from_projection: matrix is not idempotent");
    const Matrix q = linalg::orthonormal_basis(p, 1e-8);
    if (q.cols() == 0) throw std::invalid_argument("frame_from_projection: zero projection");
    return Frame(q.transpose() * p);
}

/// n x m matrix with orthonormal rows whose columns form the canonical tight
/// frame equivalent to the input.
inline Matrix row_orthonormal_form(const Frame& frame)
{
    Matrix rows = tighten(frame).synthesis();
    const Matrix gram = rows * rows.transpose();
    const auto n = rows.rows();
    if ((gram - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-8)
        throw std::runtime_error("row_orthonormal_form: rows failed orthonormality check");
    return rows;
}

/// Sum of squared norms of a Parseval frame, which equals its dimension.
inline double dimension_identity(const Frame& frame)
{
    if (!is_parseval(frame, 1e-6))
        throw std::invalid_argument(
            "dimension_identity: frame is not tight with A = B = 1; tighten it first");
    return frame.synthesis().squaredNorm();
}

inline EquivalenceCertificate equivalence_certificate(const Matrix& system)
{
    if (system.cols() == 0) throw std::invalid_argument("equivalence_certificate: empty system");
    EquivalenceCertificate cert;
    const Vector s = linalg::singular_values(system);
    cert.hilbertian = s(0);
    double smin = system.cols() > system.rows() ? 0.0 : s(s.size() - 1);
    const double eps = std::numeric_limits<double>::epsilon();
    if (smin <= eps * static_cast<double>(std::max(system.rows(), system.cols())) * s(0)) smin = 0.0;
    cert.besselian = smin > 0.0 ? 1.0 / smin : kInf;
    cert.constant = smin > 0.0 ? cert.hilbertian * cert.besselian : kInf;
    return cert;
}

inline EquivalenceCertificate equivalence_certificate(const Frame& system)
{
    return equivalence_certificate(system.synthesis());
}

inline Matrix gram_matrix(const Matrix& system)
{
    Matrix g = system.transpose() * system;
    return 0.5 * (g + g.transpose());
}

/// Removes zero vectors; returns the kept frame and the kept original indices.
inline std::pair<Frame, IndexList> drop_zero_vectors(const Frame& frame)
{
    IndexList kept;
    for (Index j = 0; j < frame.size(); ++j)
        if (frame.vector(j).squaredNorm() > 0.0) kept.push_back(j);
    if (kept.size() == frame.size()) return {frame, kept};
    if (kept.empty()) throw NotAFrameError("frame has only zero vectors");
    return {Frame(linalg::select_columns(frame.synthesis(), kept)), kept};
}

}  // namespace framex
