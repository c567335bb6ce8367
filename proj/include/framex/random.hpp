#pragma once

// Seeded random instances.
//
// The integer stream is std::mt19937_64, whose output sequence is fixed by the
// C++ standard. Uniform doubles take the top 53 bits of each draw
// ((x >> 11) * 2^-53); normal deviates use the Box-Muller transform on two
// uniforms, returning the cosine branch first and the sine branch on the next
// call. std::normal_distribution is avoided because its algorithm is
// implementation-defined.

#include "framex/linalg.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace framex {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    Matrix gaussian(Eigen::Index rows, Eigen::Index cols)
    {
        Matrix g(rows, cols);
        // Column-major fill so the draw order is independent of storage.
        for (Eigen::Index c = 0; c < cols; ++c)
            for (Eigen::Index r = 0; r < rows; ++r) g(r, c) = normal();
        return g;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

namespace random {

/// n x m matrix with orthonormal rows (n <= m); its columns form a Parseval frame.
inline Matrix row_orthonormal(Rng& rng, Eigen::Index n, Eigen::Index m)
{
    const Matrix g = rng.gaussian(m, n);
    const Matrix q = linalg::orthonormal_basis(g);
    return q.transpose();
}

/// Orthogonal n x n matrix.
inline Matrix rotation(Rng& rng, Eigen::Index n) { return linalg::orthonormal_basis(rng.gaussian(n, n)); }

/// Rank-k orthogonal projection on R^m.
inline Matrix projection(Rng& rng, Eigen::Index m, Eigen::Index k)
{
    const Matrix q = linalg::orthonormal_basis(rng.gaussian(m, k));
    return q * q.transpose();
}

/// n x m matrix with unit-norm Gaussian columns.
inline Matrix unit_columns(Rng& rng, Eigen::Index n, Eigen::Index m)
{
    Matrix g = rng.gaussian(n, m);
    for (Eigen::Index c = 0; c < m; ++c) g.col(c).normalize();
    return g;
}

/// Symmetric n x n matrix with zero diagonal and unit spectral norm.
inline Matrix zero_diagonal_symmetric(Rng& rng, Eigen::Index n)
{
    Matrix g = rng.gaussian(n, n);
    Matrix t = 0.5 * (g + g.transpose());
    t.diagonal().setZero();
    const double norm = linalg::sigma_max(t);
    if (norm > 0.0) t /= norm;
    return t;
}

}  // namespace random
}  // namespace framex
