#include "framex/frame.hpp"
#include "framex/random.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace framex;

namespace {

Frame mercedes()
{
    const double h = std::sqrt(3.0) / 2.0;
    return Frame(2, {{1.0, 0.0}, {-0.5, h}, {-0.5, -h}});
}

Frame e1_e1_e2() { return Frame(2, {{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}); }

Frame random_frame(std::uint64_t seed, Eigen::Index n, Eigen::Index m)
{
    Rng rng(seed);
    return Frame(rng.gaussian(n, m));
}

}  // namespace

TEST(FrameConstruction, RejectsWrongCoordinateCount)
{
    EXPECT_THROW(Frame(2, {{1.0, 0.0}, {1.0}}), std::invalid_argument);
    EXPECT_THROW(Frame(0, {}), std::invalid_argument);
}

TEST(FrameBoundsTest, StandardBasis)
{
    const FrameBounds fb = frame_bounds(Frame(Matrix::Identity(2, 2)));
    EXPECT_NEAR(fb.lower, 1.0, 1e-12);
    EXPECT_NEAR(fb.upper, 1.0, 1e-12);
    EXPECT_NEAR(fb.frame_constant, 1.0, 1e-12);
    EXPECT_TRUE(fb.is_frame);
}

TEST(FrameBoundsTest, MercedesSystem)
{
    const FrameBounds fb = frame_bounds(mercedes());
    EXPECT_NEAR(fb.lower, 1.5, 1e-12);
    EXPECT_NEAR(fb.upper, 1.5, 1e-12);
}

TEST(FrameBoundsTest, MatchesJacobiOracleOnBothPaths)
{
    // m <= 4n uses the SVD, m > 4n the eigenproblem of S.
    for (Eigen::Index m : {6, 40}) {
        const Frame f = random_frame(7 + static_cast<std::uint64_t>(m), 5, m);
        const std::vector<double> ev = oracle::jacobi_eigenvalues(f.frame_operator());
        const FrameBounds fb = frame_bounds(f);
        EXPECT_NEAR(fb.lower, ev.front(), 1e-9 * ev.back());
        EXPECT_NEAR(fb.upper, ev.back(), 1e-9 * ev.back());
    }
}

TEST(FrameBoundsTest, DegenerateIsNotAFrame)
{
    const FrameBounds fb = frame_bounds(Frame(2, {{1.0, 0.0}, {2.0, 0.0}}));
    EXPECT_FALSE(fb.is_frame);
    EXPECT_TRUE(std::isinf(fb.frame_constant) || fb.frame_constant > 1e5);
    const FrameBounds few = frame_bounds(Frame(3, {{1.0, 0.0, 0.0}}));
    EXPECT_EQ(few.lower, 0.0);
    EXPECT_TRUE(std::isinf(few.frame_constant));
    EXPECT_THROW(frame_bounds(Frame(Matrix(3, 0))), std::invalid_argument);
}

TEST(FrameBoundsTest, ZeroVectorsDoNotChangeBounds)
{
    Matrix x = Matrix::Zero(2, 4);
    x.leftCols(3) = mercedes().synthesis();
    const FrameBounds fb = frame_bounds(Frame(x));
    EXPECT_NEAR(fb.lower, 1.5, 1e-12);
    EXPECT_NEAR(fb.upper, 1.5, 1e-12);
}

TEST(FrameBoundsTest, InvariantUnderRotation)
{
    for (std::uint64_t s = 0; s < 10; ++s) {
        Rng rng(100 + s);
        const Matrix x = rng.gaussian(6, 15);
        const Matrix q = random::rotation(rng, 6);
        const FrameBounds a = frame_bounds(Frame(x));
        const FrameBounds b = frame_bounds(Frame(q * x));
        EXPECT_NEAR(a.lower, b.lower, 1e-8);
        EXPECT_NEAR(a.upper, b.upper, 1e-8);
    }
}

TEST(IsTight, Examples)
{
    EXPECT_TRUE(is_tight(Frame(Matrix::Identity(4, 4)), 1e-12));
    EXPECT_FALSE(is_tight(e1_e1_e2(), 1e-8));
    EXPECT_TRUE(is_tight(mercedes(), 1e-12));  // tight up to scale
    EXPECT_FALSE(is_parseval(mercedes(), 1e-8));
}

TEST(IsTight, ProjectedOrthonormalBasis)
{
    for (std::uint64_t s = 0; s < 10; ++s) {
        Rng rng(200 + s);
        const Matrix p = random::projection(rng, 9, 4);
        EXPECT_TRUE(is_tight(frame_from_projection(p), 1e-8));
    }
}

TEST(Tighten, TightInputUnchanged)
{
    Rng rng(3);
    const Frame f(random::row_orthonormal(rng, 4, 9));
    const Frame t = tighten(f);
    EXPECT_LE((t.synthesis() - f.synthesis()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Tighten, DoubledFirstAxis)
{
    const Frame t = tighten(e1_e1_e2());
    Matrix expected(2, 3);
    expected << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 0, 0, 0, 1;
    EXPECT_LE((t.synthesis() - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Tighten, RandomFramesBecomeParsevalAndIdempotent)
{
    for (std::uint64_t s = 0; s < 20; ++s) {
        const Frame f = random_frame(300 + s, 8, 24);
        const Frame t = tighten(f);
        EXPECT_TRUE(is_tight(t, 1e-8));
        const std::vector<double> ev = oracle::jacobi_eigenvalues(t.frame_operator());
        EXPECT_NEAR(ev.front(), 1.0, 1e-8);
        EXPECT_NEAR(ev.back(), 1.0, 1e-8);
        EXPECT_LE((tighten(t).synthesis() - t.synthesis()).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(Tighten, ConditionOfTheMapIsAtMostFrameConstantSquared)
{
    const Frame f = random_frame(17, 5, 12);
    const FrameBounds fb = frame_bounds(f);
    const std::vector<double> s = oracle::singular_values(inverse_sqrt_frame_operator(f));
    EXPECT_LE(s.front() / s.back(), fb.frame_constant * fb.frame_constant * (1 + 1e-10));
}

TEST(Tighten, NotAFrameThrows)
{
    EXPECT_THROW(tighten(Frame(2, {{1.0, 1.0}, {2.0, 2.0}})), NotAFrameError);
}

TEST(FrameFromProjection, Identity)
{
    const Frame f = frame_from_projection(Matrix::Identity(3, 3));
    EXPECT_EQ(f.dim(), 3u);
    EXPECT_LE((f.synthesis() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FrameFromProjection, RankOneDiagonal)
{
    const Matrix p = Matrix::Constant(2, 2, 0.5);
    const Frame f = frame_from_projection(p);
    ASSERT_EQ(f.dim(), 1u);
    ASSERT_EQ(f.size(), 2u);
    EXPECT_NEAR(std::abs(f.vector(0)(0)), 1 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(f.vector(0)(0), f.vector(1)(0), 1e-12);
    const FrameBounds fb = frame_bounds(f);
    EXPECT_NEAR(fb.lower, 1.0, 1e-12);
    EXPECT_NEAR(fb.upper, 1.0, 1e-12);
}

TEST(FrameFromProjection, RejectsNonProjections)
{
    Matrix asym(2, 2);
    asym << 1, 1, 0, 0;
    EXPECT_THROW(frame_from_projection(asym), std::invalid_argument);
    EXPECT_THROW(frame_from_projection(2.0 * Matrix::Identity(2, 2)), std::invalid_argument);
    EXPECT_THROW(frame_from_projection(Matrix(2, 3)), std::invalid_argument);
}

TEST(RowOrthonormalForm, Examples)
{
    EXPECT_LE((row_orthonormal_form(Frame(Matrix::Identity(3, 3))) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(),
              1e-12);
    Matrix expected(2, 3);
    expected << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 0, 0, 0, 1;
    EXPECT_LE((row_orthonormal_form(e1_e1_e2()) - expected).cwiseAbs().maxCoeff(), 1e-12);
    for (std::uint64_t s = 0; s < 10; ++s) {
        const Matrix r = row_orthonormal_form(random_frame(400 + s, 4, 10));
        EXPECT_LE((r * r.transpose() - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(DimensionIdentity, Examples)
{
    EXPECT_NEAR(dimension_identity(Frame(Matrix::Identity(5, 5))), 5.0, 1e-12);
    const Frame scaled(std::sqrt(2.0 / 3.0) * mercedes().synthesis());
    EXPECT_NEAR(dimension_identity(scaled), 2.0, 1e-12);
    EXPECT_THROW(dimension_identity(mercedes()), std::invalid_argument);
    EXPECT_THROW(dimension_identity(e1_e1_e2()), std::invalid_argument);
}

TEST(DimensionIdentity, RandomProjectionsMatchTrace)
{
    for (std::uint64_t s = 0; s < 20; ++s) {
        Rng rng(500 + s);
        const Eigen::Index k = 1 + static_cast<Eigen::Index>(s % 15);
        const Matrix p = random::projection(rng, 16, k);
        // Hilbert-Schmidt norm of P equals its trace for a projection.
        EXPECT_NEAR(p.trace(), static_cast<double>(k), 1e-10);
        EXPECT_NEAR(dimension_identity(frame_from_projection(p)), static_cast<double>(k), 1e-8 * k);
    }
}

TEST(EquivalenceCertificateTest, Examples)
{
    const EquivalenceCertificate onb = equivalence_certificate(Matrix::Identity(3, 3));
    EXPECT_NEAR(onb.hilbertian, 1.0, 1e-12);
    EXPECT_NEAR(onb.besselian, 1.0, 1e-12);
    EXPECT_NEAR(onb.constant, 1.0, 1e-12);

    Matrix dup(2, 2);
    dup << 1, 1, 0, 0;
    EXPECT_FALSE(equivalence_certificate(dup).finite());

    Matrix skew(2, 2);
    skew << 1, 1 / std::sqrt(2.0), 0, 1 / std::sqrt(2.0);
    const EquivalenceCertificate c = equivalence_certificate(skew);
    EXPECT_NEAR(c.hilbertian * c.hilbertian, (2 + std::sqrt(2.0)) / 2, 1e-12);
    EXPECT_NEAR(c.besselian * c.besselian, 2 / (2 - std::sqrt(2.0)), 1e-12);
    EXPECT_THROW(equivalence_certificate(Matrix(2, 0)), std::invalid_argument);
}

TEST(EquivalenceCertificateTest, TightFramesAreOneHilbertian)
{
    for (std::uint64_t s = 0; s < 5; ++s) {
        const Frame t = tighten(random_frame(600 + s, 4, 11));
        const EquivalenceCertificate c = equivalence_certificate(t);
        EXPECT_NEAR(c.hilbertian, 1.0, 1e-6);
        EXPECT_FALSE(c.finite());
        const EquivalenceCertificate sq = equivalence_certificate(tighten(random_frame(700 + s, 4, 4)));
        EXPECT_NEAR(sq.hilbertian, 1.0, 1e-6);
        EXPECT_NEAR(sq.besselian, 1.0, 1e-6);
    }
}

TEST(EquivalenceCertificateTest, AgreesWithOracle)
{
    for (std::uint64_t s = 0; s < 10; ++s) {
        Rng rng(800 + s);
        const Matrix a = rng.gaussian(7, 4);
        const std::vector<double> sv = oracle::singular_values(a);
        const EquivalenceCertificate c = equivalence_certificate(a);
        EXPECT_NEAR(c.hilbertian, sv.front(), 1e-9 * sv.front());
        EXPECT_NEAR(c.besselian, 1.0 / sv.back(), 1e-8 / sv.back());
        EXPECT_GE(c.constant, 1.0);
    }
}

TEST(GramMatrix, Examples)
{
    EXPECT_LE((gram_matrix(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 0.0);
    Matrix vv(2, 2);
    vv << 0.6, 0.6, 0.8, 0.8;
    EXPECT_LE((gram_matrix(vv) - Matrix::Ones(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
    Rng rng(9);
    const Matrix a = rng.gaussian(5, 3);
    const Matrix g = gram_matrix(a);
    EXPECT_EQ(g, g.transpose());
    const std::vector<double> ev = oracle::jacobi_eigenvalues(g);
    Eigen::JacobiSVD<Matrix> svd(a);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(ev[2 - i], svd.singularValues()(i) * svd.singularValues()(i), 1e-8);
}

TEST(DropZeroVectors, KeepsIndices)
{
    Matrix x = Matrix::Zero(2, 4);
    x(0, 1) = 1.0;
    x(1, 3) = 2.0;
    const auto [f, kept] = drop_zero_vectors(Frame(x));
    EXPECT_EQ(kept, (IndexList{1, 3}));
    EXPECT_EQ(f.size(), 2u);
    EXPECT_THROW(drop_zero_vectors(Frame(Matrix::Zero(2, 2))), NotAFrameError);
}
