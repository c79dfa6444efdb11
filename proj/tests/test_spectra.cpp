#include <gtest/gtest.h>

#include <eigenpaths/matching.hpp>
#include <eigenpaths/spectra.hpp>

#include "fixtures.hpp"

using namespace eigenpaths;

namespace {

CMatrix oracle_matrix() {
    CMatrix m(4, 4);
    m << 1.0, Complex(0, 2), 0.5, -1.0,  //
        0.3, Complex(-1, 1), 2.0, 0.0,    //
        0.0, 1.0, Complex(0, 0.25), 3.0,  //
        1.0, -2.0, 0.5, 1.0;
    return m;
}

// Eigenvalues of oracle_matrix() from a 40-digit mpmath eigensolve.
const std::vector<Complex> kOracleEigenvalues = {
    {-2.7880607446342359811, 0.37177134398415587113},
    {0.79998882229547415865, 1.4308279602918145087},
    {1.3762032479367152059, -1.623455035717496784},
    {1.6118686744020466165, 1.0708557314415264041},
};

// det(tI - M) of oracle_matrix(), low to high without the leading 1.
const std::vector<Complex> kOracleCharPoly = {{-15.15, -11.45}, {16.1, 0.1}, {-3.75, 1.65}, {-1.0, -1.25}};

}  // namespace

TEST(Eigenvalues, Diagonal) {
    const auto s = eigenvalues(fixtures::diag({2.0, 1.0}));
    EXPECT_EQ(s[0], Complex(1.0));
    EXPECT_EQ(s[1], Complex(2.0));
}

TEST(Eigenvalues, RotationGenerator) {
    CMatrix r(2, 2);
    r << 0.0, -1.0, 1.0, 0.0;
    const auto s = eigenvalues(r);
    EXPECT_LT(std::abs(s[0] - Complex(0, -1)), 1e-15);
    EXPECT_LT(std::abs(s[1] - Complex(0, 1)), 1e-15);
}

TEST(Eigenvalues, FrozenHighPrecisionOracle) {
    const auto s = eigenvalues(oracle_matrix());
    for (std::size_t i = 0; i < 4; ++i) EXPECT_LT(std::abs(s[i] - kOracleEigenvalues[i]), 1e-12) << i;
}

TEST(Eigenvalues, TraceIdentity) {
    std::mt19937_64 rng(21);
    for (std::size_t n = 1; n <= 8; ++n) {
        const CMatrix m = fixtures::random_matrix(rng, n);
        EXPECT_LT(std::abs(eigenvalues(m).sum() - m.trace()), 1e-9 * (1.0 + m.operatorNorm()));
    }
}

TEST(Eigenvalues, AgreeWithCharPolyRoots) {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + std::size_t(trial % 7);
        const CMatrix m = fixtures::random_matrix(rng, n);
        const auto ev = eigenvalues(m).values;
        const auto roots = poly_roots(char_poly(m));
        EXPECT_LT(bottleneck_distance(ev, roots), 1e-7 * (1.0 + m.operatorNorm())) << "n=" << n;
    }
}

TEST(CharPoly, FrozenOracle) {
    const auto p = char_poly(oracle_matrix());
    ASSERT_EQ(p.degree(), 4u);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_LT(std::abs(p.coeffs[k] - kOracleCharPoly[k]), 1e-12) << k;
}

TEST(CharPoly, DiagonalAndZero) {
    const auto p = char_poly(fixtures::diag({1.0, 2.0}));
    EXPECT_LT(std::abs(p.coeffs[0] - 2.0), 1e-15);
    EXPECT_LT(std::abs(p.coeffs[1] + 3.0), 1e-15);
    const auto z = char_poly(CMatrix::Zero(5, 5));
    for (Complex c : z.coeffs) EXPECT_EQ(c, Complex{});
}

TEST(CharPoly, CapIsEnforced) {
    SpectraConfig cfg;
    cfg.char_poly_cap = 3;
    EXPECT_THROW(char_poly(CMatrix::Identity(4, 4), cfg), Error);
}

TEST(PolyRoots, UnitImaginaryPair) {
    const auto r = poly_roots(MonicPoly({1.0, 0.0}));
    EXPECT_LT(std::abs(r[0] - Complex(0, -1)), 1e-14);
    EXPECT_LT(std::abs(r[1] - Complex(0, 1)), 1e-14);
}

TEST(PolyRoots, TripleRootWithinCubeRootRadius) {
    const auto r = poly_roots(MonicPoly::from_roots({1.0, 1.0, 1.0}));
    const double radius = std::cbrt(SpectraConfig{}.root_tol) * 10.0;
    for (Complex z : r) EXPECT_LT(std::abs(z - 1.0), radius);
}

TEST(PolyRoots, CoefficientReconstruction) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Complex> a(6);
        for (auto& c : a) c = fixtures::random_complex(rng);
        const MonicPoly p(a);
        const auto back = MonicPoly::from_roots(poly_roots(p));
        EXPECT_LT(p.distance(back), 1e-7);
    }
}

TEST(PolyRoots, WarmStartConverges) {
    const MonicPoly p = MonicPoly::from_roots({0.5, Complex(0, 2), -1.0});
    std::vector<Complex> warm = {0.51, Complex(0.01, 1.98), -1.02};
    const auto r = poly_roots(p, {}, &warm);
    EXPECT_LT(bottleneck_distance(r, {0.5, Complex(0, 2), -1.0}), 1e-12);
}

TEST(Discriminant, CubicClosedForm) {
    // t^3 - 2t + 1: -4 a1^3 - 27 a0^2 = 32 - 27 = 5.
    EXPECT_LT(std::abs(discriminant(MonicPoly({1.0, -2.0, 0.0})) - 5.0), 1e-12);
    // Product of squared root differences.
    const std::vector<Complex> roots = {1.0, Complex(0, 1), -2.0, 0.5};
    Complex expected(1.0);
    for (std::size_t i = 0; i < roots.size(); ++i)
        for (std::size_t j = i + 1; j < roots.size(); ++j) expected *= (roots[i] - roots[j]) * (roots[i] - roots[j]);
    EXPECT_LT(std::abs(discriminant(MonicPoly::from_roots(roots)) - expected), 1e-10 * std::abs(expected));
}

TEST(DiscriminantPath2x2, Endpoints) {
    const Complex l1(1, 2), l2(-0.5, 0), m1(0.3, -1), m2(2, 2), v1(0.7, 0.1), v2(-1, 3);
    EXPECT_LT(std::abs(discriminant_path_2x2(l1, l2, m1, m2, v1, v2, 0.0) - (l1 - l2) * (l1 - l2)), 1e-14);
    EXPECT_LT(std::abs(discriminant_path_2x2(l1, l2, m1, m2, v1, v2, 1.0) - (m1 - m2) * (m1 - m2)), 1e-14);
}

TEST(DiscriminantPath2x2, BothInstanceVanishesAtMidpoint) {
    EXPECT_LT(std::abs(discriminant_path_2x2(1.0, -1.0, Complex(0, 1), Complex(0, -1), 1.0, -1.0, 0.5)), 1e-15);
    const auto s = eigenvalues(fixtures::both_instance()(0.5));
    EXPECT_LT(std::abs(s[0] - s[1]), 1e-7);
}

TEST(DiscriminantPath2x2, MatchesCharPolyDiscriminant) {
    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 100; ++trial) {
        const Complex l1 = fixtures::random_complex(rng), l2 = fixtures::random_complex(rng);
        const Complex m1 = fixtures::random_complex(rng), m2 = fixtures::random_complex(rng);
        const Complex v1 = fixtures::random_complex(rng), v2 = fixtures::random_complex(rng);
        CMatrix v(2, 2);
        v << v1, v2, 1.0, 1.0;
        const CMatrix a = fixtures::diag({l1, l2});
        const CMatrix b = v * fixtures::diag({m1, m2}) * v.inverse();
        const auto path = MatrixPath::convex(a, b);
        for (double t : {0.1, 0.37, 0.5, 0.81}) {
            const Complex want = discriminant(char_poly(path(t)));
            const Complex got = discriminant_path_2x2(l1, l2, m1, m2, v1, v2, t);
            EXPECT_LT(std::abs(got - want), 1e-9 * (1.0 + std::abs(want)));
        }
    }
}

TEST(DiscriminantPath2x2, DefectiveInputRejected) {
    EXPECT_THROW(discriminant_path_2x2(1.0, 0.0, 1.0, 0.0, 0.5, 0.5, 0.3), Error);
}
