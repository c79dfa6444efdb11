#include <gtest/gtest.h>

#include <eigenpaths/polypaths.hpp>

#include "fixtures.hpp"

using namespace eigenpaths;

namespace {

MonicPoly random_poly(std::mt19937_64& rng, std::size_t n) {
    std::vector<Complex> c(n);
    for (auto& x : c) x = fixtures::random_complex(rng);
    return MonicPoly(std::move(c));
}

double min_gap_along(const EigenPathSet& s) {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < s.grid.size(); ++k) g = std::min(g, min_gap(s.column(k)));
    return g;
}

/// t^2 - (2 alpha - 1)^2: roots +-(2 alpha - 1) pass through each other at 1/2.
PolyPath squared_crossing() {
    return PolyPath::combination(MonicPoly({-1.0, 0.0}), MonicPoly({-1.0, 0.0}), ScalarFn::poly({1.0, -4.0, 4.0}),
                                 ScalarFn::builtin("zero"));
}

}  // namespace

TEST(Companion, Display) {
    CMatrix expect(2, 2);
    expect << 0.0, -1.0, 1.0, 0.0;
    EXPECT_EQ(companion(MonicPoly({1.0, 0.0})), expect);
    const CMatrix one = companion(MonicPoly({Complex(-3.0, 2.0)}));
    ASSERT_EQ(one.rows(), 1);
    EXPECT_EQ(one(0, 0), Complex(3.0, -2.0));
}

TEST(Companion, CharPolyRoundTrip) {
    std::mt19937_64 rng(11);
    for (std::size_t n = 1; n <= 12; ++n) {
        for (int t = 0; t < 10; ++t) {
            const auto p = random_poly(rng, n);
            EXPECT_LT(char_poly(companion(p)).distance(p), 1e-10) << "degree " << n;
        }
    }
}

TEST(PolyPath, Evaluation) {
    const MonicPoly q({1.0, 2.0}), r({3.0, -2.0});
    const auto c = PolyPath::convex(q, r);
    EXPECT_EQ(c(0.5).coeffs, (std::vector<Complex>{2.0, 0.0}));
    const auto w = PolyPath::combination(q, r, ScalarFn::builtin("one"), ScalarFn::builtin("one"));
    EXPECT_EQ(w(0.3).coeffs, (std::vector<Complex>{4.0, 0.0}));
    const auto s = PolyPath::sampled({0.0, 0.25, 1.0}, {q, r, q});
    EXPECT_EQ(s(0.125).coeffs, c(0.5).coeffs);
    EXPECT_EQ(s(1.0).coeffs, q.coeffs);
    EXPECT_EQ(s.degree(), 2u);
    EXPECT_THROW(PolyPath::convex(q, MonicPoly({1.0})), Error);
    EXPECT_THROW(PolyPath::sampled({0.0, 0.5}, {q, r}), Error);
    EXPECT_THROW(PolyPath::sampled({0.0, 1.0}, {q, MonicPoly({1.0})}), Error);
    EXPECT_THROW(c(1.5), Error);
}

TEST(CompanionPath, ConstantAndConvex) {
    const MonicPoly p({Complex(0.5, 1.0), -2.0, 0.0});
    const auto cp = companion_path(PolyPath::constant(p));
    EXPECT_EQ(cp(0.0), cp(0.7));
    const auto cv = companion_path(PolyPath::convex(p, MonicPoly({1.0, 1.0, 1.0})));
    EXPECT_TRUE(cv.is_convex());
    EXPECT_LT(max_norm(cv(0.25) - companion(PolyPath::convex(p, MonicPoly({1.0, 1.0, 1.0}))(0.25))), 1e-15);
}

TEST(CompanionPath, CombinationFormDependsOnWeights) {
    const MonicPoly q({1.0, 0.0}), r({-1.0, 0.0});
    EXPECT_TRUE(companion_path(PolyPath::combination(q, r, ScalarFn::builtin("cos_ramp_down"),
                                                     ScalarFn::builtin("cos_ramp")))
                    .is_combination());
    const auto pp = PolyPath::combination(q, r, ScalarFn::poly({1.0, -1.0, 0.5}), ScalarFn::builtin("linear"));
    const auto cp = companion_path(pp);
    EXPECT_TRUE(cp.is_sampled());
    for (double t : {0.0, 0.3, 1.0}) EXPECT_LT(char_poly(cp(t)).distance(pp(t)), 1e-6) << t;
}

TEST(TrackRoots, SquareRootOfAlpha) {
    const auto pp = PolyPath::convex(MonicPoly({0.0, 0.0}), MonicPoly({-1.0, 0.0}));
    const auto r = track_roots(pp);
    for (std::size_t k = 0; k < r.paths.grid.size(); ++k) {
        const double s = std::sqrt(r.paths.grid[k]);
        EXPECT_LT(bottleneck_distance(r.paths.column(k), {Complex(-s), Complex(s)}), 1e-7);
    }
    ASSERT_EQ(r.report.ambiguities.size(), 1u);
    EXPECT_EQ(r.report.ambiguities[0].alpha, 0.0);
}

TEST(TrackRoots, CollisionAtHalf) {
    const auto pp = PolyPath::convex(MonicPoly({1.0, 0.0}), MonicPoly({-1.0, 0.0}));
    const auto r = track_roots(pp);
    ASSERT_EQ(r.report.ambiguities.size(), 1u);
    EXPECT_NEAR(r.report.ambiguities[0].alpha, 0.5, 1e-6);
    EXPECT_LT(std::abs(r.report.ambiguities[0].lambda), 1e-6);
}

TEST(TrackRootsDirect, StraightAndConstant) {
    const auto line = track_roots_direct(PolyPath::convex(MonicPoly({-1.0}), MonicPoly({-5.0})));
    for (std::size_t k = 0; k < line.paths.grid.size(); ++k)
        EXPECT_LT(std::abs(line.paths.paths[0][k] - (1.0 + 4.0 * line.paths.grid[k])), 1e-14);
    const auto c = track_roots_direct(PolyPath::constant(MonicPoly({1.0, 0.0})));
    for (std::size_t k = 0; k < c.paths.grid.size(); ++k) {
        EXPECT_LT(std::abs(c.paths.paths[0][k] - Complex(0.0, -1.0)), 1e-14);
        EXPECT_LT(std::abs(c.paths.paths[1][k] - Complex(0.0, 1.0)), 1e-14);
    }
    EXPECT_TRUE(c.unresolved_alphas.empty());
}

TEST(TrackRootsDirect, CollisionIsReportedUnresolved) {
    const auto r = track_roots_direct(PolyPath::convex(MonicPoly({1.0, 0.0}), MonicPoly({-1.0, 0.0})));
    ASSERT_FALSE(r.unresolved_alphas.empty());
    for (double a : r.unresolved_alphas) EXPECT_NEAR(a, 0.5, 1e-3);
}

TEST(TrackRootsDirect, AgreesWithCompanionTracking) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        const auto pp = PolyPath::convex(random_poly(rng, 4), random_poly(rng, 4));
        const auto tr = track_roots(pp);
        const auto dr = track_roots_direct(pp, {}, tr.paths.grid);
        const auto d = compare_root_paths(tr.paths, dr.paths);
        EXPECT_LT(d.set_dev, 1e-7) << "trial " << t;
        if (tr.report.empty() && dr.unresolved_alphas.empty()) {
            EXPECT_LT(d.path_dev, 1e-6) << "trial " << t;
        }
    }
}

TEST(RipPoly, AmbiguityFreeIsUnchanged) {
    const auto pp = PolyPath::convex(MonicPoly({-1.0, 0.0}), MonicPoly({-4.0, 0.0}));
    const auto r = rip_poly(pp, 0.1);
    EXPECT_TRUE(r.new_path.is_convex());
    EXPECT_EQ(r.coeff_dev, 0.0);
}

TEST(RipPoly, SquaredCrossing) {
    const auto pp = squared_crossing();
    const double eps = 0.1;
    const auto base = track_roots(pp);
    ASSERT_FALSE(base.report.empty());
    const auto all = enumerate_pairings(base.paths, base.report);
    ASSERT_EQ(all.size(), 2u);
    for (std::size_t k = 0; k < all.size(); ++k) {
        const auto r = rip_poly(pp, eps, {}, all.generators[k]);
        EXPECT_TRUE(r.new_path.is_sampled());
        EXPECT_LT(r.coeff_dev, eps);
        EXPECT_LT(r.root_dev, eps);
        const auto direct = track_roots_direct(r.new_path);
        EXPECT_TRUE(direct.unresolved_alphas.empty());
        EXPECT_GT(min_gap_along(direct.paths), 0.0);
        ASSERT_TRUE(r.achieved_pairing);
        EXPECT_TRUE(equivalent(*r.achieved_pairing, all.pairings[k], 1e-9)) << "pairing " << k;
    }
}

TEST(ConvexReductionPoly, LinearWeights) {
    const auto rep = convex_reduction_poly(MonicPoly({1.0, 0.0}), MonicPoly({-1.0, 0.0}),
                                           ScalarFn::builtin("linear_down"), ScalarFn::builtin("linear"));
    EXPECT_TRUE(rep.hypothesis_holds);
    EXPECT_TRUE(rep.companion_exact);
    EXPECT_TRUE(rep.contained);
    EXPECT_FALSE(rep.monic_contained.has_value());
}

TEST(ConvexReductionPoly, NonnegativeWeightsOnCubics) {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 3; ++t) {
        const auto rep = convex_reduction_poly(random_poly(rng, 3), random_poly(rng, 3), ScalarFn::poly({1.0, -2.0, 1.0}),
                                               ScalarFn::poly({0.0, 0.0, 1.0}));
        EXPECT_TRUE(rep.hypothesis_holds);
        EXPECT_FALSE(rep.companion_exact);
        EXPECT_TRUE(rep.contained) << "trial " << t;
    }
}

TEST(ConvexReductionPoly, NegativeDipOfF) {
    // f = (1 - a)(1 - 1.5 a) is negative on (2/3, 1) while g = a stays positive.
    std::mt19937_64 rng(9);
    const auto rep = convex_reduction_poly(random_poly(rng, 3), random_poly(rng, 3), ScalarFn::poly({1.0, -2.5, 1.5}),
                                           ScalarFn::builtin("linear"));
    EXPECT_TRUE(rep.hypothesis_holds);
    EXPECT_TRUE(rep.contained);
    const auto bad = convex_reduction_poly(MonicPoly({1.0, 0.0}), MonicPoly({-1.0, 0.0}), ScalarFn::poly({1.0, -4.0, 3.0}),
                                           ScalarFn::poly({0.0, -2.0, 3.0}));
    EXPECT_FALSE(bad.hypothesis_holds);
}
