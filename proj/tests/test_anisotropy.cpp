#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "atop/anisotropy.hpp"
#include "oracles.hpp"

using namespace atop;

namespace {

const std::vector<Anisotropy> kFamilies = {
    Anisotropy::isotropic(),
    Anisotropy::convex_overhang(0.5),
    Anisotropy::convex_overhang(0.3),
    Anisotropy::regularized_overhang(0.5, 0.1),
    Anisotropy::regularized_overhang(0.3, 0.1),
    Anisotropy::nonconvex_overhang(0.5, 0.5),
    Anisotropy::nonconvex_overhang(0.7, 0.3),
};

bool near_branch_boundary(const Anisotropy& a, const Vec2& q, double rel) {
    return branch_classify(a, q, rel) == Branch::Boundary;
}

}  // namespace

TEST_CASE("gamma evaluates the published formulas") {
    CHECK(gamma_eval(Anisotropy::isotropic(), {3.0, 4.0}) == doctest::Approx(5.0).epsilon(1e-15));

    const Anisotropy conv = Anisotropy::convex_overhang(0.5);
    CHECK(gamma_eval(conv, {0.0, -1.0}) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(gamma_eval(conv, {0.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(gamma_eval(conv, {0.0, 0.0}) == 0.0);

    // apex of the non-convex cone carries value one by construction
    for (double alpha : {0.3, 0.5, 0.7})
        for (double lambda : {0.25, 0.5, 0.75}) {
            const Anisotropy nc = Anisotropy::nonconvex_overhang(alpha, lambda);
            CHECK(gamma_eval(nc, {0.0, -lambda * alpha}) == doctest::Approx(1.0).epsilon(1e-12));
        }

    // regularized density adds delta |q|
    const Anisotropy reg = Anisotropy::regularized_overhang(0.5, 0.1);
    CHECK(gamma_eval(reg, {0.0, 1.0}) == doctest::Approx(1.1).epsilon(1e-15));
    CHECK(gamma_eval(reg, {0.0, -1.0}) == doctest::Approx(2.1).epsilon(1e-15));
}

TEST_CASE("branch classification") {
    const Anisotropy conv = Anisotropy::convex_overhang(0.5);
    CHECK(branch_classify(conv, {0.0, 1.0}) == Branch::Upper);
    CHECK(branch_classify(conv, {0.0, -1.0}) == Branch::Lower);
    // equality case x2 = -alpha |x|
    const Vec2 rim{std::sqrt(3.0) / 2.0, -0.5};
    CHECK(branch_classify(conv, rim) == Branch::Boundary);
    CHECK(branch_classify(conv, {0.0, 0.0}) == Branch::Zero);

    const Anisotropy nc = Anisotropy::nonconvex_overhang(0.5, 0.5);
    CHECK(branch_classify(nc, {-1.0, -3.0}) == Branch::LeftCone);
    CHECK(branch_classify(nc, {1.0, -3.0}) == Branch::RightCone);
    CHECK(branch_classify(nc, {0.0, -3.0}) == Branch::Boundary);
}

TEST_CASE("bgn matrix matches the published tables and B(q)q = DA(q)") {
    // isotropic: identity
    const Mat2 bi = bgn_matrix(Anisotropy::isotropic(), {1.0, 2.0});
    CHECK(bi == Mat2::identity());
    CHECK((bi * Vec2{1.0, 2.0}) == Vec2{1.0, 2.0});

    // convex lower cone: diag(0, alpha^-2)
    const Anisotropy conv = Anisotropy::convex_overhang(0.5);
    const Mat2 bc = bgn_matrix(conv, {0.0, -1.0});
    CHECK(bc.a11 == 0.0);
    CHECK(bc.a22 == doctest::Approx(4.0).epsilon(1e-15));
    const Vec2 daq = bc * Vec2{0.0, -1.0};
    CHECK(daq.x == 0.0);
    CHECK(daq.y == doctest::Approx(-4.0).epsilon(1e-15));

    // zero fallbacks
    CHECK(bgn_matrix(conv, {0.0, 0.0}) == Mat2::identity());
    const Anisotropy reg = Anisotropy::regularized_overhang(0.5, 0.1);
    const Mat2 b0 = bgn_matrix(reg, {0.0, 0.0});
    CHECK(b0.a11 == doctest::Approx(2.0 * 1.01).epsilon(1e-15));
    CHECK(b0.a12 == 0.0);
    CHECK(b0.a22 == doctest::Approx(2.0 * 1.01).epsilon(1e-15));
}

TEST_CASE("B(q)q agrees with a finite-difference gradient of A away from branch boundaries") {
    oracles::Rng rng(42);
    for (const Anisotropy& a : kFamilies) {
        int tested = 0;
        while (tested < 300) {
            const Vec2 q = rng.direction() * rng.uniform(0.3, 3.0);
            if (near_branch_boundary(a, q, 1e-3)) continue;
            const double h = 1e-6 * q.norm();
            const Vec2 fd = oracles::fd_grad_density(a, q, h);
            const Vec2 bq = bgn_matrix(a, q) * q;
            const double scale = std::max(1.0, fd.norm());
            CHECK((bq - fd).norm() / scale < 1e-6);
            ++tested;
        }
    }
}

TEST_CASE("dgamma: published values, finite differences, Euler identities") {
    CHECK((dgamma(Anisotropy::isotropic(), {0.0, 2.0}) - Vec2{0.0, 1.0}).norm() < 1e-15);
    const Anisotropy conv = Anisotropy::convex_overhang(0.5);
    CHECK((dgamma(conv, {0.0, -1.0}) - Vec2{0.0, -2.0}).norm() < 1e-15);

    const Anisotropy reg = Anisotropy::regularized_overhang(0.3, 0.1);
    const Vec2 q{1.0, 1.0};
    const Vec2 fd = oracles::fd_grad_gamma(reg, q, 1e-6 * q.norm());
    CHECK((dgamma(reg, q) - fd).norm() / fd.norm() < 1e-6);

    // boundary points expose the set-valued subdifferential
    CHECK_THROWS_AS((void)dgamma(conv, {std::sqrt(3.0) / 2.0, -0.5}), SubdifferentialNotSingleton);
    CHECK_THROWS_AS((void)dgamma(conv, {0.0, 0.0}), SubdifferentialNotSingleton);

    oracles::Rng rng(7);
    for (const Anisotropy& a : kFamilies) {
        int tested = 0;
        while (tested < 200) {
            const Vec2 q = rng.direction() * rng.uniform(0.2, 5.0);
            if (near_branch_boundary(a, q, 1e-3)) continue;
            const Vec2 dg = dgamma(a, q);
            const double g = gamma_eval(a, q);
            CHECK(std::abs(dg.dot(q) - g) <= 1e-10 * (1.0 + g));             // Euler
            const double t = rng.uniform(0.1, 9.0);
            CHECK((dgamma(a, q * t) - dg).norm() < 1e-12 * (1.0 + dg.norm()));  // 0-homogeneous
            ++tested;
        }
    }
}

TEST_CASE("homogeneity, positivity and the angular lower bound") {
    oracles::Rng rng(3);
    for (const Anisotropy& a : kFamilies) {
        for (int k = 0; k < 1000; ++k) {
            const Vec2 q = rng.direction() * rng.uniform(1e-3, 4.0);
            const double t = rng.uniform(0.0, 10.0);
            const double g = gamma_eval(a, q);
            CHECK(std::abs(gamma_eval(a, q * t) - t * g) <= 1e-12 * (1.0 + g));
            CHECK(gamma_eval(a, q) > 0.0);
            // degree-2 homogeneity of A
            if (t > 0.0)
                CHECK(std::abs(gl_density(a, q * t) - t * t * gl_density(a, q)) <=
                      1e-12 * (1.0 + t * t * gl_density(a, q)));
        }
        // c-tilde from a dense angular scan, then verify the bound holds
        double c_tilde = 1e300;
        for (int k = 0; k < 10000; ++k) {
            const double theta = 2.0 * kPi * k / 10000;
            c_tilde = std::min(c_tilde, gamma_eval(a, {std::cos(theta), std::sin(theta)}));
        }
        CHECK(c_tilde > 0.0);
        for (int k = 0; k < 2000; ++k) {
            const Vec2 q = rng.direction() * rng.uniform(1e-3, 4.0);
            CHECK(gamma_eval(a, q) >= c_tilde * q.norm() - 1e-12);
        }
    }
}

TEST_CASE("B-consistency: B(q)q equals gamma Dgamma on smooth branches") {
    oracles::Rng rng(11);
    for (const Anisotropy& a : kFamilies) {
        int tested = 0;
        while (tested < 300) {
            const Vec2 q = rng.direction() * rng.uniform(0.1, 3.0);
            if (near_branch_boundary(a, q, 1e-6)) continue;
            const Vec2 lhs = bgn_matrix(a, q) * q;
            const Vec2 rhs = dgamma(a, q) * gamma_eval(a, q);
            CHECK((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
            ++tested;
        }
    }
}

TEST_CASE("triangle inequality holds for the convex families and may fail for the non-convex one") {
    oracles::Rng rng(19);
    for (const Anisotropy& a : kFamilies) {
        if (!a.convex()) continue;
        for (int k = 0; k < 2000; ++k) {
            const Vec2 p = rng.direction() * rng.uniform(0.1, 2.0);
            const Vec2 q = rng.direction() * rng.uniform(0.1, 2.0);
            CHECK(gamma_eval(a, p + q) <= gamma_eval(a, p) + gamma_eval(a, q) + 1e-12);
        }
    }
    const Anisotropy nc = Anisotropy::nonconvex_overhang(0.5, 0.5);
    bool violated = false;
    for (int k = 0; k < 5000 && !violated; ++k) {
        const Vec2 p = rng.direction() * rng.uniform(0.1, 2.0);
        const Vec2 q = rng.direction() * rng.uniform(0.1, 2.0);
        violated = gamma_eval(nc, p + q) > gamma_eval(nc, p) + gamma_eval(nc, q) + 1e-9;
    }
    CHECK(violated);
}

TEST_CASE("limits: lambda -> 1 recovers the convex density, alpha = 1 is isotropic") {
    oracles::Rng rng(23);
    const Anisotropy conv = Anisotropy::convex_overhang(0.5);
    const Anisotropy almost = Anisotropy::nonconvex_overhang(0.5, 1.0 - 1e-6);
    for (int k = 0; k < 1000; ++k) {
        const Vec2 q = rng.direction() * rng.uniform(0.1, 2.0);
        CHECK(std::abs(gamma_eval(almost, q) - gamma_eval(conv, q)) < 1e-4);
    }
    const Anisotropy degenerate = Anisotropy::convex_overhang(1.0);
    for (int k = 0; k < 1000; ++k) {
        const Vec2 q = rng.direction() * rng.uniform(0.0, 2.0);
        CHECK(gamma_eval(degenerate, q) == doctest::Approx(q.norm()).epsilon(1e-14));
    }
}

TEST_CASE("dual norm against brute-force angular maximization") {
    CHECK(dual_norm(Anisotropy::isotropic(), {0.0, 3.0}) == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(dual_norm(Anisotropy::isotropic(), {0.0, 0.0}) == 0.0);
    CHECK_THROWS_AS((void)dual_norm(Anisotropy::nonconvex_overhang(0.5, 0.5), {1.0, 0.0}),
                    NonConvexUnsupported);

    oracles::Rng rng(31);
    for (double alpha : {0.3, 0.7}) {
        const Anisotropy a = Anisotropy::convex_overhang(alpha);
        CHECK(dual_norm(a, {0.0, -1.0}) == doctest::Approx(alpha).epsilon(1e-4));
        for (int k = 0; k < 12; ++k) {
            const Vec2 r = rng.direction() * rng.uniform(0.2, 3.0);
            CHECK(dual_norm(a, r) == doctest::Approx(oracles::dual_norm_bruteforce(a, r, 100000)).epsilon(1e-4));
        }
    }
    // one-homogeneous and monotone in |r|
    const Anisotropy reg = Anisotropy::regularized_overhang(0.5, 0.1);
    for (int k = 0; k < 20; ++k) {
        const Vec2 r = rng.direction() * rng.uniform(0.2, 2.0);
        const double t = rng.uniform(0.1, 5.0);
        CHECK(dual_norm(reg, r * t) == doctest::Approx(t * dual_norm(reg, r)).epsilon(1e-9));
    }
}

TEST_CASE("frank diagram samples") {
    const DiagramSample iso = sample_frank(Anisotropy::isotropic(), 4);
    REQUIRE(iso.points.size() == 4);
    CHECK((iso.points[0] - Vec2{1.0, 0.0}).norm() < 1e-14);
    CHECK((iso.points[1] - Vec2{0.0, 1.0}).norm() < 1e-14);
    CHECK((iso.points[2] - Vec2{-1.0, 0.0}).norm() < 1e-14);
    CHECK((iso.points[3] - Vec2{0.0, -1.0}).norm() < 1e-14);

    const Anisotropy conv = Anisotropy::convex_overhang(0.5);
    const DiagramSample f = sample_frank(conv, 64);
    // the downward ray lands at (0, -alpha)
    CHECK((f.points[48] - Vec2{0.0, -0.5}).norm() < 1e-12);
    for (const Vec2& p : f.points) CHECK(std::abs(gamma_eval(conv, p) - 1.0) <= 1e-12);

    // non-convex sample produces a non-convex polygon (orientation flips)
    const DiagramSample nc = sample_frank(Anisotropy::nonconvex_overhang(0.5, 0.5), 256);
    bool has_left = false, has_right = false;
    for (size_t i = 0; i < nc.points.size(); ++i) {
        const Vec2& a = nc.points[i];
        const Vec2& b = nc.points[(i + 1) % nc.points.size()];
        const Vec2& c = nc.points[(i + 2) % nc.points.size()];
        const double orient = (b - a).cross(c - b);
        if (orient > 1e-12) has_left = true;
        if (orient < -1e-12) has_right = true;
    }
    CHECK(has_left);
    CHECK(has_right);
}

TEST_CASE("wulff shape samples") {
    const DiagramSample iso = sample_wulff(Anisotropy::isotropic(), 32);
    for (const Vec2& p : iso.points) CHECK(p.norm() == doctest::Approx(1.0).epsilon(1e-9));

    const Anisotropy conv = Anisotropy::convex_overhang(0.5);
    const DiagramSample w = sample_wulff(conv, 64);
    CHECK((w.points[48] - Vec2{0.0, -2.0}).norm() < 1e-6);  // 1/gamma*((0,-1)) = 1/alpha
    for (const Vec2& p : w.points)
        CHECK(oracles::dual_norm_bruteforce(conv, p, 20000) == doctest::Approx(1.0).epsilon(1e-4));

    // regularized Wulff boundary is a convex polyline
    const DiagramSample reg = sample_wulff(Anisotropy::regularized_overhang(0.5, 0.1), 256);
    for (size_t i = 0; i < reg.points.size(); ++i) {
        const Vec2& a = reg.points[i];
        const Vec2& b = reg.points[(i + 1) % reg.points.size()];
        const Vec2& c = reg.points[(i + 2) % reg.points.size()];
        CHECK((b - a).cross(c - b) >= -1e-9);
    }

    CHECK_THROWS_AS((void)sample_wulff(Anisotropy::nonconvex_overhang(0.5, 0.5), 32), NonConvexUnsupported);
}
