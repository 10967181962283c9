#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "atop/simulate.hpp"
#include "oracles.hpp"

using namespace atop;

namespace {

/// Small, fast interface-only configuration used by several cases.
SimConfig tiny_flow() {
    SimConfig cfg;
    cfg.domain = {-0.5, 0.5, -0.5, 0.5};
    cfg.nx = cfg.ny = 32;
    cfg.aniso = Anisotropy::regularized_overhang(0.5, 0.1);
    cfg.eps = 1.0 / (4.0 * kPi);
    cfg.tau = cfg.eps * cfg.h();
    cfg.alpha_hat = 1.0;
    cfg.m = 0.6;
    cfg.init = InitKind::Ball;
    cfg.ball_center = {0.0, 0.0};
    cfg.ball_radius = 0.2;
    cfg.t_end = 40.0 * cfg.tau;
    return cfg;
}

}  // namespace

TEST_CASE("scenario presets carry the published parameters") {
    const SimConfig cant = scenario("cantilever");
    CHECK(cant.domain == Rect{-0.5, 0.5, -0.5, 0.5});
    CHECK(cant.dirichlet_rules.size() == 1);
    CHECK(cant.dirichlet_rules[0].segment == Segment{Side::Bottom, -0.25, 0.25});
    CHECK(cant.dirichlet_rules[0].tag == EdgeTag::DirichletFull);
    REQUIRE(cant.loads.pads.size() == 1);
    CHECK(cant.loads.pads[0].segment == Segment{Side::Top, -0.02, 0.02});
    CHECK(cant.loads.pads[0].g == Vec2{5.0, 0.0});
    CHECK(cant.elasticity.youngs_modulus == 1.0);
    CHECK(cant.elasticity.poisson_ratio == 0.33);
    CHECK(cant.alpha_hat == 0.5);
    CHECK(cant.m == 0.7);
    CHECK(cant.eps == doctest::Approx(1.0 / (32.0 * kPi)).epsilon(1e-15));
    CHECK(cant.aniso == Anisotropy::regularized_overhang(0.5, 0.1));

    const SimConfig bridge = scenario("bridge");
    CHECK(bridge.domain == Rect{0.0, 1.0, -0.5, 0.5});
    CHECK(bridge.elasticity.youngs_modulus == 1200.0);
    CHECK(bridge.elasticity.poisson_ratio == 0.3);
    CHECK(bridge.m == 0.4);
    REQUIRE(bridge.loads.pads.size() == 2);
    CHECK(bridge.loads.pads[0].g == Vec2{0.0, -3000.0});
    CHECK(bridge.loads.pads[1].g == Vec2{0.0, -1500.0});
    CHECK(bridge.loads.pads[1].segment == Segment{Side::Bottom, 0.48, 0.52});
    // free-slip symmetry plane clamps the x component on the left edge
    bool has_slip = false;
    for (const TagRule& r : bridge.dirichlet_rules)
        has_slip = has_slip || (r.tag == EdgeTag::DirichletX && r.segment.side == Side::Left);
    CHECK(has_slip);

    const SimConfig drip = scenario("dripping_nonconvex");
    CHECK(drip.aniso == Anisotropy::nonconvex_overhang(0.5, 0.5));
    CHECK(drip.eps == doctest::Approx(1.0 / (32.0 * kPi)).epsilon(1e-15));
    CHECK(drip.init == InitKind::Stripe);

    CHECK_THROWS_AS((void)scenario("nope"), UnknownScenario);
}

TEST_CASE("random initial data hits the requested mass exactly") {
    SimConfig cfg = tiny_flow();
    cfg.init = InitKind::Random;
    cfg.seed = 7;
    const FeMesh mesh = build_mesh(cfg.domain, cfg.nx, cfg.ny);
    const ScalarField phi = initial_field(cfg, mesh);
    CHECK(std::abs(lumped_integral(mesh.lumped, phi) / mesh.domain.area() - cfg.m) <= 1e-12);
    for (double v : phi) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
        CHECK(std::abs(v - cfg.m) <= 0.11);  // uniform band plus projection shift
    }
}

TEST_CASE("a huge steady tolerance exits after the first step") {
    SimConfig cfg = tiny_flow();
    cfg.steady_tol = 1e12;
    const RunResult res = run(cfg);
    CHECK(res.trace.size() == 1);
    CHECK(res.state.step == 1);
}

TEST_CASE("identical config and seed reproduce the trace bitwise") {
    SimConfig cfg = tiny_flow();
    cfg.init = InitKind::Random;
    cfg.seed = 3;
    cfg.t_end = 10.0 * cfg.tau;
    const RunResult a = run(cfg);
    const RunResult b = run(cfg);
    REQUIRE(a.trace.size() == b.trace.size());
    for (size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].e_gl == b.trace[i].e_gl);
        CHECK(a.trace[i].mass == b.trace[i].mass);
        CHECK(a.trace[i].multiplier == b.trace[i].multiplier);
    }
    for (size_t i = 0; i < a.state.phi.size(); ++i) CHECK(a.state.phi[i] == b.state.phi[i]);
}

TEST_CASE("mass stays on target along a run") {
    SimConfig cfg = tiny_flow();
    const RunResult res = run(cfg);
    for (const TraceRow& r : res.trace)
        CHECK(std::abs(r.mass - res.mass_target) <= cfg.mass_tol_rel);
}

TEST_CASE("energy trace is non-increasing for the interface-only flow") {
    SimConfig cfg = tiny_flow();
    const RunResult res = run(cfg);
    double prev = 1e300;
    for (const TraceRow& r : res.trace) {
        CHECK(r.e_gl <= prev + 1e-10);
        prev = r.e_gl;
    }
}

TEST_CASE("snapshots are emitted at the configured cadence plus the final state") {
    SimConfig cfg = tiny_flow();
    cfg.t_end = 10.0 * cfg.tau;
    cfg.snapshot_every = 4;
    const RunResult res = run(cfg);
    REQUIRE(res.state.step == 10);
    REQUIRE(res.snapshots.size() == 3);  // steps 4, 8 and the final 10
    CHECK(res.snapshots[0].step == 4);
    CHECK(res.snapshots[1].step == 8);
    CHECK(res.snapshots[2].step == 10);
}

TEST_CASE("interface roughness of analytic profiles") {
    const FeMesh m = build_mesh({-0.5, 0.5, -0.5, 0.5}, 64, 64);
    const double eps = 0.02;

    // flat stripe: zero roughness
    ScalarField flat(static_cast<size_t>(m.node_count()));
    for (size_t i = 0; i < flat.size(); ++i)
        flat[i] = optimal_profile((0.1 - m.nodes[i].y) / eps);
    CHECK(interface_roughness(flat, m) <= 1e-12);

    // sinusoidal interface of amplitude a: std = a/sqrt(2) over full periods
    const double amp = 0.08;
    ScalarField wavy(flat.size());
    for (size_t i = 0; i < wavy.size(); ++i) {
        const double ys = amp * std::sin(2.0 * kPi * 2.0 * (m.nodes[i].x + 0.5));
        wavy[i] = optimal_profile((ys - m.nodes[i].y) / eps);
    }
    CHECK(interface_roughness(wavy, m) == doctest::Approx(amp / std::sqrt(2.0)).epsilon(0.05));

    // no sign change anywhere
    const ScalarField all_void(flat.size(), 0.5);
    CHECK_THROWS_AS((void)interface_roughness(all_void, m), NoInterface);
}

TEST_CASE("zero contour segments trace the interpolated level set") {
    const FeMesh m = build_mesh({0.0, 1.0, 0.0, 1.0}, 16, 16);
    ScalarField phi(static_cast<size_t>(m.node_count()));
    for (size_t i = 0; i < phi.size(); ++i) phi[i] = m.nodes[i].x - 0.53;
    const auto segs = zero_contour_segments(m, phi);
    CHECK(!segs.empty());
    for (const auto& s : segs) {
        CHECK(std::abs(s.first.x - 0.53) <= 1e-12);
        CHECK(std::abs(s.second.x - 0.53) <= 1e-12);
    }
}
