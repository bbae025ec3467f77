#include <doctest.h>

#include <cmath>
#include <numbers>

#include "phlab/dynamics.hpp"
#include "phlab/fixed_points.hpp"

using namespace phlab;

TEST_CASE("random initial states are reproducible and seed-dependent") {
    IntegratorConfig a;
    a.seed = 5;
    IntegratorConfig b = a;
    Vec6 va = random_initial_state(a).to_vec();
    Vec6 vb = random_initial_state(b).to_vec();
    CHECK((va - vb).cwiseAbs().maxCoeff() == 0.0);

    b.seed = 6;
    Vec6 vc = random_initial_state(b).to_vec();
    CHECK((va - vc).cwiseAbs().maxCoeff() > 0.0);

    a.init_scale = 0.25;
    Vec6 v = random_initial_state(a).to_vec();
    CHECK(v.cwiseAbs().maxCoeff() <= 0.25);
}

TEST_CASE("decoupled mechanical motion matches the damped oscillator") {
    // g -> 0, Lambda = 0: q(t) follows the classical damped oscillator
    // exactly, which the sampled trajectory must reproduce
    ModelParams p;
    p.g = 1e-300;
    p.Lambda = 0.0;

    IntegratorConfig cfg;
    cfg.t_transient = 0.0;
    cfg.t_observe = 10.0;
    cfg.rel_tol = 1e-11;
    cfg.abs_tol = 1e-13;

    ClassicalState s0{};
    s0.q = 1.0;
    auto traj = integrate_classical(p, s0, cfg);

    const double wd = std::sqrt(p.omega_m * p.omega_m - p.gamma_m * p.gamma_m / 4.0);
    double worst = 0;
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        double t = double(i) * traj.dt;
        double q_exact = std::exp(-p.gamma_m * t / 2.0) *
                         (std::cos(wd * t) +
                          p.gamma_m / (2.0 * wd) * std::sin(wd * t));
        worst = std::max(worst, std::abs(traj.samples[i][4] - q_exact));
    }
    CHECK(worst < 1e-7);
}

TEST_CASE("below threshold the sweep lands on the solver's fixed point") {
    ModelParams p;
    p.Delta = 10.0;
    p.Lambda = 3.0;
    IntegratorConfig cfg;

    auto rep = settle_and_classify(p, random_initial_state(cfg), cfg);
    CHECK(rep.kind == AttractorKind::FixedPoint);
    CHECK(rep.settled);

    auto roots = solve_fixed_point(p);
    REQUIRE(!roots.empty());
    Vec6 diff = rep.fixed_point.to_vec() - roots[0].state.to_vec();
    CHECK(diff.cwiseAbs().maxCoeff() < 1e-6);

    // the settled state is a genuine root of the flow
    Vec6 f;
    classical_rhs(p, rep.fixed_point.to_vec(), f);
    CHECK(f.norm() < 1e-8);
}

TEST_CASE("above threshold the orbit locks to the mechanical frequency") {
    ModelParams p;
    p.Delta = 10.0;
    p.Lambda = 5.2;
    IntegratorConfig cfg;

    auto rep = settle_and_classify(p, random_initial_state(cfg), cfg);
    CHECK(rep.kind == AttractorKind::LimitCycle);
    CHECK(rep.settled);
    CHECK(rep.amplitude > 1.0);
    const double T = 2.0 * std::numbers::pi / p.omega_m;
    CHECK(rep.period == doctest::Approx(T).epsilon(1e-4));
    // the optical quadrature already shows the second maximum this far
    // above threshold; the single-peaked shape only survives right at onset
    CHECK(rep.extrema_per_period == 2);
}

TEST_CASE("Lyapunov exponent of the undriven flow is the mechanical decay rate") {
    // Lambda = 0: slowest contraction is the mechanical -gamma_m/2; the
    // tangent dynamics must find it from a generic seed
    ModelParams p;
    p.Lambda = 0.0;
    IntegratorConfig cfg;
    cfg.t_transient = 200.0;

    auto est = max_lyapunov_exponent(p, ClassicalState{}, cfg);
    CHECK(est.converged);
    CHECK(est.value == doctest::Approx(-p.gamma_m / 2.0).epsilon(1e-3));
}

TEST_CASE("Lyapunov exponent at a stable fixed point equals the leading eigenvalue") {
    ModelParams p;
    p.Delta = 10.0;
    p.Lambda = 3.0;

    auto roots = solve_fixed_point(p);
    REQUIRE(!roots.empty());
    double expected = roots[0].eigenvalues[0].real();

    IntegratorConfig cfg;
    cfg.t_transient = 500.0;
    auto est = max_lyapunov_exponent(p, roots[0].state, cfg);
    CHECK(est.converged);
    CHECK(std::abs(est.value - expected) < 5e-4);
}

TEST_CASE("path presets pin the documented coordinate") {
    ModelParams p;
    CHECK(apply_path(1, p) == SweepAxis::Lambda);
    CHECK(p.Delta == p.J);

    ModelParams p2;
    CHECK(apply_path(2, p2) == SweepAxis::Delta);
    CHECK(p2.Lambda == 7.0);

    ModelParams p3;
    CHECK(apply_path(3, p3) == SweepAxis::Lambda);
    CHECK(p3.Delta == 9.5);

    ModelParams p4;
    CHECK_THROWS_AS(apply_path(4, p4), std::invalid_argument);

    CHECK(with_axis(p, SweepAxis::Lambda, 2.5).Lambda == 2.5);
    CHECK(with_axis(p, SweepAxis::Delta, 9.1).Delta == 9.1);
}

TEST_CASE("amplitude sweep is independent of the thread partition") {
    ModelParams p;
    p.Delta = 10.0;
    PathSpec spec{SweepAxis::Lambda, {1.0, 2.0, 3.0}};
    IntegratorConfig cfg;

    auto one = amplitude_sweep(p, spec, cfg, 1);
    auto four = amplitude_sweep(p, spec, cfg, 4);
    REQUIRE(one.size() == 3);
    REQUIRE(four.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(one[i].report.kind == AttractorKind::FixedPoint);
        CHECK(one[i].report.q0 == four[i].report.q0);  // bit-identical
        Vec6 d = one[i].report.fixed_point.to_vec() - four[i].report.fixed_point.to_vec();
        CHECK(d.cwiseAbs().maxCoeff() == 0.0);
    }
}
