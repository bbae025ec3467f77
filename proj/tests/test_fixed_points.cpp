#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "phlab/fixed_points.hpp"

using namespace phlab;

TEST_CASE("undriven system has only the origin") {
    ModelParams p;
    p.Lambda = 0.0;
    auto roots = solve_fixed_point(p);
    REQUIRE(roots.size() == 1);
    CHECK(roots[0].state.to_vec().norm() < 1e-12);
    CHECK(roots[0].stable);
}

TEST_CASE("decoupled eigenvalues at g = 0") {
    // with the coupling off, the drift matrix is block diagonal: two
    // damped optical rotations at Delta -+ J and a damped mechanical
    // oscillator
    ModelParams p;
    p.g = 1e-300;  // keep validate() happy, numerically zero
    p.Delta = 9.3;
    p.Lambda = 2.0;
    ClassicalState origin{};
    auto eig = stability_eigenvalues(p, origin);

    std::vector<std::complex<double>> expect = {
        {-0.5, p.Delta - p.J},  {-0.5, -(p.Delta - p.J)},
        {-0.5, p.Delta + p.J},  {-0.5, -(p.Delta + p.J)},
        {-p.gamma_m / 2, std::sqrt(p.omega_m * p.omega_m - p.gamma_m * p.gamma_m / 4)},
        {-p.gamma_m / 2, -std::sqrt(p.omega_m * p.omega_m - p.gamma_m * p.gamma_m / 4)}};

    for (auto& e : expect) {
        double best = 1e99;
        for (int i = 0; i < 6; ++i) best = std::min(best, std::abs(eig[i] - e));
        CHECK(best < 1e-9);
    }
}

TEST_CASE("fixed point satisfies both stationarity conditions") {
    ModelParams p;
    p.Delta = 10.0;
    p.Lambda = 3.0;
    auto roots = solve_fixed_point(p);
    REQUIRE(!roots.empty());
    const auto& fp = roots[0];
    CHECK(fp.residual < 1e-10);
    CHECK(fp.state.p == 0.0);
    CHECK(fp.stable);

    // q is fixed by the intracavity intensity imbalance
    double q_expected = p.g / (2.0 * p.omega_m) * std::norm(fp.state.c1() - fp.state.c2());
    CHECK(fp.state.q == doctest::Approx(q_expected).epsilon(1e-10));

    // and the optical amplitudes solve the frozen-q linear system
    auto [c1, c2] = optical_amplitudes_at(p, fp.state.q);
    CHECK(std::abs(c1 - fp.state.c1()) < 1e-10);
    CHECK(std::abs(c2 - fp.state.c2()) < 1e-10);

    CHECK(std::abs(self_consistency(p, fp.state.q)) < 1e-10);
}

TEST_CASE("optical damping deepens with drive and the threshold follows") {
    ModelParams p;
    p.Delta = p.J;

    double prev = 1e99;
    for (double L : {1.0, 2.0, 3.0, 4.0}) {
        p.Lambda = L;
        double ge = gamma_eff(p);
        CHECK(ge > 0);
        CHECK(ge < prev);  // gamma_opt grows more negative with drive
        prev = ge;
    }

    double th_damping = find_threshold(p, SweepAxis::Lambda, 1.0, 8.0);
    double th_eigen = threshold_eigenvalue(p, SweepAxis::Lambda, 1.0, 8.0);
    CHECK(th_damping > 4.5);
    CHECK(th_damping < 5.01);
    CHECK(std::abs(th_damping - th_eigen) < 1e-3);
}

TEST_CASE("threshold grows as the detuning leaves the resonance") {
    ModelParams p;
    ModelParams off = p;
    p.Delta = p.J;
    off.Delta = 9.5;
    double th_res = threshold_eigenvalue(p, SweepAxis::Lambda, 1.0, 12.0);
    double th_off = threshold_eigenvalue(off, SweepAxis::Lambda, 1.0, 12.0);
    CHECK(th_off > th_res);
}

TEST_CASE("the instability is a Hopf bifurcation at the mechanical frequency") {
    ModelParams p;
    p.Delta = p.J;
    p.Lambda = threshold_eigenvalue(p, SweepAxis::Lambda, 1.0, 8.0);
    auto roots = solve_fixed_point(p);
    REQUIRE(!roots.empty());
    auto eig = stability_eigenvalues(p, roots[0].state);  // sorted by Re desc
    CHECK(std::abs(eig[0].real()) < 1e-4);
    CHECK(std::abs(eig[1].real()) < 1e-4);
    CHECK(eig[0].imag() == doctest::Approx(-eig[1].imag()).epsilon(1e-9));
    CHECK(std::abs(std::abs(eig[0].imag()) - p.omega_m) < 0.05 * p.omega_m);
}

TEST_CASE("detuning cut crosses the boundary twice") {
    ModelParams p;
    p.Lambda = 7.0;
    auto crossings = thresholds_eigenvalue(p, SweepAxis::Delta, 8.0, 12.0);
    REQUIRE(crossings.size() == 2);
    CHECK(crossings[0] > 9.0);
    CHECK(crossings[0] < 10.0);
    CHECK(crossings[1] > 10.0);
    CHECK(crossings[1] < 11.0);
    // lasing window brackets the resonance Delta = J
    CHECK(crossings[0] < p.J);
    CHECK(crossings[1] > p.J);
}

TEST_CASE("phase diagram classification matches the eigenvalue sign cell by cell") {
    ModelParams base;
    auto lambdas = linspace(1.0, 9.0, 9);
    auto deltas = linspace(9.0, 11.0, 5);
    auto pd = sweep_phase_diagram(base, lambdas, deltas);

    for (std::size_t i = 0; i < lambdas.size(); ++i)
        for (std::size_t j = 0; j < deltas.size(); ++j) {
            const auto& c = pd.at(i, j);
            REQUIRE(c.region != Region::Unknown);
            CHECK((c.region == Region::I) == (c.max_re_eig < 0));

            // independent oracle: recompute from scratch at this cell
            ModelParams p = base;
            p.Lambda = lambdas[i];
            p.Delta = deltas[j];
            auto roots = solve_fixed_point(p);
            REQUIRE(!roots.empty());
            bool any_stable = std::any_of(roots.begin(), roots.end(),
                                          [](const auto& r) { return r.stable; });
            CHECK((c.region == Region::I) == any_stable);
        }

    // boundary at resonance: the known threshold value
    std::size_t j10 = 2;  // Delta = 10
    CHECK(pd.boundary[j10].first == doctest::Approx(10.0));
    CHECK(pd.boundary[j10].second == doctest::Approx(5.002).epsilon(2e-3));
}

TEST_CASE("linspace endpoints and spacing") {
    auto g = linspace(-1.0, 2.0, 7);
    REQUIRE(g.size() == 7);
    CHECK(g.front() == -1.0);
    CHECK(g.back() == 2.0);
    CHECK(g[2] == doctest::Approx(0.0).epsilon(1e-14));
}
