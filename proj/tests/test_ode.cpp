#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "phlab/ode.hpp"

using namespace phlab;
using Vec2 = Eigen::Matrix<double, 2, 1>;
using Vec1 = Eigen::Matrix<double, 1, 1>;

namespace {

struct Harmonic {
    double omega;
    void operator()(double, const Vec2& y, Vec2& d) const {
        d[0] = y[1];
        d[1] = -omega * omega * y[0];
    }
};

}  // namespace

TEST_CASE("harmonic oscillator against the closed form") {
    Harmonic sys{3.0};
    Dopri5<Vec2> st;
    st.rel_tol = 1e-10;
    st.abs_tol = 1e-12;
    Vec2 y;
    y << 1.0, 0.0;
    st.integrate(sys, y, 0.0, 25.0);
    CHECK(y[0] == doctest::Approx(std::cos(3.0 * 25.0)).epsilon(1e-7));
    CHECK(y[1] == doctest::Approx(-3.0 * std::sin(3.0 * 25.0)).epsilon(1e-7));
}

TEST_CASE("dense output samples match the closed form between steps") {
    Harmonic sys{2.0};
    Dopri5<Vec2> st;
    st.rel_tol = 1e-9;
    st.abs_tol = 1e-11;
    Vec2 y;
    y << 0.0, 2.0;  // sin(2t)
    double dt = 0.05;
    double worst = 0;
    st.integrate_sampled(sys, y, 0.0, 10.0, dt, [&](double t, const Vec2& yi) {
        worst = std::max(worst, std::abs(yi[0] - std::sin(2.0 * t)));
    });
    CHECK(worst < 1e-6);
}

TEST_CASE("linear decay at machine-level accuracy") {
    struct Decay {
        void operator()(double, const Vec1& y, Vec1& d) const { d[0] = -4.0 * y[0]; }
    } sys;
    Dopri5<Vec1> st;
    st.rel_tol = 1e-12;
    st.abs_tol = 1e-14;
    Vec1 y;
    y << 1.0;
    st.integrate(sys, y, 0.0, 3.0);
    CHECK(y[0] == doctest::Approx(std::exp(-12.0)).epsilon(1e-9));
}

TEST_CASE("finite-time blowup raises Unbounded") {
    struct Riccati {
        void operator()(double, const Vec1& y, Vec1& d) const { d[0] = y[0] * y[0]; }
    } sys;
    Dopri5<Vec1> st;
    Vec1 y;
    y << 1.0;  // y(t) = 1/(1 - t)
    CHECK_THROWS_AS(st.integrate(sys, y, 0.0, 2.0), const IntegrationFailure&);
}

TEST_CASE("integration is deterministic") {
    Harmonic sys{5.0};
    auto run = [&] {
        Dopri5<Vec2> st;
        Vec2 y;
        y << 0.3, -0.7;
        st.integrate(sys, y, 0.0, 17.0);
        return y;
    };
    Vec2 a = run(), b = run();
    CHECK(a[0] == b[0]);
    CHECK(a[1] == b[1]);
}

TEST_CASE("sampled endpoints land on the requested grid") {
    Harmonic sys{1.0};
    Dopri5<Vec2> st;
    Vec2 y;
    y << 1.0, 0.0;
    std::vector<double> ts;
    st.integrate_sampled(sys, y, 2.0, 4.0, 0.25, [&](double t, const Vec2&) {
        ts.push_back(t);
    });
    REQUIRE(ts.size() == 9);
    for (std::size_t i = 0; i < ts.size(); ++i)
        CHECK(ts[i] == doctest::Approx(2.0 + 0.25 * double(i)).epsilon(1e-12));
}
