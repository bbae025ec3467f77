#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "phlab/analysis.hpp"
#include "phlab/dynamics.hpp"

using namespace phlab;

namespace {

std::vector<double> sampled(double period, double dt, double n_periods,
                            double second_harmonic = 0.0, double offset = 0.0) {
    const double w = 2.0 * std::numbers::pi / period;
    std::size_t n = std::size_t(n_periods * period / dt);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        double t = double(i) * dt;
        s[i] = offset + std::cos(w * t) + second_harmonic * std::cos(2.0 * w * t + 0.4);
    }
    return s;
}

}  // namespace

TEST_CASE("dominant period of a pure tone") {
    const double T = 0.3141;
    auto s = sampled(T, T / 64.0, 100.0);
    CHECK(dominant_period(s, T / 64.0) == doctest::Approx(T).epsilon(1e-4));
}

TEST_CASE("dominant period survives an offset and a weak harmonic") {
    const double T = 2.5;
    auto s = sampled(T, T / 64.0, 80.0, 0.3, 10.0);
    CHECK(dominant_period(s, T / 64.0) == doctest::Approx(T).epsilon(1e-4));
}

TEST_CASE("constant signal has no period") {
    std::vector<double> s(512, 3.7);
    CHECK(dominant_period(s, 0.1) == 0.0);
}

TEST_CASE("extrema counting distinguishes period-1 from period-2 shapes") {
    const double T = 0.31;
    const double dt = T / 64.0;
    CHECK(extrema_per_period(sampled(T, dt, 50.0), dt, T) == 1);
    // strong second harmonic: two distinct maxima per fundamental period
    CHECK(extrema_per_period(sampled(T, dt, 50.0, 0.8), dt, T) == 2);
    // sub-prominence ripple must not create a second extremum
    CHECK(extrema_per_period(sampled(T, dt, 50.0, 1e-4), dt, T) == 1);
}

TEST_CASE("peak finding respects the prominence floor") {
    std::vector<double> s;
    for (int i = 0; i < 600; ++i) {
        double t = 0.01 * i;
        s.push_back(std::sin(2.0 * std::numbers::pi * t) +
                    0.2 * std::sin(40.0 * std::numbers::pi * t));
    }
    // the fast ripple creates many shallow local maxima (prominence about
    // 0.4); only the six carrier crests survive the 0.5 floor
    auto big = find_peaks(s, 0.5);
    CHECK(big.size() == 6);
    auto all = find_peaks(s, 0.01);
    CHECK(all.size() > 4 * big.size());
}

TEST_CASE("line fit recovers exact linear data") {
    std::vector<double> x = {-2, -1, 0, 1, 2, 5};
    std::vector<double> y;
    for (double xi : x) y.push_back(3.5 * xi - 1.25);
    auto f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(3.5).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(-1.25).epsilon(1e-12));
}

TEST_CASE("scaling exponent from synthetic power-law data") {
    std::vector<std::pair<double, double>> pts;
    for (double d = 1e-3; d < 1e-1; d *= 1.7) pts.emplace_back(d, 2.0 * std::pow(d, 0.25));
    CHECK(fit_scaling_exponent(pts) == doctest::Approx(0.25).epsilon(1e-10));

    // zero / negative entries are skipped, not propagated
    pts.emplace_back(0.0, 1.0);
    pts.emplace_back(1e-2, 0.0);
    CHECK(fit_scaling_exponent(pts) == doctest::Approx(0.25).epsilon(1e-10));

    CHECK_THROWS_AS(fit_scaling_exponent({{1.0, 1.0}, {2.0, 2.0}}),
                    std::invalid_argument);
}

TEST_CASE("autocorrelation first peak sits at the fundamental period") {
    const double T = 0.7;
    const double dt = T / 64.0;
    auto s = sampled(T, dt, 60.0);
    CHECK(autocorrelation_first_peak(s, dt, 3.0 * dt) == doctest::Approx(T).epsilon(0.02));
}
