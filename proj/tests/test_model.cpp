#include <doctest.h>

#include <cmath>
#include <random>

#include "phlab/model.hpp"

using namespace phlab;

namespace {

double canonical(std::mt19937_64& rng) {
    return double(rng() >> 11) * 0x1.0p-53;
}

ClassicalState random_super(std::mt19937_64& rng, double scale = 2.0) {
    auto u = [&] { return scale * (2.0 * canonical(rng) - 1.0); };
    return {u(), u(), u(), u(), u(), u()};
}

}  // namespace

TEST_CASE("parameter validation") {
    ModelParams p;
    CHECK_FALSE(p.validate());  // default parameters: Q = 2000, no warning

    ModelParams bad = p;
    bad.gamma_m = -0.01;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.omega_m = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.nbar = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    ModelParams low_q = p;
    low_q.gamma_m = 0.5;  // Q = 40
    CHECK(low_q.validate());
}

TEST_CASE("basis change is an involution") {
    std::mt19937_64 rng(42);
    for (int k = 0; k < 50; ++k) {
        ClassicalState s = random_super(rng);
        ClassicalState back = to_supermode(to_baremode(s));
        Vec6 diff = back.to_vec() - s.to_vec();
        CHECK(diff.cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("supermode combinations of the bare amplitudes") {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 20; ++k) {
        BareModeState b;
        b.re1 = canonical(rng);
        b.im1 = canonical(rng);
        b.re2 = canonical(rng);
        b.im2 = canonical(rng);
        ClassicalState s = to_supermode(b);
        const double isq2 = 1.0 / std::sqrt(2.0);
        CHECK(std::abs(s.c1() - (b.a1() + b.a2()) * isq2) < 1e-14);
        CHECK(std::abs(s.c2() - (b.a1() - b.a2()) * isq2) < 1e-14);
        // the mechanical force sees only the antisymmetric cavity:
        // c1 - c2 = sqrt(2) a2
        CHECK(std::abs((s.c1() - s.c2()) - std::sqrt(2.0) * b.a2()) < 1e-14);
    }
}

TEST_CASE("the two RHS formulations agree through the basis change") {
    // the supermode transform is linear, so it must commute with the
    // dynamics: T(d/dt bare) = d/dt T(bare)
    std::mt19937_64 rng(99);
    ModelParams p;
    p.Lambda = 4.0;
    p.Delta = 9.7;
    for (int k = 0; k < 30; ++k) {
        BareModeState b;
        b.re1 = 2 * canonical(rng) - 1;
        b.im1 = 2 * canonical(rng) - 1;
        b.re2 = 2 * canonical(rng) - 1;
        b.im2 = 2 * canonical(rng) - 1;
        b.q = 2 * canonical(rng) - 1;
        b.p = 2 * canonical(rng) - 1;

        ClassicalState via_bare = to_supermode(classical_rhs_baremode(p, b));
        ClassicalState via_super = classical_rhs_supermode(p, to_supermode(b));
        Vec6 diff = via_bare.to_vec() - via_super.to_vec();
        CHECK(diff.cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("packed RHS matches the struct RHS") {
    std::mt19937_64 rng(3);
    ModelParams p;
    for (int k = 0; k < 20; ++k) {
        ClassicalState s = random_super(rng);
        Vec6 d1;
        classical_rhs(p, s.to_vec(), d1);
        Vec6 d2 = classical_rhs_supermode(p, s).to_vec();
        CHECK((d1 - d2).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("drift matrix is the Jacobian of the RHS") {
    std::mt19937_64 rng(17);
    ModelParams p;
    p.Lambda = 5.0;
    for (int k = 0; k < 10; ++k) {
        ClassicalState s = random_super(rng, 5.0);
        Mat6 S = build_drift_matrix(p, s);

        const double h = 1e-6;
        Mat6 num;
        for (int j = 0; j < 6; ++j) {
            Vec6 yp = s.to_vec(), ym = s.to_vec();
            yp[j] += h;
            ym[j] -= h;
            Vec6 fp, fm;
            classical_rhs(p, yp, fp);
            classical_rhs(p, ym, fm);
            num.col(j) = (fp - fm) / (2 * h);
        }
        CHECK((S - num).cwiseAbs().maxCoeff() < 1e-5);
    }
}

TEST_CASE("diffusion matrix entries") {
    ModelParams p;
    p.nbar = 10.0;
    Mat6 D = build_diffusion_matrix(p);
    for (int i = 0; i < 4; ++i) CHECK(D(i, i) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(D(4, 4) == 0.0);
    CHECK(D(5, 5) == doctest::Approx(p.gamma_m * 21.0).epsilon(1e-14));
    CHECK((D - D.transpose()).norm() == 0.0);
    CHECK(D.cwiseAbs().sum() == doctest::Approx(2.0 + p.gamma_m * 21.0));
}

TEST_CASE("thermal occupation from the frequency/temperature ratio") {
    // r = 2: direct evaluation of 1/(e^r - 1)
    CHECK(nbar_from_ratio(2.0) == doctest::Approx(1.0 / (std::exp(2.0) - 1.0)).epsilon(1e-14));
    // high-temperature series 1/r - 1/2 + r/12 + O(r^3)
    for (double r : {1e-4, 1e-6, 1e-8}) {
        double series = 1.0 / r - 0.5 + r / 12.0;
        CHECK(nbar_from_ratio(r) == doctest::Approx(series).epsilon(1e-10));
    }
    // low temperature: Boltzmann tail
    CHECK(nbar_from_ratio(40.0) == doctest::Approx(std::exp(-40.0)).epsilon(1e-10));
}
