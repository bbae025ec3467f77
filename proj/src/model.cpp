#include "phlab/model.hpp"

#include <cmath>

namespace phlab {

bool ModelParams::validate() const {
    if (!(J > 0) || !(omega_m > 0) || !(g > 0) || !(gamma_m > 0) || !(Lambda >= 0))
        throw std::invalid_argument("ModelParams: rates must be strictly positive");
    if (!(nbar >= 0))
        throw std::invalid_argument("ModelParams: nbar must be >= 0");
    if (!std::isfinite(Delta))
        throw std::invalid_argument("ModelParams: Delta must be finite");
    return quality_factor() < 100.0;
}

ClassicalState to_supermode(const BareModeState& s) {
    const double r = 1.0 / std::sqrt(2.0);
    return {r * (s.re1 + s.re2), r * (s.im1 + s.im2),
            r * (s.re1 - s.re2), r * (s.im1 - s.im2), s.q, s.p};
}

BareModeState to_baremode(const ClassicalState& s) {
    const double r = 1.0 / std::sqrt(2.0);
    return {r * (s.x1 + s.x2), r * (s.y1 + s.y2),
            r * (s.x1 - s.x2), r * (s.y1 - s.y2), s.q, s.p};
}

void classical_rhs(const ModelParams& par, const Vec6& y, Vec6& dydt) {
    const double k2 = ModelParams::kappa / 2.0;
    const double d1 = par.Delta - par.J;   // c1 detuning
    const double d2 = par.Delta + par.J;   // c2 detuning
    const double drive = par.Lambda / std::sqrt(2.0);
    const double u = y[0] - y[2];          // x1 - x2
    const double v = y[1] - y[3];          // y1 - y2
    const double gq2 = 0.5 * par.g * y[4];

    dydt[0] = -k2 * y[0] - d1 * y[1] - gq2 * v + drive;
    dydt[1] = d1 * y[0] - k2 * y[1] + gq2 * u;
    dydt[2] = -k2 * y[2] - d2 * y[3] + gq2 * v + drive;
    dydt[3] = d2 * y[2] - k2 * y[3] - gq2 * u;
    dydt[4] = par.omega_m * y[5];
    dydt[5] = -par.omega_m * y[4] - par.gamma_m * y[5] + 0.5 * par.g * (u * u + v * v);
}

ClassicalState classical_rhs_supermode(const ModelParams& p, const ClassicalState& s) {
    Vec6 d;
    classical_rhs(p, s.to_vec(), d);
    return ClassicalState::from_vec(d);
}

BareModeState classical_rhs_baremode(const ModelParams& par, const BareModeState& s) {
    const double k2 = ModelParams::kappa / 2.0;
    const complexd i(0.0, 1.0);
    const complexd a1 = s.a1(), a2 = s.a2();
    const complexd da1 = (i * par.Delta - k2) * a1 - i * par.J * a2 + par.Lambda;
    const complexd da2 = (i * par.Delta - k2) * a2 - i * par.J * a1 + i * par.g * a2 * s.q;
    BareModeState d;
    d.re1 = da1.real();
    d.im1 = da1.imag();
    d.re2 = da2.real();
    d.im2 = da2.imag();
    d.q = par.omega_m * s.p;
    d.p = par.g * std::norm(a2) - par.omega_m * s.q - par.gamma_m * s.p;
    return d;
}

void build_drift_matrix(const ModelParams& par, const Vec6& y, Mat6& S) {
    const double k2 = ModelParams::kappa / 2.0;
    const double d1 = par.Delta - par.J;
    const double d2 = par.Delta + par.J;
    const double gq2 = 0.5 * par.g * y[4];
    const double gu2 = 0.5 * par.g * (y[0] - y[2]);
    const double gv2 = 0.5 * par.g * (y[1] - y[3]);

    S.setZero();
    S(0, 0) = -k2;        S(0, 1) = -d1 - gq2;  S(0, 3) = gq2;   S(0, 4) = -gv2;
    S(1, 0) = d1 + gq2;   S(1, 1) = -k2;        S(1, 2) = -gq2;  S(1, 4) = gu2;
    S(2, 1) = gq2;        S(2, 2) = -k2;        S(2, 3) = -d2 - gq2;  S(2, 4) = gv2;
    S(3, 0) = -gq2;       S(3, 2) = d2 + gq2;   S(3, 3) = -k2;   S(3, 4) = -gu2;
    S(4, 5) = par.omega_m;
    S(5, 0) = 2.0 * gu2;  S(5, 1) = 2.0 * gv2;
    S(5, 2) = -2.0 * gu2; S(5, 3) = -2.0 * gv2;
    S(5, 4) = -par.omega_m;
    S(5, 5) = -par.gamma_m;
}

Mat6 build_drift_matrix(const ModelParams& p, const ClassicalState& s) {
    Mat6 S;
    build_drift_matrix(p, s.to_vec(), S);
    return S;
}

Mat6 build_diffusion_matrix(const ModelParams& p) {
    if (!(p.nbar >= 0))
        throw std::invalid_argument("build_diffusion_matrix: nbar must be >= 0");
    Mat6 D = Mat6::Zero();
    const double k2 = ModelParams::kappa / 2.0;
    D(0, 0) = D(1, 1) = D(2, 2) = D(3, 3) = k2;
    D(4, 4) = 0.0;
    D(5, 5) = p.gamma_m * (2.0 * p.nbar + 1.0);
    return D;
}

double nbar_from_ratio(double ratio) {
    if (!(ratio > 0))
        throw std::invalid_argument("nbar_from_ratio: ratio must be > 0");
    return 1.0 / std::expm1(ratio);
}

}  // namespace phlab
