#ifndef PHLAB_MODEL_HPP
#define PHLAB_MODEL_HPP

#include <Eigen/Core>
#include <complex>
#include <stdexcept>

// Core model definitions for the two-cavity optomechanical phonon laser:
// parameter set, classical mean-field states in the bare and supermode
// bases, the nonlinear right-hand sides, and the drift/diffusion matrices
// of the linearized fluctuation dynamics.
//
// Everything is nondimensionalized by the optical decay rate kappa
// (kappa = 1 internally); time is measured in units of 1/kappa.

namespace phlab {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using complexd = std::complex<double>;

/// All physical rates and drive settings, in units of kappa.
struct ModelParams {
    double J = 10.0;        ///< cavity tunnelling rate
    double omega_m = 20.0;  ///< mechanical frequency
    double g = 0.02;        ///< optomechanical coupling
    double gamma_m = 0.01;  ///< mechanical damping
    double Delta = 10.0;    ///< laser detuning omega_L - omega_a (any sign)
    double Lambda = 3.0;    ///< drive amplitude
    double nbar = 0.0;      ///< mean thermal phonon occupation, >= 0

    static constexpr double kappa = 1.0;

    double quality_factor() const { return omega_m / gamma_m; }

    /// Throws std::invalid_argument on nonpositive rates or nbar < 0.
    /// Returns true if Q < 100 (Markovian Brownian-noise assumption is
    /// questionable); callers may warn.
    bool validate() const;
};

/// Supermode mean fields: c1 = x1 + i y1, c2 = x2 + i y2, plus the
/// dimensionless mechanical position q and momentum p.
struct ClassicalState {
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0, q = 0, p = 0;

    complexd c1() const { return {x1, y1}; }
    complexd c2() const { return {x2, y2}; }

    Vec6 to_vec() const {
        Vec6 v;
        v << x1, y1, x2, y2, q, p;
        return v;
    }
    static ClassicalState from_vec(const Vec6& v) {
        return {v[0], v[1], v[2], v[3], v[4], v[5]};
    }
};

/// Bare-cavity mean fields a1, a2 plus the mechanical pair.
struct BareModeState {
    double re1 = 0, im1 = 0, re2 = 0, im2 = 0, q = 0, p = 0;

    complexd a1() const { return {re1, im1}; }
    complexd a2() const { return {re2, im2}; }
};

/// c1 = (a1 + a2)/sqrt(2), c2 = (a1 - a2)/sqrt(2); q, p unchanged.
ClassicalState to_supermode(const BareModeState& s);
BareModeState to_baremode(const ClassicalState& s);

/// Time derivative of the supermode mean fields.
ClassicalState classical_rhs_supermode(const ModelParams& p, const ClassicalState& s);

/// Same dynamics in the bare-mode basis (radiation pressure at mean-field level).
BareModeState classical_rhs_baremode(const ModelParams& p, const BareModeState& s);

/// In-place RHS on the packed 6-vector (x1, y1, x2, y2, q, p); this is the
/// form the integrators use.
void classical_rhs(const ModelParams& p, const Vec6& y, Vec6& dydt);

/// Drift matrix S of the linearized fluctuation dynamics, evaluated at the
/// given mean-field point. Equals the Jacobian of classical_rhs.
Mat6 build_drift_matrix(const ModelParams& p, const ClassicalState& s);
void build_drift_matrix(const ModelParams& p, const Vec6& y, Mat6& S);

/// Diffusion matrix D = diag(1/2, 1/2, 1/2, 1/2, 0, gamma_m (2 nbar + 1)).
Mat6 build_diffusion_matrix(const ModelParams& p);

/// Bose-Einstein occupation from the ratio hbar*omega / (kB*T) > 0.
double nbar_from_ratio(double hbar_omega_over_kT);

}  // namespace phlab

#endif
