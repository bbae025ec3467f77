#ifndef PHLAB_ENTANGLEMENT_HPP
#define PHLAB_ENTANGLEMENT_HPP

#include <Eigen/Core>
#include <vector>

#include "phlab/dynamics.hpp"
#include "phlab/model.hpp"

// Covariance-matrix propagation along classical orbits, algebraic
// steady-state solve at fixed points, logarithmic negativity of the
// (c2, mechanics) two-mode state, fluctuation radius, and the boundary /
// temperature scans built on top of them.
//
// Quadrature convention X = (c + c^dag)/sqrt(2): vacuum variance 1/2,
// physical covariance matrices have all symplectic eigenvalues >= 1/2.

namespace phlab {

using Mat4 = Eigen::Matrix4d;

struct NotHurwitz : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonPhysical : std::runtime_error {
    using std::runtime_error::runtime_error;
};
/// Covariance blow-up inside the excluded near-boundary sliver.
struct LinearizationBreakdown : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Vacuum covariance with the mechanical block at the thermal variance
/// (2 nbar + 1)/2.
Mat6 initial_covariance(const ModelParams& p);

/// Unique symmetric solution of S V + V S^T + D = 0 (S must be Hurwitz),
/// via the vectorized dense linear solve. Works for any square size.
Eigen::MatrixXd steady_lyapunov_solve(const Eigen::MatrixXd& S, const Eigen::MatrixXd& D);

/// Rows/cols 3-6 of V: the (delta X2, delta Y2, delta q, delta p) block.
Mat4 two_mode_submatrix(const Mat6& V);

/// Logarithmic negativity E_N = max(0, -ln 2 eta_minus) of a two-mode
/// covariance W = [[M, C], [C^T, N]].
double log_negativity(const Mat4& W);

/// 1/2 sqrt(V_qq) and its momentum companion.
double fluctuation_radius_q(const Mat6& V);
double fluctuation_radius_p(const Mat6& V);

/// Symplectic eigenvalues of a (2n x 2n) covariance matrix in
/// (X1, Y1, X2, Y2, ...) ordering; n values, ascending.
std::vector<double> symplectic_eigenvalues(const Eigen::MatrixXd& V);

/// Classical state + covariance co-integration, uniformly sampled over the
/// final observation window.
struct CovarianceRun {
    double t0 = 0;
    double dt = 0;
    std::vector<Mat6> samples;  ///< symmetrized
    Mat6 final_V;
    Vec6 final_classical;
};

CovarianceRun integrate_covariance(const ModelParams& params, const ClassicalState& initial,
                                   const Mat6& V0, const IntegratorConfig& cfg);

/// Co-integrate with the classical state pinned at a fixed point until the
/// algebraic Lyapunov residual of V drops below residual_tol (or t_max is
/// exhausted); the ODE route for checking steady_lyapunov_solve.
Mat6 relax_covariance(const ModelParams& params, const ClassicalState& fixed_point,
                      const Mat6& V0, const IntegratorConfig& cfg,
                      double residual_tol = 1e-9, double t_max = 2e4);

struct EntanglementTrace {
    double t0 = 0;
    double dt = 0;
    std::vector<double> en;   ///< E_N over the final window (>= 10 periods)
    double e_max = 0;
    double e_min = 0;
    bool is_constant = false; ///< e_max - e_min below tolerance
    double period = 0;        ///< dominant period of E_N(t), 0 if constant
    bool steady = true;       ///< per-period extrema converged before the time cap
    double min_symplectic = 0;///< smallest symplectic eigenvalue seen in the window
    Mat6 final_V;
};

inline constexpr double kConstantTraceTol = 1e-6;

/// Run classical + covariance co-integration from the given start until
/// the per-period (E_max, E_min) pair is steady, then sample E_N over the
/// final window.
EntanglementTrace entanglement_trace(const ModelParams& params, const ClassicalState& initial,
                                     const Mat6& V0, const IntegratorConfig& cfg);

/// Same, from seeded random classical initial conditions and the default
/// initial covariance, optionally with a seeded symmetric positive
/// perturbation of relative size v0_perturbation.
EntanglementTrace entanglement_trace(const ModelParams& params, const IntegratorConfig& cfg,
                                     double v0_perturbation = 0.0);

/// E_N of the stationary Gaussian state at the (stable) fixed point of the
/// given parameters, via the algebraic Lyapunov route. Throws NotHurwitz
/// in region II.
double steady_log_negativity(const ModelParams& params);

/// Stationary covariance at the stable fixed point.
Mat6 steady_covariance(const ModelParams& params);

struct TemperatureRow {
    double param = 0;
    double nbar = 0;
    double e_max = 0;
    double e_min = 0;
    bool is_constant = false;
};

std::vector<TemperatureRow> temperature_sweep(const ModelParams& base, SweepAxis axis,
                                              const std::vector<double>& param_values,
                                              const std::vector<double>& nbar_values,
                                              const IntegratorConfig& cfg,
                                              unsigned threads = 0);

/// A point on the region boundary plus the direction (in the swept
/// parameter) that leads into region I.
struct BoundaryPoint {
    ModelParams at_boundary;
    SweepAxis axis = SweepAxis::Lambda;
    double region1_direction = -1.0;  ///< sign of the admissible offset
};

struct BoundaryScanResult {
    std::vector<double> en;        ///< NaN for skipped points
    std::vector<bool> admitted;
    double mean = 0;               ///< over admitted points
    double rel_spread = 0;         ///< stddev / mean over admitted points
    std::size_t n_admitted = 0;
};

/// E_N at parameter-space distance `offset` on the region-I side of each
/// boundary sample. Points whose mechanical fluctuation radius exceeds 10x
/// its value one further offset-step away are inside the excluded sliver
/// and skipped.
BoundaryScanResult boundary_constant_scan(const std::vector<BoundaryPoint>& samples,
                                          double offset, unsigned threads = 0);

}  // namespace phlab

#endif
