#ifndef PHLAB_FIXED_POINTS_HPP
#define PHLAB_FIXED_POINTS_HPP

#include <Eigen/Core>
#include <vector>

#include "phlab/dynamics.hpp"
#include "phlab/model.hpp"

// Direct fixed-point solving, linear stability analysis, closed-form
// threshold computation from the effective mechanical damping rate, and
// 2-D phase-diagram construction.

namespace phlab {

using EigSpectrum = Eigen::Matrix<complexd, 6, 1>;

struct SingularOpticalSystem : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoRoot : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoBracket : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FixedPointSolution {
    ClassicalState state;      ///< p component is exactly 0
    double residual = 0;       ///< RHS norm at the solution
    EigSpectrum eigenvalues;   ///< of S at the solution, by real part descending
    bool stable = false;       ///< all real parts < 0
};

/// Optical amplitudes at a frozen mechanical displacement q (the 2x2
/// complex linear system of the optical stationarity conditions).
std::pair<complexd, complexd> optical_amplitudes_at(const ModelParams& p, double q);

/// Mechanical self-consistency function F(q) = q - (g / 2 omega_m) |c1(q) - c2(q)|^2;
/// fixed points are its roots (with p = 0).
double self_consistency(const ModelParams& p, double q);

/// All real fixed points, found by a bracketing scan of q over the
/// radiation-pressure bound followed by bisection refinement.
std::vector<FixedPointSolution> solve_fixed_point(const ModelParams& p);

/// Eigenvalues of the drift matrix at the given point, sorted by real part
/// descending.
EigSpectrum stability_eigenvalues(const ModelParams& p, const ClassicalState& fp);

/// Optomechanical damping rate induced by the radiation pressure force,
/// from the mechanical-susceptibility closed form, evaluated at a fixed
/// point.
double gamma_opt(const ModelParams& p, const ClassicalState& fp);

/// gamma_m + gamma_opt at the system's fixed point for the given
/// parameters (first root if several).
double gamma_eff(const ModelParams& p);

/// Root of gamma_eff = 0 in the swept parameter over [lo, hi]
/// (bracketing scan + bisection). Throws NoBracket if gamma_eff does not
/// change sign in the range.
double find_threshold(const ModelParams& base, SweepAxis axis, double lo, double hi);

/// All gamma_eff = 0 crossings in [lo, hi] (path 2 crosses the boundary
/// twice).
std::vector<double> find_thresholds(const ModelParams& base, SweepAxis axis,
                                    double lo, double hi);

/// Threshold located instead from the eigenvalue crossing of the drift
/// matrix (max real part = 0); the independent route for consistency
/// checks.
double threshold_eigenvalue(const ModelParams& base, SweepAxis axis, double lo, double hi);
std::vector<double> thresholds_eigenvalue(const ModelParams& base, SweepAxis axis,
                                          double lo, double hi);

enum class Region { I, II, Unknown };

struct PhaseCell {
    Region region = Region::Unknown;
    double max_re_eig = std::numeric_limits<double>::quiet_NaN();
    bool cross_checked = false;
    bool disagrees = false;  ///< time-integration cross-check disagreed
};

struct PhaseDiagram {
    std::vector<double> lambdas;  ///< row coordinate
    std::vector<double> deltas;   ///< column coordinate
    std::vector<PhaseCell> cells; ///< row-major: cells[i * deltas.size() + j]
    std::vector<std::pair<double, double>> boundary;  ///< (Delta, Lambda_th), NaN if absent

    const PhaseCell& at(std::size_t i, std::size_t j) const {
        return cells[i * deltas.size() + j];
    }
};

/// Eigenvalue classification over the (Lambda, Delta) grid, with direct
/// time-integration cross-validation on a seeded random subsample of
/// cells.
PhaseDiagram sweep_phase_diagram(const ModelParams& base,
                                 const std::vector<double>& lambdas,
                                 const std::vector<double>& deltas,
                                 double cross_check_fraction = 0.0,
                                 const IntegratorConfig& cfg = {},
                                 unsigned threads = 0);

/// Convenience: uniform grid min..max with the given number of points.
std::vector<double> linspace(double min, double max, std::size_t count);

}  // namespace phlab

#endif
