#ifndef PHLAB_DYNAMICS_HPP
#define PHLAB_DYNAMICS_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "phlab/model.hpp"

// Time integration of the classical mean-field equations, transient
// handling, attractor classification and limit-cycle characterization.

namespace phlab {

struct IntegratorConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double max_step_periods = 0.5;  ///< step cap in units of the mechanical period
    double t_transient = -1;        ///< transient discard window; < 0 -> 50/gamma_m
    double t_observe = -1;          ///< observation window; < 0 -> 100 mechanical periods
    std::uint64_t seed = 1;
    double init_scale = 1.0;        ///< random initial conditions in [-init_scale, init_scale]
    int samples_per_period = 64;
    double settle_rel_tol = 1e-4;   ///< amplitude convergence between chunks
    double max_settle_time = 4e5;   ///< give up waiting for amplitude saturation

    double transient_for(const ModelParams& p) const {
        return t_transient >= 0 ? t_transient : 50.0 / p.gamma_m;
    }
    double observe_for(const ModelParams& p) const {
        double min_window = 20.0 * 2.0 * M_PI / p.omega_m;
        double w = t_observe >= 0 ? t_observe : 100.0 * 2.0 * M_PI / p.omega_m;
        return w < min_window ? min_window : w;
    }
};

/// Uniformly sampled classical trajectory.
struct Trajectory {
    double t0 = 0;
    double dt = 0;
    std::vector<Vec6> samples;

    std::vector<double> component(int idx) const;
    double duration() const { return samples.empty() ? 0 : dt * double(samples.size() - 1); }
};

enum class AttractorKind { FixedPoint, LimitCycle, Ambiguous, Unbounded };

struct AttractorReport {
    AttractorKind kind = AttractorKind::Ambiguous;
    ClassicalState fixed_point{};   ///< valid when kind == FixedPoint
    double q0 = 0;                  ///< mean mechanical displacement
    double amplitude = 0;           ///< half peak-to-peak of q
    double period = 0;              ///< dominant period of q(t)
    int extrema_per_period = 0;     ///< local maxima of x1 within one period
    double max_lyapunov = std::numeric_limits<double>::quiet_NaN();
    bool settled = true;            ///< amplitude converged before max_settle_time
};

/// Classification threshold on the peak-to-peak variation of q; variation
/// in (eps, 2 eps) is reported as Ambiguous.
inline constexpr double kAmplitudeEpsilon = 1e-3;

ClassicalState random_initial_state(const IntegratorConfig& cfg);

/// Integrate from `initial`, keeping uniform samples of the final
/// observation window (the transient is discarded). Deterministic for
/// fixed inputs. Throws StepSizeUnderflow / Unbounded on failure.
Trajectory integrate_classical(const ModelParams& params, const ClassicalState& initial,
                               const IntegratorConfig& cfg);

/// Classify a post-transient trajectory window.
AttractorReport classify_attractor(const Trajectory& traj, const ModelParams& params,
                                   const IntegratorConfig& cfg);

/// Integrate with chunked amplitude monitoring until the mechanical
/// amplitude has saturated (or max_settle_time is exhausted), then
/// classify the final window. Near-threshold growth is slow; plain
/// fixed-length observation would misread a growing orbit as a fixed
/// point.
AttractorReport settle_and_classify(const ModelParams& params, const ClassicalState& initial,
                                    const IntegratorConfig& cfg);

struct SettleResult {
    Vec6 state;
    double t_end = 0;
    bool settled = false;
    double amplitude = 0;  ///< half peak-to-peak of q over the last chunk
};

/// Transient integration plus the chunked amplitude-saturation loop;
/// returns the on-attractor state without classifying it.
SettleResult settle_classical(const ModelParams& params, const ClassicalState& initial,
                              const IntegratorConfig& cfg);

struct LyapunovEstimate {
    double value = 0;
    double first_half = 0;
    double second_half = 0;
    bool converged = false;
};

/// Largest Lyapunov exponent by tangent-space integration with periodic
/// renormalization. Convergence compares the two window halves.
LyapunovEstimate max_lyapunov_exponent(const ModelParams& params,
                                       const ClassicalState& initial,
                                       const IntegratorConfig& cfg);

/// One-dimensional parameter cuts through the phase diagram.
enum class SweepAxis { Lambda, Delta };

struct PathSpec {
    SweepAxis axis = SweepAxis::Lambda;
    std::vector<double> grid;  ///< monotone grid in the swept parameter
};

/// The preset cuts through the phase diagram: 1 (Delta = J, sweep Lambda), 2 (Lambda = 7, sweep
/// Delta), 3 (Delta = 9.5, sweep Lambda). Mutates the fixed coordinate of
/// `base` and returns the swept axis.
SweepAxis apply_path(int path_id, ModelParams& base);

ModelParams with_axis(const ModelParams& base, SweepAxis axis, double value);

struct SweepPoint {
    double param = 0;
    AttractorReport report;
};

/// Per-grid-point settle-and-classify; points run in parallel with a
/// deterministic partition.
std::vector<SweepPoint> amplitude_sweep(const ModelParams& base, const PathSpec& path,
                                        const IntegratorConfig& cfg, unsigned threads = 0);

/// Log-log scaling exponent of amplitude against distance-to-threshold,
/// over points (distance, amplitude) with both entries > 0.
double fit_scaling_exponent(const std::vector<std::pair<double, double>>& pts);

}  // namespace phlab

#endif
