#ifndef PHLAB_ANALYSIS_HPP
#define PHLAB_ANALYSIS_HPP

#include <cstddef>
#include <span>
#include <vector>

// Time-series utilities: dominant-period extraction via windowed FFT with
// parabolic peak interpolation, prominence-filtered extremum counting, and
// least-squares line fitting for scaling exponents.

namespace phlab {

/// Dominant oscillation period of a uniformly sampled signal (sample
/// spacing dt). A Hann window is applied and the spectral peak refined by
/// parabolic interpolation of the log-magnitude. Returns 0 if no nonzero
/// spectral peak stands out (constant signal).
double dominant_period(std::span<const double> samples, double dt);

/// Indices of local maxima whose topographic prominence is at least
/// min_prominence.
std::vector<std::size_t> find_peaks(std::span<const double> samples,
                                    double min_prominence);

/// Average number of prominence-filtered maxima per period, rounded to the
/// nearest integer. The prominence floor is prominence_frac of the signal's
/// peak-to-peak range. Returns 0 for an effectively constant signal.
int extrema_per_period(std::span<const double> samples, double dt, double period,
                       double prominence_frac = 0.01);

/// Slope and intercept of the least-squares line y = slope*x + intercept.
struct LineFit {
    double slope = 0;
    double intercept = 0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Lag (in time units) of the first nontrivial peak of the autocorrelation,
/// searching lags >= min_lag. Returns 0 if none found.
double autocorrelation_first_peak(std::span<const double> samples, double dt,
                                  double min_lag);

}  // namespace phlab

#endif
