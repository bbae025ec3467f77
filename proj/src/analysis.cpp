#include "phlab/analysis.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>

namespace phlab {

double dominant_period(std::span<const double> samples, double dt) {
    const std::size_t n = samples.size();
    if (n < 8) throw std::invalid_argument("dominant_period: too few samples");

    std::vector<double> in(n);
    double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / double(n);
    auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    if (*hi - *lo <= 1e-12 * std::max(1.0, std::abs(mean))) return 0.0;  // constant
    for (std::size_t i = 0; i < n; ++i) {
        double w = 0.5 * (1.0 - std::cos(2.0 * M_PI * double(i) / double(n - 1)));
        in[i] = (samples[i] - mean) * w;
    }

    std::vector<std::complex<double>> out(n / 2 + 1);
    fftw_plan plan = fftw_plan_dft_r2c_1d(
        int(n), in.data(), reinterpret_cast<fftw_complex*>(out.data()),
        FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    std::size_t kmax = 0;
    double amax = 0;
    for (std::size_t k = 1; k + 1 < out.size(); ++k) {
        double a = std::abs(out[k]);
        if (a > amax) {
            amax = a;
            kmax = k;
        }
    }
    if (kmax == 0 || amax <= 0) return 0.0;

    // parabolic refinement on the log magnitude of the three bins around
    // the peak; Hann-windowed spectra are well approximated by a parabola
    double km = double(kmax);
    double am = std::log(std::abs(out[kmax - 1]) + 1e-300);
    double a0 = std::log(amax + 1e-300);
    double ap = std::log(std::abs(out[kmax + 1]) + 1e-300);
    double denom = am - 2.0 * a0 + ap;
    if (std::abs(denom) > 1e-300) {
        double delta = 0.5 * (am - ap) / denom;
        if (std::abs(delta) < 1.0) km += delta;
    }
    double freq = km / (double(n) * dt);
    return freq > 0 ? 1.0 / freq : 0.0;
}

std::vector<std::size_t> find_peaks(std::span<const double> s,
                                    double min_prominence) {
    std::vector<std::size_t> peaks;
    const std::size_t n = s.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(s[i] > s[i - 1] && s[i] >= s[i + 1])) continue;
        // prominence: lowest point between the peak and the nearest higher
        // ground on each side (or the window edge)
        double left_min = s[i];
        for (std::size_t j = i; j-- > 0;) {
            left_min = std::min(left_min, s[j]);
            if (s[j] > s[i]) break;
        }
        double right_min = s[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            right_min = std::min(right_min, s[j]);
            if (s[j] > s[i]) break;
        }
        double prom = s[i] - std::max(left_min, right_min);
        if (prom >= min_prominence) peaks.push_back(i);
    }
    return peaks;
}

int extrema_per_period(std::span<const double> s, double dt, double period,
                       double prominence_frac) {
    if (period <= 0 || s.size() < 4) return 0;
    auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    double p2p = *hi - *lo;
    if (p2p <= 0) return 0;

    // analyze an integer number of whole periods, dropping the edges
    double total = double(s.size() - 1) * dt;
    int nper = int(std::floor(total / period));
    if (nper < 2) return 0;
    std::size_t count = std::size_t(std::round(double(nper) * period / dt));
    count = std::min(count, s.size());
    auto window = s.subspan(s.size() - count, count);

    auto peaks = find_peaks(window, prominence_frac * p2p);
    return int(std::lround(double(peaks.size()) / double(nper)));
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need >= 2 matching points");
    double n = double(x.size());
    double sx = std::accumulate(x.begin(), x.end(), 0.0);
    double sy = std::accumulate(y.begin(), y.end(), 0.0);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double denom = n * sxx - sx * sx;
    if (denom == 0) throw std::invalid_argument("fit_line: degenerate abscissae");
    LineFit f;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

double autocorrelation_first_peak(std::span<const double> s, double dt,
                                  double min_lag) {
    const std::size_t n = s.size();
    if (n < 8) return 0;
    double mean = std::accumulate(s.begin(), s.end(), 0.0) / double(n);
    std::size_t max_lag = n / 2;
    std::vector<double> ac(max_lag);
    for (std::size_t lag = 0; lag < max_lag; ++lag) {
        double sum = 0;
        for (std::size_t i = 0; i + lag < n; ++i)
            sum += (s[i] - mean) * (s[i + lag] - mean);
        ac[lag] = sum / double(n - lag);
    }
    std::size_t start = std::size_t(std::ceil(min_lag / dt));
    start = std::max<std::size_t>(start, 1);
    for (std::size_t i = std::max<std::size_t>(start, 1); i + 1 < max_lag; ++i) {
        if (ac[i] > ac[i - 1] && ac[i] >= ac[i + 1]) {
            // parabolic refinement of the lag
            double denom = ac[i - 1] - 2 * ac[i] + ac[i + 1];
            double delta = std::abs(denom) > 0 ? 0.5 * (ac[i - 1] - ac[i + 1]) / denom : 0;
            return (double(i) + delta) * dt;
        }
    }
    return 0;
}

}  // namespace phlab
