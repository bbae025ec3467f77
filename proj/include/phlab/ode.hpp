#ifndef PHLAB_ODE_HPP
#define PHLAB_ODE_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

// Adaptive embedded Runge-Kutta 5(4) stepper (Dormand-Prince pair) with the
// standard fourth-order continuous extension, following Hairer, Norsett &
// Wanner, "Solving Ordinary Differential Equations I". Header-only so the
// same stepper serves the 6-dim classical flow, the 12-dim tangent-space
// flow, and the 42-dim covariance co-integration without indirection in the
// inner loop.

namespace phlab {

struct IntegrationFailure : std::runtime_error {
    double t_fail;
    IntegrationFailure(const std::string& what, double t)
        : std::runtime_error(what + " at t = " + std::to_string(t)), t_fail(t) {}
};

/// Step-size underflow: the problem looks stiffer than the pair can handle.
struct StepSizeUnderflow : IntegrationFailure {
    using IntegrationFailure::IntegrationFailure;
};

/// Solution norm exceeded the overflow guard (trajectory unbounded).
struct Unbounded : IntegrationFailure {
    using IntegrationFailure::IntegrationFailure;
};

template <class Vec>
class Dopri5 {
public:
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double max_step = 1e30;
    double overflow_guard = 1e8;

    /// Integrate y from t0 to t1 in place. No dense output.
    template <class System>
    void integrate(System&& sys, Vec& y, double t0, double t1) {
        run(sys, y, t0, t1, [](double, const Vec&) {});
    }

    /// Integrate and invoke obs(t, y(t)) at t0, t0+dt, t0+2*dt, ... up to t1
    /// using the continuous extension (values at exact sample times).
    template <class System, class Obs>
    void integrate_sampled(System&& sys, Vec& y, double t0, double t1,
                           double dt, Obs&& obs) {
        double next = t0;
        run(sys, y, t0, t1, [&](double t, const Vec& /*ynew*/) {
            while (next <= t + 1e-14 * std::max(1.0, std::abs(t)) && next <= t1) {
                if (next <= t_prev_) {
                    obs(next, y_prev_);
                } else {
                    double theta = (next - t_prev_) / h_prev_;
                    Vec yi = cont_eval(theta);
                    obs(next, yi);
                }
                next += dt;
            }
        });
    }

private:
    // continuous-extension state for the last accepted step
    Vec r1_, r2_, r3_, r4_, r5_, y_prev_;
    double t_prev_ = 0, h_prev_ = 0;

    Vec cont_eval(double theta) const {
        const double th1 = 1.0 - theta;
        return r1_ + theta * (r2_ + th1 * (r3_ + theta * (r4_ + th1 * r5_)));
    }

    template <class System, class OnAccept>
    void run(System&& sys, Vec& y, double t0, double t1, OnAccept&& on_accept) {
        static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                                c5 = 8.0 / 9;
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                                a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                                a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                                a65 = -5103.0 / 18656;
        static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113,
                                a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                                a76 = 11.0 / 84;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                                e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                                e6 = 22.0 / 525, e7 = -1.0 / 40;
        // dense-output coefficients (Hairer's DOPRI5)
        static constexpr double d1 = -12715105075.0 / 11282082432.0,
                                d3 = 87487479700.0 / 32700410799.0,
                                d4 = -10690763975.0 / 1880347072.0,
                                d5 = 701980252875.0 / 199316789632.0,
                                d6 = -1453857185.0 / 822651844.0,
                                d7 = 69997945.0 / 29380423.0;

        if (t1 <= t0) {
            t_prev_ = t0;
            h_prev_ = 0;
            y_prev_ = y;
            on_accept(t0, y);
            return;
        }

        Vec k1, k2, k3, k4, k5, k6, k7, ytmp, ynew, yerr;
        double t = t0;
        sys(t, y, k1);

        double h = initial_step(sys, y, k1, t);
        h = std::min(h, std::min(max_step, t1 - t0));
        double facold = 1e-4;
        bool rejected = false;

        const double hmin_floor = 1e-13;

        while (t < t1) {
            if (h < hmin_floor * std::max(1.0, std::abs(t)))
                throw StepSizeUnderflow("ODE step size underflow", t);
            bool last = false;
            if (t + h >= t1) {
                h = t1 - t;
                last = true;
            }

            ytmp = y + h * (a21 * k1);
            sys(t + c2 * h, ytmp, k2);
            ytmp = y + h * (a31 * k1 + a32 * k2);
            sys(t + c3 * h, ytmp, k3);
            ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
            sys(t + c4 * h, ytmp, k4);
            ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            sys(t + c5 * h, ytmp, k5);
            ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            sys(t + h, ytmp, k6);
            ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
            sys(t + h, ynew, k7);
            yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            // scaled RMS error norm
            double err = 0;
            const int n = int(y.size());
            for (int i = 0; i < n; ++i) {
                double sc = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                double e = yerr[i] / sc;
                err += e * e;
            }
            err = std::sqrt(err / n);

            if (err <= 1.0) {
                // accepted: build the continuous extension before advancing
                y_prev_ = y;
                t_prev_ = t;
                h_prev_ = h;
                r1_ = y;
                r2_ = ynew - y;
                r3_ = h * k1 - r2_;
                r4_ = r2_ - h * k7 - r3_;
                r5_ = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

                t += h;
                y = ynew;
                k1 = k7;  // FSAL

                if (!y.allFinite() || y.norm() > overflow_guard)
                    throw Unbounded("ODE solution exceeded overflow guard", t);

                on_accept(t, y);
                if (last) break;

                double fac = std::pow(err, 0.2) / std::pow(facold, 0.04) / 0.9;
                fac = std::clamp(fac, 0.2, rejected ? 1.0 : 10.0);
                facold = std::max(err, 1e-4);
                h = std::min(h / fac, max_step);
                rejected = false;
            } else {
                double fac = std::min(std::pow(err, 0.2) / 0.9, 5.0);
                h /= fac;
                rejected = true;
            }
        }
    }

    template <class System>
    double initial_step(System&& sys, const Vec& y, const Vec& f0, double t) {
        // standard h0 heuristic (HNW Algorithm 4.14, simplified)
        double d0 = y.norm(), d1 = f0.norm();
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        Vec y1 = y + h0 * f0, f1;
        sys(t + h0, y1, f1);
        double d2 = (f1 - f0).norm() / h0;
        double dm = std::max(d1, d2);
        double h1 = (dm <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                  : std::pow(0.01 / dm, 0.2);
        return std::min({100 * h0, h1, max_step});
    }
};

}  // namespace phlab

#endif
