#include "phlab/entanglement.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

#include "phlab/analysis.hpp"
#include "phlab/fixed_points.hpp"
#include "phlab/ode.hpp"
#include "phlab/sweep.hpp"

namespace phlab {

namespace {

using Vec42 = Eigen::Matrix<double, 42, 1>;
using Vec36 = Eigen::Matrix<double, 36, 1>;

// classical mean fields + covariance, co-integrated so S(t) is evaluated
// on the orbit the fluctuations follow
struct CoSystem {
    const ModelParams& p;
    Mat6 D;
    mutable Mat6 S;
    void operator()(double, const Vec42& y, Vec42& dy) const {
        Vec6 x = y.head<6>(), dx;
        classical_rhs(p, x, dx);
        build_drift_matrix(p, x, S);
        Eigen::Map<const Mat6> V(y.data() + 6);
        dy.head<6>() = dx;
        Eigen::Map<Mat6> dV(dy.data() + 6);
        dV.noalias() = S * V;
        dV += dV.transpose().eval();
        dV += D;
    }
};

// covariance alone, at a frozen drift matrix
struct FrozenCovSystem {
    Mat6 S, D;
    void operator()(double, const Vec36& y, Vec36& dy) const {
        Eigen::Map<const Mat6> V(y.data());
        Eigen::Map<Mat6> dV(dy.data());
        dV.noalias() = S * V;
        dV += dV.transpose().eval();
        dV += D;
    }
};

Vec42 pack(const Vec6& cls, const Mat6& V) {
    Vec42 y;
    y.head<6>() = cls;
    Eigen::Map<Mat6>(y.data() + 6) = V;
    return y;
}

Mat6 unpack_cov(const Vec42& y) {
    Mat6 V = Eigen::Map<const Mat6>(y.data() + 6);
    return 0.5 * (V + V.transpose()).eval();
}

void symmetrize_state(Vec42& y) {
    Eigen::Map<Mat6> V(y.data() + 6);
    Mat6 sym = 0.5 * (V + V.transpose());
    V = sym;
}

Dopri5<Vec42> make_co_stepper(const ModelParams& p, const IntegratorConfig& cfg) {
    Dopri5<Vec42> st;
    st.rel_tol = cfg.rel_tol;
    st.abs_tol = cfg.abs_tol;
    st.max_step = cfg.max_step_periods * 2.0 * M_PI / p.omega_m;
    st.overflow_guard = 1e9;
    return st;
}

double en_of(const Vec42& y) {
    return log_negativity(two_mode_submatrix(unpack_cov(y)));
}

}  // namespace

Mat6 initial_covariance(const ModelParams& p) {
    Mat6 V = 0.5 * Mat6::Identity();
    V(4, 4) = V(5, 5) = 0.5 * (2.0 * p.nbar + 1.0);
    return V;
}

Eigen::MatrixXd steady_lyapunov_solve(const Eigen::MatrixXd& S, const Eigen::MatrixXd& D) {
    const auto n = S.rows();
    if (S.cols() != n || D.rows() != n || D.cols() != n)
        throw std::invalid_argument("steady_lyapunov_solve: dimension mismatch");

    Eigen::EigenSolver<Eigen::MatrixXd> es(S, false);
    if (es.eigenvalues().real().maxCoeff() >= 0)
        throw NotHurwitz("steady_lyapunov_solve: S has a non-negative real-part eigenvalue");

    // vec(S V + V S^T) = (I (x) S + S (x) I) vec(V), column-major vec
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n * n, n * n);
    for (Eigen::Index j = 0; j < n; ++j)
        A.block(j * n, j * n, n, n) += S;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index l = 0; l < n; ++l)
            for (Eigen::Index i = 0; i < n; ++i)
                A(j * n + i, l * n + i) += S(j, l);

    Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(D.data(), n * n);
    Eigen::VectorXd v = A.partialPivLu().solve(rhs);
    Eigen::MatrixXd V = Eigen::Map<const Eigen::MatrixXd>(v.data(), n, n);
    return 0.5 * (V + V.transpose());
}

Mat4 two_mode_submatrix(const Mat6& V) {
    return V.bottomRightCorner<4, 4>();
}

double log_negativity(const Mat4& W) {
    const double detM = W.topLeftCorner<2, 2>().determinant();
    const double detN = W.bottomRightCorner<2, 2>().determinant();
    const double detC = W.topRightCorner<2, 2>().determinant();
    const double detW = W.determinant();
    const double sigma = detM + detN - 2.0 * detC;

    double disc = sigma * sigma - 4.0 * detW;
    const double scale = std::max(1.0, sigma * sigma);
    if (disc < -1e-9 * scale)
        throw NonPhysical("log_negativity: negative discriminant (corrupted covariance)");
    disc = std::max(disc, 0.0);

    double inner = sigma - std::sqrt(disc);
    if (inner < -1e-12)
        throw NonPhysical("log_negativity: eta_minus not real");
    inner = std::max(inner, 0.0);
    double eta_minus = std::sqrt(0.5 * inner);
    if (eta_minus <= 0)
        throw NonPhysical("log_negativity: vanishing eta_minus");
    return std::max(0.0, -std::log(2.0 * eta_minus));
}

double fluctuation_radius_q(const Mat6& V) {
    if (V(4, 4) < 0) throw NonPhysical("fluctuation_radius: negative variance");
    return 0.5 * std::sqrt(V(4, 4));
}

double fluctuation_radius_p(const Mat6& V) {
    if (V(5, 5) < 0) throw NonPhysical("fluctuation_radius: negative variance");
    return 0.5 * std::sqrt(V(5, 5));
}

std::vector<double> symplectic_eigenvalues(const Eigen::MatrixXd& V) {
    const auto n2 = V.rows();
    if (n2 % 2 != 0 || V.cols() != n2)
        throw std::invalid_argument("symplectic_eigenvalues: need even square matrix");
    Eigen::MatrixXd Omega = Eigen::MatrixXd::Zero(n2, n2);
    for (Eigen::Index k = 0; k < n2 / 2; ++k) {
        Omega(2 * k, 2 * k + 1) = 1.0;
        Omega(2 * k + 1, 2 * k) = -1.0;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(Omega * V, false);
    std::vector<double> mags(n2);
    for (Eigen::Index i = 0; i < n2; ++i) mags[i] = std::abs(es.eigenvalues()[i].imag());
    std::sort(mags.begin(), mags.end());
    // eigenvalues come in +-i nu pairs
    std::vector<double> nus(n2 / 2);
    for (Eigen::Index k = 0; k < n2 / 2; ++k)
        nus[k] = 0.5 * (mags[2 * k] + mags[2 * k + 1]);
    return nus;
}

CovarianceRun integrate_covariance(const ModelParams& params, const ClassicalState& initial,
                                   const Mat6& V0, const IntegratorConfig& cfg) {
    auto stepper = make_co_stepper(params, cfg);
    CoSystem sys{params, build_diffusion_matrix(params)};
    Vec42 y = pack(initial.to_vec(), 0.5 * (V0 + V0.transpose()));

    double period = 2.0 * M_PI / params.omega_m;
    double chunk = 10.0 * period;
    double t = 0, t_trans = cfg.transient_for(params);
    try {
        while (t < t_trans) {
            double step = std::min(chunk, t_trans - t);
            stepper.integrate(sys, y, t, t + step);
            t += step;
            symmetrize_state(y);
        }
    } catch (const Unbounded& e) {
        throw LinearizationBreakdown(e.what());
    }

    CovarianceRun run;
    run.t0 = t;
    run.dt = period / double(cfg.samples_per_period);
    double t_obs = cfg.observe_for(params);
    try {
        stepper.integrate_sampled(sys, y, t, t + t_obs, run.dt,
                                  [&](double, const Vec42& yi) {
                                      run.samples.push_back(unpack_cov(yi));
                                  });
    } catch (const Unbounded& e) {
        throw LinearizationBreakdown(e.what());
    }
    run.final_V = unpack_cov(y);
    run.final_classical = y.head<6>();
    return run;
}

Mat6 relax_covariance(const ModelParams& params, const ClassicalState& fixed_point,
                      const Mat6& V0, const IntegratorConfig& cfg,
                      double residual_tol, double t_max) {
    FrozenCovSystem sys{build_drift_matrix(params, fixed_point),
                        build_diffusion_matrix(params)};
    Dopri5<Vec36> stepper;
    stepper.rel_tol = cfg.rel_tol;
    stepper.abs_tol = cfg.abs_tol;
    stepper.overflow_guard = 1e9;

    Vec36 y;
    Eigen::Map<Mat6>(y.data()) = 0.5 * (V0 + V0.transpose());

    double chunk = 20.0 * 2.0 * M_PI / params.omega_m;
    double t = 0;
    while (t < t_max) {
        try {
            stepper.integrate(sys, y, t, t + chunk);
        } catch (const Unbounded& e) {
            throw LinearizationBreakdown(e.what());
        }
        t += chunk;
        Mat6 V = Eigen::Map<const Mat6>(y.data());
        V = 0.5 * (V + V.transpose()).eval();
        Eigen::Map<Mat6>(y.data()) = V;
        Mat6 resid = sys.S * V + V * sys.S.transpose() + sys.D;
        if (resid.cwiseAbs().maxCoeff() < residual_tol) return V;
    }
    Mat6 V = Eigen::Map<const Mat6>(y.data());
    return 0.5 * (V + V.transpose());
}

EntanglementTrace entanglement_trace(const ModelParams& params, const ClassicalState& initial,
                                     const Mat6& V0, const IntegratorConfig& cfg) {
    // settle the classical orbit first: it is 7x cheaper per step and its
    // transient dominates near the threshold
    SettleResult cls = settle_classical(params, initial, cfg);

    auto stepper = make_co_stepper(params, cfg);
    CoSystem sys{params, build_diffusion_matrix(params)};
    Vec42 y = pack(cls.state, 0.5 * (V0 + V0.transpose()));

    const double period = 2.0 * M_PI / params.omega_m;
    const double dt = period / double(cfg.samples_per_period);

    // covariance transient: at least the configured transient window, then
    // per-period (E_max, E_min) steadiness over 5 consecutive periods
    double t = cls.t_end;
    const double t_cap = t + cfg.max_settle_time;
    double warmup = t + std::min(cfg.transient_for(params), 0.5 * cfg.max_settle_time);
    try {
        while (t < warmup) {
            double step = std::min(10.0 * period, warmup - t);
            stepper.integrate(sys, y, t, t + step);
            t += step;
            symmetrize_state(y);
        }
    } catch (const Unbounded& e) {
        throw LinearizationBreakdown(e.what());
    }

    std::vector<std::pair<double, double>> history;  // per-period (max, min)
    bool steady = false;
    try {
        while (t < t_cap) {
            double pmax = -std::numeric_limits<double>::infinity();
            double pmin = std::numeric_limits<double>::infinity();
            stepper.integrate_sampled(sys, y, t, t + period, dt,
                                      [&](double, const Vec42& yi) {
                                          double e = en_of(yi);
                                          pmax = std::max(pmax, e);
                                          pmin = std::min(pmin, e);
                                      });
            t += period;
            symmetrize_state(y);
            history.emplace_back(pmax, pmin);

            if (history.size() >= 6) {
                steady = true;
                std::size_t last = history.size() - 1;
                for (std::size_t k = last - 4; k <= last && steady; ++k) {
                    double scale = std::max({history[k].first, history[k - 1].first, 1e-9});
                    double dmax = std::abs(history[k].first - history[k - 1].first);
                    double dmin = std::abs(history[k].second - history[k - 1].second);
                    if ((dmax + dmin) / scale >= kConstantTraceTol) steady = false;
                }
                if (steady) break;
            }
        }
    } catch (const Unbounded& e) {
        throw LinearizationBreakdown(e.what());
    }

    // final observation window
    EntanglementTrace tr;
    tr.t0 = t;
    tr.dt = dt;
    tr.steady = steady;
    double t_obs = std::max(10.0 * period, cfg.observe_for(params));
    tr.min_symplectic = std::numeric_limits<double>::infinity();
    int count = 0;
    try {
        stepper.integrate_sampled(sys, y, t, t + t_obs, dt,
                                  [&](double, const Vec42& yi) {
                                      tr.en.push_back(en_of(yi));
                                      if (count++ % cfg.samples_per_period == 0) {
                                          auto nus = symplectic_eigenvalues(unpack_cov(yi));
                                          tr.min_symplectic =
                                              std::min(tr.min_symplectic, nus.front());
                                      }
                                  });
    } catch (const Unbounded& e) {
        throw LinearizationBreakdown(e.what());
    }
    tr.final_V = unpack_cov(y);

    auto [lo, hi] = std::minmax_element(tr.en.begin(), tr.en.end());
    tr.e_min = *lo;
    tr.e_max = *hi;
    tr.is_constant = (tr.e_max - tr.e_min) < kConstantTraceTol;
    if (!tr.is_constant) tr.period = dominant_period(tr.en, dt);
    return tr;
}

EntanglementTrace entanglement_trace(const ModelParams& params, const IntegratorConfig& cfg,
                                     double v0_perturbation) {
    ClassicalState init = random_initial_state(cfg);
    Mat6 V0 = initial_covariance(params);
    if (v0_perturbation > 0) {
        std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
        Mat6 R;
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                R(i, j) = 2.0 * (double(rng() >> 11) * 0x1.0p-53) - 1.0;
        // R R^T is positive semidefinite, so V0 stays a valid covariance
        V0 += v0_perturbation * (R * R.transpose());
    }
    return entanglement_trace(params, init, V0, cfg);
}

Mat6 steady_covariance(const ModelParams& params) {
    auto roots = solve_fixed_point(params);
    const FixedPointSolution* stable = nullptr;
    for (const auto& r : roots)
        if (r.stable) {
            stable = &r;
            break;
        }
    if (!stable)
        throw NotHurwitz("steady_covariance: no stable fixed point (region II)");
    Mat6 S = build_drift_matrix(params, stable->state);
    Mat6 D = build_diffusion_matrix(params);
    return steady_lyapunov_solve(S, D);
}

double steady_log_negativity(const ModelParams& params) {
    return log_negativity(two_mode_submatrix(steady_covariance(params)));
}

std::vector<TemperatureRow> temperature_sweep(const ModelParams& base, SweepAxis axis,
                                              const std::vector<double>& param_values,
                                              const std::vector<double>& nbar_values,
                                              const IntegratorConfig& cfg,
                                              unsigned threads) {
    std::vector<TemperatureRow> rows(param_values.size() * nbar_values.size());
    parallel_for_checked(rows.size(), threads, [&](std::size_t idx) {
        std::size_t i = idx / nbar_values.size(), j = idx % nbar_values.size();
        ModelParams p = with_axis(base, axis, param_values[i]);
        p.nbar = nbar_values[j];
        auto tr = entanglement_trace(p, cfg);
        rows[idx] = {param_values[i], nbar_values[j], tr.e_max, tr.e_min, tr.is_constant};
    });
    return rows;
}

BoundaryScanResult boundary_constant_scan(const std::vector<BoundaryPoint>& samples,
                                          double offset, unsigned threads) {
    BoundaryScanResult res;
    res.en.assign(samples.size(), std::numeric_limits<double>::quiet_NaN());
    res.admitted.assign(samples.size(), false);

    parallel_for_checked(samples.size(), threads, [&](std::size_t i) {
        const auto& bp = samples[i];
        double at = bp.axis == SweepAxis::Lambda ? bp.at_boundary.Lambda
                                                 : bp.at_boundary.Delta;
        double step = bp.region1_direction * offset;
        ModelParams near = with_axis(bp.at_boundary, bp.axis, at + step);
        ModelParams away = with_axis(bp.at_boundary, bp.axis, at + 2.0 * step);
        try {
            Mat6 Vnear = steady_covariance(near);
            Mat6 Vaway = steady_covariance(away);
            double r_near = fluctuation_radius_q(Vnear);
            double r_away = fluctuation_radius_q(Vaway);
            if (r_near > 10.0 * r_away) return;  // excluded sliver
            res.en[i] = log_negativity(two_mode_submatrix(Vnear));
            res.admitted[i] = true;
        } catch (const NotHurwitz&) {
            // offset landed in region II: not admissible
        } catch (const NonPhysical&) {
        }
    });

    double sum = 0;
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (res.admitted[i]) {
            sum += res.en[i];
            ++res.n_admitted;
        }
    if (res.n_admitted > 0) {
        res.mean = sum / double(res.n_admitted);
        double ss = 0;
        for (std::size_t i = 0; i < samples.size(); ++i)
            if (res.admitted[i]) ss += (res.en[i] - res.mean) * (res.en[i] - res.mean);
        double sd = std::sqrt(ss / double(res.n_admitted));
        res.rel_spread = res.mean != 0 ? sd / std::abs(res.mean) : 0;
    }
    return res;
}

}  // namespace phlab
