#include "phlab/fixed_points.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "phlab/sweep.hpp"

namespace phlab {

namespace {

ClassicalState state_from_q(const ModelParams& p, double q) {
    auto [c1, c2] = optical_amplitudes_at(p, q);
    return {c1.real(), c1.imag(), c2.real(), c2.imag(), q, 0.0};
}

double bisect(const ModelParams& p, double a, double b, double fa) {
    for (int it = 0; it < 200; ++it) {
        double m = 0.5 * (a + b);
        if (m == a || m == b) break;
        double fm = self_consistency(p, m);
        if (fm == 0) return m;
        if ((fm < 0) == (fa < 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

FixedPointSolution make_solution(const ModelParams& p, double q) {
    FixedPointSolution sol;
    sol.state = state_from_q(p, q);
    Vec6 f;
    classical_rhs(p, sol.state.to_vec(), f);
    sol.residual = f.norm();
    sol.eigenvalues = stability_eigenvalues(p, sol.state);
    sol.stable = sol.eigenvalues[0].real() < 0;
    return sol;
}

// generic scalar root machinery over a parameter axis
template <class Fn>
std::vector<double> scan_roots(Fn&& fn, double lo, double hi, int n) {
    std::vector<double> roots;
    double prev_v = lo, prev_f = fn(lo);
    for (int i = 1; i <= n; ++i) {
        double v = lo + (hi - lo) * double(i) / n;
        double f = fn(v);
        if (prev_f == 0) roots.push_back(prev_v);
        else if ((prev_f < 0) != (f < 0)) {
            double a = prev_v, b = v, fa = prev_f;
            for (int it = 0; it < 100; ++it) {
                double m = 0.5 * (a + b);
                if (m == a || m == b) break;
                double fm = fn(m);
                if (fm == 0) { a = b = m; break; }
                if ((fm < 0) == (fa < 0)) { a = m; fa = fm; }
                else b = m;
            }
            roots.push_back(0.5 * (a + b));
        }
        prev_v = v;
        prev_f = f;
    }
    return roots;
}

double max_re_eig_at_fixed_point(const ModelParams& p) {
    auto roots = solve_fixed_point(p);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : roots) best = std::min(best, r.eigenvalues[0].real());
    return best;
}

}  // namespace

std::pair<complexd, complexd> optical_amplitudes_at(const ModelParams& p, double q) {
    const complexd i(0.0, 1.0);
    const double k2 = ModelParams::kappa / 2.0;
    const complexd gq = i * (0.5 * p.g * q);
    const complexd a00 = i * (p.Delta - p.J) - k2 + gq;
    const complexd a11 = i * (p.Delta + p.J) - k2 + gq;
    const complexd a01 = -gq;  // symmetric off-diagonal
    const complexd rhs = -p.Lambda / std::sqrt(2.0);

    const complexd det = a00 * a11 - a01 * a01;
    if (std::abs(det) < 1e-12)
        throw SingularOpticalSystem("optical 2x2 system singular at q = " + std::to_string(q));
    const complexd c1 = rhs * (a11 - a01) / det;
    const complexd c2 = rhs * (a00 - a01) / det;
    return {c1, c2};
}

double self_consistency(const ModelParams& p, double q) {
    auto [c1, c2] = optical_amplitudes_at(p, q);
    return q - 0.5 * p.g / p.omega_m * std::norm(c1 - c2);
}

std::vector<FixedPointSolution> solve_fixed_point(const ModelParams& p) {
    // radiation pressure pushes q to [0, q_max]; 2 Lambda / kappa bounds the
    // intracavity amplitude
    const double k = ModelParams::kappa;
    double q_max = p.g * (2.0 * p.Lambda / k) * (2.0 * p.Lambda / k) / p.omega_m;
    double lo = -1e-9, hi = std::max(1.05 * q_max, 1e-6);

    const int n_scan = 4000;
    std::vector<double> qs;
    double prev_q = lo, prev_f = self_consistency(p, lo);
    for (int i = 1; i <= n_scan; ++i) {
        double q = lo + (hi - lo) * double(i) / n_scan;
        double f = self_consistency(p, q);
        if ((prev_f < 0) != (f < 0) || prev_f == 0)
            qs.push_back(prev_f == 0 ? prev_q : bisect(p, prev_q, q, prev_f));
        prev_q = q;
        prev_f = f;
    }
    if (qs.empty())
        throw NoRoot("solve_fixed_point: no sign change of F(q) in [0, " +
                     std::to_string(hi) + "]");

    std::vector<FixedPointSolution> out;
    out.reserve(qs.size());
    for (double q : qs) out.push_back(make_solution(p, q));
    return out;
}

EigSpectrum stability_eigenvalues(const ModelParams& p, const ClassicalState& fp) {
    Mat6 S = build_drift_matrix(p, fp);
    Eigen::EigenSolver<Mat6> solver(S, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("stability_eigenvalues: eigenvalue iteration failed");
    EigSpectrum ev = solver.eigenvalues();
    std::sort(ev.data(), ev.data() + 6, [](const complexd& a, const complexd& b) {
        return a.real() > b.real();
    });
    return ev;
}

double gamma_opt(const ModelParams& p, const ClassicalState& fp) {
    const double k = ModelParams::kappa;
    const double B = p.J * p.J + k * k / 4.0;
    const double w = p.omega_m, d = p.Delta;
    const double alpha2_sq = 0.5 * std::norm(fp.c1() - fp.c2());

    const double num = 2.0 * k * d *
        (3.0 * B * B - 2.0 * B * (w * w + d * d) -
         (w * w - d * d) * (w * w - d * d) - B * k * k);
    const double wp = w + d, wm = w - d;
    const double den = ((B - wp * wp) * (B - wp * wp) + k * k * wp * wp) *
                       ((B - wm * wm) * (B - wm * wm) + k * k * wm * wm);
    return w * alpha2_sq * p.g * p.g * num / den;
}

double gamma_eff(const ModelParams& p) {
    auto roots = solve_fixed_point(p);
    // in the regime of interest the root is unique; with several, prefer a
    // stable one
    const FixedPointSolution* pick = &roots.front();
    for (const auto& r : roots)
        if (r.stable) {
            pick = &r;
            break;
        }
    return p.gamma_m + gamma_opt(p, pick->state);
}

std::vector<double> find_thresholds(const ModelParams& base, SweepAxis axis,
                                    double lo, double hi) {
    auto fn = [&](double v) { return gamma_eff(with_axis(base, axis, v)); };
    return scan_roots(fn, lo, hi, 400);
}

double find_threshold(const ModelParams& base, SweepAxis axis, double lo, double hi) {
    auto roots = find_thresholds(base, axis, lo, hi);
    if (roots.empty())
        throw NoBracket("find_threshold: gamma_eff does not change sign in range");
    return roots.front();
}

std::vector<double> thresholds_eigenvalue(const ModelParams& base, SweepAxis axis,
                                          double lo, double hi) {
    auto fn = [&](double v) { return max_re_eig_at_fixed_point(with_axis(base, axis, v)); };
    return scan_roots(fn, lo, hi, 400);
}

double threshold_eigenvalue(const ModelParams& base, SweepAxis axis, double lo, double hi) {
    auto roots = thresholds_eigenvalue(base, axis, lo, hi);
    if (roots.empty())
        throw NoBracket("threshold_eigenvalue: no eigenvalue crossing in range");
    return roots.front();
}

std::vector<double> linspace(double min, double max, std::size_t count) {
    std::vector<double> v(count);
    if (count == 1) {
        v[0] = min;
        return v;
    }
    for (std::size_t i = 0; i < count; ++i)
        v[i] = min + (max - min) * double(i) / double(count - 1);
    return v;
}

PhaseDiagram sweep_phase_diagram(const ModelParams& base,
                                 const std::vector<double>& lambdas,
                                 const std::vector<double>& deltas,
                                 double cross_check_fraction,
                                 const IntegratorConfig& cfg, unsigned threads) {
    PhaseDiagram pd;
    pd.lambdas = lambdas;
    pd.deltas = deltas;
    pd.cells.resize(lambdas.size() * deltas.size());

    parallel_for(pd.cells.size(), threads, [&](std::size_t idx) {
        std::size_t i = idx / deltas.size(), j = idx % deltas.size();
        ModelParams p = base;
        p.Lambda = lambdas[i];
        p.Delta = deltas[j];
        PhaseCell& cell = pd.cells[idx];
        try {
            cell.max_re_eig = max_re_eig_at_fixed_point(p);
            cell.region = cell.max_re_eig < 0 ? Region::I : Region::II;
        } catch (const std::exception&) {
            cell.region = Region::Unknown;
        }
    });

    // boundary curve: eigenvalue crossing per column
    pd.boundary.resize(deltas.size());
    double lam_lo = lambdas.front(), lam_hi = lambdas.back();
    parallel_for(deltas.size(), threads, [&](std::size_t j) {
        ModelParams p = base;
        p.Delta = deltas[j];
        double lth = std::numeric_limits<double>::quiet_NaN();
        try {
            auto roots = thresholds_eigenvalue(p, SweepAxis::Lambda, std::max(lam_lo, 1e-6), lam_hi);
            if (!roots.empty()) lth = roots.front();
        } catch (const std::exception&) {
        }
        pd.boundary[j] = {deltas[j], lth};
    });

    if (cross_check_fraction > 0) {
        std::size_t n_check = std::size_t(cross_check_fraction * double(pd.cells.size()));
        n_check = std::min(std::max<std::size_t>(n_check, 1), pd.cells.size());
        std::mt19937_64 rng(cfg.seed);
        std::vector<std::size_t> picks(pd.cells.size());
        std::iota(picks.begin(), picks.end(), 0);
        std::shuffle(picks.begin(), picks.end(), rng);
        picks.resize(n_check);

        parallel_for(picks.size(), threads, [&](std::size_t k) {
            std::size_t idx = picks[k];
            PhaseCell& cell = pd.cells[idx];
            if (cell.region == Region::Unknown) return;
            ModelParams p = base;
            p.Lambda = lambdas[idx / deltas.size()];
            p.Delta = deltas[idx % deltas.size()];
            cell.cross_checked = true;
            try {
                auto rep = settle_and_classify(p, random_initial_state(cfg), cfg);
                bool integ_cycle = rep.kind == AttractorKind::LimitCycle;
                bool eig_cycle = cell.region == Region::II;
                if (rep.kind != AttractorKind::Ambiguous && integ_cycle != eig_cycle)
                    cell.disagrees = true;
            } catch (const std::exception&) {
                cell.disagrees = true;
            }
        });
    }
    return pd;
}

}  // namespace phlab
