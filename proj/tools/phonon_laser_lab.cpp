// Command-line front end: figure-style sweeps over the phonon-laser model
// with CSV output. Every file carries a '#'-prefixed metadata header that
// echoes the effective configuration, so runs are reproducible from their
// outputs alone.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "phlab/analysis.hpp"
#include "phlab/dynamics.hpp"
#include "phlab/entanglement.hpp"
#include "phlab/fixed_points.hpp"
#include "phlab/model.hpp"
#include "phlab/sweep.hpp"

namespace {

using namespace phlab;

constexpr const char* kVersion = "phonon-laser-lab 1.0.0";

struct CommonOpts {
    ModelParams params;
    std::string config_path;
    IntegratorConfig integ;
    std::string out_dir = ".";
    std::string tag;
    unsigned threads = 0;
    int path_id = 0;
    std::string grid_spec;
};

std::string default_tag() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", std::localtime(&t));
    return buf;
}

std::vector<double> parse_grid(const std::string& spec) {
    double lo, hi, step;
    char c1, c2;
    std::istringstream in(spec);
    if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0 ||
        hi < lo)
        throw std::invalid_argument("grid: expected MIN:MAX:STEP with STEP > 0");
    std::vector<double> g;
    for (double v = lo; v <= hi + 1e-12 * std::max(1.0, std::abs(hi)); v += step)
        g.push_back(v);
    return g;
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const CommonOpts& opt, const std::string& command) : command_(command) {
        meta("command", command);
        meta("engine", kVersion);
        meta("J", fmt(opt.params.J));
        meta("omega_m", fmt(opt.params.omega_m));
        meta("g", fmt(opt.params.g));
        meta("gamma_m", fmt(opt.params.gamma_m));
        meta("Delta", fmt(opt.params.Delta));
        meta("Lambda", fmt(opt.params.Lambda));
        meta("nbar", fmt(opt.params.nbar));
        meta("rel_tol", fmt(opt.integ.rel_tol));
        meta("abs_tol", fmt(opt.integ.abs_tol));
        meta("t_transient", fmt(opt.integ.t_transient));
        meta("t_observe", fmt(opt.integ.t_observe));
        meta("seed", std::to_string(opt.integ.seed));
        meta("init_scale", fmt(opt.integ.init_scale));
        meta("threads", std::to_string(opt.threads));
        if (!opt.config_path.empty()) meta("config", opt.config_path);
        if (opt.path_id > 0) meta("path", std::to_string(opt.path_id));
        if (!opt.grid_spec.empty()) meta("grid", opt.grid_spec);
    }

    void meta(const std::string& key, const std::string& value) {
        meta_.emplace_back(key, value);
    }

    void columns(std::vector<std::string> cols) { cols_ = std::move(cols); }

    void row(const std::vector<double>& values) {
        std::string line;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) line += ',';
            line += fmt(values[i]);
        }
        rows_.push_back(std::move(line));
    }

    std::filesystem::path write(const CommonOpts& opt, double wall_seconds,
                                const std::string& suffix = "") {
        std::filesystem::create_directories(opt.out_dir);
        std::string name = command_ + (suffix.empty() ? "" : "_" + suffix) + "_" +
                           (opt.tag.empty() ? default_tag() : opt.tag) + ".csv";
        std::filesystem::path path = std::filesystem::path(opt.out_dir) / name;
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open output file " + path.string());
        for (auto& [k, v] : meta_) out << "# " << k << " = " << v << "\n";
        out << "# wall_time_s = " << fmt(wall_seconds) << "\n";
        for (std::size_t i = 0; i < cols_.size(); ++i)
            out << (i ? "," : "") << cols_[i];
        out << "\n";
        for (auto& r : rows_) out << r << "\n";
        std::cerr << "wrote " << path.string() << " (" << rows_.size() << " rows)\n";
        return path;
    }

private:
    std::string command_;
    std::vector<std::pair<std::string, std::string>> meta_;
    std::vector<std::string> cols_;
    std::vector<std::string> rows_;
};

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

void add_common(CLI::App* cmd, CommonOpts& opt) {
    cmd->add_option("--J", opt.params.J, "cavity tunnelling rate [kappa]");
    cmd->add_option("--omega-m", opt.params.omega_m, "mechanical frequency [kappa]");
    cmd->add_option("--g", opt.params.g, "optomechanical coupling [kappa]");
    cmd->add_option("--gamma-m", opt.params.gamma_m, "mechanical damping [kappa]");
    cmd->add_option("--delta", opt.params.Delta, "laser detuning [kappa]");
    cmd->add_option("--lambda", opt.params.Lambda, "drive amplitude [kappa]");
    cmd->add_option("--nbar", opt.params.nbar, "thermal phonon occupation");
    cmd->add_option("--rel-tol", opt.integ.rel_tol, "integrator relative tolerance");
    cmd->add_option("--abs-tol", opt.integ.abs_tol, "integrator absolute tolerance");
    cmd->add_option("--t-transient", opt.integ.t_transient, "transient window [1/kappa]");
    cmd->add_option("--t-observe", opt.integ.t_observe, "observation window [1/kappa]");
    cmd->add_option("--init-scale", opt.integ.init_scale,
                    "random initial condition amplitude");
    cmd->add_option("--seed", opt.integ.seed, "RNG seed");
    cmd->add_option("--threads", opt.threads,
                    "worker threads (0 = PHONON_LAB_THREADS or hardware)");
    cmd->add_option("--out", opt.out_dir, "output directory");
    cmd->add_option("--tag", opt.tag, "output file tag (default: timestamp)");
    cmd->add_option("--config", opt.config_path, "flat key=value configuration file");
}

// Flat key=value configuration: every key names a long flag of the chosen
// subcommand. Values given on the command line win; config entries for
// flags already present are dropped before parsing.
std::vector<std::string> augment_with_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
    }
    if (path.empty()) return args;

    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file " + path);
    auto trim = [](std::string s) {
        auto a = s.find_first_not_of(" \t\r");
        auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": empty key");
        std::replace(key.begin(), key.end(), '_', '-');
        std::string flag = "--" + key;
        bool on_cli = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
            return a == flag || a.rfind(flag + "=", 0) == 0;
        });
        if (!on_cli) args.push_back(flag + "=" + value);
    }
    return args;
}

// swept axis, base parameters and boundary location for the preset cuts
struct PathContext {
    SweepAxis axis;
    ModelParams base;
    std::vector<double> thresholds;  ///< eigenvalue-crossing points inside the scan range
};

PathContext make_path_context(const CommonOpts& opt) {
    PathContext ctx;
    ctx.base = opt.params;
    if (opt.path_id > 0) {
        ctx.axis = apply_path(opt.path_id, ctx.base);
    } else {
        ctx.axis = SweepAxis::Lambda;  // custom cut: sweep Lambda at the given Delta
    }
    return ctx;
}

std::vector<double> thresholds_in(const PathContext& ctx, double lo, double hi) {
    try {
        return thresholds_eigenvalue(ctx.base, ctx.axis, std::max(lo, 1e-6), hi);
    } catch (const std::exception&) {
        return {};
    }
}

int cmd_phase_diagram(CommonOpts& opt, const std::string& lgrid, const std::string& dgrid,
                      double cross_check) {
    Timer timer;
    auto lambdas = parse_grid(lgrid);
    auto deltas = parse_grid(dgrid);
    auto pd = sweep_phase_diagram(opt.params, lambdas, deltas, cross_check, opt.integ,
                                  opt.threads);

    std::size_t unknown = 0;
    CsvWriter w(opt, "phase-diagram");
    w.meta("lambda_grid", lgrid);
    w.meta("delta_grid", dgrid);
    w.meta("cross_check_fraction", fmt(cross_check));
    w.columns({"Lambda", "Delta", "region", "max_re_eigenvalue"});
    for (std::size_t i = 0; i < lambdas.size(); ++i)
        for (std::size_t j = 0; j < deltas.size(); ++j) {
            const auto& c = pd.at(i, j);
            double region = c.region == Region::I ? 1 : c.region == Region::II ? 2 : 0;
            if (c.region == Region::Unknown) ++unknown;
            w.row({lambdas[i], deltas[j], region, c.max_re_eig});
        }
    w.write(opt, timer.seconds());

    CsvWriter wb(opt, "phase-diagram");
    wb.meta("content", "boundary curve (eigenvalue crossing)");
    wb.columns({"Delta", "Lambda_th"});
    for (auto& [d, lth] : pd.boundary) wb.row({d, lth});
    wb.write(opt, timer.seconds(), "boundary");

    std::size_t disagreements = 0;
    for (const auto& c : pd.cells)
        if (c.disagrees) ++disagreements;
    if (disagreements > 0)
        std::cerr << "warning: " << disagreements
                  << " cross-checked cells disagree with eigenvalue classification\n";

    if (double(unknown) > 0.01 * double(pd.cells.size())) {
        std::cerr << "error: " << unknown << " of " << pd.cells.size()
                  << " cells could not be classified\n";
        return 1;
    }
    return 0;
}

int cmd_trajectory(CommonOpts& opt) {
    Timer timer;
    auto settled = settle_classical(opt.params, random_initial_state(opt.integ), opt.integ);
    Trajectory traj;
    {
        IntegratorConfig cfg = opt.integ;
        cfg.t_transient = 0;
        traj = integrate_classical(opt.params, ClassicalState::from_vec(settled.state), cfg);
        traj.t0 += settled.t_end;
    }
    CsvWriter w(opt, "trajectory");
    w.columns({"t", "x1", "y1", "x2", "y2", "q", "p"});
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const Vec6& s = traj.samples[i];
        w.row({traj.t0 + double(i) * traj.dt, s[0], s[1], s[2], s[3], s[4], s[5]});
    }
    w.write(opt, timer.seconds());
    return 0;
}

int cmd_amplitude(CommonOpts& opt) {
    Timer timer;
    PathContext ctx = make_path_context(opt);
    PathSpec spec{ctx.axis, parse_grid(opt.grid_spec)};
    auto points = amplitude_sweep(ctx.base, spec, opt.integ, opt.threads);

    CsvWriter w(opt, "amplitude");
    w.columns({"param", "A", "q0", "period", "extrema_per_period", "kind", "settled"});
    for (const auto& pt : points) {
        double kind = pt.report.kind == AttractorKind::FixedPoint    ? 1
                      : pt.report.kind == AttractorKind::LimitCycle  ? 2
                                                                     : 0;
        w.row({pt.param, pt.report.amplitude, pt.report.q0, pt.report.period,
               double(pt.report.extrema_per_period), kind, double(pt.report.settled)});
    }

    // near-threshold exponent from the 10 lasing-side grid points nearest
    // each boundary crossing inside the grid
    auto ths = thresholds_in(ctx, spec.grid.front(), spec.grid.back());
    for (std::size_t k = 0; k < ths.size(); ++k) {
        std::vector<std::pair<double, double>> fitpts;
        std::vector<std::pair<double, double>> candidates;  // (distance, A)
        for (const auto& pt : points)
            // distances below ~5e-3 cannot be resolved in finite settle
            // time (growth/decay rates ~1e-5 kappa) and are left out
            if (pt.report.kind == AttractorKind::LimitCycle && pt.report.settled &&
                std::abs(pt.param - ths[k]) >= 5e-3)
                candidates.emplace_back(std::abs(pt.param - ths[k]), pt.report.amplitude);
        std::sort(candidates.begin(), candidates.end());
        for (std::size_t i = 0; i < candidates.size() && i < 10; ++i)
            fitpts.push_back(candidates[i]);
        w.meta("threshold_" + std::to_string(k), fmt(ths[k]));
        try {
            w.meta("near_threshold_exponent_" + std::to_string(k),
                   fmt(fit_scaling_exponent(fitpts)));
        } catch (const std::exception&) {
            w.meta("near_threshold_exponent_" + std::to_string(k), "nan");
        }
    }
    w.write(opt, timer.seconds());
    return 0;
}

int cmd_entanglement(CommonOpts& opt, bool dump_series) {
    Timer timer;
    PathContext ctx = make_path_context(opt);
    auto grid = parse_grid(opt.grid_spec);

    std::vector<EntanglementTrace> traces(grid.size());
    std::vector<std::string> errors(grid.size());
    parallel_for(grid.size(), opt.threads, [&](std::size_t i) {
        try {
            traces[i] = entanglement_trace(with_axis(ctx.base, ctx.axis, grid[i]), opt.integ);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    CsvWriter w(opt, "entanglement");
    w.columns({"param", "E_max", "E_min", "is_constant"});
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!errors[i].empty()) {
            w.row({grid[i], std::nan(""), std::nan(""), std::nan("")});
            continue;
        }
        w.row({grid[i], traces[i].e_max, traces[i].e_min,
               double(traces[i].is_constant)});
        if (dump_series) {
            CsvWriter ws(opt, "entanglement_series");
            ws.meta("param", fmt(grid[i]));
            ws.columns({"t", "E_N"});
            for (std::size_t j = 0; j < traces[i].en.size(); ++j)
                ws.row({traces[i].t0 + double(j) * traces[i].dt, traces[i].en[j]});
            ws.write(opt, timer.seconds(), "point" + std::to_string(i));
        }
    }
    w.write(opt, timer.seconds());
    return 0;
}

int cmd_fluctuation(CommonOpts& opt) {
    Timer timer;
    PathContext ctx = make_path_context(opt);
    auto grid = parse_grid(opt.grid_spec);

    std::vector<double> rq(grid.size(), std::nan("")), rp(grid.size(), std::nan(""));
    parallel_for(grid.size(), opt.threads, [&](std::size_t i) {
        try {
            Mat6 V = steady_covariance(with_axis(ctx.base, ctx.axis, grid[i]));
            rq[i] = fluctuation_radius_q(V);
            rp[i] = fluctuation_radius_p(V);
        } catch (const std::exception&) {
            // region II or breakdown: stays nan
        }
    });

    CsvWriter w(opt, "fluctuation");
    w.columns({"param", "radius_q", "radius_p", "excluded"});
    for (std::size_t i = 0; i < grid.size(); ++i) {
        bool excluded = std::isnan(rq[i]);
        // sliver rule at grid resolution: a radius 10x above a neighbour one
        // step further from the boundary is inside the breakdown range
        if (!excluded) {
            double neighbour = std::numeric_limits<double>::infinity();
            if (i > 0 && !std::isnan(rq[i - 1])) neighbour = std::min(neighbour, rq[i - 1]);
            if (i + 1 < grid.size() && !std::isnan(rq[i + 1]))
                neighbour = std::min(neighbour, rq[i + 1]);
            if (std::isfinite(neighbour) && rq[i] > 10.0 * neighbour) excluded = true;
        }
        w.row({grid[i], excluded ? std::nan("") : rq[i], excluded ? std::nan("") : rp[i],
               double(excluded)});
    }
    w.write(opt, timer.seconds());
    return 0;
}

int cmd_temperature(CommonOpts& opt, const std::vector<double>& nbars) {
    Timer timer;
    PathContext ctx = make_path_context(opt);
    auto grid = parse_grid(opt.grid_spec);
    auto rows = temperature_sweep(ctx.base, ctx.axis, grid, nbars, opt.integ, opt.threads);

    CsvWriter w(opt, "temperature");
    {
        std::string list;
        for (double n : nbars) list += (list.empty() ? "" : ",") + fmt(n);
        w.meta("nbar_list", list);
    }
    w.columns({"param", "nbar", "E_max", "E_min"});
    for (const auto& r : rows) w.row({r.param, r.nbar, r.e_max, r.e_min});
    w.write(opt, timer.seconds());
    return 0;
}

int cmd_boundary_constant(CommonOpts& opt, double offset, unsigned n_samples) {
    Timer timer;
    // boundary samples spanning the three preset cuts plus extra
    // Lambda-threshold points at intermediate detunings
    std::vector<BoundaryPoint> samples;
    auto add_lambda_point = [&](double delta) {
        ModelParams p = opt.params;
        p.Delta = delta;
        try {
            double lth = threshold_eigenvalue(p, SweepAxis::Lambda, 1e-3, 14.0);
            p.Lambda = lth;
            samples.push_back({p, SweepAxis::Lambda, -1.0});
        } catch (const std::exception&) {
        }
    };

    add_lambda_point(opt.params.J);  // path 1
    add_lambda_point(9.5);           // path 3
    {
        ModelParams p2 = opt.params;
        SweepAxis ax2 = apply_path(2, p2);
        auto crossings = thresholds_in({ax2, p2, {}}, 8.0, 12.0);
        for (std::size_t k = 0; k < crossings.size() && k < 2; ++k) {
            ModelParams p = with_axis(p2, ax2, crossings[k]);
            // region I lies below the lower crossing and above the upper one
            samples.push_back({p, ax2, k == 0 ? -1.0 : +1.0});
        }
    }
    std::size_t have = samples.size();
    if (n_samples > have) {
        auto extra = linspace(9.45, 10.45, n_samples - have);
        for (double d : extra) add_lambda_point(d);
    }

    auto res = boundary_constant_scan(samples, offset, opt.threads);

    CsvWriter w(opt, "boundary-constant");
    w.meta("offset", fmt(offset));
    w.meta("n_samples", std::to_string(samples.size()));
    w.meta("n_admitted", std::to_string(res.n_admitted));
    w.meta("mean_EN", fmt(res.mean));
    w.meta("rel_spread", fmt(res.rel_spread));
    w.columns({"Delta", "Lambda", "E_N", "admitted"});
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& bp = samples[i];
        double at = bp.axis == SweepAxis::Lambda ? bp.at_boundary.Lambda
                                                 : bp.at_boundary.Delta;
        ModelParams p = with_axis(bp.at_boundary, bp.axis,
                                  at + bp.region1_direction * offset);
        w.row({p.Delta, p.Lambda, res.en[i], double(res.admitted[i])});
    }
    w.write(opt, timer.seconds());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Classical dynamics and Gaussian entanglement of the two-cavity "
                 "optomechanical phonon laser"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    CommonOpts opt;

    auto* pd = app.add_subcommand("phase-diagram",
                                  "classify the (Lambda, Delta) grid and locate the "
                                  "lasing boundary");
    std::string lgrid = "0:12:0.1", dgrid = "8:12:0.05";
    double cross_check = 0.0;
    add_common(pd, opt);
    pd->add_option("--lambda-grid", lgrid, "Lambda grid MIN:MAX:STEP");
    pd->add_option("--delta-grid", dgrid, "Delta grid MIN:MAX:STEP");
    pd->add_option("--cross-check", cross_check,
                   "fraction of cells to verify by time integration");

    auto* tr = app.add_subcommand("trajectory",
                                  "long-time classical trajectory at one (Lambda, Delta)");
    add_common(tr, opt);

    auto* am = app.add_subcommand("amplitude", "mechanical amplitude along a path");
    add_common(am, opt);
    am->add_option("--path", opt.path_id, "preset cut: 1, 2 or 3")
        ->check(CLI::Range(1, 3));
    am->add_option("--grid", opt.grid_spec, "swept-parameter grid MIN:MAX:STEP")
        ->required();

    auto* en = app.add_subcommand("entanglement",
                                  "steady-state E_N extrema along a path");
    bool dump_series = false;
    add_common(en, opt);
    en->add_option("--path", opt.path_id, "preset cut: 1, 2 or 3")->check(CLI::Range(1, 3));
    en->add_option("--grid", opt.grid_spec, "swept-parameter grid MIN:MAX:STEP")
        ->required();
    en->add_flag("--dump-series", dump_series, "also write per-point E_N(t) series");

    auto* fl = app.add_subcommand("fluctuation",
                                  "mechanical fluctuation radius along a path (region I)");
    add_common(fl, opt);
    fl->add_option("--path", opt.path_id, "preset cut: 1, 2 or 3")->check(CLI::Range(1, 3));
    fl->add_option("--grid", opt.grid_spec, "swept-parameter grid MIN:MAX:STEP")
        ->required();

    auto* te = app.add_subcommand("temperature",
                                  "entanglement extrema vs thermal occupation");
    std::vector<double> nbars;
    add_common(te, opt);
    te->add_option("--path", opt.path_id, "preset cut: 1, 2 or 3")->check(CLI::Range(1, 3));
    te->add_option("--grid", opt.grid_spec, "swept-parameter grid MIN:MAX:STEP")
        ->required();
    te->add_option("--nbar-list", nbars, "thermal occupations to sweep")
        ->required()
        ->delimiter(',');

    auto* bc = app.add_subcommand("boundary-constant",
                                  "E_N at near-boundary region-I points");
    double offset = 0.01;
    unsigned n_samples = 8;
    add_common(bc, opt);
    bc->add_option("--offset", offset, "distance from the boundary [kappa units]");
    bc->add_option("--samples", n_samples, "number of boundary samples (>= 4)");

    std::vector<std::string> args;
    try {
        args = augment_with_config(argc, argv);
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    }
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        opt.params.validate();
        if (opt.params.quality_factor() < 100.0)
            std::cerr << "warning: mechanical quality factor Q = "
                      << opt.params.quality_factor()
                      << " < 100; the Markovian Brownian-noise limit may not hold\n";

        if (pd->parsed()) return cmd_phase_diagram(opt, lgrid, dgrid, cross_check);
        if (tr->parsed()) return cmd_trajectory(opt);
        if (am->parsed()) return cmd_amplitude(opt);
        if (en->parsed()) return cmd_entanglement(opt, dump_series);
        if (fl->parsed()) return cmd_fluctuation(opt);
        if (te->parsed()) return cmd_temperature(opt, nbars);
        if (bc->parsed()) return cmd_boundary_constant(opt, offset, n_samples);
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
