#include "levystop/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "levystop/errors.hpp"
#include "levystop/hitting_transforms.hpp"
#include "levystop/io.hpp"
#include "levystop/mc_simulator.hpp"
#include "levystop/roots.hpp"
#include "levystop/scale_function.hpp"
#include "levystop/threshold.hpp"

namespace levystop {

namespace {

struct Grid {
    double a = 0.0, b = 0.0;
    std::size_t n = 0;
};

double parse_number(const std::string& s, const std::string& what) {
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw InputError(what + ": '" + s + "' is not a number");
    return x;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    parts.push_back(cur);
    return parts;
}

Grid parse_grid(const std::string& s) {
    auto parts = split(s, ':');
    if (parts.size() != 3) throw InputError("--grid expects \"a:b:n\", got '" + s + "'");
    Grid g{parse_number(parts[0], "--grid start"), parse_number(parts[1], "--grid end"), 0};
    double n = parse_number(parts[2], "--grid count");
    if (!(n >= 1.0) || n != std::floor(n) || n > 1e7) throw InputError("--grid count must be a positive integer");
    g.n = static_cast<std::size_t>(n);
    if (!std::isfinite(g.a) || !std::isfinite(g.b)) throw InputError("--grid ends must be finite");
    if (g.n > 1 && !(g.b > g.a)) throw InputError("--grid needs a < b");
    return g;
}

std::vector<double> grid_points(const Grid& g, bool geometric) {
    std::vector<double> xs(g.n);
    if (geometric && !(g.a > 0.0)) throw InputError("geometric grid needs a > 0");
    for (std::size_t i = 0; i < g.n; ++i) {
        double t = g.n == 1 ? 0.0 : double(i) / double(g.n - 1);
        xs[i] = geometric ? g.a * std::pow(g.b / g.a, t) : g.a + (g.b - g.a) * t;
    }
    if (g.n > 1) xs.back() = g.b;
    return xs;
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
    std::vector<double> xs;
    for (const auto& p : split(s, ',')) xs.push_back(parse_number(p, what));
    return xs;
}

/// Writes to --out when given, else to the command stream.
void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("cannot write '" + path + "'");
    f << text;
    if (!f) throw InputError("write to '" + path + "' failed");
}

Json estimate_json(const McEstimate& e) {
    Json j;
    j["mean"] = e.mean;
    j["std_error"] = e.std_error;
    j["n_paths"] = e.n_paths;
    j["truncated_fraction"] = e.truncated_fraction;
    j["seed"] = e.seed;
    return j;
}

std::vector<CsvWriter::Cell> estimate_cells(const McEstimate& e) {
    return {e.mean, e.std_error, static_cast<long long>(e.n_paths), e.truncated_fraction};
}

void add_cells(std::vector<CsvWriter::Cell>& row, const McEstimate& e) {
    for (auto& c : estimate_cells(e)) row.push_back(std::move(c));
}

struct Options {
    std::string spec_path, out_path, grid, threshold_path, mode = "policy", eps;
    std::optional<double> b, q;
    std::uint64_t seed = 1;
    std::size_t paths = 100000;
    double dt = 1e-3;
    double tail_tol = 1e-8;
    bool strict = false, geometric = false, no_bridge = false, convexity_warn = false;
};

SimConfig sim_config(const Options& o) {
    SimConfig cfg;
    cfg.n_paths = o.paths;
    cfg.dt = o.dt;
    cfg.seed = o.seed;
    cfg.tail_tol = o.tail_tol;
    cfg.bridge_correction = !o.no_bridge;
    return cfg;
}

ThresholdOptions threshold_options(const Options& o) {
    ThresholdOptions t;
    if (o.convexity_warn) t.on_convexity_failure = ThresholdOptions::OnFailure::Warn;
    return t;
}

ProblemSpec load_spec(const Options& o) { return ProblemSpec(params_from_json(load_json_file(o.spec_path))); }

/// Escalates unresolved scale-function warnings under --strict; otherwise reports them.
void check_quality(const ScaleFunction* sf, const Options& o, std::ostream& err) {
    if (!sf) return;
    if (sf->unresolved_warnings() > 0) {
        std::string msg = "scale function: " + std::to_string(sf->unresolved_warnings()) +
                          " inversions missed the accuracy target";
        if (o.strict) throw QualityError(msg);
        err << "warning: " << msg << '\n';
    }
    if (o.strict && sf->talbot_warnings() > 0)
        err << "note: " << sf->talbot_warnings() << " Talbot evaluations fell back to Euler summation\n";
}

void check_convexity(const ThresholdResult& th, std::ostream& err) {
    if (th.convexity && !th.convexity->ok()) err << "warning: strict-convexity check failed for g(., b)\n";
}

int cmd_inspect(const Options& o, std::ostream& out, std::ostream& err) {
    ProblemParams p = params_from_json(load_json_file(o.spec_path));
    AssumptionReport rep = check_assumptions(p);
    Json j;
    j["family"] = std::string(p.model.name());
    j["model"] = model_to_json(p.model);
    j["r"] = p.r;
    j["psi1"] = rep.psi1;
    j["phi_r"] = nullptr;
    if (p.model.spectrally_negative()) j["phi_r"] = phi(p.model, p.r);
    j["roots"] = nullptr;
    j["lam_bar"] = nullptr;
    Family fam = p.model.family();
    if (fam == Family::Kou || fam == Family::ExpJD || fam == Family::SpectNegKou) {
        KouRoots kr = kou_roots(p.model, p.r);
        Json arr = Json::array();
        for (const auto& r : {kr.psi0, kr.psi1, kr.psi2, kr.psi3}) arr.push_back(r ? Json(*r) : Json(nullptr));
        j["roots"] = arr;
    }
    if (fam == Family::ExpJD) j["lam_bar"] = emery_root(p.model, p.r).lam_bar;
    Json a;
    a["finite_mean"] = rep.finite_mean;
    a["discounting"] = rep.discounting;
    a["class_d"] = rep.class_d;
    a["class_d_basis"] = rep.class_d_basis;
    a["ok"] = rep.ok();
    a["failures"] = rep.failures();
    j["assumptions"] = a;
    emit(j.dump(2) + "\n", o.out_path, out);
    if (!rep.ok()) {
        for (const auto& f : rep.failures()) err << "assumption violated: " << f << '\n';
        return 2;
    }
    return 0;
}

int cmd_threshold(const Options& o, std::ostream& out, std::ostream& err) {
    ProblemSpec spec = load_spec(o);
    HittingTransforms t(spec.model(), spec.r());
    ThresholdResult th = threshold(spec, t, threshold_options(o));
    check_quality(t.scale().get(), o, err);
    check_convexity(th, err);
    emit(threshold_to_json(th).dump(2) + "\n", o.out_path, out);
    return 0;
}

int cmd_value(const Options& o, std::ostream& out, std::ostream& err) {
    if (o.grid.empty()) throw InputError("value needs --grid \"a:b:n\" over v");
    ProblemSpec spec = load_spec(o);
    auto vs = grid_points(parse_grid(o.grid), o.geometric);
    for (double v : vs)
        if (!(v > 0.0)) throw InputError("value grid must be positive");
    auto t = std::make_shared<const HittingTransforms>(spec.model(), spec.r());
    ThresholdResult th = threshold(spec, *t, threshold_options(o));
    ValueFunction vf(spec, t, th);
    std::ostringstream ss;
    CsvWriter csv(ss, {"v", "w"});
    for (double v : vs) csv.row({v, vf.w(v)});
    check_quality(t->scale().get(), o, err);
    check_convexity(th, err);
    emit(ss.str(), o.out_path, out);
    return 0;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream&) {
    if (o.grid.empty()) throw InputError("sweep needs --grid \"a:b:n\" over b");
    ProblemSpec spec = load_spec(o);
    auto bs = grid_points(parse_grid(o.grid), o.geometric);
    SweepResult res = sweep(spec, bs, sim_config(o));
    std::ostringstream ss;
    CsvWriter csv(ss, {"b", "mean", "std_error", "n_paths", "truncated_fraction", "direct_mean", "direct_std_error",
                       "paired_se", "argmax", "flat"});
    for (std::size_t j = 0; j < bs.size(); ++j) {
        const auto& p = res.points[j];
        std::vector<CsvWriter::Cell> row{p.b};
        add_cells(row, p.reduced);
        row.push_back(p.direct.mean);
        row.push_back(p.direct.std_error);
        row.push_back(res.paired_se[j]);
        row.push_back(static_cast<long long>(j == res.argmax));
        row.push_back(static_cast<long long>(res.flat[j]));
        csv.row(row);
    }
    emit(ss.str(), o.out_path, out);
    return 0;
}

int cmd_scale_fn(const Options& o, std::ostream& out, std::ostream& err) {
    if (!o.q) throw InputError("scale-fn needs --q");
    if (o.grid.empty()) throw InputError("scale-fn needs --grid \"a:b:n\" over x");
    LevyModel model = model_from_document(load_json_file(o.spec_path));
    auto xs = grid_points(parse_grid(o.grid), o.geometric);
    ScaleFunction sf(model, *o.q);
    std::ostringstream ss;
    CsvWriter csv(ss, {"x", "W", "Wprime", "Z"});
    for (double x : xs) csv.row({x, sf.W(x), sf.W_prime(x), sf.Z(x)});
    check_quality(&sf, o, err);
    emit(ss.str(), o.out_path, out);
    return 0;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
    ProblemSpec spec = load_spec(o);
    SimConfig cfg = sim_config(o);
    std::ostringstream ss;
    if (o.mode == "policy") {
        double b;
        if (o.b && !o.threshold_path.empty()) throw InputError("give either --b or --threshold, not both");
        if (o.b)
            b = *o.b;
        else if (!o.threshold_path.empty())
            b = b_c_from_json(load_json_file(o.threshold_path));
        else
            throw InputError("simulate --mode policy needs --b or --threshold");
        PolicyEstimate pe = policy_value(spec, b, cfg);
        Json j;
        j["b"] = pe.b;
        j["v"] = pe.v;
        j["direct"] = estimate_json(pe.direct);
        j["reduced"] = estimate_json(pe.reduced);
        j["diff_se"] = pe.diff_se;
        j["reconciled"] = pe.reconciled;
        ss << j.dump(2) << '\n';
        if (!pe.reconciled) err << "warning: direct and reduced estimators disagree beyond 4 paired SE\n";
    } else if (o.mode == "hit") {
        if (o.grid.empty()) throw InputError("simulate --mode hit needs --grid over levels x < 0");
        auto xs = grid_points(parse_grid(o.grid), false);
        auto hits = simulate_hit(spec.model(), spec.r(), xs, cfg);
        CsvWriter csv(ss, {"x", "functional", "mean", "std_error", "n_paths", "truncated_fraction"});
        for (const auto& h : hits) {
            std::vector<CsvWriter::Cell> rl{h.level, std::string("L")};
            add_cells(rl, h.L);
            csv.row(rl);
            std::vector<CsvWriter::Cell> rg{h.level, std::string("G")};
            add_cells(rg, h.G);
            csv.row(rg);
        }
    } else if (o.mode == "epsilon") {
        if (o.eps.empty()) throw InputError("simulate --mode epsilon needs --eps \"e1,e2,...\" (descending)");
        auto eps = parse_list(o.eps, "--eps");
        ValueFunction vf = value_function(spec, threshold_options(o));
        cfg.tail_tol = 0.0;
        EpsilonRun run = epsilon_stop_paths(vf, eps, cfg);
        CsvWriter csv(ss, {"eps", "boundary", "mean", "std_error", "n_paths", "truncated_fraction", "diff_se"});
        for (std::size_t i = 0; i < eps.size(); ++i) {
            std::vector<CsvWriter::Cell> row{eps[i], run.boundary[i].unbounded ? std::string("inf")
                                                                                : format_double(run.boundary[i].level)};
            add_cells(row, run.tau[i]);
            row.push_back(run.diff_se[i]);
            csv.row(row);
        }
        std::vector<CsvWriter::Cell> row{0.0, format_double(vf.threshold().b_c)};
        add_cells(row, run.tau_bc);
        row.push_back(0.0);
        csv.row(row);
        if (run.monotonicity_violations > 0)
            err << "warning: " << run.monotonicity_violations << " paths with tau_eps decreasing in eps\n";
    } else if (o.mode == "class-d") {
        if (o.grid.empty()) throw InputError("simulate --mode class-d needs --grid over n >= 1");
        auto ns = grid_points(parse_grid(o.grid), o.geometric);
        auto est = class_d_diagnostic(spec.model(), spec.r(), ns, cfg);
        CsvWriter csv(ss, {"n", "mean", "std_error", "n_paths", "truncated_fraction"});
        for (const auto& e : est) {
            std::vector<CsvWriter::Cell> row{e.n};
            add_cells(row, e.value);
            csv.row(row);
        }
    } else {
        throw InputError("unknown --mode '" + o.mode + "' (policy, hit, epsilon, class-d)");
    }
    emit(ss.str(), o.out_path, out);
    return 0;
}

void add_common(CLI::App* sc, Options& o) {
    sc->add_option("--spec", o.spec_path, "problem spec JSON")->required();
    sc->add_option("--out", o.out_path, "output file (default stdout)");
    sc->add_flag("--strict", o.strict, "exit 3 on scale-function accuracy warnings");
}

void add_sim(CLI::App* sc, Options& o) {
    sc->add_option("--seed", o.seed, "RNG seed");
    sc->add_option("--paths", o.paths, "number of paths")->check(CLI::PositiveNumber);
    sc->add_option("--dt", o.dt, "Brownian time step")->check(CLI::PositiveNumber);
    sc->add_option("--tail-tol", o.tail_tol, "stop paths whose remaining contribution is below this (0: off)");
    sc->add_flag("--no-bridge", o.no_bridge, "disable the Brownian-bridge crossing correction");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Optimal liquidation thresholds for Levy-driven values"};
    app.require_subcommand(1);
    Options o;
    std::function<int()> action;

    auto* inspect = app.add_subcommand("inspect", "Laplace exponent, roots and assumption report");
    add_common(inspect, o);
    inspect->callback([&] { action = [&] { return cmd_inspect(o, out, err); }; });

    auto* thr = app.add_subcommand("threshold", "Optimal threshold B_c as JSON");
    add_common(thr, o);
    thr->add_flag("--convexity-warn", o.convexity_warn, "report a failed convexity check instead of aborting");
    thr->callback([&] { action = [&] { return cmd_threshold(o, out, err); }; });

    auto* val = app.add_subcommand("value", "Value function w(v) on a grid as CSV");
    add_common(val, o);
    val->add_option("--grid", o.grid, "v grid \"a:b:n\"")->required();
    val->add_flag("--geometric", o.geometric, "geometric spacing");
    val->add_flag("--convexity-warn", o.convexity_warn, "report a failed convexity check instead of aborting");
    val->callback([&] { action = [&] { return cmd_value(o, out, err); }; });

    auto* sw = app.add_subcommand("sweep", "Monte Carlo policy values over a b grid as CSV");
    add_common(sw, o);
    add_sim(sw, o);
    sw->add_option("--grid", o.grid, "b grid \"a:b:n\"")->required();
    sw->add_flag("--geometric", o.geometric, "geometric spacing");
    sw->callback([&] { action = [&] { return cmd_sweep(o, out, err); }; });

    auto* sf = app.add_subcommand("scale-fn", "Scale functions W, W' and Z on a grid as CSV");
    add_common(sf, o);
    sf->add_option("--q", o.q, "discount rate q > 0")->required();
    sf->add_option("--grid", o.grid, "x grid \"a:b:n\"")->required();
    sf->callback([&] { action = [&] { return cmd_scale_fn(o, out, err); }; });

    auto* sim = app.add_subcommand("simulate", "Monte Carlo checks (policy JSON; hit/epsilon/class-d CSV)");
    add_common(sim, o);
    add_sim(sim, o);
    sim->add_option("--mode", o.mode, "policy, hit, epsilon or class-d");
    sim->add_option("--b", o.b, "threshold for --mode policy");
    sim->add_option("--threshold", o.threshold_path, "threshold JSON whose b_c is used");
    sim->add_option("--grid", o.grid, "levels x (hit) or n (class-d) as \"a:b:n\"");
    sim->add_flag("--geometric", o.geometric, "geometric spacing");
    sim->add_option("--eps", o.eps, "descending eps list for --mode epsilon");
    sim->add_flag("--convexity-warn", o.convexity_warn, "report a failed convexity check instead of aborting");
    sim->callback([&] { action = [&] { return cmd_simulate(o, out, err); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 1;
    }

    try {
        return action();
    } catch (const AssumptionViolation& e) {
        err << "assumption violation: " << e.what() << '\n';
        return 2;
    } catch (const QualityError& e) {
        err << "numerical quality failure: " << e.what() << '\n';
        return 3;
    } catch (const BracketFailure& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace levystop
