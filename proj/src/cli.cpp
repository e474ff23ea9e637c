#include "selfsim/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "selfsim/closed.hpp"
#include "selfsim/flow.hpp"
#include "selfsim/func.hpp"
#include "selfsim/parallel.hpp"
#include "selfsim/shoot.hpp"
#include "selfsim/spectrum.hpp"
#include "selfsim/vary.hpp"
#include "selfsim/verify.hpp"

namespace selfsim {

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

namespace {

using json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Opts {
    std::string config, out_dir;
    int n = 3;
    double p = 7.0;
    double m = 0.0;
    bool supercritical = false;
    unsigned seed = 0;
    // profile selection
    std::string profile = "kappa";
    double a_lo = NAN, a_hi = NAN;
    double a_min = 0.75, a_max = 8.0;
    int samples = 146;
    int index = 0;
    // entropy search
    double x0_max = 10.0, logt_min = -6.0, logt_max = 6.0, refine_tol = 1e-7;
    int nx = 21, nt = 25;
    // spectrum
    int ell = 0, k = 4, resolution = 1000;
    double r_max = 20.0;
    // flow
    std::string init = "const:1.0";
    double tau_max = 20.0;
    int cells = 800;
    std::string boundary = "auto";
    double dt_max = 0.01, dt_frac = 0.02, cap_factor = 1000.0;
    // perturbation experiment
    std::vector<double> s_values{0.01, -0.01, 0.05, -0.05};
    std::string scale = "profile-sup";
    bool no_flow = false;
    // gap scan
    int n_lo = 4, n_hi = 10, p_count = 40;
    // identities
    double tol = 1e-5;
    // acceptance suite
    double tolerance_scale = 1.0;
    std::vector<int> only;
    bool json_stdout = false;
};

// Result of one subcommand: numbers, the equation each instantiates, optional CSV and verdict.
struct Output {
    json results = json::object();
    json equations = json::object();
    std::string csv;
    int verdict = -1;  // -1: no check, 0: failed, 1: passed
    std::vector<std::string> lines;

    void put(const std::string& key, json value, const std::string& eq) {
        results[key] = std::move(value);
        equations[key] = eq;
    }
};

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---- option registration ----

void add_common(CLI::App* s, Opts& o) {
    s->add_option("--config", o.config, "JSON config file (flags override its values)");
    s->add_option("--out", o.out_dir, "directory for <command>.json and <command>.csv");
    s->add_option("--n", o.n, "space dimension")->check(CLI::Range(1, 64));
    s->add_option("--p", o.p, "nonlinearity exponent (> 1)");
    s->add_option("--m", o.m, "optional sup bound (> kappa)");
    s->add_flag("--supercritical", o.supercritical, "reject p at or below the Sobolev exponent");
    s->add_option("--seed", o.seed, "seed for randomized batches");
}

void add_profile_search(CLI::App* s, Opts& o);

void add_profile(CLI::App* s, Opts& o) {
    s->add_option("--profile", o.profile, "kappa, -kappa, zero, singular or shoot")
        ->check(CLI::IsMember({"kappa", "-kappa", "zero", "singular", "shoot"}));
    add_profile_search(s, o);
}

void add_search(CLI::App* s, Opts& o) {
    s->add_option("--x0-max", o.x0_max, "largest |x0| searched")->check(CLI::PositiveNumber);
    s->add_option("--logt-min", o.logt_min, "smallest log(-t0)");
    s->add_option("--logt-max", o.logt_max, "largest log(-t0)");
    s->add_option("--nx", o.nx, "coarse grid size in |x0|")->check(CLI::Range(2, 100000));
    s->add_option("--nt", o.nt, "coarse grid size in log(-t0)")->check(CLI::Range(2, 100000));
    s->add_option("--refine-tol", o.refine_tol, "golden-section tolerance")->check(CLI::PositiveNumber);
}

void add_profile_search(CLI::App* s, Opts& o) {
    s->add_option("--a-lo", o.a_lo, "lower end of a shooting bracket");
    s->add_option("--a-hi", o.a_hi, "upper end of a shooting bracket");
    s->add_option("--a-min", o.a_min, "scan start (w(0))");
    s->add_option("--a-max", o.a_max, "scan end (w(0))");
    s->add_option("--samples", o.samples, "scan samples")->check(CLI::Range(2, 100000));
    s->add_option("--index", o.index, "which scanned profile to use")->check(CLI::NonNegativeNumber);
}

// ---- shared setup ----

Parameters params_of(const Opts& o) {
    try {
        std::optional<double> m;
        if (o.m != 0.0) m = o.m;
        return make_params(o.n, o.p, m, o.supercritical);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

RadialProfile shooting_profile(const Opts& o, const Parameters& par) {
    if (std::isfinite(o.a_lo) || std::isfinite(o.a_hi)) {
        if (!(std::isfinite(o.a_lo) && std::isfinite(o.a_hi) && o.a_lo < o.a_hi))
            throw UsageError("--a-lo and --a-hi must both be given with a-lo < a-hi");
        return shoot(par, o.a_lo, o.a_hi);
    }
    if (!(o.a_min < o.a_max)) throw UsageError("--a-min must be below --a-max");
    auto S = scan_profiles(par, o.a_min, o.a_max, o.samples);
    if (S.profiles.empty()) throw Error("the scan found no decaying profile in the given range");
    if (o.index >= int(S.profiles.size()))
        throw Error("profile index " + std::to_string(o.index) + " out of range (" +
                    std::to_string(S.profiles.size()) + " found)");
    return S.profiles[std::size_t(o.index)];
}

RadialProfile make_profile(const Opts& o, const Parameters& par) {
    if (o.profile == "kappa") return constant_profile(par, 1);
    if (o.profile == "-kappa") return constant_profile(par, -1);
    if (o.profile == "zero") return constant_profile(par, 0);
    if (o.profile == "singular") {
        if (!(par.beta > 0)) throw UsageError("the singular profile needs n - 2 - 2/(p-1) > 0");
        return singular_profile(par);
    }
    return shooting_profile(o, par);
}

void require_bounded(const Opts& o) {
    if (o.profile == "singular") throw UsageError("this command needs a bounded profile");
}

json profile_json(const RadialProfile& pr) {
    json j;
    j["kind"] = to_string(pr.kind);
    if (pr.shoot_a) j["a"] = *pr.shoot_a;
    if (pr.decay_coeff) j["C"] = *pr.decay_coeff;
    return j;
}

EntropyConfig entropy_config(const Opts& o) {
    if (!(o.logt_max > o.logt_min)) throw UsageError("--logt-max must exceed --logt-min");
    EntropyConfig c;
    c.x0_max = o.x0_max;
    c.logt_min = o.logt_min;
    c.logt_max = o.logt_max;
    c.nx = o.nx;
    c.nt = o.nt;
    c.refine_tol = o.refine_tol;
    return c;
}

std::string csv_num(double v) {
    if (!std::isfinite(v)) return "";
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

// ---- subcommands ----

void cmd_energy(const Opts& o, Output& out) {
    auto par = params_of(o);
    auto pr = make_profile(o, par);
    auto R = energy(pr);
    out.put("profile", profile_json(pr), "profile-ode");
    out.put("E", num(R.energy), "weighted-energy");
    out.put("gradient", num(R.gradient), "weighted-energy");
    out.put("mass", num(R.mass), "weighted-energy");
    out.put("potential", num(R.potential), "weighted-energy");
    out.put("E_kappa", num(kappa_energy(par)), "constant-solution-energy");
    out.put("E_minus_E_kappa", num(R.energy - kappa_energy(par)), "weighted-energy");
}

void cmd_fscan(const Opts& o, Output& out) {
    auto par = params_of(o);
    auto pr = make_profile(o, par);
    if (!pr.bounded()) throw UsageError("the offset F-functional needs a bounded profile");
    auto c = entropy_config(o);
    auto rules = default_rules(par.n);
    std::vector<double> xs, ts, F(std::size_t(c.nx) * c.nt);
    for (int i = 0; i < c.nx; ++i) xs.push_back(c.x0_max * i / (c.nx - 1));
    for (int j = 0; j < c.nt; ++j) ts.push_back(-std::exp(c.logt_min + (c.logt_max - c.logt_min) * j / (c.nt - 1)));
    parallel_for(F.size(), [&](std::size_t q) { F[q] = f_functional(pr, xs[q / c.nt], ts[q % c.nt], rules); });
    std::size_t best = std::size_t(std::max_element(F.begin(), F.end()) - F.begin());
    std::ostringstream csv;
    csv << "x0,t0,F\r\n";
    for (std::size_t q = 0; q < F.size(); ++q)
        csv << csv_num(xs[q / c.nt]) << ',' << csv_num(ts[q % c.nt]) << ',' << csv_num(F[q]) << "\r\n";
    out.csv = csv.str();
    out.put("profile", profile_json(pr), "profile-ode");
    out.put("points", F.size(), "recentered-F-functional");
    out.put("F_max", num(F[best]), "recentered-F-functional");
    out.put("argmax", {{"x0", xs[best / c.nt]}, {"t0", ts[best % c.nt]}}, "recentered-F-functional");
    out.put("F_canonical", num(f_functional(pr, 0.0, -1.0, rules)), "recentered-F-functional");
}

void cmd_entropy(const Opts& o, Output& out) {
    auto par = params_of(o);
    auto pr = make_profile(o, par);
    if (!pr.bounded()) throw UsageError("the entropy search needs a bounded profile");
    auto E = entropy(pr, entropy_config(o));
    double e = energy(pr).energy;
    out.put("profile", profile_json(pr), "profile-ode");
    out.put("lambda", num(E.lambda), "entropy-sup-F");
    out.put("argmax", {{"x0", E.x0}, {"t0", E.t0}}, "entropy-sup-F");
    out.put("E", num(e), "weighted-energy");
    out.put("lambda_minus_E", num(E.lambda - e), "entropy-sup-F");
    out.put("delta_ring", num(E.delta_ring), "entropy-gap-estimate");
    out.put("delta_t", num(E.delta_t), "entropy-gap-estimate");
    out.put("delta_x", num(E.delta_x), "entropy-gap-estimate");
    out.put("unconverged", E.unconverged_sup, "entropy-sup-F");
    std::ostringstream csv;
    csv << "x0,t0,F\r\n";
    for (std::size_t q = 0; q < E.grid_F.size(); ++q)
        csv << csv_num(E.grid_x0[q / E.grid_logt.size()]) << ','
            << csv_num(-std::exp(E.grid_logt[q % E.grid_logt.size()])) << ',' << csv_num(E.grid_F[q]) << "\r\n";
    out.csv = csv.str();
}

void cmd_shoot(const Opts& o, Output& out) {
    auto par = params_of(o);
    std::vector<RadialProfile> profiles;
    json brackets = json::array(), rejected = json::array(), rows = json::array();
    std::vector<ShootDiagnostics> diags;
    if (std::isfinite(o.a_lo) || std::isfinite(o.a_hi)) {
        if (!(std::isfinite(o.a_lo) && std::isfinite(o.a_hi) && o.a_lo < o.a_hi))
            throw UsageError("--a-lo and --a-hi must both be given with a-lo < a-hi");
        ShootDiagnostics d;
        profiles.push_back(shoot(par, o.a_lo, o.a_hi, 1e-13, {}, &d));
        diags.push_back(d);
    } else {
        if (!(o.a_min < o.a_max)) throw UsageError("--a-min must be below --a-max");
        auto S = scan_profiles(par, o.a_min, o.a_max, o.samples);
        for (const auto& b : S.brackets)
            brackets.push_back({{"a_lo", b.a_lo}, {"a_hi", b.a_hi}, {"lo", to_string(b.c_lo)}, {"hi", to_string(b.c_hi)}});
        for (const auto& r : S.rejected) rejected.push_back(r);
        profiles = S.profiles;
        diags = S.diagnostics;
    }
    const double Ek = kappa_energy(par);
    std::ostringstream csv;
    csv << "profile,r,w,dw\r\n";
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        const auto& pr = profiles[i];
        const auto& d = diags[i];
        double e = energy(pr).energy;
        rows.push_back({{"a", num(d.a_match)},
                        {"a_bisect", num(d.a_bisect)},
                        {"C", num(d.C)},
                        {"residual", num(d.residual)},
                        {"match_mismatch", num(d.match_mismatch)},
                        {"E", num(e)},
                        {"E_minus_E_kappa", num(e - Ek)}});
        for (std::size_t j = 0; j < pr.r.size(); j += 10)
            csv << i << ',' << csv_num(pr.r[j]) << ',' << csv_num(pr.w[j]) << ',' << csv_num(pr.dw[j]) << "\r\n";
    }
    out.csv = csv.str();
    out.put("brackets", brackets, "profile-ode");
    out.put("rejected", rejected, "profile-ode");
    out.put("profiles", rows, "profile-ode");
    out.put("E_kappa", num(Ek), "constant-solution-energy");
}

void cmd_spectrum(const Opts& o, Output& out) {
    auto par = params_of(o);
    require_bounded(o);
    auto pr = make_profile(o, par);
    if (o.ell < 0) throw UsageError("--ell must be non-negative");
    if (o.k < 1 || o.k > o.resolution / 4) throw UsageError("--k must lie in [1, resolution/4]");
    if (o.resolution < 16) throw UsageError("--resolution must be at least 16");
    auto R = sector_spectrum(pr, o.ell, o.k, o.resolution, o.r_max);
    json ev = json::array(), cert = json::array();
    for (double v : R.eigenvalues) ev.push_back(num(v));
    for (double v : R.certificates) cert.push_back(num(v));
    out.put("profile", profile_json(pr), "profile-ode");
    out.put("ell", o.ell, "linearized-operator-sector");
    out.put("eigenvalues", ev, "linearized-operator-sector");
    out.put("certificates", cert, "linearized-operator-sector");
    out.put("below_minus_one", R.below_minus_one, "linearized-operator-sector");
    out.put("below_one", R.below_one, "linearized-operator-sector");
    std::ostringstream csv;
    csv << "r";
    for (int j = 0; j < o.k; ++j) csv << ",f" << j + 1;
    csv << "\r\n";
    for (std::size_t i = 0; i < R.r.size(); ++i) {
        csv << csv_num(R.r[i]);
        for (int j = 0; j < o.k; ++j) csv << ',' << csv_num(R.functions[std::size_t(j)][i]);
        csv << "\r\n";
    }
    out.csv = csv.str();
}

void cmd_stability(const Opts& o, Output& out) {
    auto par = params_of(o);
    require_bounded(o);
    auto pr = make_profile(o, par);
    auto R = sector_spectrum(pr, 0, 2, o.resolution, o.r_max);
    auto S = stability_report(pr, R);
    out.put("profile", profile_json(pr), "profile-ode");
    out.put("verdict", S.verdict, "second-variation-specialized");
    out.put("lambda1", num(S.lambda1), "linearized-operator-sector");
    out.put("lambda2", num(S.lambda2), "linearized-operator-sector");
    out.put("inner_lambda", num(S.inner_lambda), "scaling-field-orthogonality");
    out.put("inner_translation", num(S.inner_translation), "translation-field-orthogonality");
    out.put("second_variation", num(S.second_variation_value), "second-variation-specialized");
    out.put("bound", num(S.bound), "second-variation-specialized");
    out.put("note", S.note, "second-variation-specialized");
}

Boundary boundary_of(const std::string& b) {
    if (b == "auto") return Boundary::Auto;
    if (b == "neumann") return Boundary::Neumann;
    if (b == "dirichlet") return Boundary::Dirichlet;
    if (b == "decay") return Boundary::Decay;
    throw UsageError("unknown boundary " + b);
}

double parse_number(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError("cannot read " + what + " from '" + s + "'");
    }
}

void cmd_flow(const Opts& o, Output& out) {
    auto par = params_of(o);
    if (!(o.tau_max > 0) || !(o.dt_max > 0) || !(o.dt_frac > 0) || !(o.cap_factor > 1))
        throw UsageError("flow settings must be positive (cap factor > 1)");
    FlowGridConfig g;
    g.cells = o.cells;
    g.r_max = o.r_max;
    g.boundary = boundary_of(o.boundary);
    // --init const:<v> | kappa[:<factor>] | profile | profile+f:<s> | bump:<c>[,<sigma>]
    const std::string& in = o.init;
    auto colon = in.find(':');
    std::string kind = in.substr(0, colon), arg = colon == std::string::npos ? "" : in.substr(colon + 1);
    FlowState st;
    if (kind == "const") {
        st = init_constant(par, parse_number(arg, "initial value"), g);
    } else if (kind == "kappa") {
        st = init_constant(par, (arg.empty() ? 1.0 : parse_number(arg, "kappa factor")) * par.kappa, g);
    } else if (kind == "profile" || kind == "profile+f") {
        auto pr = shooting_profile(o, par);
        st = init_flow(pr, g);
        if (kind == "profile+f") perturb_along_ground_state(st, parse_number(arg, "perturbation size"));
        out.put("profile", profile_json(pr), "profile-ode");
    } else if (kind == "bump") {
        auto comma = arg.find(',');
        double c = parse_number(arg.substr(0, comma), "bump height");
        double sig = comma == std::string::npos ? 1.0 : parse_number(arg.substr(comma + 1), "bump width");
        if (!(sig > 0)) throw UsageError("bump width must be positive");
        st = init_flow(constant_profile(par, 0), gaussian_bump(1.0, 0.0, sig), 0.5 * c, g);
    } else {
        throw UsageError("unknown --init '" + in + "' (const:<v>, kappa[:<f>], profile, profile+f:<s>, bump:<c>[,<sigma>])");
    }
    StepConfig sc;
    sc.dt_max = o.dt_max;
    sc.dt_frac = o.dt_frac;
    StopConfig stop;
    stop.cap_factor = o.cap_factor;
    auto rep = run(st, o.tau_max, sc, stop);
    auto sum = flow_diagnostics(rep, par);
    out.put("outcome", to_string(rep.outcome), "rescaled-flow");
    out.put("tau_end", num(rep.tau_end), "rescaled-flow");
    out.put("tau1", rep.outcome == FlowOutcome::BlewUp ? num(rep.tau1) : json(nullptr), "type-one-blowup-fit");
    out.put("cap_reached", rep.cap_reached, "rescaled-flow");
    out.put("limit", rep.limit, "rescaled-flow");
    out.put("boundary", to_string(rep.boundary), "rescaled-flow");
    out.put("steps", rep.steps, "rescaled-flow");
    out.put("max_energy_increase", num(rep.max_energy_increase), "weighted-energy-lyapunov");
    out.put("min_dtau_w", num(rep.min_dtau_w), "rescaled-flow");
    out.put("max_avg_minus_kappa", num(rep.max_avg_minus_kappa), "blowup-criterion-average");
    out.put("type1_indicator", num(sum.type1_indicator), "type-one-blowup-fit");
    out.put("blowup_r", num(sum.blowup_r), "blowup-set");
    out.put("compact_blowup_set", sum.compact_blowup_set, "blowup-set");
    out.put("eps_estimate", num(sum.eps_estimate), "monotone-time-derivative");
    out.put("energy_plateau", num(sum.energy_plateau), "weighted-energy-lyapunov");
    out.put("final_energy", rep.series.empty() ? json(nullptr) : num(rep.series.back().energy), "weighted-energy");
    out.csv = flow_csv(rep);
}

void cmd_perturb(const Opts& o, Output& out) {
    auto par = params_of(o);
    if (o.s_values.empty()) throw UsageError("--s needs at least one value");
    PerturbationConfig pc;
    pc.scale = o.scale == "l2" ? DirectionScale::L2 : DirectionScale::ProfileSup;
    pc.run_flow = !o.no_flow;
    pc.tau_max = o.tau_max;
    pc.entropy = entropy_config(o);
    auto pr = shooting_profile(o, par);
    json rows = json::array();
    std::ostringstream csv;
    csv << "s,lambda_w,lambda_ws,margin,outcome,tau1,plateau_energy,final_energy,min_dtau_w\r\n";
    bool ok = true;
    for (double s : o.s_values) {
        auto R = entropy_perturbation_experiment(pr, s, pc);
        if (s != 0.0) ok = ok && R.margin > 0 && !R.entropy_unconverged;
        std::string oc = R.flow_run ? to_string(R.outcome) : "";
        rows.push_back({{"s", s},
                        {"lambda_w", num(R.lambda_w)},
                        {"lambda_ws", num(R.lambda_ws)},
                        {"margin", num(R.margin)},
                        {"entropy_unconverged", R.entropy_unconverged},
                        {"outcome", oc},
                        {"tau1", num(R.tau1)},
                        {"plateau_energy", num(R.plateau_energy)},
                        {"final_energy", num(R.final_energy)},
                        {"min_dtau_w", num(R.min_dtau_w)},
                        {"direction_sup", num(R.direction_sup)},
                        {"discrete_lambda1", num(R.discrete_lambda1)}});
        csv << csv_num(s) << ',' << csv_num(R.lambda_w) << ',' << csv_num(R.lambda_ws) << ',' << csv_num(R.margin)
            << ',' << oc << ',' << csv_num(R.tau1) << ',' << csv_num(R.plateau_energy) << ','
            << csv_num(R.final_energy) << ',' << csv_num(R.min_dtau_w) << "\r\n";
        out.lines.push_back("s = " + csv_num(s) + ": margin " + csv_num(R.margin) + (R.margin > 0 ? " (decrease)" : ""));
    }
    out.csv = csv.str();
    out.put("profile", profile_json(pr), "profile-ode");
    out.put("direction_scale", to_string(pc.scale), "entropy-perturbation");
    out.put("E_kappa", num(kappa_energy(par)), "constant-solution-energy");
    out.put("rows", rows, "entropy-perturbation");
    out.verdict = ok ? 1 : 0;
}

void cmd_gamma(const Opts& o, Output& out) {
    auto par = params_of(o);
    double es, gap;
    try {
        es = singular_energy(par);
        gap = gap_inequality(par);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    double ek = kappa_energy(par);
    out.put("E_singular", num(es), "singular-energy-gamma-form");
    out.put("E_kappa", num(ek), "constant-solution-energy");
    out.put("gap", num(gap), "gap-inequality");
    out.put("ratio", num(es / ek), "gap-inequality");
    out.put("beta", num(par.beta), "singular-homogeneous-solution");
    if (par.beta > 0) {
        auto sc = sphere_constant(par);
        out.put("sphere_constant", num(sc.value), "sphere-equation-constant-branch");
        out.put("in_uniqueness_range", sc.in_uniqueness_range, "sphere-equation-constant-branch");
    }
}

void cmd_gap_scan(const Opts& o, Output& out) {
    if (o.n_lo < 3 || o.n_hi < o.n_lo) throw UsageError("need 3 <= n-lo <= n-hi");
    if (o.p_count < 1) throw UsageError("--p-count must be positive");
    auto S = gap_scan(o.n_lo, o.n_hi, o.p_count);
    int valid = 0;
    for (const auto& r : S.rows) valid += r.valid ? 1 : 0;
    out.put("rows", S.rows.size(), "gap-inequality");
    out.put("valid_rows", valid, "gap-inequality");
    out.put("non_positive", S.non_positive, "gap-inequality");
    out.put("worst_quadrature_rel_err", num(S.worst_quad_rel_err), "singular-energy-gamma-form");
    out.put("worst_identity_err", num(S.worst_identity_err), "gap-inequality");
    out.csv = gap_scan_csv(S);
    out.verdict = S.non_positive == 0 ? 1 : 0;
}

void cmd_identities(const Opts& o, Output& out) {
    auto par = params_of(o);
    auto pr = make_profile(o, par);
    auto R = identities(pr);
    out.put("profile", profile_json(pr), "profile-ode");
    out.put("pohozaev", num(R.pohozaev), "pohozaev-identity");
    out.put("inte1", num(R.inte1), "critical-point-identity-mass");
    out.put("eq10", num(R.eq10), "critical-point-identity-energy");
    out.put("testfunction", num(R.testfunction), "critical-point-identity-test");
    out.put("absolute", {{"pohozaev", num(R.pohozaev_abs)}, {"inte1", num(R.inte1_abs)},
                         {"eq10", num(R.eq10_abs)}, {"testfunction", num(R.testfunction_abs)}},
            "integral-identities");
    double worst = std::max({R.pohozaev, R.inte1, R.eq10, R.testfunction});
    out.put("worst", num(worst), "integral-identities");
    out.verdict = worst <= o.tol ? 1 : 0;
}

void cmd_verify(const Opts& o, Output& out, std::ostream& os, bool print_lines) {
    AcceptanceConfig c;
    c.seed = o.seed;
    c.tolerance_scale = o.tolerance_scale;
    c.n = o.n;
    c.p = o.p;
    c.require_supercritical = o.supercritical;
    c.a_min = o.a_min;
    c.a_max = o.a_max;
    c.samples = o.samples;
    c.only = o.only;
    for (int id : c.only)
        if (id < 1 || id > 10) throw UsageError("--only takes criterion numbers 1..10");
    params_of(o);
    auto rep = run_acceptance(c, [&](const CheckResult& r) {
        if (print_lines) os << format_check(r) << std::endl;
    });
    json checks = json::array();
    for (const auto& r : rep.checks) {
        json m = json::object();
        for (const auto& [k, v] : r.metrics) m[k] = num(v);
        checks.push_back({{"id", r.id},
                          {"name", r.name},
                          {"pass", r.pass},
                          {"seconds", r.seconds},
                          {"budget", r.budget},
                          {"detail", r.detail},
                          {"metrics", m}});
    }
    json fa = json::array();
    for (double a : rep.fixture_a) fa.push_back(a);
    out.put("checks", checks, "acceptance-suite");
    out.put("fixture_a", fa, "profile-ode");
    out.put("fixture_note", rep.fixture_note, "profile-ode");
    out.put("all_pass", rep.all_pass, "acceptance-suite");
    out.verdict = rep.all_pass ? 1 : 0;
}

// ---- config files ----

std::string option_name(const std::string& key) {
    std::string s = key;
    std::replace(s.begin(), s.end(), '_', '-');
    return s;
}

bool given_on_command_line(const std::vector<std::string>& args, const std::string& name) {
    const std::string flag = "--" + name;
    for (const auto& a : args)
        if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
}

std::string json_scalar(const json& v, const std::string& key) {
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) {
        std::ostringstream os;
        os << std::setprecision(17) << v.get<double>();
        return os.str();
    }
    if (v.is_string()) return v.get<std::string>();
    throw UsageError("config key '" + key + "' has an unsupported value type");
}

// Turns the config file into --key=value tokens placed before the command-line flags; keys given
// on the command line are skipped so the flags win.
std::vector<std::string> expand_config(const std::vector<std::string>& args, CLI::App* sub) {
    std::string path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path);
    json cfg;
    try {
        in >> cfg;
    } catch (const std::exception& e) {
        throw UsageError("config file is not valid JSON: " + std::string(e.what()));
    }
    if (!cfg.is_object()) throw UsageError("config file must hold a JSON object");
    if (!cfg.contains("schema_version") || !cfg["schema_version"].is_number_integer() ||
        cfg["schema_version"].get<int>() != kSchemaVersion)
        throw UsageError("config schema_version must be " + std::to_string(kSchemaVersion));
    std::vector<std::string> extra;
    for (const auto& [key, value] : cfg.items()) {
        if (key == "schema_version") continue;
        if (key == "command") {
            if (!value.is_string() || value.get<std::string>() != args[0])
                throw UsageError("config is for command '" + json_scalar(value, key) + "', not '" + args[0] + "'");
            continue;
        }
        const std::string name = option_name(key);
        if (name == "config") throw UsageError("config files cannot include other config files");
        const CLI::Option* opt = sub->get_option_no_throw("--" + name);
        if (!opt) throw UsageError("unknown config key '" + key + "' for command " + args[0]);
        if (given_on_command_line(args, name)) continue;
        if (value.is_array()) {
            for (const auto& v : value) extra.push_back("--" + name + "=" + json_scalar(v, key));
        } else {
            extra.push_back("--" + name + "=" + json_scalar(value, key));
        }
    }
    std::vector<std::string> merged{args[0]};
    merged.insert(merged.end(), extra.begin(), extra.end());
    merged.insert(merged.end(), args.begin() + 1, args.end());
    return merged;
}

json typed(const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    if (v == "nan") return nullptr;
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos == v.size()) {
            if (d == std::floor(d) && std::abs(d) < 1e15 && v.find_first_of(".eE") == std::string::npos)
                return static_cast<long long>(d);
            return d;
        }
    } catch (const std::exception&) {
    }
    return v;
}

json effective_config(CLI::App* sub) {
    json cfg = json::object();
    cfg["schema_version"] = kSchemaVersion;
    cfg["command"] = sub->get_name();
    for (const CLI::Option* opt : sub->get_options()) {
        const auto& names = opt->get_lnames();
        if (names.empty()) continue;
        const std::string& name = names.front();
        if (name == "help" || name == "config" || name == "out" || name == "json") continue;
        if (opt->get_type_size() == 0) {
            cfg[name] = opt->count() > 0 ? opt->as<bool>() : false;
        } else if (opt->count() > 0) {
            json vals = json::array();
            for (const auto& r : opt->results()) vals.push_back(typed(r));
            cfg[name] = opt->get_expected_max() <= 1 ? vals.front() : vals;
        } else {
            std::string d = opt->get_default_str();
            if (opt->get_expected_max() > 1) {
                // vector defaults print as [a,b,c]
                json vals = json::array();
                std::string body = d.size() >= 2 && d.front() == '[' ? d.substr(1, d.size() - 2) : d;
                std::stringstream ss(body);
                for (std::string t; std::getline(ss, t, ',');)
                    if (!t.empty()) vals.push_back(typed(t));
                cfg[name] = vals;
            } else {
                cfg[name] = typed(d);
            }
        }
    }
    return cfg;
}

}  // namespace

int run_command(const std::vector<std::string>& raw, std::ostream& os, std::ostream& es) {
    Opts o;
    CLI::App app{"Self-similar profiles of the supercritical Fujita equation: experiment runner", "selfsim"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    struct Sub {
        const char* name;
        const char* help;
        void (*fn)(const Opts&, Output&);
    };
    const Sub subs[] = {
        {"energy", "weighted energy of a profile", cmd_energy},
        {"f-scan", "F-functional over an (x0, t0) grid", cmd_fscan},
        {"entropy", "entropy (sup of F) and its argmax", cmd_entropy},
        {"shoot", "scan w(0) and refine decaying profiles", cmd_shoot},
        {"spectrum", "sector eigenvalues of the linearized operator", cmd_spectrum},
        {"stability", "F-stability verdict from the radial spectrum", cmd_stability},
        {"flow", "run the rescaled flow", cmd_flow},
        {"perturb", "entropy perturbation experiment along the ground state", cmd_perturb},
        {"gamma", "singular energy, gap inequality and sphere constant", cmd_gamma},
        {"gap-scan", "gap inequality over (n, p)", cmd_gap_scan},
        {"identities", "integral identity residuals", cmd_identities},
    };
    std::vector<CLI::App*> handles;
    for (const auto& s : subs) {
        auto* c = app.add_subcommand(s.name, s.help);
        add_common(c, o);
        handles.push_back(c);
    }
    auto find = [&](const std::string& n) { return app.get_subcommand(n); };
    for (const char* n : {"energy", "f-scan", "entropy", "spectrum", "stability", "identities"}) add_profile(find(n), o);
    for (const char* n : {"shoot", "flow", "perturb"}) add_profile_search(find(n), o);
    for (const char* n : {"f-scan", "entropy", "perturb"}) add_search(find(n), o);
    for (const char* n : {"spectrum", "stability"}) {
        find(n)->add_option("--resolution", o.resolution, "cells of the coarsest level")->check(CLI::Range(16, 1000000));
        find(n)->add_option("--r-max", o.r_max, "outer radius")->check(CLI::Range(2.0, 1000.0));
    }
    find("spectrum")->add_option("--ell", o.ell, "spherical-harmonic degree");
    find("spectrum")->add_option("--k", o.k, "number of eigenpairs");
    auto* fl = find("flow");
    fl->add_option("--init", o.init, "const:<v>, kappa[:<f>], profile, profile+f:<s>, bump:<c>[,<sigma>]");
    fl->add_option("--cells", o.cells, "grid cells")->check(CLI::Range(16, 1000000));
    fl->add_option("--r-max", o.r_max, "outer radius")->check(CLI::Range(2.0, 1000.0));
    fl->add_option("--boundary", o.boundary, "auto, neumann, dirichlet or decay")
        ->check(CLI::IsMember({"auto", "neumann", "dirichlet", "decay"}));
    fl->add_option("--dt-max", o.dt_max, "largest step");
    fl->add_option("--dt-frac", o.dt_frac, "step as a fraction of ||w||^{1-p}");
    fl->add_option("--cap-factor", o.cap_factor, "blow-up once ||w|| exceeds this multiple of kappa");
    for (const char* n : {"flow", "perturb"})
        find(n)->add_option("--tau-max", o.tau_max, "final rescaled time")->check(CLI::PositiveNumber);
    auto* pe = find("perturb");
    pe->add_option("--s", o.s_values, "perturbation sizes");
    pe->add_option("--scale", o.scale, "direction normalization: profile-sup or l2")
        ->check(CLI::IsMember({"profile-sup", "l2"}));
    pe->add_flag("--no-flow", o.no_flow, "skip the flow runs");
    auto* gs = find("gap-scan");
    gs->add_option("--n-lo", o.n_lo, "smallest dimension");
    gs->add_option("--n-hi", o.n_hi, "largest dimension");
    gs->add_option("--p-count", o.p_count, "supercritical p values per dimension");
    find("identities")->add_option("--tol", o.tol, "largest accepted relative residual")->check(CLI::PositiveNumber);

    auto* va = app.add_subcommand("verify-all", "run the acceptance criteria");
    add_common(va, o);
    va->add_option("--tolerance-scale", o.tolerance_scale, "multiplies every tolerance")->check(CLI::PositiveNumber);
    va->add_option("--only", o.only, "criterion numbers to run");
    va->add_option("--a-min", o.a_min, "fixture scan start");
    va->add_option("--a-max", o.a_max, "fixture scan end");
    va->add_option("--samples", o.samples, "fixture scan samples")->check(CLI::Range(2, 100000));
    va->add_flag("--json", o.json_stdout, "print the JSON summary instead of the verdict lines");

    std::vector<std::string> args = raw;
    CLI::App* active = nullptr;
    try {
        if (!args.empty() && args[0] == "verify-all") o.supercritical = true;
        if (!args.empty() && args[0].rfind("-", 0) != 0) {
            CLI::App* sub = app.get_subcommand_no_throw(args[0]);
            if (sub) args = expand_config(args, sub);
        }
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
        for (auto* s : app.get_subcommands()) active = s;
    } catch (const CLI::CallForHelp&) {
        os << (active ? active->help() : app.help());
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            os << app.help();
            return kExitOk;
        }
        es << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        es << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }
    if (!active) {
        es << "usage error: no subcommand\n";
        return kExitUsage;
    }
    const std::string cmd = active->get_name();
    Output out;
    try {
        if (cmd == "verify-all") {
            cmd_verify(o, out, os, !o.json_stdout);
        } else {
            for (const auto& s : subs)
                if (cmd == s.name) s.fn(o, out);
        }
    } catch (const UsageError& e) {
        es << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        es << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    }
    json cfg = effective_config(active);
    json summary;
    summary["schema_version"] = kSchemaVersion;
    summary["command"] = cmd;
    summary["config"] = cfg;
    summary["config_hash"] = fnv1a_hex(cfg.dump());
    summary["threads"] = thread_count();
    summary["results"] = out.results;
    summary["equations"] = out.equations;
    if (out.verdict >= 0) summary["verdict"] = out.verdict == 1 ? "pass" : "fail";
    const std::string text = summary.dump(2);
    if (cmd != "verify-all" || o.json_stdout) {
        os << text << "\n";
    } else {
        os << "verify-all: " << (out.verdict == 1 ? "all criteria passed" : "some criteria FAILED") << "\n";
    }
    for (const auto& l : out.lines) es << l << "\n";
    if (!o.out_dir.empty()) {
        try {
            std::filesystem::create_directories(o.out_dir);
            std::ofstream(std::filesystem::path(o.out_dir) / (cmd + ".json")) << text << "\n";
            if (!out.csv.empty())
                std::ofstream(std::filesystem::path(o.out_dir) / (cmd + ".csv"), std::ios::binary) << out.csv;
        } catch (const std::exception& e) {
            es << "error: cannot write outputs to " << o.out_dir << ": " << e.what() << "\n";
            return kExitUsage;
        }
    }
    if (out.verdict == 0) return kExitCheckFailed;
    return kExitOk;
}

int run_command(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_command(args, std::cout, std::cerr);
}

}  // namespace selfsim
