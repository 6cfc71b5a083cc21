#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "subheat/algebra.hpp"
#include "subheat/cd_verify.hpp"
#include "subheat/errors.hpp"
#include "subheat/heat_mc.hpp"
#include "subheat/heat_spectral.hpp"
#include "subheat/io.hpp"

using namespace subheat;

namespace {

constexpr int kOk = 0, kInvalid = 1, kCheckFailed = 2;

const char* kColumns = R"(Output columns (CSV, header row first, reals printed with %.17g):
  classify      alpha,beta,regime,derived_rank,delta,kappa_ab,kappa_cd
  rep           matrix,row,c0,c1,c2     (matrix in A,X,Y,R; A rows have two entries and c2 empty)
  kernel mc     theta,x,y,value,std_error,n_paths,n_steps,seed,drift
  kernel spectral / oracle
                theta,x,y,value,error_estimate
  mass-check    t,mass,rejects,n_paths,n_steps,seed
  cd-check      function,alpha,beta,nu,theta,x,y,residual   (every record)
  bound-check   check,alpha,beta,T,lhs,lhs_se,rhs,rhs_se,diff_se,kappa_cd,t_window_max,pass
JSON output re-validates against the document schemas of the library.
Exit codes: 0 success, 1 invalid input or module error, 2 a check failed.
The default seed is 20240611; the SUBHEAT_SEED environment variable overrides it.)";

struct Common {
    std::string preset;
    std::string triple_json;
    std::string triple_file;
    std::optional<double> alpha, beta;
    std::string out;
    std::string format;
    std::uint64_t seed = kDefaultSeed;
    unsigned workers = 0;
};

std::uint64_t default_seed() {
    if (const char* s = std::getenv("SUBHEAT_SEED")) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(s, &used);
            if (used == std::string(s).size()) return v;
        } catch (const std::exception&) {
        }
        throw Error(ErrorKind::InvalidInput, "cli", std::string("SUBHEAT_SEED is not an unsigned integer: ") + s);
    }
    return kDefaultSeed;
}

void add_source(CLI::App* app, Common& c) {
    auto* g = app->add_option_group("triple", "Triple source (one of)");
    g->add_option("--preset", c.preset, "heisenberg | se2 | solv-minus | rank1-beta(b) | delta-zero(l)");
    g->add_option("--triple", c.triple_json, "Inline JSON: {\"alpha\":a,\"beta\":b} or {\"brackets\":[[i,j,c0,c1,c2],..],..}");
    g->add_option("--triple-file", c.triple_file, "File holding the JSON triple");
    g->add_option("--alpha", c.alpha, "Canonical alpha (with --beta)");
    g->add_option("--beta", c.beta, "Canonical beta (with --alpha)");
}

void add_output(CLI::App* app, Common& c, const std::string& default_format) {
    app->add_option("--out,-o", c.out, "Output path (written atomically); stdout when absent");
    app->add_option("--format", c.format, "csv or json (default " + default_format + ")")
        ->check(CLI::IsMember({"csv", "json"}));
}

SubRiemannianTriple load_triple(const Common& c) {
    const int n = !c.preset.empty() + !c.triple_json.empty() + !c.triple_file.empty() + (c.alpha || c.beta);
    if (n != 1) throw Error(ErrorKind::InvalidInput, "cli", "give exactly one of --preset, --triple, --triple-file, --alpha/--beta");
    if (!c.preset.empty()) return canonical_triple(preset_parameters(c.preset));
    if (c.alpha || c.beta) {
        if (!c.alpha || !c.beta) throw Error(ErrorKind::InvalidInput, "cli", "--alpha and --beta go together");
        return canonical_triple({*c.alpha, *c.beta});
    }
    std::string text = c.triple_json;
    if (!c.triple_file.empty()) {
        std::ifstream in(c.triple_file);
        if (!in) throw Error(ErrorKind::InvalidInput, "cli", "cannot read " + c.triple_file);
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::InvalidInput, "cli", std::string("triple is not valid JSON: ") + e.what());
    }
    return triple_from_json(j);
}

void emit(const Common& c, const std::string& content) {
    if (c.out.empty())
        std::cout << content;
    else
        write_atomic(c.out, content);
}

std::string json_text(const Json& doc) {
    validate_document(doc);
    return doc.dump(2) + "\n";
}

GroupPoint parse_point(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error(ErrorKind::InvalidInput, "cli", "bad coordinate '" + item + "' in point '" + s + "'");
        }
    }
    if (v.size() != 3) throw Error(ErrorKind::InvalidInput, "cli", "a point is theta,x,y; got '" + s + "'");
    return {v[0], v[1], v[2]};
}

std::vector<double> parse_list(const std::string& s, const char* what) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error(ErrorKind::InvalidInput, "cli", std::string("bad ") + what + " entry '" + item + "'");
        }
    }
    if (v.empty()) throw Error(ErrorKind::InvalidInput, "cli", std::string("empty ") + what + " list");
    return v;
}

std::string csv_line(const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
    return s + "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sub-Riemannian structures on 3-dimensional solvable Lie groups: classification, heat kernels, "
                 "curvature-dimension and semigroup bound checks"};
    app.footer(kColumns);
    app.require_subcommand(1);
    app.fallthrough();

    Common c;
    try {
        c.seed = default_seed();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    }
    app.add_option("--workers", c.workers, "Worker threads (0 = hardware); results do not depend on it");
    app.add_option("--seed", c.seed, "Base seed (default 20240611 or $SUBHEAT_SEED)");

    auto* classify = app.add_subcommand("classify", "Canonical (alpha, beta), regime and CR constants");
    add_source(classify, c);
    add_output(classify, c, "json");

    auto* rep = app.add_subcommand("rep", "Matrix representation of the canonical triple");
    add_source(rep, c);
    add_output(rep, c, "json");

    auto* kernel = app.add_subcommand("kernel", "Heat kernel at points");
    kernel->require_subcommand(1);
    double t = 0.5;
    std::vector<std::string> points;
    int paths = 100000, steps = 512;
    std::string drift = "DriftedPrefactor";
    OracleConfig ocfg;
    std::vector<CLI::App*> engines;
    for (const char* name : {"mc", "spectral", "oracle"}) {
        auto* e = kernel->add_subcommand(name, std::string(name) == "mc"        ? "Brownian-bridge Monte Carlo"
                                               : std::string(name) == "spectral" ? "Mathieu series (se2 only)"
                                                                                 : "Fourier-ODE oracle (any regime)");
        add_source(e, c);
        add_output(e, c, "csv");
        e->add_option("--t", t, "Time")->required();
        e->add_option("--point", points, "theta,x,y (repeatable)")->required();
        if (std::string(name) == "mc") {
            e->add_option("--paths", paths, "Bridge paths");
            e->add_option("--steps", steps, "Steps per path");
            e->add_option("--drift", drift, "DriftedPrefactor or UndriftedPrefactor");
        }
        if (std::string(name) == "oracle") {
            e->add_option("--h-factor", ocfg.h_factor, "theta spacing / sqrt(t)");
            e->add_option("--xi-threshold", ocfg.xi_threshold, "Relative cut-off of the xi lattice");
            e->add_option("--xi-refine-tol", ocfg.xi_refine_tol, "Sublattice tolerance");
        }
        engines.push_back(e);
    }

    auto* mass = app.add_subcommand("mass-check", "Trapezoid mass of the Monte Carlo kernel on a box grid");
    add_source(mass, c);
    add_output(mass, c, "json");
    int grid_n = 33;
    double mass_lo = 0.97, mass_hi = 1.01;
    mass->add_option("--t", t, "Time");
    mass->add_option("--paths", paths, "Bridge paths per theta node");
    mass->add_option("--steps", steps, "Steps per path");
    mass->add_option("--grid", grid_n, "Nodes per axis");
    mass->add_option("--min", mass_lo, "Lower acceptance bound");
    mass->add_option("--max", mass_hi, "Upper acceptance bound");

    auto* cd = app.add_subcommand("cd-check", "Curvature-dimension residual sweep");
    add_source(cd, c);
    add_output(cd, c, "json");
    std::string nus = "0.1,1,10";
    int cd_points = 1000;
    double cd_box = 1.5, cd_tol = 1e-8;
    bool all_records = false;
    cd->add_option("--nu", nus, "Comma-separated nu values");
    cd->add_option("--points", cd_points, "Random points per parameter pair");
    cd->add_option("--box", cd_box, "Points uniform in [-box, box]^3");
    cd->add_option("--tol", cd_tol, "Pass when min residual >= -tol");
    cd->add_flag("--all-records", all_records, "Include every residual in JSON output");

    auto* bound = app.add_subcommand("bound-check", "Gradient bound and reverse Poincare checks (alpha != 0)");
    add_source(bound, c);
    add_output(bound, c, "json");
    std::string Ts = "0.1";
    std::string which = "both";
    std::string center = "0.2,0.1,-0.1";
    double radius = 1.0, fd_step = 1e-3;
    int sde_steps = 128;
    bound->add_option("--T", Ts, "Comma-separated times; 'w:f' means f times the window");
    bound->add_option("--check", which, "gradient | reverse-poincare | both")
        ->check(CLI::IsMember({"gradient", "reverse-poincare", "both"}));
    bound->add_option("--paths", paths, "SDE paths");
    bound->add_option("--steps", sde_steps, "Euler steps per path");
    bound->add_option("--center", center, "Bump center theta,x,y");
    bound->add_option("--radius", radius, "Bump radius");
    bound->add_option("--fd-step", fd_step, "Central-difference step");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInvalid;
    }

    try {
        if (c.format.empty()) c.format = kernel->parsed() ? "csv" : "json";
        if (classify->parsed()) {
            const Classification cl = canonicalize(load_triple(c));
            const double kcd = kappa_cd({cl.form.alpha, cl.form.beta});
            if (c.format == "json") {
                emit(c, json_text(document("classification", to_json(cl))));
            } else {
                emit(c, csv_line({"alpha", "beta", "regime", "derived_rank", "delta", "kappa_ab", "kappa_cd"}) +
                            csv_line({format_real(cl.form.alpha), format_real(cl.form.beta),
                                      std::string(to_string(cl.regime.tag)), std::to_string(cl.form.derived_rank),
                                      format_real(cl.regime.delta), format_real(cl.geometry.kappa_ab), format_real(kcd)}));
            }
            return kOk;
        }

        if (rep->parsed()) {
            const Classification cl = canonicalize(load_triple(c));
            const AffineRep r = build_rep(cl.regime);
            if (c.format == "json") {
                emit(c, json_text(document("representation", to_json(r))));
            } else {
                std::string s = csv_line({"matrix", "row", "c0", "c1", "c2"});
                for (int i = 0; i < 2; ++i)
                    s += csv_line({"A", std::to_string(i), format_real(r.A(i, 0)), format_real(r.A(i, 1)), ""});
                const std::pair<const char*, const Mat3*> ms[] = {{"X", &r.matX}, {"Y", &r.matY}, {"R", &r.matR}};
                for (const auto& [name, m] : ms)
                    for (int i = 0; i < 3; ++i)
                        s += csv_line({name, std::to_string(i), format_real((*m)(i, 0)), format_real((*m)(i, 1)),
                                       format_real((*m)(i, 2))});
                emit(c, s);
            }
            return kOk;
        }

        if (kernel->parsed()) {
            const Classification cl = canonicalize(load_triple(c));
            const AffineRep r = build_rep(cl.regime);
            std::vector<GroupPoint> pts;
            for (const auto& s : points) pts.push_back(parse_point(s));
            Json rows = Json::array();
            Json settings;
            std::string engine, csv;
            if (engines[0]->parsed()) {
                engine = "mc";
                McSpec spec;
                spec.n_paths = paths;
                spec.n_steps = steps;
                spec.seed = c.seed;
                spec.workers = c.workers;
                const auto d = drift_convention_from_string(drift);
                if (!d) throw Error(ErrorKind::InvalidInput, "cli", "unknown drift convention '" + drift + "'");
                spec.drift = *d;
                const auto est = kernel_grid_estimate(r, t, pts, spec);
                csv = csv_line({"theta", "x", "y", "value", "std_error", "n_paths", "n_steps", "seed", "drift"});
                for (std::size_t i = 0; i < pts.size(); ++i) {
                    Json row = to_json(est[i]);
                    row["theta"] = pts[i].theta;
                    row["x"] = pts[i].x;
                    row["y"] = pts[i].y;
                    rows.push_back(row);
                    csv += csv_line({format_real(pts[i].theta), format_real(pts[i].x), format_real(pts[i].y),
                                     format_real(est[i].value), format_real(est[i].std_error),
                                     std::to_string(est[i].n_paths), std::to_string(est[i].n_steps),
                                     std::to_string(est[i].seed), std::string(to_string(est[i].drift))});
                }
                settings = to_json(spec);
            } else {
                csv = csv_line({"theta", "x", "y", "value", "error_estimate"});
                std::vector<std::pair<double, double>> vals;
                if (engines[1]->parsed()) {
                    engine = "spectral";
                    for (const auto& p : pts) {
                        const auto s = se2_kernel(r, t, p);
                        Json row = to_json(s);
                        row["theta"] = p.theta;
                        row["x"] = p.x;
                        row["y"] = p.y;
                        rows.push_back(row);
                        vals.emplace_back(s.value, s.error_estimate);
                    }
                    settings = Json::object();
                } else {
                    engine = "oracle";
                    ocfg.workers = c.workers;
                    const auto res = oracle_kernel(r, t, pts, ocfg);
                    for (std::size_t i = 0; i < pts.size(); ++i) {
                        Json row = to_json(res[i]);
                        row["theta"] = pts[i].theta;
                        row["x"] = pts[i].x;
                        row["y"] = pts[i].y;
                        rows.push_back(row);
                        vals.emplace_back(res[i].value, res[i].error_estimate);
                    }
                    settings = to_json(ocfg);
                }
                for (std::size_t i = 0; i < pts.size(); ++i)
                    csv += csv_line({format_real(pts[i].theta), format_real(pts[i].x), format_real(pts[i].y),
                                     format_real(vals[i].first), format_real(vals[i].second)});
            }
            if (c.format == "json")
                emit(c, json_text(document("kernel", {{"engine", engine},
                                                      {"alpha", cl.form.alpha},
                                                      {"beta", cl.form.beta},
                                                      {"t", t},
                                                      {"rows", rows},
                                                      {"settings", settings}})));
            else
                emit(c, csv);
            return kOk;
        }

        if (mass->parsed()) {
            const Classification cl = canonicalize(load_triple(c));
            const AffineRep r = build_rep(cl.regime);
            McSpec spec;
            spec.n_paths = paths;
            spec.n_steps = steps;
            spec.seed = c.seed;
            spec.workers = c.workers;
            const MassGrid grid = scaled_mass_grid(t, 0.5, grid_n);
            const MassResult m = kernel_mass_check(r, t, grid, spec);
            const bool ok = m.mass >= mass_lo && m.mass <= mass_hi;
            if (c.format == "json") {
                Json g = {{"theta", {grid.theta_lo, grid.theta_hi, grid.n_theta}},
                          {"x", {grid.x_lo, grid.x_hi, grid.n_x}},
                          {"y", {grid.y_lo, grid.y_hi, grid.n_y}}};
                Json payload = {{"alpha", cl.form.alpha}, {"beta", cl.form.beta}, {"t", t}};
                for (auto& [k, v] : to_json(m).items()) payload[k] = v;
                payload["pass"] = ok;
                payload["grid"] = g;
                payload["settings"] = to_json(spec);
                emit(c, json_text(document("mass", payload)));
            } else {
                emit(c, csv_line({"t", "mass", "rejects", "n_paths", "n_steps", "seed"}) +
                            csv_line({format_real(t), format_real(m.mass), std::to_string(m.rejects),
                                      std::to_string(paths), std::to_string(steps), std::to_string(c.seed)}));
            }
            return ok ? kOk : kCheckFailed;
        }

        if (cd->parsed()) {
            CdSweepConfig cfg;
            cfg.n_points = cd_points;
            cfg.nus = parse_list(nus, "nu");
            cfg.box = cd_box;
            cfg.seed = c.seed;
            cfg.workers = c.workers;
            const Classification cl = canonicalize(load_triple(c));
            cfg.params = {{cl.form.alpha, cl.form.beta}};
            const CDReport rp = cd_sweep(cfg);
            const bool ok = rp.min_residual >= -cd_tol;
            if (c.format == "json") {
                Json j = to_json(rp, all_records);
                j["pass"] = ok;
                j["tolerance"] = cd_tol;
                emit(c, json_text(document("cd_report", j)));
            } else {
                std::string s = csv_line({"function", "alpha", "beta", "nu", "theta", "x", "y", "residual"});
                for (const auto& rec : rp.residuals)
                    s += csv_line({rec.function, format_real(rec.params.alpha), format_real(rec.params.beta),
                                   format_real(rec.nu), format_real(rec.point.theta), format_real(rec.point.x),
                                   format_real(rec.point.y), format_real(rec.residual)});
                emit(c, s);
            }
            return ok ? kOk : kCheckFailed;
        }

        if (bound->parsed()) {
            const Classification cl = canonicalize(load_triple(c));
            const AffineRep r = build_rep(cl.regime);
            const Parameters p{cl.form.alpha, cl.form.beta};
            if (p.alpha == 0.0) throw Error(ErrorKind::InvalidInput, "cd_verify", "the bound checks need alpha != 0");
            Bump bump;
            bump.center = parse_point(center);
            bump.radius = radius;
            BoundSpec spec;
            spec.sde.n_paths = paths;
            spec.sde.n_steps = sde_steps;
            spec.sde.seed = c.seed;
            spec.sde.workers = c.workers;
            spec.fd_step = fd_step;
            std::vector<double> times;
            {
                std::stringstream ss(Ts);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    if (item.rfind("w:", 0) == 0)
                        times.push_back(parse_list(item.substr(2), "T")[0] * t_window_max(p));
                    else
                        times.push_back(parse_list(item, "T")[0]);
                }
                if (times.empty()) throw Error(ErrorKind::InvalidInput, "cli", "empty T list");
            }
            Json checks = Json::array();
            std::string csv = csv_line({"check", "alpha", "beta", "T", "lhs", "lhs_se", "rhs", "rhs_se", "diff_se",
                                        "kappa_cd", "t_window_max", "pass"});
            bool all = true;
            auto record = [&](const char* name, const BoundReport& b) {
                all = all && b.pass;
                Json j = to_json(b);
                j["check"] = name;
                checks.push_back(j);
                csv += csv_line({name, format_real(p.alpha), format_real(p.beta), format_real(b.T),
                                 format_real(b.lhs.value), format_real(b.lhs.std_error), format_real(b.rhs.value),
                                 format_real(b.rhs.std_error), format_real(b.diff_std_error), format_real(b.kappa_cd),
                                 format_real(b.t_window_max), b.pass ? "true" : "false"});
            };
            for (double T : times) {
                if (which != "reverse-poincare") record("gradient", gradient_bound_check(r, bump, T, spec));
                if (which != "gradient") record("reverse_poincare", reverse_poincare_check(r, bump, T, spec));
            }
            if (c.format == "json")
                emit(c, json_text(document("bound_report", {{"alpha", p.alpha},
                                                            {"beta", p.beta},
                                                            {"bump", {{"center", {bump.center.theta, bump.center.x, bump.center.y}},
                                                                      {"radius", bump.radius},
                                                                      {"order", bump.order}}},
                                                            {"checks", checks},
                                                            {"pass", all}})));
            else
                emit(c, csv);
            return all ? kOk : kCheckFailed;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n  input:";
        for (int i = 1; i < argc; ++i) std::cerr << " " << argv[i];
        std::cerr << "\n";
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInvalid;
    }
    return kInvalid;
}
