#include "subheat/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <unistd.h>
#include <utility>
#include <vector>

#include "subheat/errors.hpp"

namespace subheat {

namespace {

constexpr const char* kModule = "cli";

Json vec(const Eigen::VectorXd& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Json mat(const Eigen::MatrixXd& m) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec(m.row(i).transpose()));
    return a;
}

Json point(const GroupPoint& p) { return {{"theta", p.theta}, {"x", p.x}, {"y", p.y}}; }

Json params(Parameters p) { return {{"alpha", p.alpha}, {"beta", p.beta}}; }

double number(const Json& j, const char* what) {
    if (!j.is_number()) throw Error(ErrorKind::InvalidInput, kModule, std::string(what) + " must be a number");
    return j.get<double>();
}

Vec3 vec3(const Json& j, const char* what) {
    if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::InvalidInput, kModule, std::string(what) + " needs 3 entries");
    return {number(j[0], what), number(j[1], what), number(j[2], what)};
}

}  // namespace

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::InvalidInput, kModule, "cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) {
            out.close();
            std::filesystem::remove(tmp);
            throw Error(ErrorKind::InvalidInput, kModule, "write to " + tmp.string() + " failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error(ErrorKind::InvalidInput, kModule, "cannot move output into " + path.string() + ": " + ec.message());
    }
}

Parameters preset_parameters(std::string_view name) {
    auto arg = [&](std::string_view prefix) -> std::optional<double> {
        if (name.size() <= prefix.size() + 2 || name.substr(0, prefix.size()) != prefix || name[prefix.size()] != '(' ||
            name.back() != ')')
            return std::nullopt;
        const std::string inner(name.substr(prefix.size() + 1, name.size() - prefix.size() - 2));
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(inner, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != inner.size() || !std::isfinite(v))
            throw Error(ErrorKind::InvalidInput, kModule, "bad preset argument in '" + std::string(name) + "'");
        return v;
    };
    if (name == "heisenberg") return {0.0, 0.0};
    if (name == "se2") return {-1.0, 0.0};
    if (name == "solv-minus") return {1.0, 0.0};
    if (auto b = arg("rank1-beta")) {
        if (!(*b > 0.0)) throw Error(ErrorKind::InvalidInput, kModule, "rank1-beta needs beta > 0");
        return {0.0, *b};
    }
    if (auto l = arg("delta-zero")) {
        if (*l == 0.0) throw Error(ErrorKind::InvalidInput, kModule, "delta-zero needs lambda != 0");
        return {-(*l) * (*l), 2.0 * (*l)};
    }
    throw Error(ErrorKind::InvalidInput, kModule,
                "unknown preset '" + std::string(name) +
                    "' (heisenberg, se2, solv-minus, rank1-beta(b), delta-zero(l))");
}

SubRiemannianTriple triple_from_json(const Json& j) {
    if (!j.is_object()) throw Error(ErrorKind::InvalidInput, kModule, "triple must be a JSON object");
    if (j.contains("alpha") || j.contains("beta")) {
        if (!j.contains("alpha") || !j.contains("beta"))
            throw Error(ErrorKind::InvalidInput, kModule, "triple needs both alpha and beta");
        return canonical_triple({number(j["alpha"], "alpha"), number(j["beta"], "beta")});
    }
    if (!j.contains("brackets") || !j["brackets"].is_array())
        throw Error(ErrorKind::InvalidInput, kModule, "triple needs alpha/beta or a brackets array");
    SubRiemannianTriple t;
    for (const auto& b : j["brackets"]) {
        if (!b.is_array() || b.size() != 5 || !b[0].is_number_integer() || !b[1].is_number_integer())
            throw Error(ErrorKind::InvalidInput, kModule, "each bracket is [i, j, c0, c1, c2]");
        const int i = b[0].get<int>(), k = b[1].get<int>();
        if (i < 0 || i > 2 || k < 0 || k > 2 || i == k)
            throw Error(ErrorKind::InvalidInput, kModule, "bracket indices must be distinct and in 0..2");
        t.algebra.set_bracket(i, k, {number(b[2], "bracket"), number(b[3], "bracket"), number(b[4], "bracket")});
    }
    if (j.contains("h_basis")) {
        const auto& h = j["h_basis"];
        if (!h.is_array() || h.size() != 2) throw Error(ErrorKind::InvalidInput, kModule, "h_basis needs two vectors");
        t.h_basis = {vec3(h[0], "h_basis"), vec3(h[1], "h_basis")};
    }
    if (j.contains("metric")) {
        const auto& m = j["metric"];
        if (!m.is_array() || m.size() != 2 || !m[0].is_array() || !m[1].is_array() || m[0].size() != 2 ||
            m[1].size() != 2)
            throw Error(ErrorKind::InvalidInput, kModule, "metric must be 2x2");
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) t.metric(r, c) = number(m[r][c], "metric");
    }
    return t;
}

Json to_json(const SubRiemannianTriple& triple) {
    Json br = Json::array();
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            Json row = {i, j};
            for (int k = 0; k < 3; ++k) row.push_back(triple.algebra(k, i, j));
            br.push_back(row);
        }
    return {{"brackets", br},
            {"h_basis", {vec(triple.h_basis[0]), vec(triple.h_basis[1])}},
            {"metric", mat(triple.metric)}};
}

namespace {

Json regime_json(const Regime& r) {
    Json j = {{"tag", std::string(to_string(r.tag))}, {"alpha", r.alpha}, {"beta", r.beta}, {"delta", r.delta}};
    switch (r.tag) {
        case RegimeTag::DeltaPos:
            j["lambda1"] = r.lambda1;
            j["lambda2"] = r.lambda2;
            break;
        case RegimeTag::DeltaNeg:
            j["rho"] = r.rho;
            j["omega"] = r.omega;
            j["theta0"] = r.theta0;
            break;
        case RegimeTag::DeltaZero:
            j["lambda"] = r.lambda;
            break;
        default:
            break;
    }
    return j;
}

}  // namespace

Json to_json(const Classification& c) {
    const auto& g = c.geometry;
    Json chris = Json::array();
    for (const auto& row : g.christoffel) {
        Json r = Json::array();
        for (const auto& v : row) r.push_back(vec(v));
        chris.push_back(r);
    }
    return {{"alpha", c.form.alpha},
            {"beta", c.form.beta},
            {"regime", std::string(to_string(c.regime.tag))},
            {"derived_rank", c.form.derived_rank},
            {"basis", {{"X", vec(c.form.X)}, {"Y", vec(c.form.Y)}, {"Z", vec(c.form.Z)}}},
            {"regime_constants", regime_json(c.regime)},
            {"geometry",
             {{"reeb", vec(g.reeb)},
              {"torsion_coeff", g.torsion_coeff},
              {"ricci_constant", g.ricci_constant},
              {"chi", g.chi},
              {"kappa_ab", g.kappa_ab},
              {"kappa_cd", kappa_cd({c.form.alpha, c.form.beta})},
              {"christoffel", chris}}}};
}

Json to_json(const AffineRep& rep) {
    return {{"alpha", rep.regime.alpha},
            {"beta", rep.regime.beta},
            {"regime", std::string(to_string(rep.regime.tag))},
            {"regime_constants", regime_json(rep.regime)},
            {"A", mat(rep.A)},
            {"ybar", vec(rep.ybar)},
            {"rbar", vec(rep.rbar)},
            {"X", mat(rep.matX)},
            {"Y", mat(rep.matY)},
            {"R", mat(rep.matR)}};
}

Json to_json(const KernelEstimate& k) {
    return {{"value", k.value},
            {"std_error", k.std_error},
            {"n_paths", k.n_paths},
            {"n_steps", k.n_steps},
            {"seed", k.seed},
            {"drift", std::string(to_string(k.drift))},
            {"rejects", k.rejects}};
}

Json to_json(const SpectralKernelResult& s) {
    return {{"value", s.value},
            {"error_estimate", s.error_estimate},
            {"imag", s.imag},
            {"rho_max", s.rho_max},
            {"truncation_warning", s.truncation_warning}};
}

Json to_json(const OracleResult& o) {
    return {{"value", o.value}, {"error_estimate", o.error_estimate}, {"xi_spacing", o.xi_spacing}, {"xi_nodes", o.xi_nodes}};
}

Json to_json(const MassResult& m) { return {{"mass", m.mass}, {"rejects", m.rejects}}; }

Json to_json(const McSpec& s) {
    return {{"n_paths", s.n_paths},
            {"n_steps", s.n_steps},
            {"seed", s.seed},
            {"drift", std::string(to_string(s.drift))},
            {"quadrature", s.quadrature == Quadrature::Trapezoid ? "trapezoid" : "midpoint"},
            {"covariance", s.covariance == CovariancePath::ClosedForm ? "closed_form" : "generic"},
            {"replicate", s.replicate},
            {"max_reject_fraction", s.max_reject_fraction}};
}

Json to_json(const OracleConfig& c) {
    return {{"h_factor", c.h_factor},
            {"h", c.h},
            {"window_sigmas", c.window_sigmas},
            {"dt_factor", c.dt_factor},
            {"xi_threshold", c.xi_threshold},
            {"xi_refine_tol", c.xi_refine_tol},
            {"max_xi_refinements", c.max_xi_refinements},
            {"max_xi_nodes", c.max_xi_nodes},
            {"richardson", c.richardson},
            {"boundary_tol", c.boundary_tol}};
}

Json to_json(const SdeSpec& s) {
    return {{"n_paths", s.n_paths},
            {"n_steps", s.n_steps},
            {"seed", s.seed},
            {"generator", s.generator == Generator::SubLaplacian ? "sub_laplacian" : "standard_brownian"}};
}

namespace {

Json record(const CdRecord& r) {
    return {{"function", r.function},
            {"alpha", r.params.alpha},
            {"beta", r.params.beta},
            {"nu", r.nu},
            {"point", point(r.point)},
            {"residual", r.residual}};
}

}  // namespace

Json to_json(const CDReport& r, bool include_residuals) {
    Json plist = Json::array();
    for (const auto& p : r.settings.params) plist.push_back(params(p));
    Json j = {{"min_residual", r.min_residual},
              {"worst", record(r.worst)},
              {"n_records", static_cast<long>(r.residuals.size())},
              {"n_negative", static_cast<long>(std::count_if(r.residuals.begin(), r.residuals.end(),
                                                             [](const CdRecord& c) { return c.residual < -1e-8; }))},
              {"pass", r.min_residual >= -1e-8},
              {"settings",
               {{"n_points", r.settings.n_points},
                {"nus", r.settings.nus},
                {"params", plist},
                {"box", r.settings.box},
                {"seed", r.settings.seed}}}};
    if (include_residuals) {
        Json all = Json::array();
        for (const auto& rec : r.residuals) all.push_back(record(rec));
        j["residuals"] = std::move(all);
    }
    return j;
}

Json to_json(const BoundReport& r) {
    Json curve = Json::array();
    for (const auto& [t, a] : r.a_curve) curve.push_back({t, a});
    return {{"T", r.T},
            {"lhs", {{"value", r.lhs.value}, {"std_error", r.lhs.std_error}}},
            {"rhs", {{"value", r.rhs.value}, {"std_error", r.rhs.std_error}}},
            {"diff_std_error", r.diff_std_error},
            {"kappa_cd", r.kappa_cd},
            {"t_window_max", r.t_window_max},
            {"a_curve", curve},
            {"pass", r.pass},
            {"settings",
             {{"sde", to_json(r.settings.sde)}, {"fd_step", r.settings.fd_step}, {"base", point(r.settings.base)}}}};
}

Json document(std::string_view kind, Json payload) {
    Json d = {{"kind", std::string(kind)}, {"version", 1}};
    for (auto& [k, v] : payload.items()) d[k] = std::move(v);
    return d;
}

namespace {

enum class T { Number, Integer, String, Bool, Array, Object };

using Schema = std::vector<std::pair<std::string, T>>;

bool has_type(const Json& j, T t) {
    switch (t) {
        case T::Number: return j.is_number();
        case T::Integer: return j.is_number_integer();
        case T::String: return j.is_string();
        case T::Bool: return j.is_boolean();
        case T::Array: return j.is_array();
        case T::Object: return j.is_object();
    }
    return false;
}

void check(const Json& j, const Schema& schema, const std::string& where) {
    if (!j.is_object()) throw Error(ErrorKind::InvalidInput, kModule, where + " is not an object");
    for (const auto& [key, type] : schema) {
        if (!j.contains(key)) throw Error(ErrorKind::InvalidInput, kModule, where + " lacks '" + key + "'");
        if (!has_type(j[key], type)) throw Error(ErrorKind::InvalidInput, kModule, where + "." + key + " has the wrong type");
    }
}

const std::map<std::string, Schema>& schemas() {
    static const std::map<std::string, Schema> s{
        {"classification",
         {{"alpha", T::Number}, {"beta", T::Number}, {"regime", T::String}, {"derived_rank", T::Integer},
          {"basis", T::Object}, {"regime_constants", T::Object}, {"geometry", T::Object}}},
        {"representation",
         {{"alpha", T::Number}, {"beta", T::Number}, {"regime", T::String}, {"A", T::Array}, {"ybar", T::Array},
          {"rbar", T::Array}, {"X", T::Array}, {"Y", T::Array}, {"R", T::Array}}},
        {"kernel",
         {{"engine", T::String}, {"alpha", T::Number}, {"beta", T::Number}, {"t", T::Number}, {"rows", T::Array},
          {"settings", T::Object}}},
        {"mass",
         {{"alpha", T::Number}, {"beta", T::Number}, {"t", T::Number}, {"mass", T::Number}, {"rejects", T::Integer},
          {"grid", T::Object}, {"settings", T::Object}}},
        {"cd_report",
         {{"min_residual", T::Number}, {"worst", T::Object}, {"n_records", T::Integer}, {"n_negative", T::Integer},
          {"pass", T::Bool}, {"settings", T::Object}}},
        {"bound_report",
         {{"checks", T::Array}, {"alpha", T::Number}, {"beta", T::Number}, {"pass", T::Bool}}},
    };
    return s;
}

const Schema kRow{{"theta", T::Number}, {"x", T::Number}, {"y", T::Number}, {"value", T::Number}};
const Schema kRecord{{"function", T::String}, {"alpha", T::Number}, {"beta", T::Number},
                     {"nu", T::Number},       {"point", T::Object}, {"residual", T::Number}};
const Schema kBound{{"check", T::String},          {"T", T::Number},        {"lhs", T::Object},
                    {"rhs", T::Object},            {"diff_std_error", T::Number}, {"kappa_cd", T::Number},
                    {"t_window_max", T::Number},   {"a_curve", T::Array},   {"pass", T::Bool},
                    {"settings", T::Object}};
const Schema kEstimate{{"value", T::Number}, {"std_error", T::Number}};

}  // namespace

void validate_document(const Json& doc) {
    check(doc, {{"kind", T::String}, {"version", T::Integer}}, "document");
    const std::string kind = doc["kind"].get<std::string>();
    const auto it = schemas().find(kind);
    if (it == schemas().end()) throw Error(ErrorKind::InvalidInput, kModule, "unknown document kind '" + kind + "'");
    check(doc, it->second, kind);
    if (kind == "kernel")
        for (const auto& row : doc["rows"]) check(row, kRow, "kernel row");
    if (kind == "cd_report") {
        check(doc["worst"], kRecord, "worst");
        if (doc.contains("residuals"))
            for (const auto& r : doc["residuals"]) check(r, kRecord, "residual");
    }
    if (kind == "bound_report")
        for (const auto& b : doc["checks"]) {
            check(b, kBound, "check");
            check(b["lhs"], kEstimate, "lhs");
            check(b["rhs"], kEstimate, "rhs");
        }
}

}  // namespace subheat
