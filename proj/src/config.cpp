#include "ellpar/config.hpp"

#include "ellpar/errors.hpp"
#include "ellpar/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ellpar {

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) {
            return out;
        }
        start = pos + 1;
    }
}

double to_double(const std::string& key, const std::string& text)
{
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (text.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + text + "'");
    }
    return v;
}

std::vector<double> to_list(const std::string& key, const std::string& text)
{
    std::vector<double> out;
    if (trim(text).empty()) {
        return out;
    }
    for (const auto& item : split(text, ',')) {
        out.push_back(to_double(key, item));
    }
    return out;
}

Geometry geometry_from_config(const Config& cfg, const Geometry& fallback)
{
    const std::string kind = cfg.get_string("geometry.kind", "");
    if (kind.empty()) {
        return fallback;
    }
    const double hi = cfg.get_double("geometry.hi", 1.0);
    try {
        if (kind == "interval") {
            return Geometry::interval(cfg.get_double("geometry.lo", -1.0), hi);
        }
        const auto n = static_cast<int>(cfg.get_int("geometry.n_dim", 2));
        if (kind == "annulus") {
            return Geometry::annulus(cfg.get_double("geometry.lo"), hi, n);
        }
        if (kind == "ball") {
            return Geometry::punctured_ball(hi, n);
        }
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("geometry.kind must be interval, annulus or ball, got '" + kind + "'");
}

std::vector<BIEntry> bi_entries(const std::string& text, int n_dim)
{
    std::vector<BIEntry> out;
    const auto nn = static_cast<std::size_t>(n_dim);
    for (const auto& entry : split(text, ';')) {
        if (entry.empty()) {
            continue;
        }
        const auto parts = split(entry, ':');
        if (parts.size() != 5) {
            throw ConfigError("op.bi.entries: each entry needs alpha:beta:c:A:drift");
        }
        BIEntry e;
        e.alpha = static_cast<int>(to_double("op.bi.entries", parts[0]));
        e.beta = static_cast<int>(to_double("op.bi.entries", parts[1]));
        e.c = to_double("op.bi.entries", parts[2]);
        const auto a = to_list("op.bi.entries", parts[3]);
        const auto d = to_list("op.bi.entries", parts[4]);
        if (a.size() != nn * nn || d.size() != nn) {
            throw ConfigError("op.bi.entries: A needs n_dim^2 and drift n_dim values");
        }
        e.A.resize(n_dim, n_dim);
        e.drift.resize(n_dim);
        for (std::size_t r = 0; r < nn; ++r) {
            for (std::size_t c = 0; c < nn; ++c) {
                e.A(static_cast<long>(r), static_cast<long>(c)) = a[r * nn + c];
            }
            e.drift(static_cast<long>(r)) = d[r];
        }
        out.push_back(std::move(e));
    }
    return out;
}

} // namespace

Config Config::parse(std::string_view text)
{
    Config cfg;
    std::string section;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ConfigError("config line " + std::to_string(line_no) + ": bad section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        }
        const std::string full = section.empty() ? key : section + "." + key;
        if (cfg.values_.count(full) != 0) {
            throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key " + full);
        }
        cfg.values_[full] = trim(line.substr(eq + 1));
    }
    return cfg;
}

Config Config::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void Config::set(const std::string& key, const std::string& value)
{
    values_[key] = value;
}

bool Config::has(const std::string& key) const
{
    return values_.count(key) != 0;
}

std::string Config::get_string(const std::string& key) const
{
    const auto it = values_.find(key);
    if (it == values_.end()) {
        throw ConfigError("missing config key " + key);
    }
    used_.insert(key);
    return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const
{
    return has(key) ? get_string(key) : fallback;
}

double Config::get_double(const std::string& key) const
{
    return to_double(key, get_string(key));
}

double Config::get_double(const std::string& key, double fallback) const
{
    return has(key) ? get_double(key) : fallback;
}

std::int64_t Config::get_int(const std::string& key) const
{
    const std::string text = get_string(key);
    std::int64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (text.empty() || res.ec != std::errc() || res.ptr != end) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + text + "'");
    }
    return v;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const
{
    return has(key) ? get_int(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const
{
    if (!has(key)) {
        return fallback;
    }
    const std::string v = get_string(key);
    if (v == "true" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no") {
        return false;
    }
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<double> Config::get_list(const std::string& key) const
{
    return to_list(key, get_string(key));
}

std::vector<double> Config::get_list(const std::string& key, const std::vector<double>& fallback) const
{
    return has(key) ? get_list(key) : fallback;
}

std::vector<std::string> Config::unused_keys() const
{
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) {
        if (used_.count(k) == 0) {
            out.push_back(k);
        }
    }
    return out;
}

PsiSpec psi_from_config(const Config& cfg)
{
    const std::string kind = cfg.get_string("psi.kind", "constant");
    const auto coeffs = cfg.get_list("psi.coeffs", {1.0});
    if (kind == "constant") {
        if (coeffs.size() != 1) {
            throw ConfigError("psi.coeffs: the constant kind takes one value");
        }
        return PsiSpec::constant(coeffs[0]);
    }
    if (kind == "polynomial") {
        if (coeffs.empty()) {
            throw ConfigError("psi.coeffs: the polynomial kind needs coefficients");
        }
        return PsiSpec::polynomial(coeffs);
    }
    throw ConfigError("psi.kind must be constant or polynomial, got '" + kind + "'");
}

BSpec b_from_config(const Config& cfg)
{
    const std::string kind = cfg.get_string("b.kind", "positive-part");
    if (kind == "positive-part") {
        return BSpec::positive_part();
    }
    if (kind == "table") {
        try {
            return BSpec::table(cfg.get_list("b.breakpoints"), cfg.get_list("b.slopes"));
        } catch (const DomainError& e) {
            throw ConfigError(e.what());
        }
    }
    throw ConfigError("b.kind must be positive-part or table, got '" + kind + "'");
}

OperatorSpec operator_from_config(const Config& cfg)
{
    OperatorSpec op;
    try {
        op.kind = operator_kind_from_string(cfg.get_string("op.kind", "trace"));
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    op.lambda = cfg.get_double("op.lambda", 1.0);
    op.Lambda = cfg.get_double("op.Lambda", op.lambda);
    op.delta1 = cfg.get_double("op.delta1", 0.0);
    op.delta0 = cfg.get_double("op.delta0", 0.0);
    op.n_dim = static_cast<int>(cfg.get_int("op.n_dim", 1));
    if (op.kind == OperatorSpec::Kind::BellmanIsaacs) {
        op.bi = bi_entries(cfg.get_string("op.bi.entries"), op.n_dim);
    }
    if (op.kind == OperatorSpec::Kind::Divergence) {
        op.psi = psi_from_config(cfg);
    }
    try {
        op.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    return op;
}

ProblemSpec problem_from_config(const Config& cfg)
{
    ProblemSpec spec;
    const std::string scenario = cfg.get_string("scenario", "");
    if (scenario == "jump") {
        const auto nodes = static_cast<std::size_t>(cfg.get_int("grid.nodes", 401));
        const auto n = static_cast<int>(cfg.get_int("b.n", 32));
        try {
            spec = make_jump_scenario(nodes, n).spec;
        } catch (const DomainError& e) {
            throw ConfigError(e.what());
        }
    } else if (!scenario.empty()) {
        throw ConfigError("scenario must be jump, got '" + scenario + "'");
    } else {
        spec.u0 = jump_datum;
    }
    spec.geometry = geometry_from_config(cfg, spec.geometry);
    if (cfg.has("op.kind") || cfg.has("op.lambda") || cfg.has("op.n_dim")) {
        spec.op = operator_from_config(cfg);
    } else if (spec.geometry.radial()) {
        spec.op.n_dim = spec.geometry.n_dim;
    }
    if (cfg.has("b.kind")) {
        spec.b = b_from_config(cfg);
    }
    if (cfg.has("b.n")) {
        const auto n = cfg.get_int("b.n");
        if (n < 1) {
            throw ConfigError("b.n must be >= 1");
        }
        spec.bn = BnFamily{static_cast<int>(n)};
    }
    if (!spec.bn) {
        spec.bn = BnFamily{32};
    }
    const auto nodes = cfg.get_int("grid.nodes", static_cast<std::int64_t>(spec.nodes));
    if (nodes < 3) {
        throw ConfigError("grid.nodes must be >= 3");
    }
    spec.nodes = static_cast<std::size_t>(nodes);
    spec.T = cfg.get_double("time.T", spec.T);
    spec.dt = cfg.get_double("time.dt", spec.dt);
    if (cfg.has("g.value")) {
        const double g = cfg.get_double("g.value");
        spec.g = [g](double, double) { return g; };
    }
    const std::string u0 = cfg.get_string("u0.kind", "");
    if (u0 == "jump") {
        spec.u0 = jump_datum;
        spec.u0_values.clear();
    } else if (u0 == "constant") {
        const double v = cfg.get_double("u0.value");
        spec.u0 = [v](double) { return v; };
        spec.u0_values.clear();
    } else if (u0 == "table") {
        spec.u0_values = cfg.get_list("u0.values");
    } else if (!u0.empty()) {
        throw ConfigError("u0.kind must be jump, constant or table, got '" + u0 + "'");
    }
    spec.validate();
    return spec;
}

SolverPolicy policy_from_config(const Config& cfg)
{
    SolverPolicy p;
    p.newton.max_iters = static_cast<int>(cfg.get_int("solver.newton.max_iters", p.newton.max_iters));
    p.newton.abs_tol = cfg.get_double("solver.newton.abs_tol", p.newton.abs_tol);
    p.newton.rel_tol = cfg.get_double("solver.newton.rel_tol", p.newton.rel_tol);
    p.newton.damping = cfg.get_double("solver.newton.damping", p.newton.damping);
    p.adaptive_dt.enabled = cfg.get_bool("solver.adaptive.enabled", p.adaptive_dt.enabled);
    p.adaptive_dt.shrink = cfg.get_double("solver.adaptive.shrink", p.adaptive_dt.shrink);
    p.adaptive_dt.growth = cfg.get_double("solver.adaptive.growth", p.adaptive_dt.growth);
    p.adaptive_dt.target_iters =
        static_cast<int>(cfg.get_int("solver.adaptive.target_iters", p.adaptive_dt.target_iters));
    p.adaptive_dt.min_dt = cfg.get_double("solver.adaptive.min_dt", p.adaptive_dt.min_dt);
    p.max_principle_tol = cfg.get_double("solver.max_principle_tol", p.max_principle_tol);
    p.validate();
    return p;
}

} // namespace ellpar
