// ellpar command line: solve, sweep-n, verify-barrier, envelope, crossing,
// compare and accept. Exit codes: 0 pass, 1 failure, 2 configuration error.
#include "ellpar/barriers.hpp"
#include "ellpar/config.hpp"
#include "ellpar/errors.hpp"
#include "ellpar/harness.hpp"
#include "ellpar/io.hpp"
#include "ellpar/regularize.hpp"
#include "ellpar/solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <stdexcept>

namespace {

using nlohmann::json;
using namespace ellpar;

json optional_json(const std::optional<double>& v)
{
    return v ? json(*v) : json(nullptr);
}

void make_dir(const std::string& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw ConfigError("cannot create " + dir + ": " + ec.message());
    }
}

std::string join(const std::string& dir, const char* name)
{
    return (std::filesystem::path(dir) / name).string();
}

json stats_json(const RunStats& s)
{
    return {{"steps", s.steps},
            {"rejected_steps", s.rejected_steps},
            {"max_newton_iters", s.max_newton_iters},
            {"total_newton_iters", s.total_newton_iters},
            {"min_dt", s.min_dt},
            {"max_principle_margin", s.max_principle_margin}};
}

// Fails on keys that no builder consumed, which catches typos.
void reject_unused(const Config& cfg)
{
    const auto unused = cfg.unused_keys();
    if (!unused.empty()) {
        std::string msg = "unknown config keys:";
        for (const auto& k : unused) {
            msg += " " + k;
        }
        throw ConfigError(msg);
    }
}

int cmd_solve(const std::string& config, const std::string& out)
{
    const Config cfg = Config::load(config);
    const ProblemSpec spec = problem_from_config(cfg);
    const SolverPolicy policy = policy_from_config(cfg);
    reject_unused(cfg);
    const auto result = run(spec, policy);
    make_dir(out);
    write_field_csv(join(out, "field.csv"), result.field);
    write_front_csv(join(out, "front.csv"), result.field);
    write_json(join(out, "summary.json"),
               {{"extinction_time", optional_json(result.field.extinction_time)},
                {"nodes", result.field.nodes()},
                {"levels", result.field.levels()},
                {"stats", stats_json(result.stats)}});
    std::cout << "extinction_time " << (result.field.extinction_time ? format_double(*result.field.extinction_time) : "none")
              << '\n';
    return 0;
}

int cmd_sweep(const std::string& config, const std::vector<int>& n_list, const std::string& out)
{
    const Config cfg = Config::load(config);
    const ProblemSpec spec = problem_from_config(cfg);
    const SolverPolicy policy = policy_from_config(cfg);
    reject_unused(cfg);
    const auto rep = singular_limit_study(spec, n_list, policy);
    json ext = json::array();
    for (const auto& t : rep.extinction_times) {
        ext.push_back(optional_json(t));
    }
    json stats = json::array();
    for (const auto& s : rep.stats) {
        stats.push_back(stats_json(s));
    }
    const json j = {{"n", rep.n_list},
                    {"extinction_times", ext},
                    {"extinction_gaps", rep.extinction_gaps},
                    {"probe_times", rep.probe_times},
                    {"distances", rep.distances},
                    {"distances_decreasing", rep.distances_decreasing},
                    {"extinction_cauchy", rep.extinction_cauchy},
                    {"stats", stats}};
    make_dir(out);
    write_json(join(out, "convergence.json"), j);
    const bool pass = rep.distances_decreasing && rep.extinction_cauchy;
    std::cout << "singular limit: " << (pass ? "PASS" : "FAIL") << '\n';
    return pass ? 0 : 1;
}

int cmd_verify_barrier(const std::string& family, const std::string& config, const std::string& out)
{
    const Config cfg = Config::load(config);
    const OperatorSpec op = operator_from_config(cfg);
    const BSpec b = b_from_config(cfg);
    std::optional<BnFamily> bn;
    if (cfg.has("b.n")) {
        bn = BnFamily{static_cast<int>(cfg.get_int("b.n"))};
    }
    const auto samples = static_cast<std::size_t>(cfg.get_int("barrier.samples", 1000));
    const std::string sign_text = cfg.get_string("barrier.sign", "sub");
    if (sign_text != "sub" && sign_text != "super") {
        throw ConfigError("barrier.sign must be sub or super");
    }
    const BarrierSign sign = sign_text == "sub" ? BarrierSign::Sub : BarrierSign::Super;
    MarginReport rep;
    json params;
    if (family == "radial") {
        const auto bar = solve_radial_barrier(op, cfg.get_double("barrier.rho0"), cfg.get_double("barrier.a_hat"),
                                              cfg.get_double("barrier.b_hat"), cfg.get_double("barrier.omega", 0.0),
                                              sign);
        reject_unused(cfg);
        params = {{"gamma", bar.gamma}, {"alpha", bar.alpha}, {"beta", bar.beta},
                  {"c", bar.c},         {"eps", bar.eps},     {"rho_c", bar.rho_c}};
        rep = verify_subsolution_margin(bar, op, b, bn, samples);
    } else if (family == "heatkernel") {
        const auto bar = solve_heat_kernel_barrier(op, cfg.get_double("barrier.d"), cfg.get_double("barrier.delta"),
                                                   cfg.get_double("barrier.c_bound"));
        reject_unused(cfg);
        params = {{"k", bar.k}, {"eps", bar.eps}, {"eta", bar.eta}, {"alpha_scale", bar.alpha_scale}};
        rep = verify_subsolution_margin(bar, op, b, bn, samples);
    } else if (family == "logdiv") {
        const auto bar = solve_logdiv_barrier(op.psi, b, cfg.get_double("barrier.omega"), cfg.get_double("barrier.rho0"),
                                              cfg.get_double("barrier.M"), op.n_dim);
        reject_unused(cfg);
        params = {{"k", bar.k}, {"a", bar.a}, {"eta", bar.eta}, {"eta0", bar.eta0}};
        rep = verify_subsolution_margin(bar, op, b, bn, samples);
    } else if (family == "parabola") {
        const std::string variant = cfg.get_string("barrier.variant", "decr-parabola");
        ParabolaBarrier bar;
        if (variant == "decr-parabola") {
            bar = ParabolaBarrier::decr_parabola(op);
        } else if (variant == "eps-eta") {
            bar = ParabolaBarrier::eps_eta(op, cfg.get_double("barrier.M"), cfg.get_double("barrier.r"),
                                           cfg.get_double("barrier.eps"), cfg.get_double("barrier.eta"));
        } else {
            throw ConfigError("barrier.variant must be decr-parabola or eps-eta");
        }
        reject_unused(cfg);
        params = {{"variant", variant}, {"gamma", bar.gamma}, {"M", bar.M}, {"eps", bar.eps}, {"eta", bar.eta}};
        rep = verify_subsolution_margin(bar, op, b, bn, samples);
    } else {
        throw ConfigError("--family must be radial, heatkernel, logdiv or parabola");
    }
    json extras = json::object();
    for (const auto& [k, v] : rep.extras) {
        extras[k] = v;
    }
    const json j = {{"family", rep.family},
                    {"sign", to_string(rep.sign)},
                    {"strict", rep.strict},
                    {"pass", rep.pass},
                    {"samples", rep.samples},
                    {"worst_residual", rep.worst_residual},
                    {"worst_relative", rep.worst_relative},
                    {"scale", rep.scale},
                    {"flux_gap", optional_json(rep.flux_gap)},
                    {"extras", extras},
                    {"parameters", params}};
    if (out.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        write_json(out, j);
    }
    return rep.pass ? 0 : 1;
}

int cmd_envelope(const std::string& in, double r, const std::string& kind, const std::string& out)
{
    if (kind != "sup" && kind != "inf") {
        throw ConfigError("--kind must be sup or inf");
    }
    const auto field = read_field_csv(in);
    try {
        const auto c = kind == "sup" ? sup_convolve(field, r) : inf_convolve(field, r);
        write_convolved_csv(out, c);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    return 0;
}

int cmd_crossing(const std::string& z_path, const std::string& w_path)
{
    const auto zf = read_convolved_csv(z_path);
    const auto wf = read_convolved_csv(w_path);
    if (zf.kind != ConvolutionKind::Sup || wf.kind != ConvolutionKind::Inf) {
        throw ConfigError("--z needs a sup-convolution and --w an inf-convolution");
    }
    CrossingResult res;
    try {
        res = crossing_time(zf.as_convolved(), wf.as_convolved());
    } catch (const GridMismatch& e) {
        throw ConfigError(e.what());
    }
    json nodes = json::array();
    for (std::size_t i : res.contact_nodes) {
        nodes.push_back({{"index", i}, {"x", zf.field.x[i]}});
    }
    const json j = {{"t0", optional_json(res.t0)}, {"contact_nodes", nodes}, {"min_gap", res.min_gap}};
    std::cout << j.dump(2) << '\n';
    return res.t0 ? 1 : 0;
}

int cmd_compare(const std::string& config, double gap, const std::string& out)
{
    const Config cfg = Config::load(config);
    Scenario base;
    base.name = "config";
    base.spec = problem_from_config(cfg);
    const SolverPolicy policy = policy_from_config(cfg);
    reject_unused(cfg);
    const auto pair = make_comparison_pair(base, gap);
    const auto u = run(pair.lower.spec, policy).field;
    const auto v = run(pair.upper.spec, policy).field;
    require_same_grid(u, v);
    double worst = -std::numeric_limits<double>::infinity();
    std::size_t violations = 0;
    for (std::size_t j = 0; j < u.levels(); ++j) {
        for (std::size_t i = 0; i < u.nodes(); ++i) {
            const double d = u.values[j][i] - v.values[j][i];
            worst = std::max(worst, d);
            violations += d > 1e-9 ? 1 : 0;
        }
    }
    const json j = {{"gap", gap},
                    {"max_u_minus_v", worst},
                    {"violations", violations},
                    {"extinction_lower", optional_json(u.extinction_time)},
                    {"extinction_upper", optional_json(v.extinction_time)}};
    if (!out.empty()) {
        make_dir(out);
        write_field_csv(join(out, "lower.csv"), u);
        write_field_csv(join(out, "upper.csv"), v);
        write_json(join(out, "compare.json"), j);
    }
    std::cout << j.dump(2) << '\n';
    return violations == 0 ? 0 : 1;
}

int cmd_accept(const AcceptanceOptions& options, const std::string& report, const std::string& fault)
{
    if (fault == "flip-pucci-minus") {
        fault::flip_pucci_minus = true;
    } else if (!fault.empty()) {
        throw ConfigError("unknown fault '" + fault + "'");
    }
    const auto result = run_acceptance(options);
    for (const auto& c : result.criteria) {
        std::cout << format_line(c) << '\n';
    }
    std::cout << (result.pass ? "acceptance: PASS" : "acceptance: FAIL") << '\n';
    if (!report.empty()) {
        write_json(report, to_json(result));
    }
    return result.pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Parabolic-elliptic free boundary toolkit"};
    app.require_subcommand(1);

    std::string config;
    std::string out;

    auto* solve = app.add_subcommand("solve", "run one problem and write field, front and summary");
    solve->add_option("--config", config)->required();
    solve->add_option("--out", out)->required();

    std::vector<int> n_list{4, 8, 16, 32};
    std::string sweep_out = ".";
    auto* sweep = app.add_subcommand("sweep-n", "singular-limit study over b_n");
    sweep->add_option("--config", config)->required();
    sweep->add_option("--n", n_list)->delimiter(',');
    sweep->add_option("--out", sweep_out, "directory for convergence.json");

    std::string family;
    auto* barrier = app.add_subcommand("verify-barrier", "build a barrier and check its margin");
    barrier->add_option("--family", family)->required()->check(
        CLI::IsMember({"radial", "heatkernel", "logdiv", "parabola"}));
    barrier->add_option("--config", config)->required();
    barrier->add_option("--out", out, "JSON file (default stdout)");

    std::string in;
    double r = 0.0;
    std::string kind = "sup";
    auto* envelope = app.add_subcommand("envelope", "sup- or inf-convolution of a field");
    envelope->add_option("--in", in)->required();
    envelope->add_option("--r", r)->required();
    envelope->add_option("--kind", kind)->check(CLI::IsMember({"sup", "inf"}));
    envelope->add_option("--out", out)->required();

    std::string z_path;
    std::string w_path;
    auto* crossing = app.add_subcommand("crossing", "first time W - Z <= 0");
    crossing->add_option("--z", z_path)->required();
    crossing->add_option("--w", w_path)->required();

    double gap = 0.05;
    auto* compare = app.add_subcommand("compare", "run an ordered pair and check nodewise order");
    compare->add_option("--config", config)->required();
    compare->add_option("--gap", gap);
    compare->add_option("--out", out);

    AcceptanceOptions options;
    std::string report;
    std::string fault_name;
    auto* accept = app.add_subcommand("accept", "run the acceptance criteria");
    accept->add_option("--only", options.only, "criterion ids")->delimiter(',');
    accept->add_option("--seed", options.seed);
    accept->add_option("--threads", options.threads, "0 = all cores");
    accept->add_option("--report", report, "JSON report path");
    accept->add_option("--fault", fault_name, "inject a fault (flip-pucci-minus)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*solve) {
            return cmd_solve(config, out);
        }
        if (*sweep) {
            return cmd_sweep(config, n_list, sweep_out);
        }
        if (*barrier) {
            return cmd_verify_barrier(family, config, out);
        }
        if (*envelope) {
            return cmd_envelope(in, r, kind, out);
        }
        if (*crossing) {
            return cmd_crossing(z_path, w_path);
        }
        if (*compare) {
            return cmd_compare(config, gap, out);
        }
        return cmd_accept(options, report, fault_name);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
