#include "ellpar/harness.hpp"

#include "ellpar/barriers.hpp"
#include "ellpar/errors.hpp"
#include "ellpar/geometry.hpp"
#include "ellpar/oracles.hpp"
#include "ellpar/regularize.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

namespace ellpar {

double jump_datum(double x)
{
    const double a = std::abs(x);
    return a < 0.3 ? 0.5 * (1.0 - x * x / 0.09) : -(a - 0.3) / 0.7;
}

Scenario make_jump_scenario(std::size_t nodes, int n)
{
    if (nodes < 101) {
        throw DomainError("make_jump_scenario: grid needs at least 101 nodes");
    }
    if (n < 1) {
        throw DomainError("make_jump_scenario: n must be >= 1");
    }
    Scenario s;
    s.name = "jump";
    s.spec.geometry = Geometry::interval(-1.0, 1.0);
    s.spec.bn = BnFamily{n};
    s.spec.u0 = jump_datum;
    s.spec.nodes = nodes;
    s.spec.dt = kJumpDt;
    s.spec.T = 1.0;
    const double h = 2.0 / static_cast<double>(nodes - 1);
    s.expectations = {
        {"extinction_time_finite", 0.0},
        {"extinction_refinement_shift", 2.0 * (kJumpDt + h)},
        {"post_extinction_distance_to_minus_one", 0.05},
    };
    return s;
}

ComparisonPair make_comparison_pair(const Scenario& base, double gap)
{
    if (!(gap > 0.0) || !std::isfinite(gap)) {
        throw DomainError("make_comparison_pair: gap must be positive");
    }
    ComparisonPair p;
    p.lower = base;
    p.upper = base;
    p.upper.name = base.name + "-upper";
    const Grid grid = make_problem_grid(base.spec);
    auto u0 = perturb_initial(grid, initial_field(base.spec, grid), gap, true);
    for (double& v : u0) {
        v += 0.5 * gap;
    }
    p.upper.spec.u0_values = std::move(u0);
    const ProblemSpec& b = base.spec;
    p.upper.spec.g = [b, gap](double x, double t) { return b.boundary(x, t) + 0.5 * gap; };
    p.upper.expectations = {{"nodewise_order_over_lower", 1e-9}};
    return p;
}

ClassPReport check_class_p(const ProblemSpec& spec, double tol)
{
    const Grid grid = make_problem_grid(spec);
    std::vector<double> u(grid.size());
    if (!spec.u0_values.empty()) {
        u = spec.u0_values;
    } else {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            u[i] = spec.u0(grid.x[i]);
        }
    }
    ClassPReport rep;
    rep.boundary_error = std::abs(u.back() + 1.0);
    if (!grid.inner_mirror()) {
        rep.boundary_error = std::max(rep.boundary_error, std::abs(u.front() + 1.0));
    }
    const auto F = apply_operator_1d(spec.op, grid, u, spec.b);
    const double h2 = grid.h * grid.h;
    for (std::size_t i = grid.first_unknown(); i + 1 < grid.size(); ++i) {
        const bool left_neg = i == 0 || u[i - 1] < 0.0;
        if (left_neg && u[i] < 0.0 && u[i + 1] < 0.0) {
            rep.negative_residual = std::max(rep.negative_residual, h2 * std::abs(F[i]));
        }
    }
    rep.min_front_slope = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        if ((u[i] > 0.0) != (u[i + 1] > 0.0)) {
            ++rep.interfaces;
            rep.min_front_slope = std::min(rep.min_front_slope, std::abs(u[i + 1] - u[i]) / grid.h);
        }
    }
    if (rep.interfaces == 0) {
        rep.min_front_slope = 0.0;
    }
    const std::size_t max_interfaces = grid.radial() ? 1 : 2;
    rep.pass = rep.boundary_error <= tol && rep.negative_residual <= tol &&
               rep.interfaces <= max_interfaces && (rep.interfaces == 0 || rep.min_front_slope > 0.0);
    return rep;
}

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

unsigned thread_count(const AcceptanceOptions& o)
{
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    return o.threads == 0 ? hw : o.threads;
}

// Calls fn(k) for k in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn)
{
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= count) {
                return;
            }
            try {
                fn(k);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

json optional_json(const std::optional<double>& v)
{
    return v ? json(*v) : json(nullptr);
}

OperatorSpec pucci_op(OperatorSpec::Kind kind, double lambda, double Lambda, int n, double d1 = 0.0,
                      double d0 = 0.0)
{
    OperatorSpec op;
    op.kind = kind;
    op.lambda = lambda;
    op.Lambda = Lambda;
    op.n_dim = n;
    op.delta1 = d1;
    op.delta0 = d0;
    return op;
}

// Finite Bellman-Isaacs family with 2 x 3 branches, eigenvalues of A in
// [lambda, Lambda], |drift| <= 0.9 delta1 and -delta0 <= c <= 0.
OperatorSpec bellman_isaacs_op(int n, std::mt19937_64& rng)
{
    OperatorSpec op = pucci_op(OperatorSpec::Kind::BellmanIsaacs, 0.5, 2.0, n, 0.3, 0.2);
    std::uniform_real_distribution<double> ev(op.lambda, op.Lambda);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 3; ++b) {
            Eigen::MatrixXd Q(n, n);
            for (int r = 0; r < n; ++r) {
                for (int c = 0; c < n; ++c) {
                    Q(r, c) = g(rng);
                }
            }
            const Eigen::MatrixXd R = Eigen::HouseholderQR<Eigen::MatrixXd>(Q).householderQ();
            Eigen::VectorXd d(n);
            for (int k = 0; k < n; ++k) {
                d(k) = ev(rng);
            }
            Eigen::MatrixXd A = R * d.asDiagonal() * R.transpose();
            A = (0.5 * (A + A.transpose())).eval();
            Eigen::VectorXd drift(n);
            for (int k = 0; k < n; ++k) {
                drift(k) = g(rng);
            }
            drift *= 0.9 * op.delta1 * u(rng) / drift.norm();
            op.bi.push_back({a, b, A, drift, -op.delta0 * u(rng)});
        }
    }
    return op;
}

// State shared between criteria 6 and 10.
struct PairCache {
    std::optional<SpaceTimeField> lower;
    std::vector<double> gaps;
    std::vector<std::size_t> kept; ///< pair indices whose upper field is kept
    std::vector<SpaceTimeField> kept_upper;
};

constexpr std::size_t kPairCount = 100;
constexpr std::size_t kKeptPairStride = 10;

std::vector<double> pair_gaps(std::uint64_t seed)
{
    std::mt19937_64 rng(seed ^ 0x6a09e667f3bcc909ULL);
    std::uniform_real_distribution<double> u(0.02, 0.1);
    std::vector<double> gaps(kPairCount);
    for (double& g : gaps) {
        g = u(rng);
    }
    return gaps;
}

// ---------------------------------------------------------------- criteria

CriterionResult criterion_bn(const AcceptanceOptions&)
{
    CriterionResult c;
    const std::size_t samples = 1000;
    double min_d = 1.0;
    double max_d = 0.0;
    std::size_t bad = 0;
    std::vector<double> sup_dev;
    for (int n = 1; n <= 64; ++n) {
        double dev = 0.0;
        for (std::size_t k = 0; k < samples; ++k) {
            const double s = -10.0 + 20.0 * static_cast<double>(k) / static_cast<double>(samples - 1);
            const double d = bn_derivative(BnFamily{n}, s);
            min_d = std::min(min_d, d);
            max_d = std::max(max_d, d);
            if (!(d > 0.0 && d < 1.0)) {
                ++bad;
            }
            dev = std::max(dev, std::abs(bn_eval(BnFamily{n}, s) - std::max(s, 0.0)));
        }
        sup_dev.push_back(dev);
    }
    bool decreasing = true;
    double worst_decrease = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < sup_dev.size(); ++k) {
        worst_decrease = std::min(worst_decrease, sup_dev[k - 1] - sup_dev[k]);
        decreasing = decreasing && sup_dev[k] < sup_dev[k - 1];
    }
    double oracle_err = 0.0;
    bool finite = true;
    for (double s : {-1e3, 1e3}) {
        const double v = bn_eval(BnFamily{64}, s);
        finite = finite && std::isfinite(v);
        oracle_err = std::max(oracle_err, std::abs(v - oracle::bn_mpfr(64, s)));
    }
    c.pass = bad == 0 && decreasing && finite && oracle_err <= 1e-9;
    c.margins = {{"derivative_violations", bad},
                 {"min_derivative", min_d},
                 {"one_minus_max_derivative", 1.0 - max_d},
                 {"sup_deviation_n1", sup_dev.front()},
                 {"sup_deviation_n64", sup_dev.back()},
                 {"smallest_successive_decrease", worst_decrease},
                 {"oracle_error_n64_s1e3", oracle_err}};
    std::ostringstream d;
    d << "b_n' in (0,1) on " << 64 * samples << " samples, sup|b_n - s+| decreasing "
      << (decreasing ? "yes" : "no") << ", MPFR error " << oracle_err;
    c.detail = d.str();
    return c;
}

CriterionResult criterion_pucci(const AcceptanceOptions& o)
{
    CriterionResult c;
    std::mt19937_64 rng(o.seed + 2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double lam = 1.0;
    const double Lam = 2.0;
    double worst_sup_gap = 0.0;
    double worst_inf_gap = 0.0;
    double worst_wrong_side = 0.0;
    for (int k = 0; k < 100; ++k) {
        Eigen::Matrix2d M;
        M(0, 0) = u(rng);
        M(1, 1) = u(rng);
        M(0, 1) = M(1, 0) = u(rng);
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(M);
        const std::vector<double> ev{es.eigenvalues()(0), es.eigenvalues()(1)};
        const auto brute = oracle::pucci_bruteforce_2x2(M, lam, Lam, 10000, o.seed + 100 + k);
        const double up = pucci_plus(ev, lam, Lam) - brute.sup;
        const double lo = brute.inf - pucci_minus(ev, lam, Lam);
        worst_sup_gap = std::max(worst_sup_gap, up);
        worst_inf_gap = std::max(worst_inf_gap, lo);
        worst_wrong_side = std::min({worst_wrong_side, up, lo});
    }
    std::size_t duality_failures = 0;
    std::size_t degenerate_failures = 0;
    std::uniform_real_distribution<double> e10(-10.0, 10.0);
    std::uniform_real_distribution<double> l(0.1, 3.0);
    for (int k = 0; k < 10000; ++k) {
        std::vector<double> e(1 + k % 5);
        std::vector<double> ne(e.size());
        double tr = 0.0;
        for (std::size_t i = 0; i < e.size(); ++i) {
            e[i] = e10(rng);
            ne[i] = -e[i];
            tr += e[i];
        }
        const double a = l(rng);
        const double b = a + l(rng);
        if (pucci_minus(e, a, b) != -pucci_plus(ne, a, b)) {
            ++duality_failures;
        }
        if (pucci_plus(e, a, a) != a * tr || pucci_minus(e, a, a) != a * tr) {
            ++degenerate_failures;
        }
    }
    // the brute force is a sampled sup, so the exact formula may only sit above it
    const bool one_sided = worst_wrong_side >= -1e-12;
    c.pass = one_sided && worst_sup_gap <= 1e-3 && worst_inf_gap <= 1e-3 && duality_failures == 0 &&
             degenerate_failures == 0;
    c.margins = {{"max_sup_gap", worst_sup_gap},
                 {"max_inf_gap", worst_inf_gap},
                 {"most_negative_gap", worst_wrong_side},
                 {"duality_failures", duality_failures},
                 {"degenerate_failures", degenerate_failures}};
    std::ostringstream d;
    d << "one-sided gaps " << worst_sup_gap << " / " << worst_inf_gap << ", duality failures "
      << duality_failures << ", degenerate failures " << degenerate_failures;
    c.detail = d.str();
    return c;
}

CriterionResult criterion_structural(const AcceptanceOptions& o)
{
    CriterionResult c;
    std::mt19937_64 rng(o.seed + 3);
    const std::vector<OperatorSpec> ops{
        pucci_op(OperatorSpec::Kind::Trace, 0.5, 2.0, 2, 0.0, 0.0),
        pucci_op(OperatorSpec::Kind::PucciPlus, 0.5, 2.0, 2, 0.0, 0.0),
        pucci_op(OperatorSpec::Kind::PucciMinus, 0.5, 2.0, 2, 0.0, 0.0),
        bellman_isaacs_op(2, rng),
    };
    c.pass = true;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < ops.size(); ++k) {
        const auto rep = structural_envelope_check(ops[k], 10000, o.seed + 30 + k, 1e-10);
        c.margins[to_string(ops[k].kind)] = rep.worst_margin;
        worst = std::min(worst, rep.worst_margin);
        c.pass = c.pass && rep.pass && rep.worst_margin >= -1e-10;
    }
    std::ostringstream d;
    d << "4 kinds x 10000 trials, worst margin " << worst;
    c.detail = d.str();
    return c;
}

CriterionResult criterion_barriers(const AcceptanceOptions&)
{
    CriterionResult c;
    c.pass = true;
    const BSpec b = BSpec::positive_part();
    struct RadialCase {
        OperatorSpec op;
        double rho0;
        double a_hat;
        double b_hat;
        double omega;
        BarrierSign sign;
    };
    std::mt19937_64 rng(7);
    const std::vector<RadialCase> radial{
        {pucci_op(OperatorSpec::Kind::PucciMinus, 1.0, 2.0, 2), 1.0, 1.0, -0.5, 0.8, BarrierSign::Sub},
        {pucci_op(OperatorSpec::Kind::PucciMinus, 1.0, 3.0, 3, 0.7, 0.2), 0.6, 2.0, -1.5, 0.5,
         BarrierSign::Sub},
        {pucci_op(OperatorSpec::Kind::PucciMinus, 1.0, 2.0, 3, 0.3), 0.8, 1.0, -0.4, 0.6,
         BarrierSign::Super},
        {bellman_isaacs_op(2, rng), 0.5, 1.0, -0.4, 1.0, BarrierSign::Sub},
        {bellman_isaacs_op(2, rng), 0.5, 1.0, -0.4, 1.0, BarrierSign::Super},
    };
    double worst_rel = std::numeric_limits<double>::infinity();
    double worst_flux = 0.0;
    for (const auto& rc : radial) {
        const auto bar = solve_radial_barrier(rc.op, rc.rho0, rc.a_hat, rc.b_hat, rc.omega, rc.sign);
        const auto rep = verify_subsolution_margin(bar, rc.op, b, std::nullopt, 1000);
        // signed so that a strict certificate is >= kMarginRelative
        const double margin = rc.sign == BarrierSign::Sub ? -rep.worst_relative : rep.worst_relative;
        worst_rel = std::min(worst_rel, margin);
        // the super variant is the negated sub barrier, so its gap flips sign
        const double sgn = rc.sign == BarrierSign::Sub ? 1.0 : -1.0;
        const double flux_err = rep.flux_gap ? std::abs(*rep.flux_gap - sgn * (rc.a_hat + rc.b_hat))
                                             : std::numeric_limits<double>::infinity();
        worst_flux = std::max(worst_flux, flux_err);
        c.pass = c.pass && rep.pass && margin >= kMarginRelative && flux_err <= 1e-10;
    }
    struct LogCase {
        PsiSpec psi;
        BSpec b;
        double omega;
        double rho0;
        double M;
        int n;
    };
    const std::vector<LogCase> logs{
        {PsiSpec::constant(1.0), BSpec::positive_part(), 0.0, 1.0, 1.0, 2},
        {PsiSpec::polynomial({1.0, 0.5, 0.25}), BSpec::positive_part(), 1.0, 0.5, 0.5, 2},
        {PsiSpec::polynomial({2.0, -0.3}), BSpec::table({0.0, 0.4}, {2.0, 0.5}), 0.7, 1.0, 1.0, 3},
        {PsiSpec::constant(0.5), BSpec::positive_part(), 2.0, 0.3, 0.2, 1},
    };
    for (const auto& lc : logs) {
        OperatorSpec op;
        op.kind = OperatorSpec::Kind::Divergence;
        op.n_dim = lc.n;
        op.psi = lc.psi;
        const auto bar = solve_logdiv_barrier(lc.psi, lc.b, lc.omega, lc.rho0, lc.M, lc.n);
        const auto rep = verify_subsolution_margin(bar, op, lc.b, std::nullopt, 1000);
        worst_rel = std::min(worst_rel, rep.worst_relative);
        c.pass = c.pass && rep.pass && rep.worst_relative >= kMarginRelative;
    }
    // infeasibility exactly beyond rho_c = (lambda + (n - 1) Lambda) / (2 delta1)
    std::size_t threshold_failures = 0;
    for (int n : {1, 2, 3}) {
        for (double d1 : {0.5, 1.0, 2.5}) {
            const auto op = pucci_op(OperatorSpec::Kind::PucciMinus, 1.0, 2.0, n, d1);
            const double rho_c = (op.lambda + (n - 1) * op.Lambda) / (2.0 * d1);
            auto feasible = [&](double rho0) {
                try {
                    (void)solve_radial_barrier(op, rho0, 1.0, -0.5, 0.0);
                    return true;
                } catch (const InfeasibleError&) {
                    return false;
                }
            };
            const bool ok = feasible(0.5 * rho_c) && feasible(rho_c) &&
                            !feasible(std::nextafter(rho_c, INFINITY)) && !feasible(2.0 * rho_c);
            threshold_failures += ok ? 0 : 1;
        }
    }
    c.pass = c.pass && threshold_failures == 0;
    c.margins = {{"worst_relative_margin", worst_rel},
                 {"required_relative_margin", kMarginRelative},
                 {"max_flux_gap_error", worst_flux},
                 {"rho_c_threshold_failures", threshold_failures}};
    std::ostringstream d;
    d << radial.size() << " radial + " << logs.size() << " log barriers, worst relative margin "
      << worst_rel << ", flux error " << worst_flux << ", rho_c failures " << threshold_failures;
    c.detail = d.str();
    return c;
}

CriterionResult criterion_harnack(const AcceptanceOptions& o)
{
    CriterionResult c;
    std::mt19937_64 rng(o.seed + 5);
    std::uniform_real_distribution<double> lr(std::log(0.1), std::log(10.0));
    std::uniform_real_distribution<double> ls(1.3, 8.0);
    double worst_slack = std::numeric_limits<double>::infinity();
    double worst_k_slack = std::numeric_limits<double>::infinity();
    std::size_t failures = 0;
    for (int k = 0; k < 50; ++k) {
        const double r = std::exp(lr(rng));
        const double s = r * std::pow(10.0, -ls(rng));
        const auto chain = geometry::harnack_chain(r, s);
        bool ok = true;
        for (std::size_t j = 0; j < chain.a.size(); ++j) {
            const double bound = geometry::harnack_radius_lower_bound(r, s, j);
            const double rel = (chain.a[j] - bound) / bound;
            worst_slack = std::min(worst_slack, rel);
            ok = ok && rel >= -1e-12;
        }
        const double kb = geometry::harnack_length_bound(r, s);
        worst_k_slack = std::min(worst_k_slack, kb - static_cast<double>(chain.k));
        ok = ok && static_cast<double>(chain.k) <= kb && chain.a.back() >= r / 2.0 + s;
        failures += ok ? 0 : 1;
    }
    c.pass = failures == 0;
    c.margins = {{"failures", failures},
                 {"min_relative_radius_slack", worst_slack},
                 {"min_length_bound_slack", worst_k_slack}};
    std::ostringstream d;
    d << "50 pairs, min radius slack " << worst_slack << ", min kBound slack " << worst_k_slack;
    c.detail = d.str();
    return c;
}

void fill_pairs(PairCache& cache, const AcceptanceOptions& o, bool keep_all_needed)
{
    (void)keep_all_needed;
    if (cache.lower) {
        return;
    }
    const Scenario base = make_jump_scenario(401, 32);
    cache.gaps = pair_gaps(o.seed);
    cache.lower = run(base.spec).field;
    for (std::size_t k = 0; k < kPairCount; k += kKeptPairStride) {
        cache.kept.push_back(k);
    }
    cache.kept_upper.resize(cache.kept.size());
}

CriterionResult criterion_comparison(const AcceptanceOptions& o, PairCache& cache)
{
    CriterionResult c;
    fill_pairs(cache, o, true);
    const Scenario base = make_jump_scenario(401, 32);
    const SpaceTimeField& u = *cache.lower;
    std::vector<double> violation(kPairCount, 0.0);
    std::vector<double> min_gap(kPairCount, 0.0);
    std::vector<std::size_t> count(kPairCount, 0);
    std::vector<bool> complete(kPairCount, false);
    parallel_for(kPairCount, thread_count(o), [&](std::size_t k) {
        const auto pair = make_comparison_pair(base, cache.gaps[k]);
        auto v = run(pair.upper.spec).field;
        complete[k] = v.times == u.times;
        double worst = -std::numeric_limits<double>::infinity();
        double mg = std::numeric_limits<double>::infinity();
        std::size_t bad = 0;
        for (std::size_t j = 0; j < std::min(u.levels(), v.levels()); ++j) {
            for (std::size_t i = 0; i < u.nodes(); ++i) {
                const double d = u.values[j][i] - v.values[j][i];
                worst = std::max(worst, d);
                mg = std::min(mg, -d);
                bad += d > 1e-9 ? 1 : 0;
            }
        }
        violation[k] = worst;
        min_gap[k] = mg;
        count[k] = bad;
        const auto it = std::find(cache.kept.begin(), cache.kept.end(), k);
        if (it != cache.kept.end()) {
            cache.kept_upper[static_cast<std::size_t>(it - cache.kept.begin())] = std::move(v);
        }
    });
    std::size_t bad = 0;
    for (std::size_t n : count) {
        bad += n;
    }
    const bool all_complete = std::all_of(complete.begin(), complete.end(), [](bool b) { return b; });
    const double worst = *std::max_element(violation.begin(), violation.end());
    const double smallest_gap = *std::min_element(min_gap.begin(), min_gap.end());
    c.pass = bad == 0 && all_complete;
    c.margins = {{"pairs", kPairCount},
                 {"violations_beyond_1e-9", bad},
                 {"max_u_minus_v", worst},
                 {"min_v_minus_u", smallest_gap},
                 {"gap_min", *std::min_element(cache.gaps.begin(), cache.gaps.end())},
                 {"gap_max", *std::max_element(cache.gaps.begin(), cache.gaps.end())},
                 {"levels", u.levels()}};
    std::ostringstream d;
    d << kPairCount << " pairs through T = 1, violations " << bad << ", min v - u " << smallest_gap;
    c.detail = d.str();
    return c;
}

CriterionResult criterion_jump(const AcceptanceOptions& o)
{
    CriterionResult c;
    const Scenario s401 = make_jump_scenario(401, 32);
    const Scenario s801 = make_jump_scenario(801, 32);
    SpaceTimeField f401;
    SpaceTimeField f801;
    parallel_for(2, thread_count(o), [&](std::size_t k) {
        (k == 0 ? f401 : f801) = run((k == 0 ? s401 : s801).spec).field;
    });
    const double tol = s401.expectations[1].tolerance;
    const bool finite = f401.extinction_time && f801.extinction_time;
    const double shift = finite ? std::abs(*f401.extinction_time - *f801.extinction_time)
                                : std::numeric_limits<double>::infinity();
    double post = 0.0;
    std::size_t post_levels = 0;
    if (f401.extinction_time) {
        for (std::size_t j = 0; j < f401.levels(); ++j) {
            if (f401.times[j] >= *f401.extinction_time + 0.2) {
                ++post_levels;
                for (double v : f401.values[j]) {
                    post = std::max(post, std::abs(v + 1.0));
                }
            }
        }
    }
    c.pass = finite && shift <= tol && post_levels > 0 && post <= 0.05;
    c.margins = {{"extinction_time_401", optional_json(f401.extinction_time)},
                 {"extinction_time_801", optional_json(f801.extinction_time)},
                 {"refinement_shift", shift},
                 {"refinement_tolerance", tol},
                 {"post_extinction_sup_distance", post},
                 {"post_extinction_levels", post_levels}};
    std::ostringstream d;
    d << "T_ext " << f401.extinction_time.value_or(NAN) << " (401) / "
      << f801.extinction_time.value_or(NAN) << " (801), shift " << shift << " <= " << tol
      << ", post-extinction |u + 1| " << post;
    c.detail = d.str();
    return c;
}

CriterionResult criterion_singular_limit(const AcceptanceOptions&)
{
    CriterionResult c;
    const auto rep = singular_limit_study(make_jump_scenario(401, 32).spec, {4, 8, 16, 32});
    c.pass = rep.distances_decreasing && rep.extinction_cauchy;
    json ext = json::array();
    for (const auto& t : rep.extinction_times) {
        ext.push_back(optional_json(t));
    }
    c.margins = {{"n", rep.n_list},
                 {"extinction_times", ext},
                 {"extinction_gaps", rep.extinction_gaps},
                 {"probe_times", rep.probe_times},
                 {"probe_distances", rep.distances},
                 {"distances_decreasing", rep.distances_decreasing},
                 {"extinction_cauchy", rep.extinction_cauchy}};
    std::ostringstream d;
    d << "n = 4, 8, 16, 32: distances decreasing " << (rep.distances_decreasing ? "yes" : "no")
      << ", extinction gaps";
    for (double g : rep.extinction_gaps) {
        d << ' ' << g;
    }
    c.detail = d.str();
    return c;
}

CriterionResult criterion_bracketing(const AcceptanceOptions&)
{
    CriterionResult c;
    const auto rep = bracket_maximal_minimal(make_jump_scenario(401, 32).spec, {0.1, 0.05, 0.025});
    c.pass = rep.nested && rep.sandwich_holds && rep.gaps_shrinking && rep.probe_times.size() == 3;
    json gaps = json::array();
    json sandwich = json::array();
    for (const auto& lv : rep.levels) {
        gaps.push_back(lv.gaps);
        sandwich.push_back(lv.sandwich_violation);
    }
    c.margins = {{"eps", {0.1, 0.05, 0.025}},
                 {"probe_times", rep.probe_times},
                 {"gaps", gaps},
                 {"sandwich_violation", sandwich},
                 {"nesting_violation", rep.nesting_violation},
                 {"extinction_upper_limit", optional_json(rep.extinction_upper_limit)},
                 {"extinction_lower_limit", optional_json(rep.extinction_lower_limit)},
                 {"limits_agree", rep.limits_agree}};
    std::ostringstream d;
    d << "nested " << (rep.nested ? "yes" : "no") << ", sandwich "
      << (rep.sandwich_holds ? "yes" : "no") << ", gaps shrinking "
      << (rep.gaps_shrinking ? "yes" : "no");
    c.detail = d.str();
    return c;
}

SpaceTimeField indicator_ball(double xc, double tc, double rad, double inside)
{
    SpaceTimeField f;
    for (int i = 0; i < 81; ++i) {
        f.x.push_back(-1.0 + 0.025 * i);
    }
    for (int j = 0; j < 41; ++j) {
        f.times.push_back(0.025 * j);
        std::vector<double> level;
        for (double x : f.x) {
            const double d2 = (x - xc) * (x - xc) + (f.times.back() - tc) * (f.times.back() - tc);
            level.push_back(d2 <= rad * rad ? inside : -inside);
        }
        f.values.push_back(std::move(level));
    }
    return f;
}

CriterionResult criterion_regularization(const AcceptanceOptions& o, PairCache& cache)
{
    CriterionResult c;
    if (!cache.lower) {
        // criterion 6 did not run: compute only the kept pairs
        fill_pairs(cache, o, false);
        const Scenario base = make_jump_scenario(401, 32);
        parallel_for(cache.kept.size(), thread_count(o), [&](std::size_t k) {
            cache.kept_upper[k] = run(make_comparison_pair(base, cache.gaps[cache.kept[k]]).upper.spec).field;
        });
    }
    const SpaceTimeField& u = *cache.lower;
    const std::size_t N = u.nodes();
    std::size_t order_fail = 0;
    std::size_t attain_fail = 0;
    std::size_t duality_fail = 0;
    std::size_t brute_fail = 0;
    std::size_t crossings = 0;
    double worst_cross_gap = std::numeric_limits<double>::infinity();
    json per_pair = json::array();
    for (std::size_t k = 0; k < cache.kept.size(); ++k) {
        const SpaceTimeField& v = cache.kept_upper[k];
        const double gap = cache.gaps[cache.kept[k]];
        const double r = 2.0 * gap;
        const auto Z = sup_convolve(u, r);
        const auto W = inf_convolve(v, r);
        SpaceTimeField neg_v = v;
        for (auto& level : neg_v.values) {
            for (double& x : level) {
                x = -x;
            }
        }
        const auto Zneg = sup_convolve(neg_v, r);
        for (std::size_t a = 0; a < Z.levels.size(); ++a) {
            const std::size_t j = Z.levels[a];
            for (std::size_t b = 0; b < Z.nodes.size(); ++b) {
                const std::size_t i = Z.nodes[b];
                order_fail += Z.values[a][b] >= u.values[j][i] ? 0 : 1;
                order_fail += W.values[a][b] <= v.values[j][i] ? 0 : 1;
                const std::size_t dz = Z.dual_index[a][b];
                const std::size_t dw = W.dual_index[a][b];
                attain_fail += u.values[dz / N][dz % N] == Z.values[a][b] ? 0 : 1;
                attain_fail += v.values[dw / N][dw % N] == W.values[a][b] ? 0 : 1;
                duality_fail += (W.values[a][b] == -Zneg.values[a][b] && dw == Zneg.dual_index[a][b]) ? 0 : 1;
            }
        }
        // exact agreement with the brute-force oracle on a spread of nodes
        std::vector<std::size_t> lv;
        std::vector<std::size_t> nd;
        for (std::size_t q = 0; q < 4; ++q) {
            lv.push_back(Z.levels[q * (Z.levels.size() - 1) / 3]);
            nd.push_back(Z.nodes[q * (Z.nodes.size() - 1) / 3]);
        }
        const auto brute = oracle::convolve_bruteforce(u, r, true, lv, nd);
        for (std::size_t a = 0; a < lv.size(); ++a) {
            const auto ia = static_cast<std::size_t>(
                std::find(Z.levels.begin(), Z.levels.end(), lv[a]) - Z.levels.begin());
            for (std::size_t b = 0; b < nd.size(); ++b) {
                const auto ib = static_cast<std::size_t>(
                    std::find(Z.nodes.begin(), Z.nodes.end(), nd[b]) - Z.nodes.begin());
                brute_fail += (brute.values[a][b] == Z.values[ia][ib] && brute.dual[a][b] == Z.dual_index[ia][ib]) ? 0 : 1;
            }
        }
        const auto cross = crossing_time(Z, W);
        crossings += cross.t0 ? 1 : 0;
        worst_cross_gap = std::min(worst_cross_gap, cross.min_gap);
        per_pair.push_back({{"gap", gap},
                            {"r", r},
                            {"t0", optional_json(cross.t0)},
                            {"min_W_minus_Z", cross.min_gap},
                            {"contact_nodes", cross.contact_nodes.size()}});
    }
    // interior-ball regularity on the indicator corpus (W on the complement)
    std::size_t ball_fail = 0;
    std::size_t ball_cases = 0;
    for (double xc : {-0.2, 0.0, 0.15}) {
        for (double rad : {0.1, 0.2, 0.3}) {
            const auto rz = interior_ball_check(sup_convolve(indicator_ball(xc, 0.5, rad, 1.0), 0.1),
                                                LevelSet::ZGeq0);
            const auto rw = interior_ball_check(inf_convolve(indicator_ball(xc, 0.5, rad, -1.0), 0.1),
                                                LevelSet::WLeq0);
            ball_cases += 2;
            ball_fail += (rz.pass && rz.boundary_nodes > 0) ? 0 : 1;
            ball_fail += (rw.pass && rw.boundary_nodes > 0) ? 0 : 1;
        }
    }
    c.pass = order_fail == 0 && attain_fail == 0 && duality_fail == 0 && brute_fail == 0 &&
             ball_fail == 0 && crossings == 0;
    c.margins = {{"pairs_checked", cache.kept.size()},
                 {"order_failures", order_fail},
                 {"dual_attain_failures", attain_fail},
                 {"duality_failures", duality_fail},
                 {"bruteforce_mismatches", brute_fail},
                 {"interior_ball_cases", ball_cases},
                 {"interior_ball_failures", ball_fail},
                 {"pairs_with_crossing", crossings},
                 {"min_W_minus_Z", worst_cross_gap},
                 {"pairs", per_pair}};
    std::ostringstream d;
    d << "Z >= u, W <= v, duality, dual points and brute force exact on " << cache.kept.size()
      << " pairs: " << (order_fail + attain_fail + duality_fail + brute_fail == 0 ? "yes" : "no")
      << "; interior ball " << ball_cases - ball_fail << "/" << ball_cases << "; crossings at r = 2 gap "
      << crossings << "/" << cache.kept.size() << " (min W - Z " << worst_cross_gap << ")";
    c.detail = d.str();
    return c;
}

CriterionResult criterion_elliptic(const AcceptanceOptions&)
{
    CriterionResult c;
    double worst_err = 0.0;
    double worst_ratio = std::numeric_limits<double>::infinity();
    json quotients = json::object();
    for (auto kind : {OperatorSpec::Kind::PucciMinus, OperatorSpec::Kind::PucciPlus}) {
        json qs = json::array();
        double coarsest = 0.0;
        for (std::size_t nodes : {101, 201, 401}) {
            ProblemSpec s;
            s.geometry = Geometry::annulus(1.0, 2.0, 2);
            s.op = pucci_op(kind, 1.0, 3.0, 2);
            s.u0 = [](double) { return 0.0; };
            s.nodes = nodes;
            const Grid grid = make_problem_grid(s);
            const auto u = solve_elliptic(s, 0.0, -1.0);
            const auto ref = oracle::radial_shooting(s.op, 1.0, 2.0, 0.0, -1.0, 10 * (nodes - 1), grid.x);
            for (std::size_t i = 0; i < u.size(); ++i) {
                worst_err = std::max(worst_err, std::abs(u[i] - ref[i]));
            }
            // u = 0 on the inner sphere and u < 0 inside: outward normal quotient
            const double q = (u[0] - u[1]) / grid.h;
            qs.push_back(q);
            if (nodes == 101) {
                coarsest = q;
            }
            // a Hopf violation shows as quotients decaying toward 0 under refinement
            worst_ratio = std::min(worst_ratio, coarsest > 0.0 ? q / coarsest : -1.0);
        }
        quotients[to_string(kind)] = qs;
    }
    c.pass = worst_err <= 1e-4 && worst_ratio >= 0.5;
    c.margins = {{"max_shooting_error", worst_err},
                 {"normal_quotients", quotients},
                 {"min_ratio_to_coarsest", worst_ratio},
                 {"required_ratio", 0.5}};
    std::ostringstream d;
    d << "shooting error " << worst_err << ", normal quotient ratio to coarsest grid " << worst_ratio;
    c.detail = d.str();
    return c;
}

struct CriterionSpec {
    const char* name;
    double limit_s;
};

constexpr CriterionSpec kCriteria[kCriterionCount] = {
    {"bn-family", 1.0},
    {"pucci", 5.0},
    {"structural-envelope", 60.0},
    {"barrier-certificates", 5.0},
    {"harnack-chain", 1.0},
    {"discrete-comparison", 180.0},
    {"jump-extinction", 120.0},
    {"singular-limit", 300.0},
    {"bracketing", 300.0},
    {"regularization-pipeline", 60.0},
    {"elliptic-hopf", 60.0},
};

} // namespace

const char* criterion_name(int id)
{
    if (id < 1 || id > kCriterionCount) {
        throw ConfigError("criterion id must be in 1.." + std::to_string(kCriterionCount));
    }
    return kCriteria[id - 1].name;
}

AcceptanceReport run_acceptance(const AcceptanceOptions& options)
{
    std::vector<int> ids = options.only;
    if (ids.empty()) {
        for (int i = 1; i <= kCriterionCount; ++i) {
            ids.push_back(i);
        }
    }
    for (int id : ids) {
        (void)criterion_name(id);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

    AcceptanceReport report;
    report.seed = options.seed;
    PairCache cache;
    const auto t_all = Clock::now();
    for (int id : ids) {
        const auto t0 = Clock::now();
        CriterionResult c;
        try {
            switch (id) {
            case 1: c = criterion_bn(options); break;
            case 2: c = criterion_pucci(options); break;
            case 3: c = criterion_structural(options); break;
            case 4: c = criterion_barriers(options); break;
            case 5: c = criterion_harnack(options); break;
            case 6: c = criterion_comparison(options, cache); break;
            case 7: c = criterion_jump(options); break;
            case 8: c = criterion_singular_limit(options); break;
            case 9: c = criterion_bracketing(options); break;
            case 10: c = criterion_regularization(options, cache); break;
            default: c = criterion_elliptic(options); break;
            }
        } catch (const std::exception& e) {
            c = CriterionResult{};
            c.pass = false;
            c.detail = std::string("exception: ") + e.what();
        }
        c.id = id;
        c.name = kCriteria[id - 1].name;
        c.runtime_limit_s = kCriteria[id - 1].limit_s;
        c.runtime_s = seconds_since(t0);
        if (c.runtime_s > c.runtime_limit_s) {
            c.pass = false;
            c.detail += "; runtime over budget";
        }
        report.criteria.push_back(std::move(c));
    }
    report.runtime_s = seconds_since(t_all);
    report.pass = std::all_of(report.criteria.begin(), report.criteria.end(),
                              [](const CriterionResult& c) { return c.pass; });
    return report;
}

std::string format_line(const CriterionResult& c)
{
    std::ostringstream out;
    out << "criterion " << c.id << ' ' << c.name << ": " << (c.pass ? "PASS" : "FAIL") << " ("
        << c.detail << "; " << std::fixed;
    out.precision(2);
    out << c.runtime_s << " s of " << c.runtime_limit_s << " s)";
    return out.str();
}

nlohmann::json to_json(const AcceptanceReport& report)
{
    json criteria = json::array();
    json timing = json::object();
    for (const auto& c : report.criteria) {
        criteria.push_back({{"id", c.id},
                            {"name", c.name},
                            {"pass", c.pass},
                            {"runtime_limit_s", c.runtime_limit_s},
                            {"margins", c.margins},
                            {"detail", c.detail}});
        timing[std::to_string(c.id)] = c.runtime_s;
    }
    return {{"format", "ellpar-acceptance-report"},
            {"version", 1},
            {"seed", report.seed},
            {"pass", report.pass},
            {"criteria", criteria},
            {"timing", {{"total_s", report.runtime_s}, {"criteria_s", timing}}}};
}

} // namespace ellpar
