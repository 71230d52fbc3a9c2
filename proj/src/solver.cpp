#include "ellpar/solver.hpp"

#include "ellpar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>

namespace ellpar {

namespace {

struct Tridiag {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;

    void resize(std::size_t m)
    {
        lower.assign(m, 0.0);
        diag.assign(m, 0.0);
        upper.assign(m, 0.0);
    }
};

double inf_norm(const std::vector<double>& v)
{
    double out = 0.0;
    for (double x : v) {
        if (!std::isfinite(x)) {
            return std::numeric_limits<double>::infinity();
        }
        out = std::max(out, std::abs(x));
    }
    return out;
}

// Solves J x = rhs in place of rhs.
void thomas(Tridiag j, std::vector<double>& rhs)
{
    const std::size_t m = rhs.size();
    for (std::size_t i = 0; i < m; ++i) {
        if (i > 0) {
            const double w = j.lower[i] / j.diag[i - 1];
            j.diag[i] -= w * j.upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        if (!(std::abs(j.diag[i]) > 0.0) || !std::isfinite(j.diag[i])) {
            throw NewtonFailure("singular Newton matrix", {});
        }
    }
    rhs[m - 1] /= j.diag[m - 1];
    for (std::size_t k = m - 1; k-- > 0;) {
        rhs[k] = (rhs[k] - j.upper[k] * rhs[k + 1]) / j.diag[k];
    }
}

// Residual of the discrete system at the unknown nodes plus its Jacobian.
// diag_fn(i, u_i) returns the nonlinear diagonal term and its derivative;
// the operator enters as -scale * F.
template <class DiagFn>
std::vector<double> assemble(const ProblemSpec& spec, const Grid& grid,
                             const std::vector<double>& u, double scale, DiagFn diag_fn,
                             Tridiag* jac)
{
    const std::size_t first = grid.first_unknown();
    const std::size_t last = grid.size() - 1;
    const std::size_t m = last - first;
    std::vector<double> r(m);
    if (jac != nullptr) {
        jac->resize(m);
    }
    for (std::size_t i = first; i < last; ++i) {
        const bool mirror = i == 0;
        const double ul = mirror ? u[1] : u[i - 1];
        const StencilEval st = eval_stencil(spec.op, spec.b, grid, i, ul, u[i], u[i + 1]);
        const auto [d, dd] = diag_fn(i, u[i]);
        const std::size_t k = i - first;
        r[k] = d - scale * st.value;
        if (jac != nullptr) {
            jac->diag[k] = dd - scale * st.d_centre;
            if (mirror) {
                jac->upper[k] = -scale * (st.d_left + st.d_right);
            } else {
                jac->upper[k] = -scale * st.d_right;
                if (k > 0) {
                    jac->lower[k] = -scale * st.d_left;
                }
            }
        }
    }
    return r;
}

// Residual level that rounding alone produces: a few ulps of the largest
// Jacobian row applied to the current iterate.
double rounding_floor(const Tridiag& j, const std::vector<double>& u)
{
    double row = 0.0;
    for (std::size_t k = 0; k < j.diag.size(); ++k) {
        row = std::max(row, std::abs(j.lower[k]) + std::abs(j.diag[k]) + std::abs(j.upper[k]));
    }
    double mag = 1.0;
    for (double v : u) {
        mag = std::max(mag, std::abs(v));
    }
    return 16.0 * std::numeric_limits<double>::epsilon() * row * mag;
}

struct NewtonOutcome {
    int iterations = 0;
    std::vector<double> history;
};

template <class DiagFn>
NewtonOutcome newton(const ProblemSpec& spec, const Grid& grid, std::vector<double>& u,
                     double scale, DiagFn diag_fn, const NewtonPolicy& pol)
{
    const std::size_t first = grid.first_unknown();
    NewtonOutcome out;
    Tridiag jac;
    std::vector<double> r = assemble(spec, grid, u, scale, diag_fn, &jac);
    double norm = inf_norm(r);
    out.history.push_back(norm);
    const double tol = pol.abs_tol + pol.rel_tol * norm;
    if (!std::isfinite(norm)) {
        throw NewtonFailure("non-finite initial residual", out.history);
    }

    while (norm > tol) {
        if (out.iterations >= pol.max_iters) {
            std::ostringstream msg;
            msg << "Newton did not converge in " << pol.max_iters << " iterations (residual "
                << norm << ")";
            throw NewtonFailure(msg.str(), out.history);
        }
        std::vector<double> delta(r.size());
        for (std::size_t k = 0; k < r.size(); ++k) {
            delta[k] = -r[k];
        }
        try {
            thomas(jac, delta);
        } catch (const NewtonFailure& e) {
            throw NewtonFailure(e.what(), out.history);
        }

        // Damped steps must decrease the residual. When none does, the
        // full step is taken anyway: after an active-branch switch the
        // residual need not drop although the iteration still converges in
        // the branch choice.
        double lam = pol.damping;
        bool accepted = false;
        std::vector<double> trial = u;
        Tridiag trial_jac;
        for (int k = 0; k <= 10 && !accepted; ++k, lam *= 0.5) {
            for (std::size_t q = 0; q < delta.size(); ++q) {
                trial[first + q] = u[first + q] + lam * delta[q];
            }
            std::vector<double> tr = assemble(spec, grid, trial, scale, diag_fn, &trial_jac);
            const double tn = inf_norm(tr);
            if (tn <= tol || tn < (1.0 - 1e-4 * lam) * norm) {
                u = trial;
                r = std::move(tr);
                jac = std::move(trial_jac);
                norm = tn;
                accepted = true;
            }
        }
        if (!accepted) {
            for (std::size_t q = 0; q < delta.size(); ++q) {
                u[first + q] += pol.damping * delta[q];
            }
            r = assemble(spec, grid, u, scale, diag_fn, &jac);
            norm = inf_norm(r);
            if (!std::isfinite(norm)) {
                out.history.push_back(norm);
                throw NewtonFailure("non-finite Newton residual", out.history);
            }
        }
        ++out.iterations;
        out.history.push_back(norm);
        if (norm <= rounding_floor(jac, u) && norm > 0.5 * out.history[out.history.size() - 2]) {
            break;
        }
    }
    return out;
}

void set_boundary(const ProblemSpec& spec, const Grid& grid, std::vector<double>& u, double t)
{
    if (!grid.inner_mirror()) {
        u.front() = spec.boundary(grid.x.front(), t);
    }
    u.back() = spec.boundary(grid.x.back(), t);
}

std::optional<double> extinction_of(const SpaceTimeField& f)
{
    for (std::size_t j = 0; j < f.levels(); ++j) {
        if (*std::max_element(f.values[j].begin(), f.values[j].end()) < 0.0) {
            return f.times[j];
        }
    }
    return std::nullopt;
}

std::vector<double> default_probes(const std::vector<std::optional<double>>& ext, double T)
{
    double base = T;
    for (const auto& e : ext) {
        if (e) {
            base = std::min(base, *e);
        }
    }
    return {0.4 * base, 0.6 * base, 0.8 * base};
}

std::size_t level_index(const SpaceTimeField& f, double t)
{
    const auto it = std::lower_bound(f.times.begin(), f.times.end(), t);
    if (it == f.times.end()) {
        return f.levels() - 1;
    }
    const auto j = static_cast<std::size_t>(it - f.times.begin());
    if (j > 0 && t - f.times[j - 1] < *it - t) {
        return j - 1;
    }
    return j;
}

// Largest value of a(j, i) - b(j, i) over all levels and nodes.
double max_excess(const SpaceTimeField& a, const SpaceTimeField& b)
{
    require_same_grid(a, b);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < a.levels(); ++j) {
        for (std::size_t i = 0; i < a.nodes(); ++i) {
            worst = std::max(worst, a.values[j][i] - b.values[j][i]);
        }
    }
    return worst;
}

} // namespace

double ProblemSpec::boundary(double x, double t) const
{
    return g ? g(x, t) : -1.0;
}

void ProblemSpec::validate() const
{
    if (!(T > 0.0) || !std::isfinite(T)) {
        throw ConfigError("horizon T must be positive");
    }
    if (dt < 0.0 || !std::isfinite(dt)) {
        throw ConfigError("dt must be non-negative");
    }
    if (nodes < 3) {
        throw ConfigError("grid needs at least 3 nodes");
    }
    if (!u0 && u0_values.empty()) {
        throw ConfigError("initial data missing");
    }
    if (!u0_values.empty() && u0_values.size() != nodes) {
        throw ConfigError("tabulated initial data does not match the node count");
    }
    if (geometry.radial() && op.n_dim != geometry.n_dim) {
        throw ConfigError("operator dimension differs from the geometry dimension");
    }
    try {
        op.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

void SolverPolicy::validate() const
{
    if (!(newton.abs_tol > 0.0)) {
        throw ConfigError("newton.abs_tol must be positive");
    }
    if (newton.rel_tol < 0.0) {
        throw ConfigError("newton.rel_tol must be non-negative");
    }
    if (!(newton.damping > 0.0 && newton.damping <= 1.0)) {
        throw ConfigError("newton.damping must lie in (0, 1]");
    }
    if (newton.max_iters < 1) {
        throw ConfigError("newton.max_iters must be >= 1");
    }
    if (!(adaptive_dt.shrink > 0.0 && adaptive_dt.shrink < 1.0)) {
        throw ConfigError("adaptive_dt.shrink must lie in (0, 1)");
    }
    if (!(adaptive_dt.growth >= 1.0)) {
        throw ConfigError("adaptive_dt.growth must be >= 1");
    }
    if (!(adaptive_dt.min_dt > 0.0)) {
        throw ConfigError("adaptive_dt.min_dt must be positive");
    }
    if (!(max_principle_tol >= 0.0)) {
        throw ConfigError("max_principle_tol must be non-negative");
    }
}

Grid make_problem_grid(const ProblemSpec& spec)
{
    return make_grid(spec.geometry, spec.nodes);
}

double output_dt(const ProblemSpec& spec, const Grid& grid)
{
    return spec.dt > 0.0 ? spec.dt : grid.h;
}

std::vector<double> initial_field(const ProblemSpec& spec, const Grid& grid)
{
    std::vector<double> u;
    if (!spec.u0_values.empty()) {
        if (spec.u0_values.size() != grid.size()) {
            throw GridMismatch("tabulated initial data does not match the grid");
        }
        u = spec.u0_values;
    } else {
        if (!spec.u0) {
            throw ConfigError("initial data missing");
        }
        u.resize(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            u[i] = spec.u0(grid.x[i]);
        }
    }
    set_boundary(spec, grid, u, 0.0);
    return u;
}

std::vector<double> solve_elliptic(const ProblemSpec& spec, double lo, double hi,
                                   const SolverPolicy& policy)
{
    policy.validate();
    const Grid grid = make_problem_grid(spec);
    const std::size_t n = grid.size();
    std::vector<double> u(n);
    const double a = grid.inner_mirror() ? hi : lo;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (grid.x[i] - grid.x.front()) / (grid.x.back() - grid.x.front());
        u[i] = (1.0 - w) * a + w * hi;
    }
    u.front() = a;
    u.back() = hi;
    auto none = [](std::size_t, double) { return std::pair<double, double>{0.0, 0.0}; };
    (void)newton(spec, grid, u, 1.0, none, policy.newton);
    return u;
}

StepResult step_parabolic(const ProblemSpec& spec, const Grid& grid,
                          std::span<const double> u_prev, double t_new, double dt,
                          const SolverPolicy& policy)
{
    if (!spec.bn) {
        throw DomainError("step_parabolic needs a regularizing family b_n");
    }
    if (!(dt > 0.0)) {
        throw DomainError("step_parabolic needs dt > 0");
    }
    if (u_prev.size() != grid.size()) {
        throw GridMismatch("previous field does not match the grid");
    }
    const BnFamily fam = *spec.bn;
    std::vector<double> b_prev(u_prev.size());
    for (std::size_t i = 0; i < u_prev.size(); ++i) {
        b_prev[i] = regularized_b_eval(spec.b, fam, u_prev[i]);
    }
    auto diag = [&](std::size_t i, double s) {
        return std::pair<double, double>{regularized_b_eval(spec.b, fam, s) - b_prev[i],
                                         regularized_b_derivative(spec.b, fam, s)};
    };

    StepResult res;
    res.u.assign(u_prev.begin(), u_prev.end());
    set_boundary(spec, grid, res.u, t_new);
    const NewtonOutcome nw = newton(spec, grid, res.u, dt, diag, policy.newton);
    res.iterations = nw.iterations;
    res.residual_history = nw.history;

    double lo = *std::min_element(u_prev.begin(), u_prev.end());
    double hi = std::max(*std::max_element(u_prev.begin(), u_prev.end()), 0.0);
    for (double gb : {res.u.front(), res.u.back()}) {
        lo = std::min(lo, gb);
        hi = std::max(hi, gb);
    }
    double margin = std::numeric_limits<double>::infinity();
    for (double v : res.u) {
        margin = std::min({margin, v - lo, hi - v});
    }
    res.max_principle_margin = margin;
    return res;
}

RunResult run(const ProblemSpec& spec, const SolverPolicy& policy)
{
    spec.validate();
    policy.validate();
    if (!spec.bn) {
        throw ConfigError("run needs a regularizing family b_n");
    }
    const Grid grid = make_problem_grid(spec);
    const double dt_out = output_dt(spec, grid);
    const auto levels = static_cast<std::size_t>(std::ceil(spec.T / dt_out - 1e-9));

    RunResult out;
    SpaceTimeField& f = out.field;
    f.x = grid.x;
    std::vector<double> u = initial_field(spec, grid);
    f.times.push_back(0.0);
    f.values.push_back(u);

    RunStats& st = out.stats;
    st.min_dt = dt_out;
    st.max_principle_margin = std::numeric_limits<double>::infinity();
    double t = 0.0;
    double dt_cur = dt_out;
    for (std::size_t j = 1; j <= levels; ++j) {
        const double t_target = std::min(static_cast<double>(j) * dt_out, spec.T);
        while (t < t_target) {
            // absorb rounding slivers into the final sub-step
            const bool last = dt_cur >= (t_target - t) * (1.0 - 1e-9);
            const double d = last ? t_target - t : dt_cur;
            const double t_new = last ? t_target : t + d;
            bool ok = false;
            StepResult sr;
            try {
                sr = step_parabolic(spec, grid, u, t_new, d, policy);
                ok = sr.max_principle_margin >= -policy.max_principle_tol;
            } catch (const NewtonFailure&) {
                ok = false;
            }
            if (!ok) {
                ++st.rejected_steps;
                if (!policy.adaptive_dt.enabled) {
                    throw SolverError("step failed at t = " + std::to_string(t) +
                                      " with adaptive stepping disabled");
                }
                dt_cur = d * policy.adaptive_dt.shrink;
                if (dt_cur < policy.adaptive_dt.min_dt) {
                    throw SolverError("time step underflow at t = " + std::to_string(t));
                }
                continue;
            }
            u = std::move(sr.u);
            t = t_new;
            ++st.steps;
            st.max_newton_iters = std::max(st.max_newton_iters, sr.iterations);
            st.total_newton_iters += static_cast<std::size_t>(sr.iterations);
            st.min_dt = std::min(st.min_dt, d);
            st.max_principle_margin = std::min(st.max_principle_margin, sr.max_principle_margin);
            if (policy.adaptive_dt.enabled && sr.iterations < policy.adaptive_dt.target_iters) {
                dt_cur = std::min(dt_out, dt_cur * policy.adaptive_dt.growth);
            }
        }
        f.times.push_back(t_target);
        f.values.push_back(u);
    }

    f.front.reserve(f.levels());
    for (const auto& level : f.values) {
        f.front.push_back(zero_crossings(f.x, level));
    }
    f.extinction_time = extinction_of(f);
    if (!std::isfinite(st.max_principle_margin)) {
        st.max_principle_margin = 0.0;
    }
    return out;
}

double sup_distance_at(const SpaceTimeField& a, const SpaceTimeField& b, double t)
{
    require_same_grid(a, b);
    const std::size_t j = level_index(a, t);
    double d = 0.0;
    for (std::size_t i = 0; i < a.nodes(); ++i) {
        d = std::max(d, std::abs(a.values[j][i] - b.values[j][i]));
    }
    return d;
}

SingularLimitReport singular_limit_study(const ProblemSpec& spec, const std::vector<int>& n_list,
                                         const SolverPolicy& policy,
                                         std::vector<double> probe_times)
{
    if (n_list.size() < 3) {
        throw ConfigError("singular_limit_study needs at least 3 values of n");
    }
    for (std::size_t k = 0; k < n_list.size(); ++k) {
        if (n_list[k] < 1 || (k > 0 && n_list[k] <= n_list[k - 1])) {
            throw ConfigError("n_list must be strictly increasing positive integers");
        }
    }
    std::vector<std::future<RunResult>> jobs;
    for (int n : n_list) {
        ProblemSpec s = spec;
        s.bn = BnFamily{n};
        jobs.push_back(std::async(std::launch::async, [s, &policy] { return run(s, policy); }));
    }
    std::vector<RunResult> runs;
    for (auto& job : jobs) {
        runs.push_back(job.get());
    }

    SingularLimitReport rep;
    rep.n_list = n_list;
    for (const auto& r : runs) {
        rep.extinction_times.push_back(r.field.extinction_time);
        rep.stats.push_back(r.stats);
    }
    rep.probe_times =
        probe_times.empty() ? default_probes(rep.extinction_times, spec.T) : probe_times;
    for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
        std::vector<double> row;
        for (double t : rep.probe_times) {
            row.push_back(sup_distance_at(runs[k + 1].field, runs[k].field, t));
        }
        rep.distances.push_back(row);
    }
    rep.distances_decreasing = true;
    for (std::size_t k = 0; k + 1 < rep.distances.size(); ++k) {
        for (std::size_t p = 0; p < rep.probe_times.size(); ++p) {
            if (!(rep.distances[k + 1][p] < rep.distances[k][p])) {
                rep.distances_decreasing = false;
            }
        }
    }
    bool all_ext = std::all_of(rep.extinction_times.begin(), rep.extinction_times.end(),
                               [](const auto& e) { return e.has_value(); });
    if (all_ext) {
        for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
            rep.extinction_gaps.push_back(
                std::abs(*rep.extinction_times[k + 1] - *rep.extinction_times[k]));
        }
    }
    rep.extinction_cauchy = all_ext;
    for (std::size_t k = 0; k + 1 < rep.extinction_gaps.size(); ++k) {
        if (!(rep.extinction_gaps[k + 1] < rep.extinction_gaps[k])) {
            rep.extinction_cauchy = false;
        }
    }
    return rep;
}

std::vector<double> perturb_initial(const Grid& grid, const std::vector<double>& u0, double eps,
                                    bool outward)
{
    if (u0.size() != grid.size()) {
        throw GridMismatch("initial data does not match the grid");
    }
    if (!(eps > 0.0)) {
        throw DomainError("perturbation size must be positive");
    }
    const std::size_t n = grid.size();
    const double sgn = outward ? 1.0 : -1.0;
    const double x_lo = grid.inner_mirror() ? -std::numeric_limits<double>::infinity()
                                            : grid.x.front();
    const double x_hi = grid.x.back();
    std::vector<double> out(u0);
    std::size_t lo = 0;
    std::size_t hi = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (grid.x[i] - grid.x[lo] > eps) {
            ++lo;
        }
        while (hi + 1 < n && grid.x[hi + 1] - grid.x[i] <= eps) {
            ++hi;
        }
        double v = u0[i];
        for (std::size_t q = lo; q <= hi; ++q) {
            v = outward ? std::max(v, u0[q]) : std::min(v, u0[q]);
        }
        const double dist = std::min(grid.x[i] - x_lo, x_hi - grid.x[i]);
        out[i] = v + sgn * eps * std::min(1.0, dist / eps);
    }
    if (!grid.inner_mirror()) {
        out.front() = u0.front();
    }
    out.back() = u0.back();
    const std::size_t inner = grid.inner_mirror() ? 0 : 1;
    if (outward && (out[n - 2] > 0.0 || (inner == 1 && out[1] > 0.0))) {
        throw InfeasibleError("front shift reaches the boundary");
    }
    return out;
}

BracketReport bracket_maximal_minimal(const ProblemSpec& spec,
                                      const std::vector<double>& eps_list,
                                      const SolverPolicy& policy,
                                      std::vector<double> probe_times)
{
    if (eps_list.empty()) {
        throw ConfigError("eps_list is empty");
    }
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        if (!(eps_list[k] > 0.0) || (k > 0 && !(eps_list[k] < eps_list[k - 1]))) {
            throw ConfigError("eps_list must be strictly decreasing and positive");
        }
    }
    spec.validate();
    const Grid grid = make_problem_grid(spec);
    const std::vector<double> u0 = initial_field(spec, grid);

    auto launch = [&policy](ProblemSpec s) {
        return std::async(std::launch::async, [s, &policy] { return run(s, policy); });
    };
    ProblemSpec base_spec = spec;
    base_spec.u0_values = u0;
    auto base_job = launch(base_spec);
    std::vector<std::future<RunResult>> up_jobs;
    std::vector<std::future<RunResult>> low_jobs;
    for (double eps : eps_list) {
        ProblemSpec up = base_spec;
        up.u0_values = perturb_initial(grid, u0, eps, true);
        ProblemSpec low = base_spec;
        low.u0_values = perturb_initial(grid, u0, eps, false);
        up_jobs.push_back(launch(up));
        low_jobs.push_back(launch(low));
    }
    const RunResult base = base_job.get();
    std::vector<RunResult> ups;
    std::vector<RunResult> lows;
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        ups.push_back(up_jobs[k].get());
        lows.push_back(low_jobs[k].get());
    }

    BracketReport rep;
    rep.extinction_base = base.field.extinction_time;
    rep.probe_times = probe_times.empty()
                          ? default_probes({base.field.extinction_time}, spec.T)
                          : probe_times;
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        BracketLevel lv;
        lv.eps = eps_list[k];
        lv.extinction_upper = ups[k].field.extinction_time;
        lv.extinction_lower = lows[k].field.extinction_time;
        for (double t : rep.probe_times) {
            lv.gaps.push_back(sup_distance_at(ups[k].field, lows[k].field, t));
        }
        lv.sandwich_violation = std::max(max_excess(lows[k].field, base.field),
                                          max_excess(base.field, ups[k].field));
        rep.levels.push_back(lv);
    }
    rep.nesting_violation = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < eps_list.size(); ++k) {
        rep.nesting_violation =
            std::max({rep.nesting_violation, max_excess(ups[k + 1].field, ups[k].field),
                      max_excess(lows[k].field, lows[k + 1].field)});
    }
    rep.nested = eps_list.size() < 2 || rep.nesting_violation <= policy.max_principle_tol;
    rep.sandwich_holds = true;
    for (const auto& lv : rep.levels) {
        if (lv.sandwich_violation > policy.max_principle_tol) {
            rep.sandwich_holds = false;
        }
    }
    rep.gaps_shrinking = true;
    for (std::size_t k = 0; k + 1 < rep.levels.size(); ++k) {
        for (std::size_t p = 0; p < rep.probe_times.size(); ++p) {
            if (rep.levels[k + 1].gaps[p] > rep.levels[k].gaps[p] + kBracketGapTolerance) {
                rep.gaps_shrinking = false;
            }
        }
    }

    rep.limit_tolerance = 2.0 * (output_dt(spec, grid) + grid.h);
    if (eps_list.size() >= 2) {
        const std::size_t a = eps_list.size() - 2;
        const std::size_t b = eps_list.size() - 1;
        auto extrapolate = [&](const std::optional<double>& ta,
                               const std::optional<double>& tb) -> std::optional<double> {
            if (!ta || !tb) {
                return std::nullopt;
            }
            const double slope = (*ta - *tb) / (eps_list[a] - eps_list[b]);
            return *tb - slope * eps_list[b];
        };
        rep.extinction_upper_limit =
            extrapolate(rep.levels[a].extinction_upper, rep.levels[b].extinction_upper);
        rep.extinction_lower_limit =
            extrapolate(rep.levels[a].extinction_lower, rep.levels[b].extinction_lower);
    } else {
        rep.extinction_upper_limit = rep.levels[0].extinction_upper;
        rep.extinction_lower_limit = rep.levels[0].extinction_lower;
    }
    rep.limits_agree = rep.extinction_upper_limit && rep.extinction_lower_limit &&
                       std::abs(*rep.extinction_upper_limit - *rep.extinction_lower_limit) <=
                           rep.limit_tolerance;
    return rep;
}

} // namespace ellpar
