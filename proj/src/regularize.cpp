#include "ellpar/regularize.hpp"

#include "ellpar/errors.hpp"
#include "ellpar/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ellpar {

namespace {

// Range argmax over one level; ties resolve to the smallest index.
class RangeMax {
public:
    explicit RangeMax(const std::vector<double>& v) : v_(v), n_(v.size())
    {
        const auto depth = static_cast<std::size_t>(std::bit_width(n_));
        table_.resize(depth * n_);
        for (std::size_t i = 0; i < n_; ++i) {
            table_[i] = static_cast<std::uint32_t>(i);
        }
        for (std::size_t k = 1; k < depth; ++k) {
            const std::size_t half = std::size_t{1} << (k - 1);
            const std::uint32_t* prev = &table_[(k - 1) * n_];
            std::uint32_t* cur = &table_[k * n_];
            for (std::size_t i = 0; i + (std::size_t{1} << k) <= n_; ++i) {
                cur[i] = better(prev[i], prev[i + half]);
            }
        }
    }

    /// Argmax over [lo, hi].
    [[nodiscard]] std::size_t query(std::size_t lo, std::size_t hi) const
    {
        const auto k = static_cast<std::size_t>(std::bit_width(hi - lo + 1)) - 1;
        const std::uint32_t* row = &table_[k * n_];
        return better(row[lo], row[hi + 1 - (std::size_t{1} << k)]);
    }

private:
    [[nodiscard]] std::uint32_t better(std::uint32_t a, std::uint32_t b) const
    {
        if (v_[b] > v_[a] || (v_[b] == v_[a] && b < a)) {
            return b;
        }
        return a;
    }

    const std::vector<double>& v_;
    std::size_t n_;
    std::vector<std::uint32_t> table_;
};

// Contiguous node range [lo, hi] around i whose members satisfy the
// predicate, which must be monotone in |x_q - x_i|.
template <class Pred>
std::pair<std::size_t, std::size_t> member_range(const std::vector<double>& x, std::size_t i,
                                                 Pred inside)
{
    const auto left = std::partition_point(x.begin(), x.begin() + static_cast<long>(i),
                                           [&](double xq) { return !inside(std::abs(xq - x[i])); });
    const auto right = std::partition_point(x.begin() + static_cast<long>(i), x.end(),
                                            [&](double xq) { return inside(std::abs(xq - x[i])); });
    return {static_cast<std::size_t>(left - x.begin()),
            static_cast<std::size_t>(right - x.begin()) - 1};
}

double max_spacing(const std::vector<double>& v)
{
    double out = 0.0;
    for (std::size_t k = 1; k < v.size(); ++k) {
        out = std::max(out, v[k] - v[k - 1]);
    }
    return out;
}

void check_field(const SpaceTimeField& f)
{
    if (f.nodes() < 2 || f.levels() < 1) {
        throw DomainError("field needs at least two nodes and one level");
    }
    for (const auto& level : f.values) {
        if (level.size() != f.nodes()) {
            throw GridMismatch("field level size does not match the node count");
        }
    }
}

SpaceTimeField with_values(const SpaceTimeField& f, std::vector<std::vector<double>> values)
{
    SpaceTimeField out;
    out.x = f.x;
    out.times = f.times;
    out.values = std::move(values);
    return out;
}

SpaceTimeField negated(const SpaceTimeField& f)
{
    auto v = f.values;
    for (auto& level : v) {
        for (double& x : level) {
            x = -x;
        }
    }
    return with_values(f, std::move(v));
}

} // namespace

const char* to_string(ConvolutionKind kind)
{
    return kind == ConvolutionKind::Sup ? "sup" : "inf";
}

SpaceTimeField ConvolvedField::as_field() const
{
    SpaceTimeField out;
    for (std::size_t i : nodes) {
        out.x.push_back(base.x[i]);
    }
    for (std::size_t j : levels) {
        out.times.push_back(base.times[j]);
    }
    out.values = values;
    return out;
}

ConvolvedField sup_convolve(const SpaceTimeField& field, double r)
{
    check_field(field);
    const geometry::XiShape shape(r);
    // relative slack so that a spacing of exactly r/4 survives rounding
    const double limit = 0.25 * r * (1.0 + 1e-9);
    if (max_spacing(field.x) > limit || max_spacing(field.times) > limit) {
        throw DomainError("grid spacing exceeds r/4");
    }

    ConvolvedField out;
    out.base = field;
    out.r = r;
    out.kind = ConvolutionKind::Sup;
    const double reach = r + std::cbrt(r * r);
    const double x_lo = field.x.front();
    const double x_hi = field.x.back();
    for (std::size_t i = 0; i < field.nodes(); ++i) {
        if (field.x[i] - x_lo > reach && x_hi - field.x[i] > reach) {
            out.nodes.push_back(i);
        }
    }
    for (std::size_t j = 0; j < field.levels(); ++j) {
        if (field.times[j] - r >= field.times.front() && field.times[j] + r <= field.times.back()) {
            out.levels.push_back(j);
        }
    }
    if (out.nodes.empty() || out.levels.empty()) {
        throw DomainError("shrunk grid Q_r is empty");
    }

    const std::size_t N = field.nodes();
    std::vector<RangeMax> rmq;
    rmq.reserve(field.levels());
    for (const auto& level : field.values) {
        rmq.emplace_back(level);
    }

    out.values.assign(out.levels.size(), std::vector<double>(out.nodes.size()));
    out.dual_index.assign(out.levels.size(), std::vector<std::size_t>(out.nodes.size()));
    const auto& x = field.x;
    for (std::size_t a = 0; a < out.levels.size(); ++a) {
        const double tj = field.times[out.levels[a]];
        auto& best = out.values[a];
        auto& arg = out.dual_index[a];
        bool first = true;
        // Levels ascend and strict improvement keeps the smallest flat index.
        for (std::size_t jj = 0; jj < field.levels(); ++jj) {
            const double dt = field.times[jj] - tj;
            if (dt * dt > r * r) {
                continue;
            }
            auto inside = [&](double dx) { return geometry::xi_contains_closed(shape, dx, dt); };
            // Rounded differences are monotone, so both range ends only move right.
            std::size_t lo = 0;
            std::size_t hi = 0;
            for (std::size_t b = 0; b < out.nodes.size(); ++b) {
                const std::size_t i = out.nodes[b];
                while (!inside(x[i] - x[lo])) {
                    ++lo;
                }
                hi = std::max(hi, i);
                while (hi + 1 < N && inside(x[hi + 1] - x[i])) {
                    ++hi;
                }
                const std::size_t q = rmq[jj].query(lo, hi);
                const double v = field.values[jj][q];
                if (first || v > best[b]) {
                    best[b] = v;
                    arg[b] = jj * N + q;
                }
            }
            first = false;
        }
    }
    return out;
}

ConvolvedField inf_convolve(const SpaceTimeField& field, double r)
{
    check_field(field);
    ConvolvedField out = sup_convolve(negated(field), r);
    out.base = field;
    out.kind = ConvolutionKind::Inf;
    for (auto& level : out.values) {
        for (double& v : level) {
            v = -v;
        }
    }
    return out;
}

CrossingResult crossing_time(const ConvolvedField& Z, const ConvolvedField& W)
{
    if (Z.kind != ConvolutionKind::Sup || W.kind != ConvolutionKind::Inf) {
        throw std::invalid_argument("crossing_time needs a sup-convolution and an inf-convolution");
    }
    if (Z.levels != W.levels || Z.nodes != W.nodes || Z.base.x != W.base.x ||
        Z.base.times != W.base.times) {
        throw GridMismatch("crossing_time: convolutions live on different grids");
    }
    CrossingResult out;
    out.min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < Z.levels.size(); ++a) {
        std::vector<std::size_t> contact;
        for (std::size_t b = 0; b < Z.nodes.size(); ++b) {
            const double gap = W.values[a][b] - Z.values[a][b];
            out.min_gap = std::min(out.min_gap, gap);
            if (gap <= 0.0) {
                contact.push_back(Z.nodes[b]);
            }
        }
        if (!out.t0 && !contact.empty()) {
            out.level = Z.levels[a];
            out.t0 = Z.base.times[Z.levels[a]];
            out.contact_nodes = std::move(contact);
        }
    }
    return out;
}

Envelopes essential_envelopes(const SpaceTimeField& field, const std::vector<double>& radii)
{
    check_field(field);
    if (radii.empty()) {
        throw DomainError("essential_envelopes needs at least one radius");
    }
    for (std::size_t k = 0; k < radii.size(); ++k) {
        if (!(radii[k] > 0.0) || (k > 0 && !(radii[k] < radii[k - 1]))) {
            throw DomainError("radii must be positive and strictly decreasing");
        }
    }
    const SpaceTimeField neg = negated(field);
    std::vector<RangeMax> rmax;
    std::vector<RangeMax> rmin;
    for (std::size_t j = 0; j < field.levels(); ++j) {
        rmax.emplace_back(field.values[j]);
        rmin.emplace_back(neg.values[j]);
    }

    const std::size_t N = field.nodes();
    const std::size_t L = field.levels();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> up(L, std::vector<double>(N, inf));
    std::vector<std::vector<double>> lo(L, std::vector<double>(N, -inf));
    for (double r : radii) {
        for (std::size_t j = 0; j < L; ++j) {
            for (std::size_t i = 0; i < N; ++i) {
                double mx = -inf;
                double mn = inf;
                for (std::size_t jj = 0; jj < L; ++jj) {
                    const double dt = field.times[jj] - field.times[j];
                    if (dt * dt > r * r) {
                        continue;
                    }
                    const auto [a, b] = member_range(field.x, i, [&](double dx) {
                        return dx * dx + dt * dt <= r * r;
                    });
                    mx = std::max(mx, field.values[jj][rmax[jj].query(a, b)]);
                    mn = std::min(mn, field.values[jj][rmin[jj].query(a, b)]);
                }
                up[j][i] = std::min(up[j][i], mx);
                lo[j][i] = std::max(lo[j][i], mn);
            }
        }
    }

    std::vector<std::vector<double>> cand(L, std::vector<double>(N));
    for (std::size_t j = 0; j < L; ++j) {
        for (std::size_t i = 0; i < N; ++i) {
            cand[j][i] = std::max(std::min(field.values[j][i], up[j][i]), lo[j][i]);
        }
    }
    return {with_values(field, std::move(up)), with_values(field, std::move(lo)),
            with_values(field, std::move(cand))};
}

InteriorBallReport interior_ball_check(const ConvolvedField& c, LevelSet level)
{
    const bool sup = level == LevelSet::ZGeq0;
    if (sup != (c.kind == ConvolutionKind::Sup)) {
        throw std::invalid_argument("interior_ball_check: level set does not match the kind");
    }
    const geometry::XiShape shape(c.r);
    const std::size_t N = c.base.nodes();
    const std::size_t A = c.levels.size();
    const std::size_t B = c.nodes.size();
    auto in_set = [&](std::size_t a, std::size_t b) {
        return sup ? c.values[a][b] >= 0.0 : c.values[a][b] <= 0.0;
    };

    InteriorBallReport rep;
    rep.worst = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < A; ++a) {
        for (std::size_t b = 0; b < B; ++b) {
            if (!in_set(a, b)) {
                continue;
            }
            const bool edge = (a > 0 && !in_set(a - 1, b)) || (a + 1 < A && !in_set(a + 1, b)) ||
                              (b > 0 && !in_set(a, b - 1)) || (b + 1 < B && !in_set(a, b + 1));
            if (!edge) {
                continue;
            }
            ++rep.boundary_nodes;
            const double vp = c.values[a][b];
            const std::size_t dj = c.dual_index[a][b] / N;
            const std::size_t di = c.dual_index[a][b] % N;
            for (std::size_t a2 = 0; a2 < A; ++a2) {
                const double dt = c.base.times[c.levels[a2]] - c.base.times[dj];
                if (dt * dt > c.r * c.r) {
                    continue;
                }
                for (std::size_t b2 = 0; b2 < B; ++b2) {
                    const double dx = std::abs(c.base.x[c.nodes[b2]] - c.base.x[di]);
                    if (!geometry::xi_contains_closed(shape, dx, dt)) {
                        continue;
                    }
                    ++rep.body_samples;
                    const double excess = sup ? vp - c.values[a2][b2] : c.values[a2][b2] - vp;
                    rep.worst = std::max(rep.worst, excess);
                    if (excess > 0.0) {
                        ++rep.violations;
                    }
                }
            }
        }
    }
    if (rep.body_samples == 0) {
        rep.worst = 0.0;
    }
    rep.pass = rep.violations == 0;
    return rep;
}

} // namespace ellpar
