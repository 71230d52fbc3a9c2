// Flat key = value configuration with dotted sections and the builders that
// turn it into problem and solver descriptions.
//
// Syntax: one `key = value` per line, `#` starts a comment, and a line
// `[section]` prefixes the following keys with `section.`. Lists are comma
// separated. Every error is a ConfigError.
#pragma once

#include "ellpar/solver.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ellpar {

class Config {
public:
    [[nodiscard]] static Config parse(std::string_view text);
    [[nodiscard]] static Config load(const std::string& path);

    void set(const std::string& key, const std::string& value);
    [[nodiscard]] bool has(const std::string& key) const;

    [[nodiscard]] std::string get_string(const std::string& key) const;
    [[nodiscard]] std::string get_string(const std::string& key, const std::string& fallback) const;
    [[nodiscard]] double get_double(const std::string& key) const;
    [[nodiscard]] double get_double(const std::string& key, double fallback) const;
    [[nodiscard]] std::int64_t get_int(const std::string& key) const;
    [[nodiscard]] std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    [[nodiscard]] bool get_bool(const std::string& key, bool fallback) const;
    [[nodiscard]] std::vector<double> get_list(const std::string& key) const;
    [[nodiscard]] std::vector<double> get_list(const std::string& key,
                                               const std::vector<double>& fallback) const;

    [[nodiscard]] const std::map<std::string, std::string>& entries() const { return values_; }
    /// Keys never read through a getter.
    [[nodiscard]] std::vector<std::string> unused_keys() const;

private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
};

/// `op.kind` (trace | pucci-plus | pucci-minus | bellman-isaacs | divergence),
/// `op.lambda`, `op.Lambda`, `op.delta1`, `op.delta0`, `op.n_dim`,
/// `op.bi.entries` and `psi.kind` / `psi.coeffs` for the divergence kind.
/// Bellman-Isaacs entries are separated by `;`, each
/// `alpha : beta : c : A (row-major, comma list) : drift (comma list)`.
[[nodiscard]] OperatorSpec operator_from_config(const Config& cfg);
/// `b.kind` (positive-part | table), `b.breakpoints`, `b.slopes`.
[[nodiscard]] BSpec b_from_config(const Config& cfg);
/// `psi.kind` (constant | polynomial), `psi.coeffs`.
[[nodiscard]] PsiSpec psi_from_config(const Config& cfg);

/// Full problem. `scenario = jump` starts from the jump scenario and lets
/// the remaining keys override it. Other keys: `geometry.kind` (interval |
/// annulus | ball), `geometry.lo`, `geometry.hi`, `geometry.n_dim`, `b.n`,
/// `grid.nodes`, `time.T`, `time.dt`, `g.value`, `u0.kind` (jump | constant |
/// table), `u0.value`, `u0.values`.
[[nodiscard]] ProblemSpec problem_from_config(const Config& cfg);
/// `solver.newton.*` and `solver.adaptive.*` overrides of the defaults.
[[nodiscard]] SolverPolicy policy_from_config(const Config& cfg);

} // namespace ellpar
