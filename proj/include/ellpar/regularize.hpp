// Sup/inf-convolutions of sampled space-time fields over the closed body
// Xi_r, dual points, crossing times and essential envelopes.
#pragma once

#include "ellpar/grid.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace ellpar {

enum class ConvolutionKind { Sup, Inf };

[[nodiscard]] const char* to_string(ConvolutionKind kind);

/// Values on the shrunk grid Q_r: nodes at distance > r + r^(2/3) from both
/// ends of the node range and levels with t - r >= t_first, t + r <= t_last.
struct ConvolvedField {
    SpaceTimeField base;
    double r = 0.0;
    ConvolutionKind kind = ConvolutionKind::Sup;
    std::vector<std::size_t> levels; ///< base level indices
    std::vector<std::size_t> nodes;  ///< base node indices
    /// values[a][b] at (levels[a], nodes[b]).
    std::vector<std::vector<double>> values;
    /// Flat base index j * N + i of the attaining sample (smallest on ties).
    std::vector<std::vector<std::size_t>> dual_index;

    /// The convolved values as a field on the shrunk grid.
    [[nodiscard]] SpaceTimeField as_field() const;
};

/// Z = max of the field over the closed Xi_r around each node of Q_r.
/// Throws DomainError unless r > 0 and the node and time spacings are at
/// most r/4, and when Q_r is empty.
[[nodiscard]] ConvolvedField sup_convolve(const SpaceTimeField& field, double r);
/// W = min over the closed body; exactly -sup_convolve(-field).
[[nodiscard]] ConvolvedField inf_convolve(const SpaceTimeField& field, double r);

struct CrossingResult {
    std::optional<double> t0;
    std::optional<std::size_t> level; ///< base level index of t0
    /// Base node indices with W - Z <= 0 at t0.
    std::vector<std::size_t> contact_nodes;
    double min_gap = 0.0; ///< smallest W - Z over all of Q_r
};

/// First level where min(W - Z) <= 0. Throws std::invalid_argument unless
/// Z is a sup- and W an inf-convolution, GridMismatch unless both live on
/// the same shrunk grid.
[[nodiscard]] CrossingResult crossing_time(const ConvolvedField& Z, const ConvolvedField& W);

struct Envelopes {
    SpaceTimeField upper;
    SpaceTimeField lower;
    /// max(min(field, upper), lower).
    SpaceTimeField candidate;
};

/// upper = min over radii of the max over the closed space-time ball
/// {|x' - x|^2 + |t' - t|^2 <= r^2} of grid nodes; lower symmetric. Throws
/// DomainError unless radii are positive and strictly decreasing.
[[nodiscard]] Envelopes essential_envelopes(const SpaceTimeField& field,
                                            const std::vector<double>& radii);

enum class LevelSet { ZGeq0, WLeq0 };

struct InteriorBallReport {
    std::size_t boundary_nodes = 0; ///< level-set boundary nodes checked
    std::size_t body_samples = 0;   ///< grid nodes tested inside translated bodies
    std::size_t violations = 0;
    double worst = 0.0; ///< largest Z(P) - Z(Q) (or W(Q) - W(P)); <= 0 on a pass
    bool pass = false;
};

/// For every node P of Q_r on the boundary of the level set (inside it with
/// a neighbour outside), checks that all nodes Q of Q_r in the closed body
/// around the dual point satisfy Z(Q) >= Z(P) (resp. W(Q) <= W(P)).
[[nodiscard]] InteriorBallReport interior_ball_check(const ConvolvedField& convolved,
                                                     LevelSet level);

} // namespace ellpar
