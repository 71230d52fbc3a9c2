// CSV and JSON files for fields, fronts, convolutions and reports.
//
// field.csv: header `t,<x_0>,...,<x_{N-1}>` (node coordinates), then one row
// per time level `t,u_0,...,u_{N-1}`. A convolved field uses the same layout
// on the shrunk grid, preceded by one comment line
// `# ellpar convolved kind=<sup|inf> r=<r>`.
// front.csv: header `t,fronts`, then `t,x_a,x_b,...` (possibly no crossings).
#pragma once

#include "ellpar/grid.hpp"
#include "ellpar/regularize.hpp"

#include <json.hpp>

#include <string>

namespace ellpar {

/// Output files create missing parent directories.

/// Round-trip exact decimal text for a double.
[[nodiscard]] std::string format_double(double v);

void write_field_csv(const std::string& path, const SpaceTimeField& field);
/// Throws ConfigError on malformed input.
[[nodiscard]] SpaceTimeField read_field_csv(const std::string& path);

void write_front_csv(const std::string& path, const SpaceTimeField& field);

void write_convolved_csv(const std::string& path, const ConvolvedField& c);

/// A convolution read back from disk: values on its own grid (the shrunk
/// grid of the original) plus kind and radius.
struct ConvolvedFile {
    SpaceTimeField field;
    ConvolutionKind kind = ConvolutionKind::Sup;
    double r = 0.0;

    /// As a ConvolvedField whose base is the stored grid and whose Q_r is the
    /// whole stored grid.
    [[nodiscard]] ConvolvedField as_convolved() const;
};

/// Throws ConfigError when the metadata line is missing or malformed.
[[nodiscard]] ConvolvedFile read_convolved_csv(const std::string& path);

void write_json(const std::string& path, const nlohmann::json& j);

} // namespace ellpar
