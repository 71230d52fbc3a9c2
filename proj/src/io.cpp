#include "ellpar/io.hpp"

#include "ellpar/errors.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ellpar {

namespace {

std::ofstream open_out(const std::string& path)
{
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(parent, ec);
    }
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write " + path);
    }
    return out;
}

double parse_cell(const std::string& path, std::size_t line, const std::string& text)
{
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (text.empty() || res.ec != std::errc() || res.ptr != end) {
        throw ConfigError(path + ":" + std::to_string(line) + ": bad number '" + text + "'");
    }
    return v;
}

std::vector<double> parse_row(const std::string& path, std::size_t line, const std::string& text)
{
    std::vector<double> out;
    std::string cell;
    std::istringstream in(text);
    while (std::getline(in, cell, ',')) {
        out.push_back(parse_cell(path, line, cell));
    }
    return out;
}

void write_grid_rows(std::ostream& out, const SpaceTimeField& f)
{
    out << "t";
    for (double x : f.x) {
        out << ',' << format_double(x);
    }
    out << '\n';
    for (std::size_t j = 0; j < f.levels(); ++j) {
        out << format_double(f.times[j]);
        for (double v : f.values[j]) {
            out << ',' << format_double(v);
        }
        out << '\n';
    }
}

// Reads the header and data rows that follow an optional leading comment.
SpaceTimeField read_grid_rows(std::istream& in, const std::string& path, std::size_t line)
{
    std::string text;
    if (!std::getline(in, text)) {
        throw ConfigError(path + ": missing header");
    }
    ++line;
    if (text.rfind("t,", 0) != 0) {
        throw ConfigError(path + ":" + std::to_string(line) + ": header must start with 't,'");
    }
    SpaceTimeField f;
    f.x = parse_row(path, line, text.substr(2));
    while (std::getline(in, text)) {
        ++line;
        if (text.empty()) {
            continue;
        }
        auto row = parse_row(path, line, text);
        if (row.size() != f.x.size() + 1) {
            throw ConfigError(path + ":" + std::to_string(line) + ": expected " +
                              std::to_string(f.x.size() + 1) + " columns");
        }
        if (!f.times.empty() && !(row[0] > f.times.back())) {
            throw ConfigError(path + ":" + std::to_string(line) + ": times must increase");
        }
        f.times.push_back(row[0]);
        f.values.emplace_back(row.begin() + 1, row.end());
    }
    if (f.times.empty()) {
        throw ConfigError(path + ": no time levels");
    }
    for (const auto& level : f.values) {
        f.front.push_back(zero_crossings(f.x, level));
    }
    return f;
}

} // namespace

std::string format_double(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_field_csv(const std::string& path, const SpaceTimeField& field)
{
    auto out = open_out(path);
    write_grid_rows(out, field);
}

SpaceTimeField read_field_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read " + path);
    }
    auto f = read_grid_rows(in, path, 0);
    for (std::size_t j = 0; j < f.levels(); ++j) {
        double mx = -INFINITY;
        for (double v : f.values[j]) {
            mx = std::max(mx, v);
        }
        if (mx < 0.0) {
            f.extinction_time = f.times[j];
            break;
        }
    }
    return f;
}

void write_front_csv(const std::string& path, const SpaceTimeField& field)
{
    auto out = open_out(path);
    out << "t,fronts\n";
    for (std::size_t j = 0; j < field.levels(); ++j) {
        out << format_double(field.times[j]);
        if (j < field.front.size()) {
            for (double x : field.front[j]) {
                out << ',' << format_double(x);
            }
        }
        out << '\n';
    }
}

void write_convolved_csv(const std::string& path, const ConvolvedField& c)
{
    auto out = open_out(path);
    out << "# ellpar convolved kind=" << to_string(c.kind) << " r=" << format_double(c.r) << '\n';
    write_grid_rows(out, c.as_field());
}

ConvolvedField ConvolvedFile::as_convolved() const
{
    ConvolvedField c;
    c.base = field;
    c.r = r;
    c.kind = kind;
    for (std::size_t j = 0; j < field.levels(); ++j) {
        c.levels.push_back(j);
    }
    for (std::size_t i = 0; i < field.nodes(); ++i) {
        c.nodes.push_back(i);
    }
    c.values = field.values;
    // Dual points are not stored; the identity keeps the indices valid.
    c.dual_index.assign(field.levels(), std::vector<std::size_t>(field.nodes()));
    for (std::size_t j = 0; j < field.levels(); ++j) {
        for (std::size_t i = 0; i < field.nodes(); ++i) {
            c.dual_index[j][i] = j * field.nodes() + i;
        }
    }
    return c;
}

ConvolvedFile read_convolved_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read " + path);
    }
    std::string meta;
    std::getline(in, meta);
    const std::string prefix = "# ellpar convolved kind=";
    if (meta.rfind(prefix, 0) != 0) {
        throw ConfigError(path + ":1: missing '# ellpar convolved' metadata line");
    }
    std::istringstream ms(meta.substr(prefix.size()));
    std::string kind;
    std::string rtext;
    ms >> kind >> rtext;
    ConvolvedFile f;
    if (kind == "sup") {
        f.kind = ConvolutionKind::Sup;
    } else if (kind == "inf") {
        f.kind = ConvolutionKind::Inf;
    } else {
        throw ConfigError(path + ":1: kind must be sup or inf");
    }
    if (rtext.rfind("r=", 0) != 0) {
        throw ConfigError(path + ":1: missing r=");
    }
    f.r = parse_cell(path, 1, rtext.substr(2));
    f.field = read_grid_rows(in, path, 1);
    return f;
}

void write_json(const std::string& path, const nlohmann::json& j)
{
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

} // namespace ellpar
