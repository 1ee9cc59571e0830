#include "rdpc/oracle/source_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rdpc/config_io.hpp"

namespace rdpc::oracle {

namespace {

std::vector<double> parse_row(std::string_view text) {
    std::vector<double> row;
    std::istringstream in{std::string(text)};
    std::string token;
    while (in >> token) row.push_back(parse_double(token));
    return row;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

Matrix parse_matrix(std::string_view text) {
    std::vector<std::vector<double>> rows;
    while (true) {
        const auto semi = text.find(';');
        auto row = parse_row(text.substr(0, semi));
        if (!row.empty()) rows.push_back(std::move(row));
        if (semi == std::string_view::npos) break;
        text = text.substr(semi + 1);
    }
    if (rows.empty()) throw std::invalid_argument("empty matrix");
    Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
    for (int r = 0; r < m.rows; ++r) {
        if (static_cast<int>(rows[r].size()) != m.cols) throw std::invalid_argument("ragged matrix rows");
        for (int c = 0; c < m.cols; ++c) m(r, c) = rows[r][c];
    }
    return m;
}

std::string format_matrix(const Matrix& m) {
    std::string out;
    for (int r = 0; r < m.rows; ++r) {
        if (r) out += " ; ";
        for (int c = 0; c < m.cols; ++c) {
            if (c) out += ' ';
            out += format_double(m(r, c));
        }
    }
    return out;
}

DiscreteSource parse_source(std::string_view text) {
    const auto kv = parse_key_values(text);
    DiscreteSource s;
    const auto px = kv.find("px");
    const auto delta = kv.find("delta");
    if (px == kv.end() || delta == kv.end()) throw std::invalid_argument("source needs px and delta");
    s.px = parse_row(px->second);
    s.delta = parse_matrix(delta->second);
    s.nx = static_cast<int>(s.px.size());
    s.nxhat = s.delta.cols;
    for (int k = 0;; ++k) {
        const auto it = kv.find("label" + std::to_string(k));
        if (it == kv.end()) break;
        s.label_channels.push_back(parse_matrix(it->second));
    }
    for (const auto& [key, value] : kv)
        if (key != "px" && key != "delta" && !key.starts_with("label"))
            throw std::invalid_argument("unknown source key: " + key);
    s.require_valid();
    return s;
}

DiscreteSource read_source_file(const std::string& path) { return parse_source(slurp(path)); }

std::string format_source(const DiscreteSource& s) {
    std::string out = "px = ";
    for (std::size_t i = 0; i < s.px.size(); ++i) out += (i ? " " : "") + format_double(s.px[i]);
    out += '\n';
    for (std::size_t k = 0; k < s.label_channels.size(); ++k)
        out += "label" + std::to_string(k) + " = " + format_matrix(s.label_channels[k]) + '\n';
    out += "delta = " + format_matrix(s.delta) + '\n';
    return out;
}

ConstraintRegion parse_region(std::string_view text, int num_labels) {
    const auto kv = parse_key_values(text);
    ConstraintRegion region;
    for (int i = 0;; ++i) {
        const auto it = kv.find("point" + std::to_string(i));
        if (it == kv.end()) break;
        const auto v = parse_row(it->second);
        if (static_cast<int>(v.size()) != 2 + num_labels)
            throw std::invalid_argument("point" + std::to_string(i) + ": expected D P and one C per label");
        ConstraintPoint p{v[0], v[1], std::vector<double>(v.begin() + 2, v.end())};
        region.points.push_back(std::move(p));
    }
    if (kv.size() != region.points.size()) throw std::invalid_argument("region keys must be point0, point1, ...");
    region.require_valid(num_labels);
    return region;
}

ConstraintRegion read_region_file(const std::string& path, int num_labels) {
    return parse_region(slurp(path), num_labels);
}

std::vector<double> parse_axis_values(std::string_view text) {
    const auto first = text.find(':');
    if (first == std::string_view::npos) {
        std::string spaced(text);
        std::replace(spaced.begin(), spaced.end(), ',', ' ');
        auto v = parse_row(spaced);
        if (v.empty()) throw std::invalid_argument("empty axis");
        return v;
    }
    const auto second = text.find(':', first + 1);
    if (second == std::string_view::npos) throw std::invalid_argument("axis range must be lo:hi:count");
    const double lo = parse_double(trim(text.substr(0, first)));
    const double hi = parse_double(trim(text.substr(first + 1, second - first - 1)));
    const auto n = parse_int(trim(text.substr(second + 1)));
    if (n < 2 || !(hi > lo)) throw std::invalid_argument("axis range needs hi > lo and count >= 2");
    std::vector<double> out;
    for (std::int64_t i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    return out;
}

SurfaceGrid parse_surface_grid(std::string_view text) {
    const auto kv = parse_key_values(text);
    SurfaceGrid g;
    for (const auto& [k, v] : kv) {
        if (k == "axis") {
            if (v != "classification" && v != "perception") throw std::invalid_argument("axis must be classification or perception");
            g.perception = v == "perception";
        } else if (k == "distortion") {
            g.distortions = parse_axis_values(v);
        } else if (k == "second") {
            g.second = parse_axis_values(v);
        } else {
            throw std::invalid_argument("unknown grid key: " + k);
        }
    }
    if (g.distortions.empty() || g.second.empty()) throw std::invalid_argument("grid needs distortion and second");
    if (!std::is_sorted(g.distortions.begin(), g.distortions.end()) || !std::is_sorted(g.second.begin(), g.second.end()))
        throw std::invalid_argument("grid axes must be ascending");
    return g;
}

SurfaceGrid read_surface_grid_file(const std::string& path) { return parse_surface_grid(slurp(path)); }

}  // namespace rdpc::oracle
