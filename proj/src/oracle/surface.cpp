#include "rdpc/oracle/surface.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rdpc/config_io.hpp"

namespace rdpc::oracle {

ConstraintPoint surface_point(const DiscreteSource& source, SecondAxis axis, double distortion, double second) {
    ConstraintPoint p;
    p.distortion = distortion;
    if (axis == SecondAxis::kPerception) {
        p.perception = second;
    } else {
        p.classification.assign(source.label_channels.size(), second);
    }
    return p;
}

namespace {

void check_axes(const std::vector<double>& d, const std::vector<double>& s) {
    if (d.empty() || s.empty()) throw std::invalid_argument("surface axes must be nonempty");
    if (!std::is_sorted(d.begin(), d.end()) || !std::is_sorted(s.begin(), s.end()))
        throw std::invalid_argument("surface axes must be ascending");
}

RdpcResult solve_cell(const DiscreteSource& source, const Surface& s, std::size_t i, std::size_t j,
                      const SolverOptions& options) {
    std::vector<Channel> warm;
    if (i > 0 && s.at(i - 1, j).status == SolveStatus::kOptimal) warm.push_back(s.at(i - 1, j).channel);
    if (j > 0 && s.at(i, j - 1).status == SolveStatus::kOptimal) warm.push_back(s.at(i, j - 1).channel);
    const auto point = surface_point(source, s.axis, s.distortions[i], s.second[j]);
    return solve_rdpc(source, point, options, warm);
}

Surface make_surface(std::vector<double> d, std::vector<double> s, SecondAxis axis) {
    check_axes(d, s);
    Surface out;
    out.axis = axis;
    out.distortions = std::move(d);
    out.second = std::move(s);
    out.cells.resize(out.distortions.size() * out.second.size());
    return out;
}

}  // namespace

Surface compute_surface(const DiscreteSource& source, std::vector<double> distortions, std::vector<double> second,
                        SecondAxis axis, SolverOptions options) {
    Surface s = make_surface(std::move(distortions), std::move(second), axis);
    options.parallel = false;  // parallelism lives at the wavefront level
    const auto rows = static_cast<std::ptrdiff_t>(s.distortions.size());
    const auto cols = static_cast<std::ptrdiff_t>(s.second.size());
    for (std::ptrdiff_t wave = 0; wave < rows + cols - 1; ++wave) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, wave - cols + 1);
        const std::ptrdiff_t hi = std::min(wave, rows - 1);
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t i = lo; i <= hi; ++i) {
            const auto j = static_cast<std::size_t>(wave - i);
            s.cells[i * cols + j] = solve_cell(source, s, static_cast<std::size_t>(i), j, options);
        }
    }
    return s;
}

Surface compute_surface_serial(const DiscreteSource& source, std::vector<double> distortions,
                               std::vector<double> second, SecondAxis axis, SolverOptions options) {
    Surface s = make_surface(std::move(distortions), std::move(second), axis);
    options.parallel = false;
    for (std::size_t i = 0; i < s.distortions.size(); ++i)
        for (std::size_t j = 0; j < s.second.size(); ++j)
            s.cells[i * s.second.size() + j] = solve_cell(source, s, i, j, options);
    return s;
}

ShapeReport check_shape(const Surface& s, double monotone_slack, double convexity_tol) {
    ShapeReport rep;
    const int rows = static_cast<int>(s.distortions.size());
    const int cols = static_cast<int>(s.second.size());
    auto feasible = [&](int i, int j) { return s.at(i, j).status == SolveStatus::kOptimal; };
    auto label = [&](int i, int j) {
        std::ostringstream o;
        o << "(D=" << s.distortions[i] << ", " << (s.axis == SecondAxis::kPerception ? "P=" : "C=") << s.second[j]
          << ")";
        return o.str();
    };

    auto monotone = [&](int i0, int j0, int i1, int j1) {
        if (!feasible(i0, j0) || !feasible(i1, j1)) return;
        ++rep.monotonicity_checks;
        const double increase = s.rate(i1, j1) - s.rate(i0, j0);
        rep.worst_increase = std::max(rep.worst_increase, increase);
        if (increase > monotone_slack) {
            std::ostringstream o;
            o << "R" << label(i1, j1) << " exceeds R" << label(i0, j0) << " by " << increase;
            rep.monotonicity_violations.push_back(o.str());
        }
    };
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            if (i + 1 < rows) monotone(i, j, i + 1, j);
            if (j + 1 < cols) monotone(i, j, i, j + 1);
        }

    const int directions[4][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            for (const auto& d : directions)
                for (int step = 1;; ++step) {
                    const int ia = i - step * d[0], ja = j - step * d[1];
                    const int ib = i + step * d[0], jb = j + step * d[1];
                    if (ia < 0 || ib >= rows || ja < 0 || ja >= cols || jb < 0 || jb >= cols) break;
                    if (!feasible(i, j) || !feasible(ia, ja) || !feasible(ib, jb)) continue;
                    ++rep.convexity_checks;
                    const double gap = s.rate(i, j) - 0.5 * (s.rate(ia, ja) + s.rate(ib, jb));
                    rep.worst_convexity_gap = std::max(rep.worst_convexity_gap, gap);
                    if (gap > convexity_tol) {
                        std::ostringstream o;
                        o << "midpoint " << label(i, j) << " lies " << gap << " bits above chord " << label(ia, ja)
                          << " -- " << label(ib, jb);
                        rep.convexity_violations.push_back(o.str());
                    }
                }
    return rep;
}

std::string surface_csv(const Surface& s) {
    std::size_t labels = 0;
    for (const auto& c : s.cells) labels = std::max(labels, c.achieved.classification.size());
    std::string out = "distortion,";
    out += s.axis == SecondAxis::kPerception ? "perception" : "classification";
    out += ",status,rate_bits,achieved_d,achieved_p";
    for (std::size_t k = 0; k < labels; ++k) out += ",achieved_c" + std::to_string(k);
    out += ",violation\n";
    for (std::size_t i = 0; i < s.distortions.size(); ++i)
        for (std::size_t j = 0; j < s.second.size(); ++j) {
            const auto& c = s.at(i, j);
            out += format_double(s.distortions[i]) + ',' + format_double(s.second[j]) + ',' +
                   std::string(to_string(c.status)) + ',' + format_double(c.rate) + ',' +
                   format_double(c.achieved.distortion) + ',' + format_double(c.achieved.perception);
            for (std::size_t k = 0; k < labels; ++k)
                out += ',' + format_double(k < c.achieved.classification.size() ? c.achieved.classification[k] : NAN);
            out += ',' + format_double(c.violation) + '\n';
        }
    return out;
}

}  // namespace rdpc::oracle
