#include "rdpc/oracle/rdpc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rdpc::oracle {

std::string_view to_string(SolveStatus s) { return s == SolveStatus::kOptimal ? "optimal" : "infeasible"; }

std::vector<ChannelConstraint> channel_constraints(const DiscreteSource& source, const ConstraintPoint& point) {
    std::vector<ChannelConstraint> out;
    const auto& px = source.px;

    if (std::isfinite(point.distortion)) {
        out.push_back([&source, budget = point.distortion](const Channel& w, Matrix& grad) {
            grad = Matrix(w.rows, w.cols);
            for (int x = 0; x < w.rows; ++x)
                for (int y = 0; y < w.cols; ++y) grad(x, y) = source.px[x] * source.delta(x, y);
            return expected_distortion(source.px, source.delta, w) - budget;
        });
    }

    if (std::isfinite(point.perception)) {
        const int m = source.nxhat;
        if (m > 20) throw std::invalid_argument("perception constraint limited to small output alphabets");
        for (unsigned mask = 1; mask < (1u << m); ++mask) {
            double p_mass = 0.0;
            for (int y = 0; y < m; ++y)
                if ((mask >> y & 1u) && y < static_cast<int>(px.size())) p_mass += px[y];
            out.push_back([&source, mask, p_mass, budget = point.perception](const Channel& w, Matrix& grad) {
                grad = Matrix(w.rows, w.cols);
                double q_mass = 0.0;
                for (int x = 0; x < w.rows; ++x)
                    for (int y = 0; y < w.cols; ++y)
                        if (mask >> y & 1u) {
                            grad(x, y) = source.px[x];
                            q_mass += source.px[x] * w(x, y);
                        }
                return q_mass - p_mass - budget;
            });
        }
    }

    for (std::size_t k = 0; k < point.classification.size() && k < source.label_channels.size(); ++k) {
        if (!std::isfinite(point.classification[k])) continue;
        out.push_back([&source, k, budget = point.classification[k]](const Channel& w, Matrix& grad) {
            grad = conditional_entropy_gradient(source.px, source.label_channels[k], w);
            return conditional_entropy(source.px, source.label_channels[k], w) - budget;
        });
    }
    return out;
}

namespace {

Channel to_channel(std::span<const double> x, int rows, int cols) {
    Channel w(rows, cols);
    std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(rows) * cols, w.data.begin());
    return w;
}

}  // namespace

RdpcResult solve_rdpc(const DiscreteSource& source, const ConstraintPoint& point, const SolverOptions& options,
                      std::span<const Channel> warm_starts) {
    source.require_valid();
    if (!(point.distortion >= 0.0) || !(point.perception >= 0.0))
        throw std::invalid_argument("constraint budgets must be >= 0");
    for (double c : point.classification)
        if (!(c >= 0.0)) throw std::invalid_argument("constraint budgets must be >= 0");

    const int rows = source.nx, cols = source.nxhat;
    SimplexProblem problem;
    problem.add_block(rows, cols);
    problem.objective = [&source, rows, cols](std::span<const double> x, std::span<double> grad) {
        const Channel w = to_channel(x, rows, cols);
        const Matrix g = mutual_information_gradient(source.px, w);
        std::copy(g.data.begin(), g.data.end(), grad.begin());
        return mutual_information(source.px, w);
    };
    for (auto& c : channel_constraints(source, point)) {
        problem.constraints.push_back([c = std::move(c), rows, cols](std::span<const double> x, std::span<double> grad) {
            Matrix g;
            const double v = c(to_channel(x, rows, cols), g);
            std::copy(g.data.begin(), g.data.end(), grad.begin());
            return v;
        });
    }

    std::vector<std::vector<double>> warm;
    for (const auto& w : warm_starts)
        if (w.rows == rows && w.cols == cols) warm.push_back(w.data);

    const auto best = minimize(problem, options, warm);
    RdpcResult r;
    r.channel = to_channel(best.best.x, rows, cols);
    r.achieved = constraint_values(source, r.channel);
    r.violation = max_violation(r.achieved, point);
    if (best.feasible) {
        r.status = SolveStatus::kOptimal;
        r.rate = mutual_information(source.px, r.channel);
    }
    return r;
}

RdpcResult solve_rdp(const DiscreteSource& source, double distortion, double perception,
                     const SolverOptions& options) {
    ConstraintPoint p{distortion, perception, {}};
    return solve_rdpc(source, p, options);
}

RdpcResult solve_rdc(const DiscreteSource& source, double distortion, std::vector<double> classification,
                     const SolverOptions& options) {
    const auto k = source.label_channels.size();
    if (classification.size() == 1 && k > 1) classification.assign(k, classification.front());
    if (classification.size() != k) throw std::invalid_argument("need one classification budget per label");
    ConstraintPoint p{distortion, kInf, std::move(classification)};
    return solve_rdpc(source, p, options);
}

double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double binary_rate_distortion(double distortion) {
    if (distortion >= 0.5) return 0.0;
    return 1.0 - binary_entropy(std::max(distortion, 0.0));
}

}  // namespace rdpc::oracle
