#include "rdpc/oracle/universal.hpp"

#include <algorithm>
#include <stdexcept>

namespace rdpc::oracle {

namespace {

Matrix block_matrix(std::span<const double> x, const RowBlock& b) {
    Matrix m(b.rows, b.cols);
    std::copy_n(x.begin() + b.offset, b.rows * b.cols, m.data.begin());
    return m;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int k = 0; k < a.cols; ++k) {
            const double v = a(i, k);
            if (v == 0.0) continue;
            for (int j = 0; j < b.cols; ++j) c(i, j) += v * b(k, j);
        }
    return c;
}

Matrix uniform_rows(int rows, int cols) { return Matrix(rows, cols, 1.0 / cols); }

bool same_point(const ConstraintPoint& a, const ConstraintPoint& b) {
    return a.distortion == b.distortion && a.perception == b.perception && a.classification == b.classification;
}

// Wraps a constraint on the end-to-end channel W = E V as a function of the
// (E, V) variables, using dW/dE = G V^T and dW/dV = E^T G.
SmoothFunction composed(ChannelConstraint c, RowBlock enc, RowBlock dec) {
    return [c = std::move(c), enc, dec](std::span<const double> x, std::span<double> grad) {
        const Matrix e = block_matrix(x, enc);
        const Matrix v = block_matrix(x, dec);
        Matrix g;
        const double value = c(multiply(e, v), g);
        std::fill(grad.begin(), grad.end(), 0.0);
        for (int xi = 0; xi < enc.rows; ++xi)
            for (int z = 0; z < enc.cols; ++z) {
                double s = 0.0;
                for (int y = 0; y < dec.cols; ++y) s += g(xi, y) * v(z, y);
                grad[enc.offset + xi * enc.cols + z] = s;
            }
        for (int z = 0; z < dec.rows; ++z)
            for (int y = 0; y < dec.cols; ++y) {
                double s = 0.0;
                for (int xi = 0; xi < enc.rows; ++xi) s += e(xi, z) * g(xi, y);
                grad[dec.offset + z * dec.cols + y] = s;
            }
        return value;
    };
}

}  // namespace

UniversalResult universal_rate(const DiscreteSource& source, const ConstraintRegion& region, int nz,
                               const SolverOptions& options) {
    source.require_valid();
    region.require_valid(static_cast<int>(source.label_channels.size()));
    if (nz < 1) throw std::invalid_argument("representation alphabet must have nz >= 1");

    // Map every input point to a distinct active point, or -1 when vacuous.
    std::vector<ConstraintPoint> active;
    std::vector<int> slot(region.points.size(), -1);
    for (std::size_t i = 0; i < region.points.size(); ++i) {
        const auto& p = region.points[i];
        if (p.vacuous()) continue;
        auto it = std::find_if(active.begin(), active.end(), [&](const auto& a) { return same_point(a, p); });
        if (it == active.end()) {
            active.push_back(p);
            it = active.end() - 1;
        }
        slot[i] = static_cast<int>(it - active.begin());
    }

    SimplexProblem problem;
    const RowBlock enc = problem.add_block(source.nx, nz);
    std::vector<RowBlock> decs;
    for (std::size_t j = 0; j < active.size(); ++j) decs.push_back(problem.add_block(nz, source.nxhat));

    problem.objective = [&source, enc](std::span<const double> x, std::span<double> grad) {
        const Matrix e = block_matrix(x, enc);
        const Matrix g = mutual_information_gradient(source.px, e);
        std::fill(grad.begin(), grad.end(), 0.0);
        std::copy(g.data.begin(), g.data.end(), grad.begin() + enc.offset);
        return mutual_information(source.px, e);
    };
    for (std::size_t j = 0; j < active.size(); ++j)
        for (auto& c : channel_constraints(source, active[j]))
            problem.constraints.push_back(composed(std::move(c), enc, decs[j]));

    const auto best = minimize(problem, options);

    UniversalResult r;
    r.encoder = block_matrix(best.best.x, enc);
    for (std::size_t i = 0; i < region.points.size(); ++i) {
        const Matrix dec = slot[i] >= 0 ? block_matrix(best.best.x, decs[slot[i]]) : uniform_rows(nz, source.nxhat);
        auto values = constraint_values(source, multiply(r.encoder, dec));
        r.violation = std::max(r.violation, max_violation(values, region.points[i]));
        r.decoders.push_back(dec);
        r.achieved.push_back(std::move(values));
    }
    if (best.feasible) {
        r.status = SolveStatus::kOptimal;
        r.rate = mutual_information(source.px, r.encoder);
    }
    return r;
}

DecoderFit best_decoder(const DiscreteSource& source, const Matrix& encoder, const ConstraintPoint& point,
                        const SolverOptions& options) {
    source.require_valid();
    if (encoder.rows != source.nx) throw std::invalid_argument("encoder must have nx rows");
    const int nz = encoder.cols;

    SimplexProblem problem;
    const RowBlock dec = problem.add_block(nz, source.nxhat);
    problem.objective = [](std::span<const double>, std::span<double> grad) {
        std::fill(grad.begin(), grad.end(), 0.0);
        return 0.0;
    };
    for (auto& c : channel_constraints(source, point)) {
        problem.constraints.push_back([c = std::move(c), &encoder, dec](std::span<const double> x,
                                                                          std::span<double> grad) {
            const Matrix v = block_matrix(x, dec);
            Matrix g;
            const double value = c(multiply(encoder, v), g);
            for (int z = 0; z < dec.rows; ++z)
                for (int y = 0; y < dec.cols; ++y) {
                    double s = 0.0;
                    for (int xi = 0; xi < encoder.rows; ++xi) s += encoder(xi, z) * g(xi, y);
                    grad[dec.offset + z * dec.cols + y] = s;
                }
            return value;
        });
    }

    const auto best = minimize(problem, options);
    DecoderFit fit;
    fit.decoder = block_matrix(best.best.x, dec);
    fit.achieved = constraint_values(source, multiply(encoder, fit.decoder));
    fit.violation = max_violation(fit.achieved, point);
    fit.feasible = best.feasible;
    return fit;
}

RatePenalty rate_penalty(const DiscreteSource& source, const ConstraintRegion& region, int nz,
                         const SolverOptions& options) {
    RatePenalty out;
    const auto universal = universal_rate(source, region, nz, options);
    out.universal = universal.rate;
    out.worst_single = 0.0;
    bool feasible = universal.status == SolveStatus::kOptimal;
    for (const auto& p : region.points) {
        const auto single = solve_rdpc(source, p, options);
        out.single_rates.push_back(single.rate);
        if (single.status != SolveStatus::kOptimal) feasible = false;
        out.worst_single = std::max(out.worst_single, single.rate);
    }
    if (feasible) {
        out.status = SolveStatus::kOptimal;
        out.penalty = out.universal - out.worst_single;
    }
    return out;
}

}  // namespace rdpc::oracle
