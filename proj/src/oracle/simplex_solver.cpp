#include "rdpc/oracle/simplex_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace rdpc::oracle {

int SimplexProblem::size() const {
    int n = 0;
    for (const auto& b : blocks) n = std::max(n, b.offset + b.rows * b.cols);
    return n;
}

RowBlock SimplexProblem::add_block(int rows, int cols) {
    RowBlock b{rows, cols, size()};
    blocks.push_back(b);
    return b;
}

namespace {

void project_simplex(std::span<double> v) {
    // Sort-based projection onto {w >= 0, sum w = 1}.
    std::vector<double> u(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0, theta = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        cumulative += u[i];
        const double t = (cumulative - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0) theta = t;
    }
    for (auto& w : v) w = std::max(w - theta, 0.0);
}

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// Augmented Lagrangian for inequality constraints:
// L = f + sum_i (max(0, mu_i + rho g_i)^2 - mu_i^2) / (2 rho).
class AugmentedLagrangian {
public:
    AugmentedLagrangian(const SimplexProblem& p, int n)
        : problem_(p), scratch_(static_cast<std::size_t>(n)), constraint_values_(p.constraints.size()) {}

    double operator()(std::span<const double> x, std::span<double> grad, std::span<const double> mu, double rho) {
        double value = problem_.objective(x, grad);
        for (std::size_t i = 0; i < problem_.constraints.size(); ++i) {
            const double g = problem_.constraints[i](x, scratch_);
            constraint_values_[i] = g;
            const double shifted = std::max(0.0, mu[i] + rho * g);
            value += (shifted * shifted - mu[i] * mu[i]) / (2.0 * rho);
            if (shifted > 0.0)
                for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += shifted * scratch_[j];
        }
        return value;
    }

    std::span<const double> constraint_values() const { return constraint_values_; }

private:
    const SimplexProblem& problem_;
    std::vector<double> scratch_;
    std::vector<double> constraint_values_;
};

}  // namespace

void project_rows(std::span<double> x, std::span<const RowBlock> blocks) {
    for (const auto& b : blocks)
        for (int r = 0; r < b.rows; ++r) project_simplex(x.subspan(b.offset + r * b.cols, b.cols));
}

double violation_of(const SimplexProblem& problem, std::span<const double> x) {
    std::vector<double> scratch(x.size());
    double worst = 0.0;
    for (const auto& g : problem.constraints) worst = std::max(worst, g(x, scratch));
    return worst;
}

namespace {

// Projected gradient on sum_i max(0, g_i)^2 / 2 until every constraint holds.
// Keeps ALM starts off the region where a weak penalty lets the objective
// drag the iterate onto points where the constraint gradients vanish.
void restore_feasibility(const SimplexProblem& problem, std::vector<double>& x, const SolverOptions& opt) {
    const int n = static_cast<int>(x.size());
    std::vector<double> scratch(n), grad(n), trial(n);
    auto phi = [&](std::span<const double> at, std::vector<double>* g) {
        double v = 0.0;
        if (g) std::fill(g->begin(), g->end(), 0.0);
        for (const auto& c : problem.constraints) {
            const double gi = c(at, scratch);
            if (gi <= 0.0) continue;
            v += 0.5 * gi * gi;
            if (g)
                for (int j = 0; j < n; ++j) (*g)[j] += gi * scratch[j];
        }
        return v;
    };
    double value = phi(x, &grad), t = 1.0;
    for (int it = 0; it < opt.max_inner && value > 0.0; ++it) {
        bool accepted = false;
        while (t > 1e-300) {
            for (int j = 0; j < n; ++j) trial[j] = x[j] - t * grad[j];
            project_rows(trial, problem.blocks);
            double model = value, sq = 0.0;
            for (int j = 0; j < n; ++j) {
                const double d = trial[j] - x[j];
                model += grad[j] * d;
                sq += d * d;
            }
            model += sq / (2.0 * t);
            const double v = phi(trial, nullptr);
            if (v <= model) {
                accepted = true;
                x.swap(trial);
                value = phi(x, &grad);
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;
        t *= 1.5;
    }
}

}  // namespace

LocalResult minimize_from(const SimplexProblem& problem, std::vector<double> x, const SolverOptions& opt) {
    const int n = problem.size();
    if (static_cast<int>(x.size()) != n) throw std::invalid_argument("start point has wrong length");
    project_rows(x, problem.blocks);
    if (!problem.constraints.empty()) restore_feasibility(problem, x, opt);

    const std::size_t m = problem.constraints.size();
    std::vector<double> mu(m, 0.0);
    double rho = opt.initial_penalty;
    AugmentedLagrangian lagrangian(problem, n);

    std::vector<double> grad(n), trial(n), trial_grad(n), step(n);
    double previous_violation = std::numeric_limits<double>::infinity();
    double previous_objective = std::numeric_limits<double>::infinity();
    double t = 1.0;
    std::vector<double> best_feasible;
    double best_feasible_objective = std::numeric_limits<double>::infinity();
    if (violation_of(problem, x) <= opt.feasibility_tol) {
        std::vector<double> dummy(n);
        best_feasible_objective = problem.objective(x, dummy);
        best_feasible = x;
    }

    for (int outer = 0; outer < opt.max_outer; ++outer) {
        double value = lagrangian(x, grad, mu, rho);
        for (int inner = 0; inner < opt.max_inner; ++inner) {
            double trial_value = 0.0;
            bool accepted = false;
            while (t > 1e-300) {
                for (int j = 0; j < n; ++j) trial[j] = x[j] - t * grad[j];
                project_rows(trial, problem.blocks);
                for (int j = 0; j < n; ++j) step[j] = trial[j] - x[j];
                trial_value = lagrangian(trial, trial_grad, mu, rho);
                const double model = value + dot(grad, step) + dot(step, step) / (2.0 * t);
                if (trial_value <= model + 1e-15 * std::abs(value)) {
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if (!accepted) break;
            const double moved = std::sqrt(dot(step, step));
            x.swap(trial);
            grad.swap(trial_grad);
            value = trial_value;
            if (moved / t < opt.stationarity_tol || moved < 1e-16) break;
            t *= 1.5;
        }

        // Re-evaluate constraints at the accepted point and update multipliers.
        lagrangian(x, grad, mu, rho);
        double violation = 0.0;
        const auto g = lagrangian.constraint_values();
        for (std::size_t i = 0; i < m; ++i) {
            violation = std::max(violation, g[i]);
            mu[i] = std::max(0.0, mu[i] + rho * g[i]);
        }
        std::vector<double> dummy(n);
        const double objective = problem.objective(x, dummy);
        if (violation <= opt.feasibility_tol && objective < best_feasible_objective) {
            best_feasible_objective = objective;
            best_feasible = x;
        }
        const bool settled = std::abs(objective - previous_objective) <= 1e-13 * (1.0 + std::abs(objective));
        if (violation <= opt.feasibility_tol && (m == 0 || settled)) break;
        if (violation > 0.25 * previous_violation) rho = std::min(rho * 10.0, opt.max_penalty);
        previous_violation = violation;
        previous_objective = objective;
    }

    if (!best_feasible.empty() && violation_of(problem, x) > opt.feasibility_tol) x = std::move(best_feasible);

    LocalResult out;
    std::vector<double> dummy(n);
    out.objective = problem.objective(x, dummy);
    out.violation = violation_of(problem, x);
    out.x = std::move(x);
    return out;
}

std::vector<std::vector<double>> start_points(const SimplexProblem& problem, const SolverOptions& opt,
                                              std::span<const std::vector<double>> warm_starts) {
    const int n = problem.size();
    std::vector<std::vector<double>> starts(warm_starts.begin(), warm_starts.end());
    std::vector<double> uniform(n, 0.0);
    for (const auto& b : problem.blocks)
        for (int j = 0; j < b.rows * b.cols; ++j) uniform[b.offset + j] = 1.0 / b.cols;
    starts.push_back(uniform);

    int index = 0;
    while (static_cast<int>(starts.size()) < std::max(opt.starts, 1) + static_cast<int>(warm_starts.size())) {
        std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                          static_cast<std::uint32_t>(index++)};
        std::mt19937_64 rng(seq);
        std::exponential_distribution<double> expo(1.0);
        std::vector<double> x(n, 0.0);
        for (const auto& b : problem.blocks)
            for (int r = 0; r < b.rows; ++r) {
                double total = 0.0;
                for (int c = 0; c < b.cols; ++c) total += (x[b.offset + r * b.cols + c] = expo(rng));
                for (int c = 0; c < b.cols; ++c) x[b.offset + r * b.cols + c] /= total;
            }
        starts.push_back(std::move(x));
    }
    return starts;
}

namespace {

SolverOptions start_options(SolverOptions opt, std::ptrdiff_t index) {
    if (opt.penalty_ladder > 1) opt.initial_penalty *= std::pow(10.0, static_cast<double>(index % opt.penalty_ladder));
    return opt;
}

MultiStartResult select_best(std::vector<LocalResult>& results, const SolverOptions& opt) {
    MultiStartResult out;
    int best = -1;
    for (int i = 0; i < static_cast<int>(results.size()); ++i) {
        if (results[i].violation > opt.feasibility_tol) continue;
        ++out.feasible_starts;
        if (best < 0 || results[i].objective < results[best].objective) best = i;
    }
    out.feasible = best >= 0;
    if (best < 0) {
        best = 0;
        for (int i = 1; i < static_cast<int>(results.size()); ++i)
            if (results[i].violation < results[best].violation) best = i;
    }
    out.best = std::move(results[best]);
    return out;
}

}  // namespace

MultiStartResult minimize(const SimplexProblem& problem, const SolverOptions& opt,
                          std::span<const std::vector<double>> warm_starts) {
    if (!opt.parallel) return minimize_serial(problem, opt, warm_starts);
    const auto starts = start_points(problem, opt, warm_starts);
    std::vector<LocalResult> results(starts.size());
    const auto count = static_cast<std::ptrdiff_t>(starts.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < count; ++i) results[i] = minimize_from(problem, starts[i], start_options(opt, i));
    return select_best(results, opt);
}

MultiStartResult minimize_serial(const SimplexProblem& problem, const SolverOptions& opt,
                                 std::span<const std::vector<double>> warm_starts) {
    const auto starts = start_points(problem, opt, warm_starts);
    std::vector<LocalResult> results;
    results.reserve(starts.size());
    for (std::size_t i = 0; i < starts.size(); ++i)
        results.push_back(minimize_from(problem, starts[i], start_options(opt, static_cast<std::ptrdiff_t>(i))));
    return select_best(results, opt);
}

}  // namespace rdpc::oracle
