#pragma once

// Multi-start constrained minimization over a product of probability
// simplices (the rows of one or more row-stochastic matrices).
//
//     minimize f(x)  subject to  g_i(x) <= 0,  every row of every block on the simplex
//
// Each start runs an augmented-Lagrangian outer loop whose subproblems are
// solved by projected gradient descent with backtracking. Starts are
// independent, so minimize() fans them out with OpenMP; minimize_serial()
// is the reference path and yields bit-identical results.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace rdpc::oracle {

/// rows x cols row-stochastic block stored row-major at `offset`.
struct RowBlock {
    int rows = 0;
    int cols = 0;
    int offset = 0;
};

/// Returns f(x) and writes df/dx into `grad` (same length as x).
using SmoothFunction = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct SimplexProblem {
    std::vector<RowBlock> blocks;
    SmoothFunction objective;
    std::vector<SmoothFunction> constraints;

    int size() const;
    /// Appends a block after the existing ones and returns it.
    RowBlock add_block(int rows, int cols);
};

struct SolverOptions {
    int starts = 32;
    std::uint64_t seed = 0x5eed;
    int max_outer = 40;
    int max_inner = 500;
    double feasibility_tol = 1e-7;
    double stationarity_tol = 1e-12;
    double initial_penalty = 10.0;
    // Start i begins at initial_penalty * 10^(i mod penalty_ladder).
    int penalty_ladder = 3;
    double max_penalty = 1e10;
    bool parallel = true;
};

struct LocalResult {
    std::vector<double> x;
    double objective = 0.0;
    double violation = 0.0;
};

struct MultiStartResult {
    LocalResult best;
    bool feasible = false;
    int feasible_starts = 0;
};

/// Euclidean projection of every block row onto the probability simplex.
void project_rows(std::span<double> x, std::span<const RowBlock> blocks);

/// Largest constraint value clipped at zero.
double violation_of(const SimplexProblem& problem, std::span<const double> x);

/// One augmented-Lagrangian descent from x0: projection, a feasibility phase
/// on the squared violations, then the penalty loop. Returns the best feasible
/// iterate when the loop ends infeasible after passing through feasibility.
LocalResult minimize_from(const SimplexProblem& problem, std::vector<double> x0, const SolverOptions& options);

/// Starts: `warm_starts`, then the uniform point, then Dirichlet(1) draws up
/// to options.starts total. Returns the best feasible local result, or the
/// least-violating one when no start reaches feasibility.
MultiStartResult minimize(const SimplexProblem& problem, const SolverOptions& options,
                          std::span<const std::vector<double>> warm_starts = {});
MultiStartResult minimize_serial(const SimplexProblem& problem, const SolverOptions& options,
                                 std::span<const std::vector<double>> warm_starts = {});

/// The start points minimize() would use, in order.
std::vector<std::vector<double>> start_points(const SimplexProblem& problem, const SolverOptions& options,
                                              std::span<const std::vector<double>> warm_starts);

}  // namespace rdpc::oracle
