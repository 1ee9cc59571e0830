#pragma once

// R(D, C) or R(D, P) evaluated on a rectangular grid, plus checks of the
// shape claims (non-increasing along both axes, midpoint convexity).
//
// Cells are solved in anti-diagonal wavefronts: cell (i, j) is warm-started
// from the witnesses of (i-1, j) and (i, j-1), which stay feasible because
// budgets grow with the index. Cells on one wavefront are independent and
// run in parallel; compute_surface_serial() walks the same dependency order
// one cell at a time.

#include <string>
#include <vector>

#include "rdpc/oracle/rdpc.hpp"

namespace rdpc::oracle {

enum class SecondAxis { kClassification, kPerception };

struct Surface {
    SecondAxis axis = SecondAxis::kClassification;
    std::vector<double> distortions;  // ascending
    std::vector<double> second;       // ascending; C (all labels) or P
    std::vector<RdpcResult> cells;    // row-major, [distortion][second]

    const RdpcResult& at(std::size_t i, std::size_t j) const { return cells[i * second.size() + j]; }
    double rate(std::size_t i, std::size_t j) const { return at(i, j).rate; }
};

ConstraintPoint surface_point(const DiscreteSource& source, SecondAxis axis, double distortion, double second);

Surface compute_surface(const DiscreteSource& source, std::vector<double> distortions, std::vector<double> second,
                        SecondAxis axis, SolverOptions options = {});
Surface compute_surface_serial(const DiscreteSource& source, std::vector<double> distortions,
                               std::vector<double> second, SecondAxis axis, SolverOptions options = {});

struct ShapeReport {
    int monotonicity_checks = 0;
    int convexity_checks = 0;
    double worst_increase = 0.0;        // max R(looser) - R(tighter)
    double worst_convexity_gap = 0.0;   // max R(mid) - (R(a) + R(b)) / 2
    std::vector<std::string> monotonicity_violations;
    std::vector<std::string> convexity_violations;
};

/// Checks adjacent cells for monotonicity and every evenly spaced triple
/// along rows, columns and both diagonals for midpoint convexity. Grids must
/// be uniformly spaced for the convexity check to be meaningful. Infeasible
/// cells are skipped.
ShapeReport check_shape(const Surface& surface, double monotone_slack, double convexity_tol);

/// distortion,<c|p>,status,rate_bits,achieved_d,achieved_p,achieved_c0[,...],violation
std::string surface_csv(const Surface& surface);

}  // namespace rdpc::oracle
