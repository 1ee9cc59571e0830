#pragma once

// Information rate-distortion-perception-classification function:
//
//     R(D, P, C) = min_{p(xhat|x)} I(X; Xhat)
//         s.t. E[Delta(X, Xhat)] <= D, TV(p_X, p_Xhat) <= P, H(S_k | Xhat) <= C_k
//
// An infinite budget disables its constraint. R(D, P) and R(D, C) are the
// same solve with the other family disabled.

#include <functional>
#include <span>
#include <vector>

#include "rdpc/datamodel.hpp"
#include "rdpc/oracle/information.hpp"
#include "rdpc/oracle/simplex_solver.hpp"

namespace rdpc::oracle {

enum class SolveStatus { kOptimal, kInfeasible };

std::string_view to_string(SolveStatus s);

/// g(W) <= 0 form of one constraint, with dg/dW written to `grad`.
using ChannelConstraint = std::function<double(const Channel& w, Matrix& grad)>;

/// Every active constraint of `point` as a function of the end-to-end channel.
/// TV <= P is expanded into the linear family q(A) - p_X(A) <= P over
/// nonempty output subsets A, which is equivalent and smooth.
std::vector<ChannelConstraint> channel_constraints(const DiscreteSource& source, const ConstraintPoint& point);

struct RdpcResult {
    SolveStatus status = SolveStatus::kInfeasible;
    double rate = kInf;  // bits; +inf when infeasible
    Channel channel;     // witness (least-violating channel when infeasible)
    ConstraintValues achieved;
    double violation = 0.0;
};

RdpcResult solve_rdpc(const DiscreteSource& source, const ConstraintPoint& point, const SolverOptions& options = {},
                      std::span<const Channel> warm_starts = {});

RdpcResult solve_rdp(const DiscreteSource& source, double distortion, double perception,
                     const SolverOptions& options = {});

/// One budget per label channel, or a single value applied to all of them.
RdpcResult solve_rdc(const DiscreteSource& source, double distortion, std::vector<double> classification,
                     const SolverOptions& options = {});

/// 1 - H_b(D) for D in [0, 1/2], else 0: R(D) of a uniform binary source
/// under Hamming distortion.
double binary_rate_distortion(double distortion);
double binary_entropy(double p);

}  // namespace rdpc::oracle
