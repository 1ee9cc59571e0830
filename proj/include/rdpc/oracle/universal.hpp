#pragma once

// Universal rate over a finite constraint set Theta:
//
//     R(Theta) = min_{p(z|x)} I(X; Z)  such that for every (D, P, C) in Theta
//                some decoder p(xhat|z) meets all of its constraints,
//
// and the rate penalty A(Theta) = R(Theta) - max_{theta} R(theta).
//
// The encoder and one decoder per point are optimized jointly, which has
// the same infimum as the nested encoder-then-decoder formulation.
// best_decoder() runs the nested inner problem for a fixed encoder.

#include <vector>

#include "rdpc/datamodel.hpp"
#include "rdpc/oracle/rdpc.hpp"

namespace rdpc::oracle {

struct UniversalResult {
    SolveStatus status = SolveStatus::kInfeasible;
    double rate = kInf;
    Matrix encoder;                 // p(z|x), nx x nz
    std::vector<Matrix> decoders;   // p(xhat|z) per point of the input region
    std::vector<ConstraintValues> achieved;
    double violation = 0.0;
};

/// Points that constrain nothing are dropped and duplicates merged before
/// solving; the result still lists one decoder per input point.
UniversalResult universal_rate(const DiscreteSource& source, const ConstraintRegion& region, int nz,
                               const SolverOptions& options = {});

struct DecoderFit {
    bool feasible = false;
    Matrix decoder;
    ConstraintValues achieved;
    double violation = 0.0;
};

/// Least-violation decoder p(xhat|z) for a fixed encoder and one point.
DecoderFit best_decoder(const DiscreteSource& source, const Matrix& encoder, const ConstraintPoint& point,
                        const SolverOptions& options = {});

struct RatePenalty {
    SolveStatus status = SolveStatus::kInfeasible;
    double penalty = kInf;
    double universal = kInf;
    double worst_single = kInf;
    std::vector<double> single_rates;
};

RatePenalty rate_penalty(const DiscreteSource& source, const ConstraintRegion& region, int nz,
                         const SolverOptions& options = {});

}  // namespace rdpc::oracle
