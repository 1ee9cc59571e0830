#pragma once

// Exhaustive search over channels whose entries are multiples of `step`.
// Independent cross-check for the descent solver on tiny alphabets: its
// optimum upper-bounds the true R(D, P, C) up to the discretization.

#include "rdpc/datamodel.hpp"
#include "rdpc/oracle/rdpc.hpp"

namespace rdpc::oracle {

struct GridSearchResult {
    SolveStatus status = SolveStatus::kInfeasible;
    double rate = kInf;
    Channel channel;
    long long evaluated = 0;
};

/// `step` must divide 1 (e.g. 0.02 -> 50 units per row). Constraint checks
/// allow `tolerance` of slack.
GridSearchResult grid_search_rdpc(const DiscreteSource& source, const ConstraintPoint& point, double step,
                                  double tolerance = 1e-12);
GridSearchResult grid_search_rdpc_serial(const DiscreteSource& source, const ConstraintPoint& point, double step,
                                         double tolerance = 1e-12);

}  // namespace rdpc::oracle
