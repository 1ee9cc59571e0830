#pragma once

// Sweep plans: cross products of end-to-end runs plus an optional family of
// universal runs that reuse one end-to-end encoder.
//
//     objective = rdc
//     epochs = 40
//     sweep.quantizers = 3x3, 3x4, 4x4
//     sweep.lambdas = 0, 0.005, 0.015, 0.05, 0.15
//     sweep.seeds = 0
//     universal.source_lambda = 0.015
//     universal.source_quantizer = 3x3
//     universal.source_seed = 0
//     universal.lambdas = 0, 0.05, 0.15, 0.5, 1.5
//     universal.seeds = 0, 1, 2
//     universal.critic_init = auto
//
// All other keys are RunConfig keys shared by every run. Lambdas land in
// lambda_c or lambda_p according to the objective.

#include <functional>
#include <string>
#include <vector>

#include "rdpc/config_io.hpp"
#include "rdpc/trainer.hpp"

namespace rdpc::sweep {

struct SweepPlan {
    std::vector<RunConfig> runs;  // end-to-end runs first
    std::string group_by = "rate";
};

SweepPlan plan_from(const KeyValues& kv);
SweepPlan read_plan_file(const std::string& path);

QuantizerSpec parse_quantizer(std::string_view text);  // "3x4"
std::vector<double> parse_double_list(std::string_view text);
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

/// Every universal run names an encoder produced earlier in the plan or an
/// existing checkpoint path. Returns one message per broken reference.
std::vector<std::string> check_references(const SweepPlan& plan);

using RunFn = std::function<train::RunOutcome(const RunConfig&)>;

struct SweepReport {
    std::vector<CurvePoint> points;  // in plan order, completed runs only
    std::vector<std::string> trained;
    std::vector<std::string> skipped;
    std::vector<std::string> failed;
};

/// Runs every plan entry whose run_id is not yet in the results table and
/// appends its point. A failing run is logged to <out>/failures.log and the
/// sweep moves on. Without `resume`, finding completed plan runs in the table
/// is an error.
SweepReport run_sweep(const SweepPlan& plan, const train::Workspace& ws, const TableMeta& meta, bool resume,
                      const RunFn& run);

}  // namespace rdpc::sweep
