#include "rdpc/sweep.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <stdexcept>

#include "rdpc/networks.hpp"

namespace rdpc::sweep {

namespace {

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        const auto b = cur.find_first_not_of(" \t");
        const auto e = cur.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
        cur.clear();
    };
    for (char c : text) {
        if (c == ',') flush();
        else cur += c;
    }
    flush();
    return out;
}

void set_lambda(RunConfig& c, double lambda) {
    c.tradeoff = {};
    (c.objective == Objective::kRdc ? c.tradeoff.lambda_c : c.tradeoff.lambda_p) = lambda;
}

}  // namespace

QuantizerSpec parse_quantizer(std::string_view text) {
    const auto x = text.find('x');
    if (x == std::string_view::npos) throw std::invalid_argument("quantizer must look like DIMxLEVELS: " + std::string(text));
    QuantizerSpec q{static_cast<int>(parse_int(text.substr(0, x))), static_cast<int>(parse_int(text.substr(x + 1)))};
    require_valid(q);
    return q;
}

std::vector<double> parse_double_list(std::string_view text) {
    std::vector<double> out;
    for (const auto& s : split_list(text)) out.push_back(parse_double(s));
    return out;
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
    std::vector<std::uint64_t> out;
    for (const auto& s : split_list(text)) out.push_back(static_cast<std::uint64_t>(parse_int(s)));
    return out;
}

SweepPlan plan_from(const KeyValues& kv) {
    KeyValues base, sweep, uni;
    SweepPlan plan;
    for (const auto& [k, v] : kv) {
        if (k.starts_with("sweep.")) sweep[k.substr(6)] = v;
        else if (k.starts_with("universal.")) uni[k.substr(10)] = v;
        else if (k == "plan.group_by") plan.group_by = v;
        else base[k] = v;
    }
    if (plan.group_by != "rate" && plan.group_by != "mode") throw std::invalid_argument("plan.group_by must be rate or mode");
    const auto base_cfg = run_config_from(base);
    if (base_cfg.mode != Mode::kEndToEnd) throw std::invalid_argument("plan base config must be end_to_end");

    auto take = [](KeyValues& m, const std::string& key, std::string fallback) {
        auto it = m.find(key);
        if (it == m.end()) return fallback;
        auto v = it->second;
        m.erase(it);
        return v;
    };

    const auto quantizers = split_list(take(sweep, "quantizers", ""));
    auto lambdas = parse_double_list(take(sweep, "lambdas", ""));
    if (lambdas.empty())
        lambdas.push_back(base_cfg.objective == Objective::kRdc ? base_cfg.tradeoff.lambda_c : base_cfg.tradeoff.lambda_p);
    const auto seeds = parse_seed_list(take(sweep, "seeds", std::to_string(base_cfg.seed)));
    if (!sweep.empty()) throw std::invalid_argument("unknown sweep key: sweep." + sweep.begin()->first);

    std::vector<QuantizerSpec> specs;
    for (const auto& q : quantizers) specs.push_back(parse_quantizer(q));
    if (specs.empty()) specs.push_back(base_cfg.quantizer);
    for (const auto& q : specs)
        for (double lambda : lambdas)
            for (auto seed : seeds) {
                auto c = base_cfg;
                c.quantizer = q;
                c.seed = seed;
                set_lambda(c, lambda);
                plan.runs.push_back(c);
            }

    if (uni.empty()) return plan;
    auto source = base_cfg;
    source.quantizer = parse_quantizer(take(uni, "source_quantizer", std::to_string(base_cfg.quantizer.dim) + "x" +
                                                                         std::to_string(base_cfg.quantizer.levels)));
    source.seed = static_cast<std::uint64_t>(parse_int(take(uni, "source_seed", std::to_string(base_cfg.seed))));
    const auto source_lambda = take(uni, "source_lambda", "");
    if (source_lambda.empty()) throw std::invalid_argument("universal runs need universal.source_lambda");
    set_lambda(source, parse_double(source_lambda));
    const auto u_lambdas = parse_double_list(take(uni, "lambdas", ""));
    const auto u_seeds = parse_seed_list(take(uni, "seeds", std::to_string(base_cfg.seed)));
    const auto critic_init = take(uni, "critic_init", "auto");
    if (!uni.empty()) throw std::invalid_argument("unknown sweep key: universal." + uni.begin()->first);

    const auto source_id = run_id(source);
    if (std::none_of(plan.runs.begin(), plan.runs.end(), [&](const RunConfig& c) { return run_id(c) == source_id; }))
        plan.runs.push_back(source);
    for (double lambda : u_lambdas)
        for (auto seed : u_seeds) {
            auto c = source;
            c.mode = Mode::kUniversal;
            c.seed = seed;
            c.encoder_source = source_id;
            if (critic_init != "auto") c.critic_init = parse_critic_init(critic_init);
            set_lambda(c, lambda);
            plan.runs.push_back(c);
        }
    return plan;
}

SweepPlan read_plan_file(const std::string& path) { return plan_from(read_key_values_file(path)); }

std::vector<std::string> check_references(const SweepPlan& plan) {
    std::vector<std::string> problems;
    std::set<std::string> produced;
    for (const auto& c : plan.runs) {
        for (const auto& v : validate(c)) problems.push_back(run_id(c) + ": " + v.field + ": " + v.rule);
        if (c.mode == Mode::kUniversal && !produced.contains(c.encoder_source) &&
            !nets::checkpoint_exists(c.encoder_source))
            problems.push_back(run_id(c) + ": encoder_source " + c.encoder_source + " is not produced earlier in the plan");
        if (c.mode == Mode::kEndToEnd) produced.insert(run_id(c));
    }
    return problems;
}

SweepReport run_sweep(const SweepPlan& plan, const train::Workspace& ws, const TableMeta& meta, bool resume,
                      const RunFn& run) {
    SweepReport report;
    if (const auto problems = check_references(plan); !problems.empty())
        throw std::invalid_argument("invalid sweep plan: " + problems.front());
    std::filesystem::create_directories(ws.out_dir);

    const auto existing = read_table(ws.results());
    if (!resume)
        for (const auto& c : plan.runs)
            if (existing.find(run_id(c)))
                throw std::runtime_error("out-dir already holds run " + run_id(c) + "; pass --resume to continue it");

    std::set<std::string> failed_ids;
    for (const auto& c : plan.runs) {
        const auto id = run_id(c);
        const auto table = read_table(ws.results());
        if (const auto* done = table.find(id)) {
            report.skipped.push_back(id);
            report.points.push_back(*done);
            continue;
        }
        if (c.mode == Mode::kUniversal && failed_ids.contains(c.encoder_source)) {
            report.failed.push_back(id);
            failed_ids.insert(id);
            std::ofstream(ws.out_dir + "/failures.log", std::ios::app)
                << id << " skipped: source run " << c.encoder_source << " failed\n";
            continue;
        }
        try {
            auto outcome = run(c);
            append_row(ws.results(), meta, outcome.point);
            report.trained.push_back(id);
            report.points.push_back(outcome.point);
        } catch (const std::exception& e) {
            report.failed.push_back(id);
            failed_ids.insert(id);
            std::ofstream(ws.out_dir + "/failures.log", std::ios::app) << id << " failed: " << e.what() << '\n';
            if (ws.log) *ws.log << "run " << id << " failed: " << e.what() << std::endl;
        }
    }
    return report;
}

}  // namespace rdpc::sweep
