// rdpc: training, sweeps, the exact oracle and figure export in one binary.
//
// Data directory: $RDPC_DATA_DIR/mnist (default ~/.cache/rdpc/mnist).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "rdpc/config_io.hpp"
#include "rdpc/mnist.hpp"
#include "rdpc/oracle/source_io.hpp"
#include "rdpc/oracle/surface.hpp"
#include "rdpc/plot.hpp"
#include "rdpc/reconstructions.hpp"
#include "rdpc/results.hpp"
#include "rdpc/sweep.hpp"
#include "rdpc/trainer.hpp"

namespace fs = std::filesystem;
using namespace rdpc;

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kEmpty = 3;

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "rdpc-out";
    bool resume = false;
    std::string classifier;
};

void add_run_flags(CLI::App* cmd, Common& c, const char* what) {
    cmd->add_option("config", c.config, what)->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "Override the seed in the config");
    cmd->add_option("--out-dir", c.out_dir, "Output directory")->capture_default_str();
    cmd->add_flag("--resume", c.resume, "Reuse completed work found in the output directory");
}

train::Workspace workspace(const Common& c) { return {c.out_dir, c.classifier, &std::cout}; }

Mnist load_data() {
    const auto dir = default_mnist_dir();
    std::cout << "data: " << dir << std::endl;
    return load_mnist(dir);
}

int cmd_pretrain(const Common& c) {
    auto cfg = train::classifier_config_from(read_key_values_file(c.config));
    if (c.seed) cfg.seed = *c.seed;
    const auto data = load_data();
    const auto ws = workspace(c);
    fs::create_directories(c.out_dir);
    const auto report = train::pretrain_classifier(data, cfg, ws.classifier(), c.resume, &std::cout);
    std::cout << "classifier " << report.stem << " fingerprint " << report.fingerprint << " test_accuracy "
              << report.test_accuracy << (report.reused ? " (reused)" : "") << '\n';
    return kOk;
}

int cmd_train(const Common& c) {
    auto cfg = run_config_from(read_key_values_file(c.config));
    if (c.seed) cfg.seed = *c.seed;
    const auto ws = workspace(c);
    const auto id = run_id(cfg);
    const auto table = read_table(ws.results());
    if (const auto* done = table.find(id)) {
        if (!c.resume) {
            std::cerr << "run " << id << " already in " << ws.results() << "; pass --resume to reuse it\n";
            return kFailed;
        }
        std::cout << to_csv_row(*done) << '\n';
        return kOk;
    }
    const auto data = load_data();
    const auto outcome = train::train_run(cfg, data, ws);
    append_row(ws.results(), train::table_meta(data, ws), outcome.point);
    std::cout << kResultsColumns << '\n' << to_csv_row(outcome.point) << '\n';
    return kOk;
}

int cmd_sweep(const Common& c) {
    auto kv = read_key_values_file(c.config);
    if (c.seed) {
        kv["seed"] = std::to_string(*c.seed);
        kv["sweep.seeds"] = std::to_string(*c.seed);
    }
    const auto plan = sweep::plan_from(kv);
    const auto ws = workspace(c);
    std::cout << "plan: " << plan.runs.size() << " runs" << std::endl;
    if (plan.runs.empty()) return kOk;
    const auto data = load_data();
    const auto report = sweep::run_sweep(plan, ws, train::table_meta(data, ws), c.resume,
                                         [&](const RunConfig& cfg) { return train::train_run(cfg, data, ws); });
    std::cout << "trained " << report.trained.size() << ", skipped " << report.skipped.size() << ", failed "
              << report.failed.size() << '\n';
    return report.failed.empty() ? kOk : kFailed;
}

struct OracleArgs {
    std::string source, grid, output, out_dir = "rdpc-out";
    int starts = 32;
    bool serial = false;
    double slack = 1e-6, convexity_tol = 2e-2;
};

int cmd_oracle(const OracleArgs& a) {
    const auto source = oracle::read_source_file(a.source);
    const auto grid = oracle::read_surface_grid_file(a.grid);
    oracle::SolverOptions opts;
    opts.starts = a.starts;
    const auto axis = grid.perception ? oracle::SecondAxis::kPerception : oracle::SecondAxis::kClassification;
    const auto surface = a.serial ? oracle::compute_surface_serial(source, grid.distortions, grid.second, axis, opts)
                                  : oracle::compute_surface(source, grid.distortions, grid.second, axis, opts);
    const auto path = a.output.empty() ? a.out_dir + "/surface.csv" : a.output;
    if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
    std::ofstream(path) << oracle::surface_csv(surface);
    const auto shape = oracle::check_shape(surface, a.slack, a.convexity_tol);
    std::cout << "surface " << path << ": " << grid.distortions.size() << "x" << grid.second.size() << " cells\n"
              << "monotonicity: " << shape.monotonicity_checks << " checks, worst increase " << shape.worst_increase
              << ", " << shape.monotonicity_violations.size() << " violations\n"
              << "convexity: " << shape.convexity_checks << " checks, worst gap " << shape.worst_convexity_gap << ", "
              << shape.convexity_violations.size() << " violations\n";
    for (const auto& v : shape.monotonicity_violations) std::cout << "  " << v << '\n';
    for (const auto& v : shape.convexity_violations) std::cout << "  " << v << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rate-distortion-perception-classification lab"};
    app.require_subcommand(1);

    Common common;
    auto* pre = app.add_subcommand("pretrain-classifier", "Train and checkpoint the evaluation classifier");
    add_run_flags(pre, common, "Classifier config (seed, epochs, batch_size, lr, beta1, beta2, ...)");
    pre->add_option("--classifier", common.classifier, "Checkpoint stem (default <out-dir>/classifier)");

    auto* trn = app.add_subcommand("train", "Train one end-to-end or universal run");
    add_run_flags(trn, common, "Run config");
    trn->add_option("--classifier", common.classifier, "Classifier checkpoint stem (default <out-dir>/classifier)");

    auto* swp = app.add_subcommand("sweep", "Run a sweep plan");
    add_run_flags(swp, common, "Sweep plan");
    swp->add_option("--classifier", common.classifier, "Classifier checkpoint stem (default <out-dir>/classifier)");

    OracleArgs oa;
    auto* orc = app.add_subcommand("oracle", "Exact R(D,C) or R(D,P) surface of a finite source");
    orc->add_option("source", oa.source, "Source description")->required()->check(CLI::ExistingFile);
    orc->add_option("grid", oa.grid, "Constraint grid")->required()->check(CLI::ExistingFile);
    orc->add_option("--out-dir", oa.out_dir, "Output directory")->capture_default_str();
    orc->add_option("--output", oa.output, "CSV path (default <out-dir>/surface.csv)");
    orc->add_option("--starts", oa.starts, "Multi-start count")->capture_default_str()->check(CLI::PositiveNumber);
    orc->add_flag("--serial", oa.serial, "Use the serial reference path");
    orc->add_option("--slack", oa.slack, "Monotonicity slack in bits")->capture_default_str();
    orc->add_option("--convexity-tol", oa.convexity_tol, "Midpoint convexity tolerance in bits")->capture_default_str();

    std::string out_dir = "rdpc-out", output, format = "csv";
    auto* exp = app.add_subcommand("export", "Export the results table as CSV or JSON");
    exp->add_option("--out-dir", out_dir, "Directory holding results.csv")->capture_default_str();
    exp->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    exp->add_option("--output", output, "Destination (default <out-dir>/export.<format>)");

    std::string x_axis = "mse", y_axis = "ce", group_by = "rate";
    auto* plt = app.add_subcommand("plot", "Tradeoff figure from the results table");
    plt->add_option("--out-dir", out_dir, "Directory holding results.csv")->capture_default_str();
    plt->add_option("--x", x_axis, "mse | ce | accuracy | w1_proxy")->capture_default_str();
    plt->add_option("--y", y_axis, "mse | ce | accuracy | w1_proxy")->capture_default_str();
    plt->add_option("--group-by", group_by, "rate | mode")->capture_default_str();
    plt->add_option("--output", output, "PNG path (default <out-dir>/plot_<x>_<y>.png)");

    std::string run;
    int n_images = 8;
    std::uint64_t dump_seed = 0;
    auto* dmp = app.add_subcommand("dump-images", "Originals over reconstructions for one run");
    dmp->add_option("run_id", run, "Run id with checkpoints under <out-dir>/checkpoints")->required();
    dmp->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    dmp->add_option("--n", n_images, "Number of test images")->capture_default_str()->check(CLI::PositiveNumber);
    dmp->add_option("--seed", dump_seed, "Dither seed")->capture_default_str();
    dmp->add_option("--output", output, "PNG path (default <out-dir>/images/<run_id>.png)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*pre) return cmd_pretrain(common);
        if (*trn) return cmd_train(common);
        if (*swp) return cmd_sweep(common);
        if (*orc) return cmd_oracle(oa);
        if (*exp) {
            const auto table = read_table(out_dir + "/results.csv");
            const auto path = output.empty() ? out_dir + "/export." + format : output;
            if (!export_table(table, format == "json" ? ExportFormat::kJson : ExportFormat::kCsv, path)) {
                std::cerr << "no results to export in " << out_dir << '\n';
                return kEmpty;
            }
            std::cout << path << ": " << table.rows.size() << " rows\n";
            return kOk;
        }
        if (*plt) {
            const auto x = plot::parse_axis(x_axis), y = plot::parse_axis(y_axis);
            const auto g = plot::parse_group_by(group_by);
            const auto table = read_table(out_dir + "/results.csv");
            const auto path = output.empty() ? out_dir + "/plot_" + x_axis + "_" + y_axis + ".png" : output;
            const auto series = plot::plot_tradeoff(table, x, y, g, path);
            std::cout << path << ": " << series.size() << " series\n";
            return kOk;
        }
        if (*dmp) {
            const auto data = load_data();
            train::Workspace ws{out_dir, "", nullptr};
            const auto path = output.empty() ? out_dir + "/images/" + run + ".png" : output;
            if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
            const auto r = dump_reconstructions(ws.checkpoint(run, "encoder"), ws.checkpoint(run, "decoder"), data.test,
                                                n_images, dump_seed, path);
            std::cout << r.path << ": " << r.n_images << " images, seed " << r.seed << '\n';
            return kOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailed;
    }
    return kOk;
}
