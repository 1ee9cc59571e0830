// Acceptance suite: one PASS/FAIL line per criterion.
//
// Criteria 5-10 train networks. Their checkpoints, run records and results
// table live in a cache directory (--cache-dir, $RDPC_ACCEPTANCE_DIR, or
// ./acceptance-cache) and completed runs are reused, so only the first
// invocation pays for training. Training logs go to <cache>/train.log.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <torch/torch.h>

#include "rdpc/mnist.hpp"
#include "rdpc/oracle/rdpc.hpp"
#include "rdpc/oracle/source_io.hpp"
#include "rdpc/oracle/surface.hpp"
#include "rdpc/oracle/universal.hpp"
#include "rdpc/quantizer.hpp"
#include "rdpc/quantizer_torch.hpp"
#include "rdpc/sweep.hpp"
#include "rdpc/trainer.hpp"

namespace fs = std::filesystem;
using namespace rdpc;

namespace {

// Tolerances, fixed here and nowhere else.
constexpr double kClosedFormTol = 1e-2;        // 1: bits
constexpr double kMonotoneSlack = 1e-6;        // 2: bits
constexpr double kConvexityTol = 2e-2;         // 2: bits
constexpr double kSingletonPenaltyTol = 2e-2;  // 3: bits
constexpr double kPenaltyFloor = -2e-2;        // 3: bits
constexpr int kRandomRegions = 5;              // 3
constexpr double kRoundTripSlack = 1e-12;      // 4
constexpr double kScanStep = 1e-3;             // 4
constexpr double kGradientRelTol = 1e-4;       // 4
constexpr double kAccuracyFloor = 0.97;        // 5
constexpr double kSpearmanCe = -0.8;           // 6: at most
constexpr double kSpearmanMse = 0.8;           // 6: at least
constexpr double kUniversalRelTol = 0.10;      // 8
constexpr int kGapSeedsRequired = 3;           // 9: out of 3
const std::vector<double> kLambdaGrid = {0, 0.005, 0.015, 0.05, 0.15};
constexpr double kSourceLambda = 0.015;
constexpr double kLargestScaledLambda = 1.5;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int precision = 4) {
    std::ostringstream o;
    o << std::setprecision(precision) << v;
    return o.str();
}

double hb(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1 - p) * std::log2(1 - p);
}

DiscreteSource binary_uniform() {
    DiscreteSource s;
    s.nx = s.nxhat = 2;
    s.px = {0.5, 0.5};
    s.label_channels = {Matrix::identity(2)};
    s.delta = Matrix::hamming(2, 2);
    return s;
}

// p(X) = (0.7, 0.3), label flips with 0.1 / 0.2, Hamming distortion.
DiscreteSource noisy_label() {
    DiscreteSource s;
    s.nx = s.nxhat = 2;
    s.px = {0.7, 0.3};
    Matrix label(2, 2);
    label(0, 0) = 0.9, label(0, 1) = 0.1, label(1, 0) = 0.2, label(1, 1) = 0.8;
    s.label_channels = {label};
    s.delta = Matrix::hamming(2, 2);
    return s;
}

Outcome criterion1() {
    const auto src = binary_uniform();
    double worst = 0.0;
    std::string cells;
    for (double d : {0.05, 0.1, 0.2, 0.3}) {
        const auto r = oracle::solve_rdc(src, d, {kInf});
        const double expect = 1.0 - hb(d);
        worst = std::max(worst, std::abs(r.rate - expect));
        cells += " R(" + fmt(d, 2) + ")=" + fmt(r.rate) + "/" + fmt(expect);
    }
    return {worst <= kClosedFormTol, "max |R - (1-Hb(D))| = " + fmt(worst, 3) + " (tol " + fmt(kClosedFormTol) + ");" + cells};
}

Outcome criterion2() {
    const auto src = noisy_label();
    std::vector<double> ds, cs;
    for (int i = 0; i < 8; ++i) ds.push_back(0.02 + 0.04 * i);
    for (int i = 0; i < 8; ++i) cs.push_back(0.56 + (0.89 - 0.56) * i / 7.0);
    const auto surface = oracle::compute_surface(src, ds, cs, oracle::SecondAxis::kClassification);
    const auto shape = oracle::check_shape(surface, kMonotoneSlack, kConvexityTol);
    int infeasible = 0;
    for (const auto& c : surface.cells) infeasible += c.status != oracle::SolveStatus::kOptimal;
    std::string detail = std::to_string(shape.monotonicity_checks) + " monotonicity checks (worst increase " +
                         fmt(shape.worst_increase, 3) + ", " + std::to_string(shape.monotonicity_violations.size()) +
                         " violations), " + std::to_string(shape.convexity_checks) + " convexity checks (worst gap " +
                         fmt(shape.worst_convexity_gap, 3) + ", " + std::to_string(shape.convexity_violations.size()) +
                         " violations), " + std::to_string(infeasible) + " infeasible cells";
    for (const auto& v : shape.monotonicity_violations) detail += "\n    " + v;
    for (const auto& v : shape.convexity_violations) detail += "\n    " + v;
    return {shape.monotonicity_violations.empty() && shape.convexity_violations.empty() && infeasible == 0, detail};
}

Outcome criterion3() {
    const auto src = noisy_label();
    ConstraintRegion singleton{{ConstraintPoint{0.1, kInf, {0.7}}}};
    const auto one = oracle::rate_penalty(src, singleton, 2);
    bool pass = one.status == oracle::SolveStatus::kOptimal && std::abs(one.penalty) <= kSingletonPenaltyTol;
    std::string detail = "A(singleton) = " + fmt(one.penalty, 3) + ";";

    std::mt19937_64 rng(20241017);
    std::uniform_real_distribution<double> dist_d(0.05, 0.3), dist_c(0.6, 0.89), coin(0.0, 1.0);
    std::uniform_int_distribution<int> count(2, 3);
    double worst = kInf;
    for (int t = 0; t < kRandomRegions; ++t) {
        ConstraintRegion region;
        for (int k = count(rng); k > 0; --k) {
            const double d = dist_d(rng);
            const double c = coin(rng) < 0.3 ? kInf : dist_c(rng);
            region.points.push_back({d, kInf, {c}});
        }
        const auto a = oracle::rate_penalty(src, region, 2);
        pass = pass && a.status == oracle::SolveStatus::kOptimal && a.penalty >= kPenaltyFloor;
        worst = std::min(worst, a.penalty);
        detail += " A" + std::to_string(t) + "=" + fmt(a.penalty, 3) + (a.status == oracle::SolveStatus::kOptimal ? "" : "(infeasible)");
    }
    detail += "; min " + fmt(worst, 3) + " (floor " + fmt(kPenaltyFloor) + ")";
    return {pass, detail};
}

Outcome criterion4() {
    bool pass = true;
    double worst_roundtrip = 0.0, worst_grad = 0.0;
    for (int levels : {2, 3, 4}) {
        const auto g = quant::grid(levels);
        const double spacing = 2.0 / (levels - 1);
        pass = pass && g.front() == -1.0 && g.back() == 1.0;
        for (std::size_t i = 1; i < g.size(); ++i) pass = pass && std::abs((g[i] - g[i - 1]) - spacing) <= 1e-15;

        // Exhaustive scan over y in [-1, 1] and u over its support.
        const double h = quant::half_step(levels);
        const QuantizerSpec spec{1, levels};
        const int ny = static_cast<int>(std::lround(2.0 / kScanStep));
        const int nu = static_cast<int>(std::lround(2.0 * h / kScanStep));
        for (int a = 0; a <= ny; ++a) {
            const double y = -1.0 + a * kScanStep;
            for (int b = 0; b <= nu; ++b) {
                const double u = -h + 2.0 * h * b / nu;
                const double received = quant::dequantize(quant::quantize(std::vector<double>{y + u}, spec), {{u}})[0];
                worst_roundtrip = std::max(worst_roundtrip, std::abs(received - y) - h);
            }
        }

        for (double t : {0.5, 1.0}) {
            for (int a = -40; a <= 40; ++a) {
                const double y = a * 0.031;
                const double eps = 1e-6;
                const double fd = (quant::soft_quantize_scalar(y + eps, levels, t) -
                                   quant::soft_quantize_scalar(y - eps, levels, t)) / (2 * eps);
                const double an = quant::soft_quantize_derivative(y, levels, t);
                auto yt = torch::tensor({y}, torch::kFloat64).requires_grad_(true);
                quant::straight_through(yt, levels, t).sum().backward();
                const double ad = yt.grad().item<double>();
                const double scale = std::max(std::abs(fd), 1e-3);
                worst_grad = std::max({worst_grad, std::abs(an - fd) / scale, std::abs(ad - fd) / scale});
            }
        }
    }
    pass = pass && worst_roundtrip <= kRoundTripSlack && worst_grad <= kGradientRelTol;
    return {pass, "grids exact; worst |z-u-y| - 1/(L-1) = " + fmt(worst_roundtrip, 3) + " (slack " +
                      fmt(kRoundTripSlack) + "); worst soft-gradient rel err " + fmt(worst_grad, 3) + " (tol " +
                      fmt(kGradientRelTol) + ")"};
}

// ---------------------------------------------------------------------------
// Training-backed criteria.

struct Lab {
    fs::path cache;
    fs::path configs;
    std::ofstream log;
    std::optional<Mnist> data;
    std::map<std::string, sweep::SweepReport> sweeps;

    train::Workspace workspace() { return {cache.string(), "", &log}; }

    const Mnist& mnist() {
        if (!data) data = load_mnist(default_mnist_dir());
        return *data;
    }

    train::ClassifierReport classifier() {
        auto cfg = train::classifier_config_from(read_key_values_file((configs / "classifier.cfg").string()));
        cfg.accuracy_floor = 0.0;  // judged by the criterion, not by the trainer
        fs::create_directories(cache);
        return train::pretrain_classifier(mnist(), cfg, workspace().classifier(), true, &log);
    }

    const sweep::SweepReport& sweep(const std::string& plan_name) {
        if (auto it = sweeps.find(plan_name); it != sweeps.end()) return it->second;
        classifier();
        const auto plan = sweep::read_plan_file((configs / plan_name).string());
        auto ws = workspace();
        auto report = sweep::run_sweep(plan, ws, train::table_meta(mnist(), ws), true,
                                       [&](const RunConfig& c) { return train::train_run(c, mnist(), ws); });
        if (!report.failed.empty()) throw std::runtime_error(plan_name + ": run " + report.failed.front() + " failed");
        return sweeps.emplace(plan_name, std::move(report)).first->second;
    }

    std::vector<RunConfig> plan_runs(const std::string& plan_name) {
        return sweep::read_plan_file((configs / plan_name).string()).runs;
    }
};

const CurvePoint& find_point(const std::vector<CurvePoint>& pts, Mode mode, double lambda, std::uint64_t seed = 0,
                             int dim = 3, int levels = 3) {
    for (const auto& p : pts) {
        const double l = p.objective == Objective::kRdc ? p.lambda_c : p.lambda_p;
        if (p.mode == mode && l == lambda && p.seed == seed && p.dim == dim && p.levels == levels) return p;
    }
    throw std::runtime_error("missing point for lambda " + fmt(lambda));
}

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = (i + j) / 2.0 + 1.0;
        i = j + 1;
    }
    return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const auto ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) ma += ra[i] / n, mb += rb[i] / n;
    double num = 0, da = 0, db = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        da += (ra[i] - ma) * (ra[i] - ma);
        db += (rb[i] - mb) * (rb[i] - mb);
    }
    return num / std::sqrt(da * db);
}

std::string point_text(const CurvePoint& p) {
    return "mse " + fmt(p.mse) + " ce " + fmt(p.ce) + " acc " + fmt(p.accuracy, 3) +
           (std::isnan(p.w1_proxy) ? "" : " w1 " + fmt(p.w1_proxy));
}

Outcome criterion5(Lab& lab) {
    const auto r = lab.classifier();
    return {r.test_accuracy >= kAccuracyFloor,
            "test accuracy " + fmt(r.test_accuracy, 5) + " (floor " + fmt(kAccuracyFloor) + ")" + (r.reused ? ", cached" : "")};
}

Outcome criterion6(Lab& lab) {
    const auto& pts = lab.sweep("rdc_grid.plan").points;
    std::vector<double> ce, mse;
    std::string detail;
    for (double l : kLambdaGrid) {
        const auto& p = find_point(pts, Mode::kEndToEnd, l);
        ce.push_back(p.ce);
        mse.push_back(p.mse);
        detail += " [" + fmt(l) + ": mse " + fmt(p.mse) + " ce " + fmt(p.ce) + "]";
    }
    const double rc = spearman(kLambdaGrid, ce), rm = spearman(kLambdaGrid, mse);
    return {rc <= kSpearmanCe && rm >= kSpearmanMse,
            "spearman(lambda, ce) = " + fmt(rc, 3) + " (<= " + fmt(kSpearmanCe) + "), spearman(lambda, mse) = " +
                fmt(rm, 3) + " (>= " + fmt(kSpearmanMse) + ");" + detail};
}

Outcome criterion7(Lab& lab) {
    const auto& low = find_point(lab.sweep("rdc_grid.plan").points, Mode::kEndToEnd, kSourceLambda, 0, 3, 3);
    const auto& high = find_point(lab.sweep("rdc_rate.plan").points, Mode::kEndToEnd, kSourceLambda, 0, 4, 4);
    return {high.mse < low.mse && high.ce < low.ce,
            "(4,4): " + point_text(high) + " vs (3,3): " + point_text(low)};
}

Outcome criterion8(Lab& lab) {
    const auto& pts = lab.sweep("rdp_universal.plan").points;
    bool pass = true;
    double worst = 0.0;
    std::string detail;
    for (double l : kLambdaGrid) {
        const auto& e = find_point(pts, Mode::kEndToEnd, l);
        const auto& u = find_point(pts, Mode::kUniversal, l);
        const double rel = std::abs(u.mse - e.mse) / e.mse;
        worst = std::max(worst, rel);
        pass = pass && rel <= kUniversalRelTol;
        detail += " [" + fmt(l) + ": mse u/e " + fmt(u.mse) + "/" + fmt(e.mse) + " (" + fmt(100 * rel, 3) + "%), w1 u/e " +
                  fmt(u.w1_proxy) + "/" + fmt(e.w1_proxy) + "]";
    }
    return {pass, "worst relative mse gap " + fmt(100 * worst, 3) + "% (tol " + fmt(100 * kUniversalRelTol) + "%);" + detail};
}

// End-to-end MSE at a given CE, piecewise linear in CE with linear
// extrapolation beyond the ends.
double mse_at_ce(std::vector<std::pair<double, double>> curve, double ce) {
    std::sort(curve.begin(), curve.end());
    std::size_t k = 1;
    while (k + 1 < curve.size() && curve[k].first < ce) ++k;
    const auto [c0, m0] = curve[k - 1];
    const auto [c1, m1] = curve[k];
    if (c1 == c0) return (m0 + m1) / 2;
    return m0 + (m1 - m0) * (ce - c0) / (c1 - c0);
}

Outcome criterion9(Lab& lab) {
    const auto& pts = lab.sweep("rdc_universal.plan").points;
    std::vector<std::pair<double, double>> curve;
    for (double l : kLambdaGrid) {
        const auto& e = find_point(pts, Mode::kEndToEnd, l);
        curve.emplace_back(e.ce, e.mse);
    }
    int positive = 0;
    std::string detail;
    for (std::uint64_t seed : {0, 1, 2}) {
        const auto& u = find_point(pts, Mode::kUniversal, kLargestScaledLambda, seed);
        const double e = mse_at_ce(curve, u.ce);
        positive += u.mse > e;
        detail += " [seed " + std::to_string(seed) + ": universal mse " + fmt(u.mse) + " at ce " + fmt(u.ce) +
                  " vs end-to-end " + fmt(e) + "]";
    }
    return {positive >= kGapSeedsRequired,
            std::to_string(positive) + "/3 seeds with positive distortion gap (need " + std::to_string(kGapSeedsRequired) + ");" + detail};
}

Outcome criterion10(Lab& lab) {
    int runs = 0;
    bool pass = true;
    std::string detail;
    for (const auto* plan : {"rdp_universal.plan", "rdc_universal.plan"}) {
        lab.sweep(plan);
        for (const auto& cfg : lab.plan_runs(plan)) {
            if (cfg.mode != Mode::kUniversal) continue;
            const auto rec = train::read_run_record(lab.workspace().run_record(run_id(cfg)));
            ++runs;
            const bool ok = !rec.encoder_fingerprint_before.empty() &&
                            rec.encoder_fingerprint_before == rec.encoder_fingerprint_after &&
                            rec.fingerprint_checks == cfg.epochs + 1;
            if (!ok) detail += " " + run_id(cfg) + " drifted or skipped checks;";
            pass = pass && ok;
        }
    }
    return {pass && runs > 0, std::to_string(runs) + " universal runs, fingerprint equal before/after and after every epoch" +
                                  (detail.empty() ? "" : ";" + detail)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria 1-10"};
    std::string cache = std::getenv("RDPC_ACCEPTANCE_DIR") ? std::getenv("RDPC_ACCEPTANCE_DIR") : "acceptance-cache";
    std::string configs = RDPC_ACCEPTANCE_CONFIGS;
    std::vector<int> only;
    app.add_option("--cache-dir", cache, "Checkpoint and results cache")->capture_default_str();
    app.add_option("--configs", configs, "Directory with the acceptance plans")->capture_default_str();
    app.add_option("--only", only, "Criteria to run (default all)")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    Lab lab;
    lab.cache = cache;
    lab.configs = configs;
    fs::create_directories(lab.cache);
    lab.log.open(lab.cache / "train.log", std::ios::app);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"oracle matches 1 - Hb(D)", criterion1},
        {"R(D,C) non-increasing and midpoint-convex on 8x8 grid", criterion2},
        {"rate penalty sanity", criterion3},
        {"quantizer grid, dither round trip, soft gradient", criterion4},
        {"classifier accuracy gate", [&] { return criterion5(lab); }},
        {"RDC tradeoff trend at (3,3)", [&] { return criterion6(lab); }},
        {"rate dominance (4,4) over (3,3) at lambda_c 0.015", [&] { return criterion7(lab); }},
        {"universal RDP within 10% of end-to-end MSE", [&] { return criterion8(lab); }},
        {"universal RDC distortion gap at matched CE", [&] { return criterion9(lab); }},
        {"frozen encoder fingerprint", [&] { return criterion10(lab); }},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !o.pass;
        std::cout << "criterion " << std::setw(2) << id << ": " << (o.pass ? "PASS" : "FAIL") << "  "
                  << criteria[i].first << " | " << o.detail << " | " << fmt(secs, 3) << " s" << std::endl;
    }
    std::cout << (failed ? std::to_string(failed) + " criteria failed" : "all criteria passed") << std::endl;
    return failed ? 1 : 0;
}
