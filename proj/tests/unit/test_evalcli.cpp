#include "torch_doctest.hpp"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <opencv2/imgcodecs.hpp>

#include "rdpc/networks.hpp"
#include "rdpc/plot.hpp"
#include "rdpc/reconstructions.hpp"
#include "rdpc/results.hpp"

using namespace rdpc;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("rdpc_test_evalcli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run(const std::string& args, const std::string& env = "") {
    const auto cmd = env + " " + std::string(RDPC_EXE) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

CurvePoint point(const std::string& id, Mode mode, double rate_levels, double mse, double ce, double w1) {
    CurvePoint p;
    p.run_id = id;
    p.mode = mode;
    p.objective = std::isnan(w1) ? Objective::kRdc : Objective::kRdp;
    p.dim = 3;
    p.levels = static_cast<int>(rate_levels);
    p.rate = rate_of({3, p.levels});
    p.mse = mse;
    p.ce = ce;
    p.accuracy = 0.9;
    p.w1_proxy = w1;
    return p;
}

ResultsTable sample_table() {
    ResultsTable t;
    t.meta.dataset_hash = "abcd";
    t.meta.classifier_fingerprint = "0123";
    t.rows = {point("a1", Mode::kEndToEnd, 3, 0.05, 0.4, std::nan("")),
              point("a2", Mode::kEndToEnd, 3, 0.04, 0.9, std::nan("")),
              point("b1", Mode::kUniversal, 3, 0.045, 0.6, std::nan("")),
              point("c1", Mode::kEndToEnd, 4, 0.03, 0.3, 0.12)};
    return t;
}

void write_table(const fs::path& dir, const ResultsTable& t) { std::ofstream(dir / "results.csv") << to_csv(t); }

// Untrained encoder and decoder checkpoints under <dir>/checkpoints.
void seed_checkpoints(const fs::path& dir, const std::string& id, QuantizerSpec enc_spec, QuantizerSpec dec_spec) {
    fs::create_directories(dir / "checkpoints");
    torch::manual_seed(0);
    nets::Encoder e(enc_spec);
    nets::Decoder d(dec_spec);
    nets::save_checkpoint(*e, (dir / "checkpoints" / (id + ".encoder")).string(), {"encoder", "", id, 0, enc_spec});
    nets::save_checkpoint(*d, (dir / "checkpoints" / (id + ".decoder")).string(), {"decoder", "", id, 0, dec_spec});
}

ImageSet tiny_test_set() {
    ImageSet s;
    s.images = torch::rand({10, 1, 28, 28});
    s.labels = torch::zeros({10}, torch::kInt64);
    return s;
}

}  // namespace

TEST_CASE("results table has the 13 documented columns") {
    std::stringstream cols(std::string{kResultsColumns});
    std::string c;
    int n = 0;
    while (std::getline(cols, c, ',')) ++n;
    CHECK(n == 13);
    const auto row = to_csv_row(sample_table().rows[0]);
    CHECK(std::count(row.begin(), row.end(), ',') == 12);
    CHECK(row.find("nan") != std::string::npos);
}

TEST_CASE("export, import, export is byte-stable") {
    const auto dir = fresh_dir("export");
    write_table(dir, sample_table());
    for (const std::string fmt : {"csv", "json"}) {
        CAPTURE(fmt);
        const auto first = dir / ("first." + fmt);
        REQUIRE(run("export --out-dir " + dir.string() + " --format " + fmt + " --output " + first.string()) == 0);
        const auto text = slurp(first);
        const auto back = fmt == "csv" ? from_csv(text) : from_json(text);
        CHECK(back.rows.size() == 4);
        CHECK(back.meta == sample_table().meta);
        const auto second = dir / ("second." + fmt);
        REQUIRE(export_table(back, fmt == "csv" ? ExportFormat::kCsv : ExportFormat::kJson, second.string()));
        CHECK(slurp(second) == text);
    }
}

TEST_CASE("empty export writes nothing and exits 3") {
    const auto dir = fresh_dir("empty");
    CHECK(run("export --out-dir " + dir.string()) == 3);
    CHECK_FALSE(fs::exists(dir / "export.csv"));
    CHECK_FALSE(export_table({}, ExportFormat::kJson, (dir / "x.json").string()));
    CHECK_FALSE(fs::exists(dir / "x.json"));
}

TEST_CASE("plot series and trace file") {
    const auto t = sample_table();
    const auto by_rate = plot::build_series(t, plot::Axis::kMse, plot::Axis::kCe, plot::GroupBy::kRate);
    REQUIRE(by_rate.size() == 2);
    CHECK(by_rate[0].group == "R=4.75");
    CHECK(by_rate[0].points.size() == 3);
    CHECK(by_rate[0].points[0].x <= by_rate[0].points[1].x);
    const auto by_mode = plot::build_series(t, plot::Axis::kMse, plot::Axis::kCe, plot::GroupBy::kMode);
    CHECK(by_mode.size() == 2);
    // NaN w1 rows are left out.
    const auto w1 = plot::build_series(t, plot::Axis::kMse, plot::Axis::kW1Proxy, plot::GroupBy::kRate);
    REQUIRE(w1.size() == 1);
    CHECK(w1[0].points.size() == 1);
    CHECK_THROWS_AS(plot::parse_axis("psnr"), std::invalid_argument);
    CHECK_THROWS_AS(plot::parse_group_by("seed"), std::invalid_argument);

    const auto dir = fresh_dir("plot");
    write_table(dir, t);
    const auto png = dir / "p.png";
    REQUIRE(run("plot --out-dir " + dir.string() + " --x mse --y ce --output " + png.string()) == 0);
    const auto img = cv::imread(png.string());
    CHECK(img.cols == 900);
    CHECK(img.rows == 640);
    const auto trace = slurp(dir / "p.png.points.csv");
    for (const auto& id : {"a1", "a2", "b1", "c1"}) CHECK(trace.find(id) != std::string::npos);
    CHECK(run("plot --out-dir " + dir.string() + " --x psnr --y ce") == 1);
}

TEST_CASE("single-point plot") {
    const auto dir = fresh_dir("single");
    ResultsTable t;
    t.rows = {point("only", Mode::kEndToEnd, 3, 0.05, 0.5, std::nan(""))};
    write_table(dir, t);
    CHECK(run("plot --out-dir " + dir.string() + " --x mse --y accuracy") == 0);
    CHECK(fs::exists(dir / "plot_mse_accuracy.png"));
    // Nothing plottable: w1 is NaN for the only row.
    CHECK(run("plot --out-dir " + dir.string() + " --x mse --y w1_proxy") == 1);
}

TEST_CASE("reconstruction grids are deterministic and laid out 2 x n") {
    const auto dir = fresh_dir("dump");
    seed_checkpoints(dir, "r", {3, 3}, {3, 3});
    const auto test = tiny_test_set();
    const auto enc = (dir / "checkpoints" / "r.encoder").string(), dec = (dir / "checkpoints" / "r.decoder").string();
    const auto a = dump_reconstructions(enc, dec, test, 8, 5, (dir / "a.png").string());
    dump_reconstructions(enc, dec, test, 8, 5, (dir / "b.png").string());
    dump_reconstructions(enc, dec, test, 8, 6, (dir / "c.png").string());
    CHECK(slurp(dir / "a.png") == slurp(dir / "b.png"));
    CHECK(slurp(dir / "a.png") != slurp(dir / "c.png"));
    const auto img = cv::imread((dir / "a.png").string(), cv::IMREAD_GRAYSCALE);
    const int tile = 28 * 3, gap = 2;
    CHECK(img.rows == 2 * tile + 3 * gap);
    CHECK(img.cols == 8 * (tile + gap) + gap);
    CHECK(a.n_images == 8);
    CHECK(slurp(dir / "a.png.json").find(a.encoder_fingerprint) != std::string::npos);

    CHECK_THROWS_AS(dump_reconstructions(enc, enc, test, 8, 5, (dir / "x.png").string()), std::invalid_argument);
    seed_checkpoints(dir, "m", {3, 3}, {4, 4});
    CHECK_THROWS_AS(dump_reconstructions((dir / "checkpoints" / "m.encoder").string(),
                                         (dir / "checkpoints" / "m.decoder").string(), test, 8, 5,
                                         (dir / "y.png").string()),
                    std::invalid_argument);
    CHECK_THROWS(dump_reconstructions(enc, dec, test, 11, 5, (dir / "z.png").string()));
}

TEST_CASE("data directory comes from RDPC_DATA_DIR") {
    const auto dir = fresh_dir("data");
    seed_checkpoints(dir, "r", {3, 3}, {3, 3});
    const auto empty = fresh_dir("nodata");
    const auto data = fs::path(default_mnist_dir()).parent_path().string();
    CHECK(run("dump-images r --out-dir " + dir.string(), "RDPC_DATA_DIR=" + data) == 0);
    CHECK(fs::exists(dir / "images" / "r.png"));
    CHECK(run("dump-images r --out-dir " + dir.string(), "RDPC_DATA_DIR=" + empty.string()) == 1);
    ::setenv("RDPC_DATA_DIR", empty.string().c_str(), 1);
    CHECK(default_mnist_dir() == (empty / "mnist").string());
    ::unsetenv("RDPC_DATA_DIR");
}

TEST_CASE("oracle subcommand writes a surface csv") {
    const auto dir = fresh_dir("oracle");
    std::ofstream(dir / "grid") << "axis = classification\ndistortion = 0.05 0.15\nsecond = 0.6 0.8\n";
    const auto out = dir / "surface.csv";
    REQUIRE(run(std::string("oracle ") + RDPC_SOURCE_DIR + "/configs/oracle/noisy_label.src " + (dir / "grid").string() +
                " --starts 8 --output " + out.string()) == 0);
    std::ifstream in(out);
    std::string header, line;
    std::getline(in, header);
    CHECK(header.rfind("distortion,classification,status,rate_bits", 0) == 0);
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 4);
    CHECK(run("oracle missing.src missing.grid") != 0);
}

TEST_CASE("every subcommand is wired") {
    for (const auto* sub : {"pretrain-classifier", "train", "sweep", "oracle", "export", "plot", "dump-images"})
        CHECK(run(std::string(sub) + " --help") == 0);
    CHECK(run("") != 0);
    CHECK(run("frobnicate") != 0);
}
