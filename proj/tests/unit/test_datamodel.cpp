#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "generators.hpp"
#include "rdpc/config_io.hpp"
#include "rdpc/datamodel.hpp"
#include "rdpc/results.hpp"

using namespace rdpc;
namespace fs = std::filesystem;

namespace {

bool has_rule(const std::vector<Violation>& v, const std::string& field) {
    for (const auto& x : v)
        if (x.field == field) return true;
    return false;
}

CurvePoint sample_point(testing::Gen& g, const std::string& id) {
    CurvePoint p;
    p.run_id = id;
    p.mode = g.coin() ? Mode::kEndToEnd : Mode::kUniversal;
    p.objective = g.coin() ? Objective::kRdc : Objective::kRdp;
    p.dim = g.integer(1, 6);
    p.levels = g.integer(2, 6);
    p.rate = rate_of({p.dim, p.levels});
    p.lambda_c = g.uniform(0, 2);
    p.mse = g.uniform(0.001, 0.1);
    p.ce = g.uniform(0.0, 2.5);
    p.accuracy = g.uniform();
    p.w1_proxy = g.coin() ? std::nan("") : g.uniform(-1, 1);
    p.seed = g.bits() >> 20;
    return p;
}

}  // namespace

TEST_CASE("rate of the fixed-rate code") {
    CHECK(rate_of({3, 3}) == doctest::Approx(4.754887502163468).epsilon(1e-12));
    CHECK(rate_of({4, 4}) == 8.0);
    CHECK(rate_of({1, 2}) == 1.0);
    CHECK_THROWS_AS(require_valid(QuantizerSpec{0, 3}), std::invalid_argument);
    CHECK_THROWS_AS(require_valid(QuantizerSpec{3, 1}), std::invalid_argument);
}

TEST_CASE("enum names round-trip and reject unknown text") {
    for (auto m : {Mode::kEndToEnd, Mode::kUniversal}) CHECK(parse_mode(to_string(m)) == m);
    for (auto o : {Objective::kRdc, Objective::kRdp}) CHECK(parse_objective(to_string(o)) == o);
    for (auto c : {CriticInit::kRandom, CriticInit::kFromSource}) CHECK(parse_critic_init(to_string(c)) == c);
    CHECK_THROWS(parse_mode("universal-ish"));
    CHECK_THROWS(parse_objective("rdpc"));
}

TEST_CASE("defaults validate") { CHECK(validate(RunConfig{}).empty()); }

TEST_CASE("validation names the broken field") {
    RunConfig c;
    c.tradeoff = {0.1, 0.1};
    CHECK(has_rule(validate(c), "lambda_c"));

    c = {};
    c.tradeoff.lambda_p = 0.1;  // rdc objective
    CHECK(has_rule(validate(c), "lambda_p"));

    c = {};
    c.objective = Objective::kRdp;
    c.tradeoff.lambda_c = 0.1;
    CHECK(has_rule(validate(c), "lambda_c"));

    c = {};
    c.mode = Mode::kUniversal;
    CHECK(has_rule(validate(c), "encoder_source"));

    c = {};
    c.encoder_source = "abc";
    CHECK(has_rule(validate(c), "encoder_source"));

    c = {};
    c.critic_init = CriticInit::kRandom;
    CHECK(has_rule(validate(c), "critic_init"));

    c = {};
    c.quantizer.levels = 1;
    c.epochs = 0;
    c.critic.beta2 = 1.0;
    c.temperature = 0.0;
    const auto v = validate(c);
    CHECK(has_rule(v, "levels"));
    CHECK(has_rule(v, "epochs"));
    CHECK(has_rule(v, "critic_beta2"));
    CHECK(has_rule(v, "temperature"));

    c = {};
    c.tradeoff.lambda_c = std::nan("");
    CHECK(has_rule(validate(c), "lambda_c"));
}

TEST_CASE("property: generated configs validate and round-trip through text") {
    testing::Gen g(11);
    for (int i = 0; i < 300; ++i) {
        const auto c = g.valid_config();
        CAPTURE(serialize(c));
        REQUIRE(validate(c).empty());
        const auto back = parse_run_config(serialize(c));
        CHECK(back == c);
        CHECK(serialize(back) == serialize(c));
        CHECK(run_id(back) == run_id(c));
    }
}

TEST_CASE("property: run ids are content hashes") {
    testing::Gen g(12);
    std::set<std::string> ids;
    for (int i = 0; i < 300; ++i) {
        auto c = g.valid_config();
        const auto id = run_id(c);
        CHECK(id.size() == 16);
        ids.insert(id);
        auto d = c;
        d.seed ^= 1;
        CHECK(run_id(d) != id);
        d = c;
        d.epochs += 1;
        CHECK(run_id(d) != id);
    }
    CHECK(ids.size() == 300);
}

TEST_CASE("config text") {
    const auto c = parse_run_config("# comment\nmode = universal\nencoder_source = abc  # trailing\n\nlambda_c=0.5\n");
    CHECK(c.mode == Mode::kUniversal);
    CHECK(c.encoder_source == "abc");
    CHECK(c.tradeoff.lambda_c == 0.5);
    CHECK_THROWS_AS(parse_run_config("bogus = 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_run_config("dim = 3\ndim = 4\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_run_config("dim 3\n"), std::invalid_argument);
    CHECK_THROWS(parse_run_config("dim = three\n"));
}

TEST_CASE("property: format_double is shortest round-trip") {
    testing::Gen g(13);
    for (int i = 0; i < 1000; ++i) {
        const double v = g.uniform(-1, 1) * std::pow(10.0, g.integer(-12, 12));
        CHECK(parse_double(format_double(v)) == v);
    }
    CHECK(format_double(0.015) == "0.015");
    CHECK(format_double(kInf) == "inf");
    CHECK(std::isnan(parse_double(format_double(std::nan("")))));
}

TEST_CASE("matrices and sources") {
    const auto h = Matrix::hamming(2, 3);
    CHECK(h(0, 0) == 0.0);
    CHECK(h(0, 1) == 1.0);
    CHECK(h(1, 2) == 1.0);
    CHECK(Matrix::identity(3).row_stochastic());
    CHECK_FALSE(Matrix(2, 2, 0.4).row_stochastic());

    DiscreteSource s;
    s.nx = s.nxhat = 2;
    s.px = {0.5, 0.5};
    s.label_channels = {Matrix::identity(2)};
    s.delta = Matrix::hamming(2, 2);
    CHECK_NOTHROW(s.require_valid());
    s.px = {0.6, 0.6};
    CHECK_THROWS_AS(s.require_valid(), std::invalid_argument);
    s.px = {0.5, 0.5};
    s.label_channels = {Matrix(3, 2, 0.5)};
    CHECK_THROWS_AS(s.require_valid(), std::invalid_argument);
}

TEST_CASE("constraint points") {
    CHECK(ConstraintPoint{}.vacuous());
    CHECK_FALSE(ConstraintPoint{0.1}.vacuous());
    CHECK_FALSE((ConstraintPoint{kInf, kInf, {0.5}}.vacuous()));
    CHECK((ConstraintPoint{kInf, kInf, {kInf}}.vacuous()));
    ConstraintRegion r{{ConstraintPoint{0.1, kInf, {0.5, 0.5}}}};
    CHECK_NOTHROW(r.require_valid(2));
    CHECK_THROWS(r.require_valid(1));
}

TEST_CASE("property: results rows round-trip through csv and json") {
    testing::Gen g(14);
    ResultsTable t;
    t.meta.dataset_hash = "d1";
    for (int i = 0; i < 40; ++i) t.rows.push_back(sample_point(g, "run" + std::to_string(i)));
    for (const auto& p : t.rows) CHECK(same_point(from_csv_row(to_csv_row(p)), p));

    const auto csv = to_csv(t);
    const auto back = from_csv(csv);
    CHECK(back.meta == t.meta);
    REQUIRE(back.rows.size() == t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) CHECK(same_point(back.rows[i], t.rows[i]));
    CHECK(to_csv(back) == csv);

    const auto js = from_json(to_json(t));
    REQUIRE(js.rows.size() == t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) CHECK(same_point(js.rows[i], t.rows[i]));
    CHECK(to_json(js) == to_json(t));
}

TEST_CASE("append_row is idempotent per run id") {
    const auto dir = fs::temp_directory_path() / "rdpc_test_datamodel";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto path = (dir / "results.csv").string();
    testing::Gen g(15);
    const auto p = sample_point(g, "abc");
    CHECK(read_table(path).rows.empty());
    CHECK(append_row(path, {}, p));
    CHECK_FALSE(append_row(path, {}, p));
    auto q = sample_point(g, "def");
    CHECK(append_row(path, {}, q));
    const auto t = read_table(path);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.find("abc") != nullptr);
    CHECK(t.find("zzz") == nullptr);
    std::ifstream in(path);
    std::string header, cols;
    std::getline(in, header);
    std::getline(in, cols);
    CHECK(header.rfind("# rdpc-results", 0) == 0);
    CHECK(cols == kResultsColumns);
    fs::remove_all(dir);
}
