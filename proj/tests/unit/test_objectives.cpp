#include "torch_doctest.hpp"

#include <cmath>

#include "generators.hpp"
#include "rdpc/objectives.hpp"

using namespace rdpc;
using torch::Tensor;

namespace {

const auto kF64 = torch::TensorOptions().dtype(torch::kFloat64);

double item(const Tensor& t) { return t.item<double>(); }

Tensor images(std::int64_t n, std::int64_t side, std::uint64_t seed) {
    auto g = at::make_generator<at::CPUGeneratorImpl>(seed);
    return torch::rand({n, 1, side, side}, g, kF64);
}

}  // namespace

TEST_CASE("distortion") {
    const auto x = images(4, 28, 1);
    CHECK(item(obj::distortion(x, x)) == 0.0);
    CHECK(item(obj::distortion(torch::ones({2, 1, 28, 28}, kF64), torch::zeros({2, 1, 28, 28}, kF64))) == 1.0);
    CHECK_THROWS(obj::distortion(x, images(3, 28, 2)));

    const auto y = images(4, 28, 3);
    auto xa = x.accessor<double, 4>();
    auto ya = y.accessor<double, 4>();
    double naive = 0.0;
    for (int b = 0; b < 4; ++b)
        for (int r = 0; r < 28; ++r)
            for (int c = 0; c < 28; ++c) naive += (xa[b][0][r][c] - ya[b][0][r][c]) * (xa[b][0][r][c] - ya[b][0][r][c]);
    naive /= 4.0 * 28 * 28;
    CHECK(std::abs(item(obj::distortion(x, y)) - naive) <= 1e-10);
}

TEST_CASE("cross-entropy") {
    const auto labels = torch::tensor({3, 7}, torch::kInt64);
    auto onehot = torch::zeros({2, 10}, kF64);
    onehot[0][3] = 1.0;
    onehot[1][7] = 1.0;
    const auto exact = obj::ce_loss(labels, onehot);
    CHECK(item(exact.value) == 0.0);
    CHECK_FALSE(exact.clamped);

    const auto uniform = obj::ce_loss(labels, torch::full({2, 10}, 0.1, kF64));
    CHECK(item(uniform.value) == doctest::Approx(std::log(10.0)).epsilon(1e-12));

    auto wrong = torch::zeros({2, 10}, kF64);
    wrong.select(1, 0).fill_(1.0);
    const auto clamped = obj::ce_loss(labels, wrong);
    CHECK(clamped.clamped);
    CHECK(item(clamped.value) == doctest::Approx(-std::log(obj::kProbabilityFloor)));

    const auto p = torch::softmax(torch::randn({16, 10}, kF64), 1);
    const auto l = torch::randint(0, 10, {16}, torch::kInt64);
    CHECK(item(obj::ce_loss(l, p).value) == doctest::Approx(item(obj::ce_from_log_probs(l, torch::log(p)))));
}

TEST_CASE("property: empirical CE upper-bounds the analytic H(S|Xhat)") {
    testing::Gen g(41);
    for (int t = 0; t < 20; ++t) {
        // Joint p(s, xhat) over 3 labels x 4 outputs; predictor q(s|xhat) is arbitrary.
        const auto joint = g.simplex(12);
        Matrix q = g.stochastic(4, 3);
        double h = 0.0;
        for (int y = 0; y < 4; ++y) {
            double py = 0.0;
            for (int s = 0; s < 3; ++s) py += joint[s * 4 + y];
            for (int s = 0; s < 3; ++s) {
                const double p = joint[s * 4 + y];
                if (p > 0) h -= p * std::log(p / py);
            }
        }
        // Exact expectation of CE under the joint, via weighted rows.
        double ce = 0.0;
        for (int y = 0; y < 4; ++y)
            for (int s = 0; s < 3; ++s) {
                const auto label = torch::tensor({s}, torch::kInt64);
                const auto probs = torch::tensor({q(y, 0), q(y, 1), q(y, 2)}, kF64).unsqueeze(0);
                ce += joint[s * 4 + y] * item(obj::ce_loss(label, probs).value);
            }
        CHECK(ce >= h - 1e-12);
    }
}

TEST_CASE("gradient penalty on toy critics") {
    const auto x = images(8, 1, 4).requires_grad_(true);
    const obj::CriticFn constant = [](const Tensor& in) { return in.sum({1, 2, 3}) * 0.0 + 3.0; };
    CHECK(item(obj::gradient_penalty(constant, x, 10.0)) == doctest::Approx(10.0));

    const obj::CriticFn pixel_sum = [](const Tensor& in) { return in.sum({1, 2, 3}); };
    CHECK(item(obj::gradient_penalty(pixel_sum, x, 10.0)) == doctest::Approx(0.0));

    // 28x28 with slope 1/28 per pixel: gradient norm exactly 1.
    const auto big = images(4, 28, 5).requires_grad_(true);
    const obj::CriticFn scaled = [](const Tensor& in) { return in.sum({1, 2, 3}) / 28.0; };
    CHECK(item(obj::gradient_penalty(scaled, big, 10.0)) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("property: gradient penalty ignores constant shifts of the critic") {
    testing::Gen g(42);
    for (int t = 0; t < 20; ++t) {
        const auto w = torch::randn({1, 1, 6, 6}, kF64);
        const double shift = g.uniform(-50, 50);
        const obj::CriticFn h = [&](const Tensor& in) { return (torch::tanh(in) * w).sum({1, 2, 3}); };
        const obj::CriticFn hs = [&](const Tensor& in) { return h(in) + shift; };
        const auto x = images(5, 6, g.bits()).requires_grad_(true);
        CHECK(item(obj::gradient_penalty(h, x, 10.0)) ==
              doctest::Approx(item(obj::gradient_penalty(hs, x, 10.0))).epsilon(1e-12));
    }
}

TEST_CASE("critic loss") {
    const auto real = images(16, 1, 6), fake = images(16, 1, 7);
    const obj::CriticFn identity = [](const Tensor& in) { return in.flatten(1).squeeze(1); };
    auto gen = at::make_generator<at::CPUGeneratorImpl>(0);
    const auto l = obj::critic_loss(identity, real, fake, 10.0, gen);
    CHECK(item(l.score_gap) == doctest::Approx(item(fake.mean() - real.mean())));
    CHECK(item(l.penalty) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(item(l.total) == doctest::Approx(item(l.score_gap) + item(l.penalty)));

    const auto same = obj::critic_loss(identity, real, real, 10.0, gen);
    CHECK(item(same.score_gap) == 0.0);

    // Same generator seed, same interpolation weights.
    const obj::CriticFn square = [](const Tensor& in) { return in.pow(2).flatten(1).sum(1); };
    auto g1 = at::make_generator<at::CPUGeneratorImpl>(9), g2 = at::make_generator<at::CPUGeneratorImpl>(9);
    CHECK(item(obj::critic_loss(square, real, fake, 10.0, g1).penalty) ==
          item(obj::critic_loss(square, real, fake, 10.0, g2).penalty));
}

TEST_CASE("w1 proxy") {
    const obj::CriticFn identity = [](const Tensor& in) { return in.flatten(1).squeeze(1); };
    const auto real = torch::tensor({0.7, 0.9, 0.8}, kF64).view({3, 1, 1, 1});
    const auto fake = torch::tensor({0.2, 0.4, 0.3}, kF64).view({3, 1, 1, 1});
    CHECK(item(obj::w1_proxy(identity, real, fake)) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(item(obj::w1_proxy(identity, real, real)) == 0.0);
    const obj::CriticFn zero = [](const Tensor& in) { return in.flatten(1).sum(1) * 0.0; };
    CHECK(item(obj::w1_proxy(zero, real, fake)) == 0.0);
    CHECK(item(obj::generator_perception(torch::tensor({1.0, 2.0}, kF64))) == -1.5);
}

TEST_CASE("property: raising every fake score by delta lowers w1 by delta") {
    testing::Gen g(43);
    const auto w = torch::randn({1, 1, 4, 4}, kF64);
    const obj::CriticFn h = [&](const Tensor& in) { return (in * w).sum({1, 2, 3}); };
    for (int t = 0; t < 50; ++t) {
        const double delta = g.uniform(-3, 3);
        const auto real = images(8, 4, g.bits()), fake = images(8, 4, g.bits());
        const auto base = item(obj::w1_proxy(h, real, fake));
        // Pixel shift along w / |w|^2 moves each fake score by exactly delta.
        const auto shifted = fake + delta * w / w.pow(2).sum();
        CHECK(item(obj::w1_proxy(h, real, shifted)) == doctest::Approx(base - delta).epsilon(1e-10));
    }
}

TEST_CASE("composite loss") {
    const auto mse = torch::tensor(0.04, kF64), ce = torch::tensor(0.5, kF64), w1 = torch::tensor(-0.2, kF64);
    const auto rdc = obj::composite_loss(Objective::kRdc, Mode::kEndToEnd, mse, ce, w1, {0.015, 0.0});
    CHECK(item(rdc.total) == doctest::Approx(0.0475).epsilon(1e-12));
    CHECK(item(rdc.w1_term) == 0.0);
    CHECK(item(obj::composite_loss(Objective::kRdc, Mode::kUniversal, mse, ce, w1, {0.0, 0.0}).total) == 0.04);
    CHECK(item(obj::composite_loss(Objective::kRdp, Mode::kEndToEnd, mse, ce, w1, {0.0, 0.0}).total) == 0.04);
    const auto rdp = obj::composite_loss(Objective::kRdp, Mode::kEndToEnd, mse, ce, w1, {0.0, 0.1});
    CHECK(item(rdp.total) == doctest::Approx(0.04 - 0.02));
    CHECK(item(rdp.ce) == 0.0);

    CHECK_THROWS_AS(obj::require_consistent(Objective::kRdc, {0.0, 0.1}), std::invalid_argument);
    CHECK_THROWS_AS(obj::require_consistent(Objective::kRdp, {0.1, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(obj::require_consistent(Objective::kRdc, {-0.1, 0.0}), std::invalid_argument);
    CHECK_THROWS(obj::composite_loss(Objective::kRdc, Mode::kEndToEnd, mse, ce, w1, {0.0, 0.1}));
}

TEST_CASE("property: composite loss is affine in lambda") {
    testing::Gen g(44);
    for (int t = 0; t < 100; ++t) {
        const auto obj_kind = g.coin() ? Objective::kRdc : Objective::kRdp;
        const auto mse = torch::tensor(g.uniform(0, 0.1), kF64), ce = torch::tensor(g.uniform(0, 3), kF64),
                   w1 = torch::tensor(g.uniform(-2, 2), kF64);
        const double slope = item(obj_kind == Objective::kRdc ? ce : w1);
        for (double lam : {0.0, g.uniform(0, 1), g.uniform(1, 10)}) {
            const TradeoffParams tp = obj_kind == Objective::kRdc ? TradeoffParams{lam, 0.0} : TradeoffParams{0.0, lam};
            const auto b = obj::composite_loss(obj_kind, Mode::kEndToEnd, mse, ce, w1, tp);
            CHECK(std::abs(item(b.total) - (item(mse) + lam * slope)) <= 1e-9);
            CHECK(std::abs(item(b.total) - (item(b.mse) + b.lambda_c * item(b.ce) + b.lambda_p * item(b.w1_term))) <=
                  1e-9);
        }
    }
}

TEST_CASE("composite loss from raw batches") {
    const auto x = images(4, 28, 10), xhat = images(4, 28, 11);
    const auto labels = torch::tensor({0, 1, 2, 3}, torch::kInt64);
    const auto logp = torch::log_softmax(torch::randn({4, 10}, kF64), 1);
    const auto b = obj::composite_loss(Objective::kRdc, Mode::kEndToEnd, x, xhat, labels, logp, Tensor(), {0.05, 0.0});
    CHECK(item(b.mse) == doctest::Approx(item(obj::distortion(x, xhat))));
    CHECK(item(b.ce) == doctest::Approx(item(obj::ce_from_log_probs(labels, logp))));
    const auto scores = torch::tensor({0.5, 1.0, 1.5, 2.0}, kF64);
    const auto p = obj::composite_loss(Objective::kRdp, Mode::kUniversal, x, xhat, labels, Tensor(), scores, {0.0, 2.0});
    CHECK(item(p.w1_term) == doctest::Approx(-1.25));
    CHECK(item(p.total) == doctest::Approx(item(p.mse) - 2.5));
}
