#include "rdpc/objectives.hpp"

#include <sstream>
#include <stdexcept>

namespace rdpc::obj {

namespace {

std::string shape(const torch::Tensor& t) {
    std::ostringstream o;
    o << t.sizes();
    return o.str();
}

}  // namespace

torch::Tensor distortion(const torch::Tensor& x, const torch::Tensor& xhat) {
    if (x.sizes() != xhat.sizes())
        throw std::invalid_argument("distortion: shape " + shape(x) + " vs " + shape(xhat));
    return (x - xhat).pow(2).mean();
}

CrossEntropy ce_loss(const torch::Tensor& labels, const torch::Tensor& probabilities) {
    if (probabilities.dim() != 2 || labels.dim() != 1 || labels.size(0) != probabilities.size(0))
        throw std::invalid_argument("ce_loss: labels " + shape(labels) + " vs probabilities " + shape(probabilities));
    auto picked = probabilities.gather(1, labels.unsqueeze(1)).squeeze(1);
    CrossEntropy out;
    out.clamped = (picked < kProbabilityFloor).any().item<bool>();
    out.value = -picked.clamp_min(kProbabilityFloor).log().mean();
    return out;
}

torch::Tensor ce_from_log_probs(const torch::Tensor& labels, const torch::Tensor& log_probabilities) {
    return torch::nll_loss(log_probabilities, labels);
}

torch::Tensor gradient_penalty(const CriticFn& critic, const torch::Tensor& interpolates, double lambda_gp) {
    auto x = interpolates.detach().requires_grad_(true);
    auto scores = critic(x);
    auto grad = torch::autograd::grad({scores.sum()}, {x}, {}, /*retain_graph=*/true, /*create_graph=*/true,
                                      /*allow_unused=*/true)[0];
    if (!grad.defined()) grad = torch::zeros_like(x);
    auto norms = grad.flatten(1).norm(2, 1);
    return lambda_gp * (norms - 1.0).pow(2).mean();
}

CriticLoss critic_loss(const CriticFn& critic, const torch::Tensor& real, const torch::Tensor& fake,
                       double lambda_gp, at::Generator& rng) {
    if (real.sizes() != fake.sizes())
        throw std::invalid_argument("critic_loss: shape " + shape(real) + " vs " + shape(fake));
    std::vector<std::int64_t> eps_shape(real.dim(), 1);
    eps_shape[0] = real.size(0);
    auto eps = torch::rand(eps_shape, rng, real.scalar_type());
    auto mixed = eps * real.detach() + (1.0 - eps) * fake.detach();

    CriticLoss out;
    out.score_gap = critic(fake).mean() - critic(real).mean();
    out.penalty = gradient_penalty(critic, mixed, lambda_gp);
    out.total = out.score_gap + out.penalty;
    return out;
}

torch::Tensor w1_proxy(const CriticFn& critic, const torch::Tensor& real, const torch::Tensor& fake) {
    return critic(real).mean() - critic(fake).mean();
}

torch::Tensor generator_perception(const torch::Tensor& fake_scores) { return -fake_scores.mean(); }

void require_consistent(Objective objective, const TradeoffParams& t) {
    if (t.lambda_c < 0.0 || t.lambda_p < 0.0) throw std::invalid_argument("tradeoff weights must be >= 0");
    if (objective == Objective::kRdc && t.lambda_p != 0.0)
        throw std::invalid_argument("rdc objective requires lambda_p = 0");
    if (objective == Objective::kRdp && t.lambda_c != 0.0)
        throw std::invalid_argument("rdp objective requires lambda_c = 0");
}

LossBreakdown composite_loss(Objective objective, Mode /*mode*/, const torch::Tensor& mse, const torch::Tensor& ce,
                             const torch::Tensor& w1_term, const TradeoffParams& tradeoff) {
    require_consistent(objective, tradeoff);
    LossBreakdown out;
    out.mse = mse;
    out.lambda_c = tradeoff.lambda_c;
    out.lambda_p = tradeoff.lambda_p;
    const auto zero = torch::zeros({}, mse.options());
    out.ce = (objective == Objective::kRdc && ce.defined()) ? ce : zero;
    out.w1_term = (objective == Objective::kRdp && w1_term.defined()) ? w1_term : zero;
    out.total = mse + tradeoff.lambda_c * out.ce + tradeoff.lambda_p * out.w1_term;
    return out;
}

LossBreakdown composite_loss(Objective objective, Mode mode, const torch::Tensor& x, const torch::Tensor& xhat,
                             const torch::Tensor& labels, const torch::Tensor& log_probabilities,
                             const torch::Tensor& fake_scores, const TradeoffParams& tradeoff) {
    require_consistent(objective, tradeoff);
    auto mse = distortion(x, xhat);
    torch::Tensor ce, w1;
    if (objective == Objective::kRdc && log_probabilities.defined()) ce = ce_from_log_probs(labels, log_probabilities);
    if (objective == Objective::kRdp && fake_scores.defined()) w1 = generator_perception(fake_scores);
    return composite_loss(objective, mode, mse, ce, w1, tradeoff);
}

}  // namespace rdpc::obj
