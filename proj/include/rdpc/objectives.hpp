#pragma once

// Loss terms for the neural path. All functions return 0-dim tensors so they
// can sit inside an autograd graph; dtype follows the inputs.

#include <functional>

#include <torch/torch.h>

#include "rdpc/datamodel.hpp"

namespace rdpc::obj {

using CriticFn = std::function<torch::Tensor(const torch::Tensor&)>;

/// Mean over batch and pixels of (x - xhat)^2. Throws on shape mismatch.
torch::Tensor distortion(const torch::Tensor& x, const torch::Tensor& xhat);

struct CrossEntropy {
    torch::Tensor value;   // nats
    bool clamped = false;  // some true-label probability was below the floor
};

inline constexpr double kProbabilityFloor = 1e-12;

/// Mean of -log p[label] over the batch, with p clamped at kProbabilityFloor.
CrossEntropy ce_loss(const torch::Tensor& labels, const torch::Tensor& probabilities);

/// Same quantity from log-probabilities; the numerically safe training path.
torch::Tensor ce_from_log_probs(const torch::Tensor& labels, const torch::Tensor& log_probabilities);

struct CriticLoss {
    torch::Tensor total;
    torch::Tensor score_gap;  // mean h(fake) - mean h(real)
    torch::Tensor penalty;    // lambda_gp * mean (|grad h(x~)| - 1)^2
};

/// WGAN-GP critic objective with one interpolation weight per sample.
CriticLoss critic_loss(const CriticFn& critic, const torch::Tensor& real, const torch::Tensor& fake,
                       double lambda_gp, at::Generator& rng);

/// Gradient-penalty term on given interpolates (exposed for testing).
torch::Tensor gradient_penalty(const CriticFn& critic, const torch::Tensor& interpolates, double lambda_gp);

/// mean h(real) - mean h(fake).
torch::Tensor w1_proxy(const CriticFn& critic, const torch::Tensor& real, const torch::Tensor& fake);

/// Generator-side perception term: -mean h(fake).
torch::Tensor generator_perception(const torch::Tensor& fake_scores);

struct LossBreakdown {
    torch::Tensor total;
    torch::Tensor mse;
    torch::Tensor ce;       // zero when the objective carries no classification term
    torch::Tensor w1_term;  // zero when the objective carries no perception term
    double lambda_c = 0.0;
    double lambda_p = 0.0;
};

/// Throws std::invalid_argument when the tradeoff has a weight the objective
/// does not use, or a negative weight.
void require_consistent(Objective objective, const TradeoffParams& tradeoff);

/// total = mse + lambda_c * ce (rdc) or mse + lambda_p * w1_term (rdp).
/// The universal variants share the functional form; `mode` only labels.
LossBreakdown composite_loss(Objective objective, Mode mode, const torch::Tensor& mse, const torch::Tensor& ce,
                             const torch::Tensor& w1_term, const TradeoffParams& tradeoff);

/// Convenience form from raw batches. `log_probabilities` is used for rdc,
/// `fake_scores` for rdp; the unused one may be undefined.
LossBreakdown composite_loss(Objective objective, Mode mode, const torch::Tensor& x, const torch::Tensor& xhat,
                             const torch::Tensor& labels, const torch::Tensor& log_probabilities,
                             const torch::Tensor& fake_scores, const TradeoffParams& tradeoff);

}  // namespace rdpc::obj
