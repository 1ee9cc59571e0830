#pragma once

// Tensor path of the dithered quantizer used inside training and evaluation.
// Matches quant::quantize_scalar / soft_quantize_scalar entrywise.

#include <cstdint>

#include <torch/torch.h>

#include "rdpc/datamodel.hpp"

namespace rdpc::quant {

torch::Tensor hard_quantize(const torch::Tensor& y, int levels);
torch::Tensor soft_quantize(const torch::Tensor& y, int levels, double temperature);

/// Value of hard_quantize, gradient of soft_quantize.
torch::Tensor straight_through(const torch::Tensor& y, int levels, double temperature);

/// Seeded per-sample dither: a fresh U[-1/(L-1), 1/(L-1)]^dim row for every
/// sample of every forward pass.
class TensorDither {
public:
    explicit TensorDither(std::uint64_t seed);

    torch::Tensor sample(std::int64_t batch, const QuantizerSpec& spec);

private:
    at::Generator generator_;
};

struct Transmission {
    torch::Tensor code;      // z = Quantize(f(x) + u), on the grid
    torch::Tensor dither;    // u
    torch::Tensor received;  // z - u, the decoder input
};

/// Sender and receiver sides of one subtractive-dither transmission.
Transmission transmit(const torch::Tensor& fx, const QuantizerSpec& spec, TensorDither& dither,
                      double temperature);

}  // namespace rdpc::quant
