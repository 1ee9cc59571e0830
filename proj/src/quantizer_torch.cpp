#include "rdpc/quantizer_torch.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include "rdpc/quantizer.hpp"

namespace rdpc::quant {

torch::Tensor hard_quantize(const torch::Tensor& y, int levels) {
    const double half = half_step(levels);
    auto t = (y.clamp(-1.0, 1.0) + 1.0) * ((levels - 1) / 2.0);
    auto index = torch::floor(t + 0.5).clamp(0, levels - 1);
    return index * (2.0 * half) - 1.0;
}

torch::Tensor soft_quantize(const torch::Tensor& y, int levels, double temperature) {
    const auto g = torch::tensor(grid(levels), y.options());
    auto logits = -(y.unsqueeze(-1) - g).pow(2) / temperature;
    return (torch::softmax(logits, -1) * g).sum(-1);
}

torch::Tensor straight_through(const torch::Tensor& y, int levels, double temperature) {
    auto soft = soft_quantize(y, levels, temperature);
    return soft + (hard_quantize(y, levels) - soft).detach();
}

TensorDither::TensorDither(std::uint64_t seed) : generator_(at::make_generator<at::CPUGeneratorImpl>(seed)) {}

torch::Tensor TensorDither::sample(std::int64_t batch, const QuantizerSpec& spec) {
    const double h = half_step(spec.levels);
    auto u = torch::rand({batch, spec.dim}, generator_, torch::kFloat32);
    return u.mul_(2.0 * h).sub_(h);
}

Transmission transmit(const torch::Tensor& fx, const QuantizerSpec& spec, TensorDither& dither,
                      double temperature) {
    Transmission t;
    t.dither = dither.sample(fx.size(0), spec).to(fx.device());
    t.code = straight_through(fx + t.dither, spec.levels, temperature);
    t.received = t.code - t.dither;
    return t;
}

}  // namespace rdpc::quant
