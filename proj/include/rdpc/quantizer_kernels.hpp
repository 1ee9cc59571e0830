#pragma once

// Batched quantizer kernels over row-major (batch x dim) buffers.
// The *_serial versions are the reference the OpenMP versions are tested
// against; both must produce bit-identical output.

#include <span>

namespace rdpc::quant {

/// out[i] = quantize_scalar(y[i] + u[i]) - u[i]: one subtractive-dither
/// round trip per entry.
void dither_roundtrip(std::span<const double> y, std::span<const double> u, int levels, std::span<double> out);
void dither_roundtrip_serial(std::span<const double> y, std::span<const double> u, int levels,
                             std::span<double> out);

void soft_quantize_batch(std::span<const double> y, int levels, double temperature, std::span<double> out);
void soft_quantize_batch_serial(std::span<const double> y, int levels, double temperature, std::span<double> out);

}  // namespace rdpc::quant
