#pragma once

// Subtractive dithered scalar quantization on the grid
// {-1 + 2i/(L-1) : i = 0..L-1}.
//
// Sender: z = quantize(f(x) + u). Receiver: dequantize(z, u) = z - u.
// u ~ U[-1/(L-1), +1/(L-1)]^dim is shared randomness.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "rdpc/datamodel.hpp"

namespace rdpc::quant {

/// Half-width of the dither support and of one quantization cell, 1/(L-1).
double half_step(int levels);

/// Sorted grid of `levels` points spanning [-1, 1]. Throws for levels < 2.
std::vector<double> grid(int levels);

struct DitherVector {
    std::vector<double> u;
};

struct LatentCode {
    std::vector<double> z;
};

/// Seeded dither stream. Each owner (worker, run) keeps its own.
class DitherStream {
public:
    explicit DitherStream(std::uint64_t seed) : engine_(seed) {}

    DitherVector sample(const QuantizerSpec& spec);

private:
    std::mt19937_64 engine_;
};

DitherVector sample_dither(const QuantizerSpec& spec, DitherStream& stream);

/// Nearest grid point; clamps to +/-1 outside the grid; ties round toward +inf.
double quantize_scalar(double y, int levels);
LatentCode quantize(std::span<const double> y, const QuantizerSpec& spec);

/// z - u. Throws std::invalid_argument on length mismatch.
std::vector<double> dequantize(const LatentCode& z, const DitherVector& u);

/// sum_j g_j softmax_j(-(y - g_j)^2 / T) per entry, the differentiable
/// surrogate used for the backward pass.
double soft_quantize_scalar(double y, int levels, double temperature);
std::vector<double> soft_quantize(std::span<const double> y, const QuantizerSpec& spec, double temperature);

/// d/dy of soft_quantize_scalar, in closed form.
double soft_quantize_derivative(double y, int levels, double temperature);

}  // namespace rdpc::quant
