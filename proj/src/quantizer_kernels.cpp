#include "rdpc/quantizer_kernels.hpp"

#include <cstddef>
#include <stdexcept>

#include "rdpc/quantizer.hpp"

namespace rdpc::quant {

namespace {

void check(std::size_t a, std::size_t b) {
    if (a != b) throw std::invalid_argument("buffer lengths differ");
}

}  // namespace

void dither_roundtrip(std::span<const double> y, std::span<const double> u, int levels, std::span<double> out) {
    check(y.size(), u.size());
    check(y.size(), out.size());
    const auto n = static_cast<std::ptrdiff_t>(y.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = quantize_scalar(y[i] + u[i], levels) - u[i];
}

void dither_roundtrip_serial(std::span<const double> y, std::span<const double> u, int levels,
                             std::span<double> out) {
    check(y.size(), u.size());
    check(y.size(), out.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = quantize_scalar(y[i] + u[i], levels) - u[i];
}

void soft_quantize_batch(std::span<const double> y, int levels, double temperature, std::span<double> out) {
    check(y.size(), out.size());
    const auto n = static_cast<std::ptrdiff_t>(y.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = soft_quantize_scalar(y[i], levels, temperature);
}

void soft_quantize_batch_serial(std::span<const double> y, int levels, double temperature, std::span<double> out) {
    check(y.size(), out.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = soft_quantize_scalar(y[i], levels, temperature);
}

}  // namespace rdpc::quant
