#include "rdpc/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rdpc::quant {

namespace {

void require_levels(int levels) {
    if (levels < 2) throw std::invalid_argument("quantizer needs at least 2 levels");
}

double level_value(int index, int levels) { return -1.0 + 2.0 * index / (levels - 1); }

}  // namespace

double half_step(int levels) {
    require_levels(levels);
    return 1.0 / (levels - 1);
}

std::vector<double> grid(int levels) {
    require_levels(levels);
    std::vector<double> g(levels);
    for (int i = 0; i < levels; ++i) g[i] = level_value(i, levels);
    return g;
}

DitherVector DitherStream::sample(const QuantizerSpec& spec) {
    require_valid(spec);
    const double h = half_step(spec.levels);
    std::uniform_real_distribution<double> dist(-h, h);
    DitherVector d;
    d.u.resize(spec.dim);
    for (auto& v : d.u) v = dist(engine_);
    return d;
}

DitherVector sample_dither(const QuantizerSpec& spec, DitherStream& stream) { return stream.sample(spec); }

double quantize_scalar(double y, int levels) {
    const double clamped = std::clamp(y, -1.0, 1.0);
    const double t = (clamped + 1.0) * (levels - 1) / 2.0;
    const int index = std::clamp(static_cast<int>(std::floor(t + 0.5)), 0, levels - 1);
    return level_value(index, levels);
}

LatentCode quantize(std::span<const double> y, const QuantizerSpec& spec) {
    require_valid(spec);
    LatentCode code;
    code.z.reserve(y.size());
    for (double v : y) code.z.push_back(quantize_scalar(v, spec.levels));
    return code;
}

std::vector<double> dequantize(const LatentCode& z, const DitherVector& u) {
    if (z.z.size() != u.u.size()) throw std::invalid_argument("code and dither lengths differ");
    std::vector<double> out(z.z.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = z.z[i] - u.u[i];
    return out;
}

namespace {

// Softmax weights over grid points for logits -(y - g)^2 / T.
void soft_weights(double y, int levels, double temperature, std::vector<double>& w) {
    w.resize(levels);
    double best = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < levels; ++j) {
        const double d = y - level_value(j, levels);
        w[j] = -d * d / temperature;
        best = std::max(best, w[j]);
    }
    double total = 0.0;
    for (auto& v : w) total += (v = std::exp(v - best));
    for (auto& v : w) v /= total;
}

}  // namespace

double soft_quantize_scalar(double y, int levels, double temperature) {
    require_levels(levels);
    if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be > 0");
    std::vector<double> w;
    soft_weights(y, levels, temperature, w);
    double s = 0.0;
    for (int j = 0; j < levels; ++j) s += w[j] * level_value(j, levels);
    return s;
}

std::vector<double> soft_quantize(std::span<const double> y, const QuantizerSpec& spec, double temperature) {
    require_valid(spec);
    std::vector<double> out;
    out.reserve(y.size());
    for (double v : y) out.push_back(soft_quantize_scalar(v, spec.levels, temperature));
    return out;
}

double soft_quantize_derivative(double y, int levels, double temperature) {
    require_levels(levels);
    if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be > 0");
    std::vector<double> w;
    soft_weights(y, levels, temperature, w);
    // d s / d y = Cov_w(g, d logit / d y), with d logit_j / d y = -2 (y - g_j) / T.
    double mean_g = 0.0, mean_a = 0.0, mean_ga = 0.0;
    for (int j = 0; j < levels; ++j) {
        const double g = level_value(j, levels);
        const double a = -2.0 * (y - g) / temperature;
        mean_g += w[j] * g;
        mean_a += w[j] * a;
        mean_ga += w[j] * g * a;
    }
    return mean_ga - mean_g * mean_a;
}

}  // namespace rdpc::quant
