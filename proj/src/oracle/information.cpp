#include "rdpc/oracle/information.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rdpc::oracle {

namespace {

// Floor inside the logs of gradients. A zero entry has an infinite true
// slope; a finite floor keeps the linear model usable by the line search.
constexpr double kGradientFloor = 1e-12;

void check_shapes(std::span<const double> px, const Channel& w) {
    if (static_cast<int>(px.size()) != w.rows) throw std::invalid_argument("channel rows must equal |X|");
}

}  // namespace

double entropy_bits(std::span<const double> p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log2(v);
    return h;
}

std::vector<double> output_marginal(std::span<const double> px, const Channel& w) {
    check_shapes(px, w);
    std::vector<double> q(w.cols, 0.0);
    for (int x = 0; x < w.rows; ++x)
        for (int y = 0; y < w.cols; ++y) q[y] += px[x] * w(x, y);
    return q;
}

double mutual_information(std::span<const double> px, const Channel& w) {
    const auto q = output_marginal(px, w);
    double info = 0.0;
    for (int x = 0; x < w.rows; ++x)
        for (int y = 0; y < w.cols; ++y) {
            const double joint = px[x] * w(x, y);
            if (joint > 0.0) info += joint * std::log2(w(x, y) / q[y]);
        }
    return std::max(info, 0.0);
}

Matrix mutual_information_gradient(std::span<const double> px, const Channel& w) {
    const auto q = output_marginal(px, w);
    Matrix g(w.rows, w.cols);
    for (int x = 0; x < w.rows; ++x)
        for (int y = 0; y < w.cols; ++y) g(x, y) = px[x] * std::log2(std::max(w(x, y), kGradientFloor) / std::max(q[y], kGradientFloor));
    return g;
}

double expected_distortion(std::span<const double> px, const Matrix& delta, const Channel& w) {
    check_shapes(px, w);
    if (delta.rows != w.rows || delta.cols != w.cols) throw std::invalid_argument("delta shape mismatch");
    double d = 0.0;
    for (int x = 0; x < w.rows; ++x)
        for (int y = 0; y < w.cols; ++y) d += px[x] * w(x, y) * delta(x, y);
    return d;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
    const std::size_t n = std::max(p.size(), q.size());
    double tv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = i < p.size() ? p[i] : 0.0;
        const double b = i < q.size() ? q[i] : 0.0;
        tv += std::abs(a - b);
    }
    return 0.5 * tv;
}

Matrix label_joint(std::span<const double> px, const Matrix& label, const Channel& w) {
    check_shapes(px, w);
    if (label.rows != w.rows) throw std::invalid_argument("label channel rows must equal |X|");
    Matrix r(label.cols, w.cols);
    for (int x = 0; x < w.rows; ++x)
        for (int s = 0; s < label.cols; ++s) {
            const double ps = px[x] * label(x, s);
            if (ps == 0.0) continue;
            for (int y = 0; y < w.cols; ++y) r(s, y) += ps * w(x, y);
        }
    return r;
}

double conditional_entropy(std::span<const double> px, const Matrix& label, const Channel& w) {
    const Matrix r = label_joint(px, label, w);
    double h = 0.0;
    for (int y = 0; y < r.cols; ++y) {
        double q = 0.0;
        for (int s = 0; s < r.rows; ++s) q += r(s, y);
        for (int s = 0; s < r.rows; ++s)
            if (r(s, y) > 0.0) h -= r(s, y) * std::log2(r(s, y) / q);
    }
    return std::max(h, 0.0);
}

Matrix conditional_entropy_gradient(std::span<const double> px, const Matrix& label, const Channel& w) {
    const Matrix r = label_joint(px, label, w);
    // dH/dr(s, y) = -log2(r(s, y) / q(y)).
    Matrix dr(r.rows, r.cols);
    for (int y = 0; y < r.cols; ++y) {
        double q = 0.0;
        for (int s = 0; s < r.rows; ++s) q += r(s, y);
        for (int s = 0; s < r.rows; ++s) dr(s, y) = -std::log2(std::max(r(s, y), kGradientFloor) / std::max(q, kGradientFloor));
    }
    Matrix g(w.rows, w.cols);
    for (int x = 0; x < w.rows; ++x)
        for (int s = 0; s < label.cols; ++s) {
            const double ps = px[x] * label(x, s);
            if (ps == 0.0) continue;
            for (int y = 0; y < w.cols; ++y) g(x, y) += ps * dr(s, y);
        }
    return g;
}

ConstraintValues constraint_values(const DiscreteSource& source, const Channel& w) {
    ConstraintValues v;
    v.distortion = expected_distortion(source.px, source.delta, w);
    v.perception = total_variation(source.px, output_marginal(source.px, w));
    v.classification.reserve(source.label_channels.size());
    for (const auto& label : source.label_channels)
        v.classification.push_back(conditional_entropy(source.px, label, w));
    return v;
}

double max_violation(const ConstraintValues& values, const ConstraintPoint& point) {
    double worst = 0.0;
    if (std::isfinite(point.distortion)) worst = std::max(worst, values.distortion - point.distortion);
    if (std::isfinite(point.perception)) worst = std::max(worst, values.perception - point.perception);
    const std::size_t k = std::min(values.classification.size(), point.classification.size());
    for (std::size_t i = 0; i < k; ++i)
        if (std::isfinite(point.classification[i]))
            worst = std::max(worst, values.classification[i] - point.classification[i]);
    return worst;
}

}  // namespace rdpc::oracle
