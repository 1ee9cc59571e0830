#include "rdpc/datamodel.hpp"

#include <cmath>
#include <stdexcept>

namespace rdpc {

double rate_of(const QuantizerSpec& spec) {
    require_valid(spec);
    return spec.dim * std::log2(static_cast<double>(spec.levels));
}

void require_valid(const QuantizerSpec& spec) {
    if (spec.dim < 1) throw std::invalid_argument("quantizer dim must be >= 1");
    if (spec.levels < 2) throw std::invalid_argument("quantizer levels must be >= 2");
}

std::string_view to_string(Mode m) { return m == Mode::kEndToEnd ? "end_to_end" : "universal"; }
std::string_view to_string(Objective o) { return o == Objective::kRdc ? "rdc" : "rdp"; }
std::string_view to_string(CriticInit c) { return c == CriticInit::kRandom ? "random" : "from_source"; }

Mode parse_mode(std::string_view s) {
    if (s == "end_to_end") return Mode::kEndToEnd;
    if (s == "universal") return Mode::kUniversal;
    throw std::invalid_argument("unknown mode: " + std::string(s));
}

Objective parse_objective(std::string_view s) {
    if (s == "rdc") return Objective::kRdc;
    if (s == "rdp") return Objective::kRdp;
    throw std::invalid_argument("unknown objective: " + std::string(s));
}

CriticInit parse_critic_init(std::string_view s) {
    if (s == "random") return CriticInit::kRandom;
    if (s == "from_source") return CriticInit::kFromSource;
    throw std::invalid_argument("unknown critic_init: " + std::string(s));
}

namespace {

void check_adam(std::vector<Violation>& out, const std::string& name, const AdamSettings& a) {
    if (!(a.lr > 0.0)) out.push_back({name + "_lr", "learning rate must be > 0"});
    if (!(a.beta1 >= 0.0 && a.beta1 < 1.0)) out.push_back({name + "_beta1", "beta1 must lie in [0, 1)"});
    if (!(a.beta2 >= 0.0 && a.beta2 < 1.0)) out.push_back({name + "_beta2", "beta2 must lie in [0, 1)"});
}

}  // namespace

std::vector<Violation> validate(const RunConfig& c) {
    std::vector<Violation> out;
    if (c.quantizer.dim < 1) out.push_back({"dim", "dim must be >= 1"});
    if (c.quantizer.levels < 2) out.push_back({"levels", "levels must be >= 2"});

    const auto& t = c.tradeoff;
    if (!(t.lambda_c >= 0.0)) out.push_back({"lambda_c", "lambda_c must be >= 0"});
    if (!(t.lambda_p >= 0.0)) out.push_back({"lambda_p", "lambda_p must be >= 0"});
    if (t.lambda_c != 0.0 && t.lambda_p != 0.0) {
        out.push_back({"lambda_c", "exactly one tradeoff weight may be nonzero"});
    } else if (c.objective == Objective::kRdc && t.lambda_p != 0.0) {
        out.push_back({"lambda_p", "rdc objective requires lambda_p = 0"});
    } else if (c.objective == Objective::kRdp && t.lambda_c != 0.0) {
        out.push_back({"lambda_c", "rdp objective requires lambda_c = 0"});
    }

    if (c.epochs < 1) out.push_back({"epochs", "epochs must be >= 1"});
    if (c.batch_size < 1) out.push_back({"batch_size", "batch_size must be >= 1"});
    if (c.critic_steps < 1) out.push_back({"critic_steps", "critic_steps must be >= 1"});
    if (!(c.lambda_gp >= 0.0)) out.push_back({"lambda_gp", "lambda_gp must be >= 0"});
    if (!(c.temperature > 0.0)) out.push_back({"temperature", "temperature must be > 0"});
    if (c.train_limit < 0) out.push_back({"train_limit", "train_limit must be >= 0"});
    if (c.eval_limit < 0) out.push_back({"eval_limit", "eval_limit must be >= 0"});
    check_adam(out, "encoder", c.encoder);
    check_adam(out, "decoder", c.decoder);
    check_adam(out, "critic", c.critic);
    check_adam(out, "classifier", c.classifier);

    if (c.mode == Mode::kUniversal && c.encoder_source.empty())
        out.push_back({"encoder_source", "encoder_source required"});
    if (c.mode == Mode::kEndToEnd && !c.encoder_source.empty())
        out.push_back({"encoder_source", "encoder_source only allowed in universal mode"});
    if (c.mode == Mode::kEndToEnd && c.critic_init.has_value())
        out.push_back({"critic_init", "critic_init only allowed in universal mode"});
    return out;
}

bool same_point(const CurvePoint& a, const CurvePoint& b) {
    const bool w1_equal = (std::isnan(a.w1_proxy) && std::isnan(b.w1_proxy)) || a.w1_proxy == b.w1_proxy;
    return a.run_id == b.run_id && a.mode == b.mode && a.objective == b.objective && a.dim == b.dim &&
           a.levels == b.levels && a.rate == b.rate && a.lambda_c == b.lambda_c && a.lambda_p == b.lambda_p &&
           a.mse == b.mse && a.ce == b.ce && a.accuracy == b.accuracy && w1_equal && a.seed == b.seed;
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::hamming(int n, int m) {
    Matrix d(n, m, 1.0);
    for (int i = 0; i < std::min(n, m); ++i) d(i, i) = 0.0;
    return d;
}

bool Matrix::row_stochastic(double tol) const {
    for (int r = 0; r < rows; ++r) {
        double sum = 0.0;
        for (int c = 0; c < cols; ++c) {
            if (!((*this)(r, c) >= 0.0)) return false;
            sum += (*this)(r, c);
        }
        if (std::abs(sum - 1.0) > tol) return false;
    }
    return true;
}

void DiscreteSource::require_valid() const {
    if (nx < 1 || nxhat < 1) throw std::invalid_argument("alphabet sizes must be >= 1");
    if (static_cast<int>(px.size()) != nx) throw std::invalid_argument("px length must equal nx");
    double sum = 0.0;
    for (double p : px) {
        if (!(p >= 0.0)) throw std::invalid_argument("px entries must be >= 0");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("px must sum to 1");
    for (const auto& ch : label_channels) {
        if (ch.rows != nx || ch.cols < 1) throw std::invalid_argument("label channel must have nx rows");
        if (!ch.row_stochastic()) throw std::invalid_argument("label channel rows must sum to 1");
    }
    if (delta.rows != nx || delta.cols != nxhat) throw std::invalid_argument("delta must be nx x nxhat");
    for (double d : delta.data)
        if (!(d >= 0.0)) throw std::invalid_argument("delta entries must be >= 0");
}

bool ConstraintPoint::vacuous() const {
    if (std::isfinite(distortion) || std::isfinite(perception)) return false;
    for (double c : classification)
        if (std::isfinite(c)) return false;
    return true;
}

void ConstraintRegion::require_valid(int num_labels) const {
    if (points.empty()) throw std::invalid_argument("constraint region must be nonempty");
    for (const auto& p : points) {
        if (!(p.distortion >= 0.0) || !(p.perception >= 0.0))
            throw std::invalid_argument("constraint values must be >= 0");
        if (!p.classification.empty() && static_cast<int>(p.classification.size()) != num_labels)
            throw std::invalid_argument("classification vector must have one entry per label");
        for (double c : p.classification)
            if (!(c >= 0.0)) throw std::invalid_argument("constraint values must be >= 0");
    }
}

}  // namespace rdpc
