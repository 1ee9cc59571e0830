#pragma once

// Domain types shared across the compression lab: quantizer geometry, run
// recipes, evaluated operating points, and the finite-alphabet sources used
// by the exact oracle.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rdpc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Scalar quantizer shape: `dim` latent channels, `levels` grid points each.
struct QuantizerSpec {
    int dim = 3;
    int levels = 3;

    friend bool operator==(const QuantizerSpec&, const QuantizerSpec&) = default;
};

/// Bits per sample of the fixed-rate code, dim * log2(levels).
double rate_of(const QuantizerSpec& spec);

/// Throws std::invalid_argument when dim < 1 or levels < 2.
void require_valid(const QuantizerSpec& spec);

struct TradeoffParams {
    double lambda_c = 0.0;
    double lambda_p = 0.0;

    friend bool operator==(const TradeoffParams&, const TradeoffParams&) = default;
};

enum class Mode { kEndToEnd, kUniversal };
enum class Objective { kRdc, kRdp };
enum class CriticInit { kRandom, kFromSource };

std::string_view to_string(Mode m);
std::string_view to_string(Objective o);
std::string_view to_string(CriticInit c);
Mode parse_mode(std::string_view s);
Objective parse_objective(std::string_view s);
CriticInit parse_critic_init(std::string_view s);

struct AdamSettings {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;

    friend bool operator==(const AdamSettings&, const AdamSettings&) = default;
};

// Component optimizer defaults (encoder/decoder share one row, the critic
// carries the gradient-penalty weight, the classifier uses plain Adam).
inline constexpr AdamSettings kEncoderAdam{1e-2, 0.5, 0.9};
inline constexpr AdamSettings kDecoderAdam{1e-2, 0.5, 0.9};
inline constexpr AdamSettings kCriticAdam{2e-4, 0.5, 0.9};
inline constexpr AdamSettings kClassifierAdam{1e-3, 0.9, 0.999};
inline constexpr double kDefaultLambdaGp = 10.0;

/// Full recipe for one training run. Field names double as the keys of the
/// flat config format (see config_io.hpp).
struct RunConfig {
    Mode mode = Mode::kEndToEnd;
    Objective objective = Objective::kRdc;
    QuantizerSpec quantizer{};
    TradeoffParams tradeoff{};
    std::uint64_t seed = 0;
    int epochs = 40;
    int batch_size = 128;
    AdamSettings encoder = kEncoderAdam;
    AdamSettings decoder = kDecoderAdam;
    AdamSettings critic = kCriticAdam;
    AdamSettings classifier = kClassifierAdam;
    double lambda_gp = kDefaultLambdaGp;
    int critic_steps = 5;
    double temperature = 1.0;
    // Run id of a finished end-to-end run, or a path to an encoder checkpoint.
    std::string encoder_source;
    // Unset means from_source when the source run trained a critic, else random.
    std::optional<CriticInit> critic_init;
    // Number of training / test images used; 0 means the full split.
    std::int64_t train_limit = 0;
    std::int64_t eval_limit = 0;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct Violation {
    std::string field;
    std::string rule;

    friend bool operator==(const Violation&, const Violation&) = default;
};

/// Checks every type invariant and cross-field rule. Empty result means valid.
std::vector<Violation> validate(const RunConfig& config);

/// One evaluated operating point. `ce` is in nats; `w1_proxy` is NaN for runs
/// that trained no critic.
struct CurvePoint {
    std::string run_id;
    Mode mode = Mode::kEndToEnd;
    Objective objective = Objective::kRdc;
    int dim = 0;
    int levels = 0;
    double rate = 0.0;
    double lambda_c = 0.0;
    double lambda_p = 0.0;
    double mse = 0.0;
    double ce = 0.0;
    double accuracy = 0.0;
    double w1_proxy = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t seed = 0;
};

/// Field-wise equality that treats two NaN w1_proxy values as equal.
bool same_point(const CurvePoint& a, const CurvePoint& b);

/// Row-major dense matrix of doubles, used for channels and distortions.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

    double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    static Matrix identity(int n);
    static Matrix hamming(int n, int m);
    bool row_stochastic(double tol = 1e-12) const;

    friend bool operator==(const Matrix&, const Matrix&) = default;
};

/// Finite-alphabet source: marginal of X, K label channels p(S_k|X), and the
/// distortion Delta(x, xhat).
struct DiscreteSource {
    int nx = 0;
    int nxhat = 0;
    std::vector<double> px;
    std::vector<Matrix> label_channels;
    Matrix delta;

    /// Throws std::invalid_argument naming the first broken invariant.
    void require_valid() const;
};

/// One (D, P, C) triple. +inf disables the corresponding constraint.
struct ConstraintPoint {
    double distortion = kInf;
    double perception = kInf;
    std::vector<double> classification;

    bool vacuous() const;
};

struct ConstraintRegion {
    std::vector<ConstraintPoint> points;

    void require_valid(int num_labels) const;
};

}  // namespace rdpc
