#pragma once

// Encoder f, decoder g, critic h and the frozen classifier c for 28x28
// grayscale images.
//
//   encoder:    flatten, 4 x (Linear, BatchNorm, LeakyReLU), Linear, BatchNorm, Tanh  -> [-1, 1]^dim
//   decoder:    Linear, BN1d, LeakyReLU, Linear, BN1d, LeakyReLU, unflatten,
//               2 x (ConvT stride 2, BN2d, LeakyReLU), ConvT, BN2d, Sigmoid         -> [0, 1]^{28x28}
//   critic:     3 x (Conv stride 2, LeakyReLU), Linear                              -> scalar, no normalization
//   classifier: 2 x (Conv 10@5x5, ReLU, MaxPool 2), flatten, Linear, ReLU, Linear, Softmax

#include <array>
#include <cstdint>
#include <string>

#include <torch/torch.h>

#include "rdpc/datamodel.hpp"

namespace rdpc::nets {

inline constexpr double kLeakySlope = 0.2;
inline constexpr std::int64_t kImageSide = 28;
inline constexpr std::int64_t kClasses = 10;

struct EncoderWidths {
    std::array<std::int64_t, 4> hidden{512, 256, 128, 64};
};

struct DecoderWidths {
    std::int64_t hidden = 128;                  // first affine block
    std::array<std::int64_t, 3> channels{64, 32, 16};  // unflatten (c0, 7, 7), then two stride-2 upsamplings
};

struct CriticWidths {
    std::array<std::int64_t, 3> channels{32, 64, 128};
};

class EncoderImpl : public torch::nn::Module {
public:
    EncoderImpl(const QuantizerSpec& spec, EncoderWidths widths = {});
    torch::Tensor forward(const torch::Tensor& x);

    QuantizerSpec spec;
    EncoderWidths widths;

private:
    torch::nn::Sequential body_{nullptr};
};
TORCH_MODULE(Encoder);

class DecoderImpl : public torch::nn::Module {
public:
    DecoderImpl(const QuantizerSpec& spec, DecoderWidths widths = {});
    torch::Tensor forward(const torch::Tensor& received);

    QuantizerSpec spec;
    DecoderWidths widths;

private:
    torch::nn::Sequential body_{nullptr};
};
TORCH_MODULE(Decoder);

class CriticImpl : public torch::nn::Module {
public:
    explicit CriticImpl(CriticWidths widths = {});
    /// Scores of shape [batch].
    torch::Tensor forward(const torch::Tensor& images);

    CriticWidths widths;

private:
    torch::nn::Sequential body_{nullptr};
};
TORCH_MODULE(Critic);

class ClassifierImpl : public torch::nn::Module {
public:
    ClassifierImpl();
    /// Class probabilities, [batch, 10].
    torch::Tensor forward(const torch::Tensor& images);
    /// log of forward(), computed stably.
    torch::Tensor log_probabilities(const torch::Tensor& images);

    std::int64_t hidden = 50;

private:
    torch::nn::Sequential features_{nullptr};
    torch::nn::Sequential head_{nullptr};
};
TORCH_MODULE(Classifier);

/// Trainable parameter count (weights and biases, excluding running stats).
std::int64_t parameter_count(const torch::nn::Module& m);

/// Closed-form parameter count of an encoder with the given widths.
std::int64_t encoder_parameter_count(const QuantizerSpec& spec, const EncoderWidths& widths);

/// FNV-1a over names, shapes and raw bytes of every parameter and buffer.
std::string fingerprint(const torch::nn::Module& m);

void freeze(torch::nn::Module& m);

struct CheckpointMeta {
    std::string component;  // encoder | decoder | critic | classifier
    std::string fingerprint;
    std::string run_id;
    std::uint64_t seed = 0;
    QuantizerSpec spec{};
    std::string architecture;
    double test_accuracy = -1.0;  // classifier only
};

/// Writes <stem>.pt (parameters) and <stem>.json (metadata).
void save_checkpoint(torch::nn::Module& m, const std::string& stem, CheckpointMeta meta);
CheckpointMeta read_checkpoint_meta(const std::string& stem);
/// Loads parameters into `m` and verifies the stored fingerprint.
CheckpointMeta load_checkpoint(torch::nn::Module& m, const std::string& stem);
bool checkpoint_exists(const std::string& stem);

std::string describe(const EncoderImpl& e);
std::string describe(const DecoderImpl& d);
std::string describe(const CriticImpl& c);
std::string describe(const ClassifierImpl& c);

}  // namespace rdpc::nets
