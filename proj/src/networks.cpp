#include "rdpc/networks.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "rdpc/config_io.hpp"

namespace rdpc::nets {

namespace nn = torch::nn;

namespace {

nn::LeakyReLU leaky() { return nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(kLeakySlope)); }

}  // namespace

EncoderImpl::EncoderImpl(const QuantizerSpec& s, EncoderWidths w) : spec(s), widths(w) {
    require_valid(spec);
    nn::Sequential seq{nn::Flatten()};
    std::int64_t in = kImageSide * kImageSide;
    for (auto width : widths.hidden) {
        seq->push_back(nn::Linear(in, width));
        seq->push_back(nn::BatchNorm1d(width));
        seq->push_back(leaky());
        in = width;
    }
    seq->push_back(nn::Linear(in, spec.dim));
    seq->push_back(nn::BatchNorm1d(spec.dim));
    seq->push_back(nn::Tanh());
    body_ = register_module("body", seq);
}

torch::Tensor EncoderImpl::forward(const torch::Tensor& x) { return body_->forward(x); }

DecoderImpl::DecoderImpl(const QuantizerSpec& s, DecoderWidths w) : spec(s), widths(w) {
    require_valid(spec);
    const auto [c0, c1, c2] = widths.channels;
    const std::int64_t base = kImageSide / 4;  // two stride-2 upsamplings reach 28
    nn::Sequential seq(nn::Linear(spec.dim, widths.hidden), nn::BatchNorm1d(widths.hidden), leaky(),
                       nn::Linear(widths.hidden, c0 * base * base), nn::BatchNorm1d(c0 * base * base), leaky(),
                       nn::Unflatten(nn::UnflattenOptions(1, {c0, base, base})),
                       nn::ConvTranspose2d(nn::ConvTranspose2dOptions(c0, c1, 4).stride(2).padding(1)),
                       nn::BatchNorm2d(c1), leaky(),
                       nn::ConvTranspose2d(nn::ConvTranspose2dOptions(c1, c2, 4).stride(2).padding(1)),
                       nn::BatchNorm2d(c2), leaky(),
                       nn::ConvTranspose2d(nn::ConvTranspose2dOptions(c2, 1, 3).stride(1).padding(1)),
                       nn::BatchNorm2d(1), nn::Sigmoid());
    body_ = register_module("body", seq);
}

torch::Tensor DecoderImpl::forward(const torch::Tensor& received) { return body_->forward(received); }

CriticImpl::CriticImpl(CriticWidths w) : widths(w) {
    nn::Sequential seq;
    std::int64_t in = 1, side = kImageSide;
    for (auto ch : widths.channels) {
        seq->push_back(nn::Conv2d(nn::Conv2dOptions(in, ch, 4).stride(2).padding(1)));
        seq->push_back(leaky());
        in = ch;
        side = (side + 2 - 4) / 2 + 1;
    }
    seq->push_back(nn::Flatten());
    seq->push_back(nn::Linear(in * side * side, 1));
    body_ = register_module("body", seq);
}

torch::Tensor CriticImpl::forward(const torch::Tensor& images) { return body_->forward(images).squeeze(1); }

ClassifierImpl::ClassifierImpl() {
    features_ = register_module(
        "features", nn::Sequential(nn::Conv2d(nn::Conv2dOptions(1, 10, 5)), nn::ReLU(),
                                   nn::MaxPool2d(nn::MaxPool2dOptions(2)), nn::Conv2d(nn::Conv2dOptions(10, 10, 5)),
                                   nn::ReLU(), nn::MaxPool2d(nn::MaxPool2dOptions(2)), nn::Flatten()));
    head_ = register_module("head",
                            nn::Sequential(nn::Linear(10 * 4 * 4, hidden), nn::ReLU(), nn::Linear(hidden, kClasses)));
}

torch::Tensor ClassifierImpl::forward(const torch::Tensor& images) {
    return torch::softmax(head_->forward(features_->forward(images)), 1);
}

torch::Tensor ClassifierImpl::log_probabilities(const torch::Tensor& images) {
    return torch::log_softmax(head_->forward(features_->forward(images)), 1);
}

std::int64_t parameter_count(const torch::nn::Module& m) {
    std::int64_t n = 0;
    for (const auto& p : m.parameters()) n += p.numel();
    return n;
}

std::int64_t encoder_parameter_count(const QuantizerSpec& spec, const EncoderWidths& widths) {
    // Each block: affine (in*out + out) plus batch-norm scale and shift (2*out).
    std::int64_t n = 0, in = kImageSide * kImageSide;
    for (auto w : widths.hidden) {
        n += in * w + w + 2 * w;
        in = w;
    }
    return n + in * spec.dim + spec.dim + 2 * spec.dim;
}

std::string fingerprint(const torch::nn::Module& m) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const std::string& name, const torch::Tensor& t) {
        h = fnv1a64(name, h);
        for (auto s : t.sizes()) h = fnv1a64(std::to_string(s) + ",", h);
        const auto c = t.detach().contiguous().cpu();
        h = fnv1a64({static_cast<const char*>(c.data_ptr()), static_cast<std::size_t>(c.numel() * c.element_size())}, h);
    };
    for (const auto& item : m.named_parameters()) mix("p:" + item.key(), item.value());
    for (const auto& item : m.named_buffers()) mix("b:" + item.key(), item.value());
    return hex64(h);
}

void freeze(torch::nn::Module& m) {
    for (auto& p : m.parameters()) p.set_requires_grad(false);
    m.eval();
}

namespace {

nlohmann::json to_json(const CheckpointMeta& m) {
    return {{"component", m.component}, {"fingerprint", m.fingerprint}, {"run_id", m.run_id},
            {"seed", m.seed},           {"dim", m.spec.dim},            {"levels", m.spec.levels},
            {"architecture", m.architecture}, {"test_accuracy", m.test_accuracy}};
}

}  // namespace

void save_checkpoint(torch::nn::Module& m, const std::string& stem, CheckpointMeta meta) {
    std::filesystem::create_directories(std::filesystem::path(stem).parent_path());
    meta.fingerprint = fingerprint(m);
    torch::serialize::OutputArchive archive;
    m.save(archive);
    archive.save_to(stem + ".pt");
    std::ofstream out(stem + ".json");
    out << to_json(meta).dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write checkpoint metadata " + stem + ".json");
}

CheckpointMeta read_checkpoint_meta(const std::string& stem) {
    std::ifstream in(stem + ".json");
    if (!in) throw std::runtime_error("missing checkpoint " + stem + ".json");
    const auto j = nlohmann::json::parse(in);
    CheckpointMeta m;
    m.component = j.at("component").get<std::string>();
    m.fingerprint = j.at("fingerprint").get<std::string>();
    m.run_id = j.at("run_id").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.spec = {j.at("dim").get<int>(), j.at("levels").get<int>()};
    m.architecture = j.at("architecture").get<std::string>();
    m.test_accuracy = j.value("test_accuracy", -1.0);
    return m;
}

CheckpointMeta load_checkpoint(torch::nn::Module& m, const std::string& stem) {
    auto meta = read_checkpoint_meta(stem);
    torch::serialize::InputArchive archive;
    archive.load_from(stem + ".pt");
    m.load(archive);
    if (fingerprint(m) != meta.fingerprint)
        throw std::runtime_error("checkpoint " + stem + " does not match its recorded fingerprint");
    return meta;
}

bool checkpoint_exists(const std::string& stem) {
    return std::filesystem::exists(stem + ".pt") && std::filesystem::exists(stem + ".json");
}

std::string describe(const EncoderImpl& e) {
    std::ostringstream o;
    o << "encoder mlp 784";
    for (auto w : e.widths.hidden) o << '-' << w;
    o << '-' << e.spec.dim << " bn lrelu" << kLeakySlope << " tanh";
    return o.str();
}

std::string describe(const DecoderImpl& d) {
    std::ostringstream o;
    o << "decoder " << d.spec.dim << '-' << d.widths.hidden << '-' << d.widths.channels[0] << "x7x7 convT "
      << d.widths.channels[1] << '-' << d.widths.channels[2] << "-1 bn lrelu" << kLeakySlope << " sigmoid";
    return o.str();
}

std::string describe(const CriticImpl& c) {
    std::ostringstream o;
    o << "critic conv " << c.widths.channels[0] << '-' << c.widths.channels[1] << '-' << c.widths.channels[2]
      << " k4s2 lrelu" << kLeakySlope << " linear";
    return o.str();
}

std::string describe(const ClassifierImpl& c) {
    return "classifier conv10k5-pool2-conv10k5-pool2-" + std::to_string(c.hidden) + "-10 softmax";
}

}  // namespace rdpc::nets
