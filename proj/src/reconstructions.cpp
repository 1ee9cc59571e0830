#include "rdpc/reconstructions.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "rdpc/networks.hpp"
#include "rdpc/plot.hpp"
#include "rdpc/quantizer_torch.hpp"

namespace rdpc {

namespace {

std::vector<float> pixels(const torch::Tensor& image) {
    const auto c = image.contiguous().to(torch::kFloat32);
    return {c.data_ptr<float>(), c.data_ptr<float>() + c.numel()};
}

}  // namespace

DumpReport dump_reconstructions(const std::string& encoder_stem, const std::string& decoder_stem, const ImageSet& test,
                                int n_images, std::uint64_t seed, const std::string& path, int scale) {
    if (n_images < 1 || n_images > test.size()) throw std::invalid_argument("n_images out of range");
    const auto em = nets::read_checkpoint_meta(encoder_stem);
    const auto dm = nets::read_checkpoint_meta(decoder_stem);
    if (em.component != "encoder" || dm.component != "decoder")
        throw std::invalid_argument("expected an encoder and a decoder checkpoint");
    if (!(em.spec == dm.spec)) throw std::invalid_argument("encoder and decoder checkpoints disagree on the quantizer");

    nets::Encoder encoder(em.spec);
    nets::Decoder decoder(dm.spec);
    nets::load_checkpoint(*encoder, encoder_stem);
    nets::load_checkpoint(*decoder, decoder_stem);
    encoder->eval();
    decoder->eval();

    torch::NoGradGuard guard;
    quant::TensorDither dither(seed);
    const auto x = test.images.slice(0, 0, n_images);
    const auto xhat = decoder->forward(quant::transmit(encoder->forward(x), em.spec, dither, 1.0).received);

    std::vector<std::vector<float>> top, bottom;
    for (int i = 0; i < n_images; ++i) {
        top.push_back(pixels(x[i]));
        bottom.push_back(pixels(xhat[i]));
    }
    plot::write_image_grid(top, bottom, scale, path);

    DumpReport r{path, n_images, seed, em.fingerprint, dm.fingerprint};
    nlohmann::ordered_json j{{"encoder", encoder_stem}, {"decoder", decoder_stem},
                             {"encoder_fingerprint", r.encoder_fingerprint},
                             {"decoder_fingerprint", r.decoder_fingerprint}, {"n_images", n_images}, {"seed", seed}};
    std::ofstream(path + ".json") << j.dump(2) << '\n';
    return r;
}

}  // namespace rdpc
