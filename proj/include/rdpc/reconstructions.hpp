#pragma once

// Originals-over-reconstructions grids for held-out images.

#include <cstdint>
#include <string>

#include "rdpc/mnist.hpp"

namespace rdpc {

struct DumpReport {
    std::string path;
    int n_images = 0;
    std::uint64_t seed = 0;
    std::string encoder_fingerprint;
    std::string decoder_fingerprint;
};

/// Encodes the first `n_images` test images with the dither drawn from
/// `seed`, decodes them, and writes a 2 x n PNG grid to `path` with the seed
/// and fingerprints in `path`.json. Throws std::invalid_argument when the
/// two checkpoints disagree on the quantizer or are not encoder/decoder.
DumpReport dump_reconstructions(const std::string& encoder_stem, const std::string& decoder_stem, const ImageSet& test,
                                int n_images, std::uint64_t seed, const std::string& path, int scale = 3);

}  // namespace rdpc
