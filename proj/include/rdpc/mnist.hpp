#pragma once

// MNIST from the four uncompressed IDX files, pixels scaled to [0, 1].

#include <string>

#include <torch/torch.h>

namespace rdpc {

struct ImageSet {
    torch::Tensor images;  // float32 [N, 1, 28, 28] in [0, 1]
    torch::Tensor labels;  // int64 [N]

    std::int64_t size() const { return images.size(0); }
    /// First `n` samples (all when n <= 0 or n >= size()).
    ImageSet head(std::int64_t n) const;
};

struct Mnist {
    ImageSet train;
    ImageSet test;
    std::string hash;  // content hash of the four files
};

/// $RDPC_DATA_DIR/mnist when set, else $HOME/.cache/rdpc/mnist.
std::string default_mnist_dir();

/// Throws std::runtime_error naming the missing file when the split is absent.
Mnist load_mnist(const std::string& dir);

ImageSet read_idx_pair(const std::string& images_path, const std::string& labels_path);

}  // namespace rdpc
