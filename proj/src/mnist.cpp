#include "rdpc/mnist.hpp"

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <vector>

#include "rdpc/config_io.hpp"

namespace rdpc {

ImageSet ImageSet::head(std::int64_t n) const {
    if (n <= 0 || n >= size()) return *this;
    return {images.slice(0, 0, n), labels.slice(0, 0, n)};
}

std::string default_mnist_dir() {
    if (const char* dir = std::getenv("RDPC_DATA_DIR"); dir && *dir) return std::string(dir) + "/mnist";
    const char* home = std::getenv("HOME");
    return std::string(home ? home : ".") + "/.cache/rdpc/mnist";
}

namespace {

std::vector<unsigned char> read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("missing MNIST file: " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t at) {
    return static_cast<std::uint32_t>(b[at]) << 24 | static_cast<std::uint32_t>(b[at + 1]) << 16 |
           static_cast<std::uint32_t>(b[at + 2]) << 8 | b[at + 3];
}

}  // namespace

ImageSet read_idx_pair(const std::string& images_path, const std::string& labels_path) {
    const auto img = read_all(images_path);
    const auto lab = read_all(labels_path);
    if (img.size() < 16 || be32(img, 0) != 0x803) throw std::runtime_error("bad IDX image file: " + images_path);
    if (lab.size() < 8 || be32(lab, 0) != 0x801) throw std::runtime_error("bad IDX label file: " + labels_path);
    const std::int64_t n = be32(img, 4), rows = be32(img, 8), cols = be32(img, 12);
    if (be32(lab, 4) != n) throw std::runtime_error("image/label counts differ");
    if (img.size() != static_cast<std::size_t>(16 + n * rows * cols) || lab.size() != static_cast<std::size_t>(8 + n))
        throw std::runtime_error("truncated IDX file");

    auto bytes = torch::from_blob(const_cast<unsigned char*>(img.data()) + 16, {n, 1, rows, cols}, torch::kUInt8);
    auto labels = torch::from_blob(const_cast<unsigned char*>(lab.data()) + 8, {n}, torch::kUInt8);
    return {bytes.to(torch::kFloat32).div_(255.0), labels.to(torch::kInt64)};
}

Mnist load_mnist(const std::string& dir) {
    Mnist m;
    m.train = read_idx_pair(dir + "/train-images-idx3-ubyte", dir + "/train-labels-idx1-ubyte");
    m.test = read_idx_pair(dir + "/t10k-images-idx3-ubyte", dir + "/t10k-labels-idx1-ubyte");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char* name : {"train-images-idx3-ubyte", "train-labels-idx1-ubyte", "t10k-images-idx3-ubyte",
                             "t10k-labels-idx1-ubyte"}) {
        const auto bytes = read_all(dir + "/" + name);
        h = fnv1a64({reinterpret_cast<const char*>(bytes.data()), bytes.size()}, h);
    }
    m.hash = hex64(h);
    return m;
}

}  // namespace rdpc
