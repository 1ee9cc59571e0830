#pragma once

// Classifier pretraining, end-to-end training and the frozen-encoder
// (universal) protocol. Every run writes its checkpoints and a run record
// under the workspace directory:
//
//     <out>/checkpoints/<run_id>.{encoder,decoder,critic}.{pt,json}
//     <out>/runs/<run_id>.json
//     <out>/results.csv

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "rdpc/config_io.hpp"
#include "rdpc/datamodel.hpp"
#include "rdpc/mnist.hpp"
#include "rdpc/networks.hpp"
#include "rdpc/results.hpp"

namespace rdpc::train {

struct Workspace {
    std::string out_dir;
    std::string classifier_stem;  // defaults to <out>/classifier when empty
    std::ostream* log = nullptr;

    std::string classifier() const;
    std::string checkpoint(const std::string& run_id, std::string_view component) const;
    std::string run_record(const std::string& run_id) const;
    std::string results() const;
};

class NonFiniteLoss : public std::runtime_error {
public:
    NonFiniteLoss(std::int64_t step, const std::string& what);
    std::int64_t step;
};

class FingerprintDrift : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class AccuracyBelowFloor : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ClassifierConfig {
    std::uint64_t seed = 0;
    int epochs = 5;
    int batch_size = 64;
    AdamSettings adam = kClassifierAdam;
    std::int64_t train_limit = 0;
    double accuracy_floor = 0.97;
};

/// Keys: seed, epochs, batch_size, lr, beta1, beta2, train_limit, accuracy_floor.
ClassifierConfig classifier_config_from(const KeyValues& kv);

struct ClassifierReport {
    std::string stem;
    std::string fingerprint;
    double test_accuracy = 0.0;
    bool reused = false;
};

/// Trains and checkpoints the classifier. With `resume`, an existing
/// checkpoint at `stem` is kept. Throws AccuracyBelowFloor when the test
/// accuracy misses the floor (the checkpoint is still written).
ClassifierReport pretrain_classifier(const Mnist& data, const ClassifierConfig& config, const std::string& stem,
                                     bool resume, std::ostream* log = nullptr);

double classifier_accuracy(nets::Classifier& classifier, const ImageSet& images, std::int64_t batch = 1000);

/// Loads a classifier checkpoint, frozen.
nets::Classifier load_classifier(const std::string& stem);

struct Evaluation {
    double mse = 0.0;
    double ce = 0.0;
    double accuracy = 0.0;
    double w1_proxy = std::numeric_limits<double>::quiet_NaN();
    bool ce_clamped = false;
};

/// Held-out metrics with the dither active, averaged over the whole split.
/// `critic` may be null (w1_proxy stays NaN).
Evaluation evaluate(nets::Encoder& encoder, nets::Decoder& decoder, nets::Critic* critic,
                    nets::Classifier& classifier, const ImageSet& test, const QuantizerSpec& spec,
                    std::uint64_t dither_seed, double temperature, std::int64_t batch = 500);

struct RunOutcome {
    CurvePoint point;
    std::string encoder_stem;
    std::string encoder_fingerprint_before;
    std::string encoder_fingerprint_after;
    int fingerprint_checks = 0;
    bool ce_clamped = false;
    double seconds = 0.0;
};

RunOutcome train_end_to_end(const RunConfig& config, const Mnist& data, const Workspace& ws);
RunOutcome train_universal(const RunConfig& config, const Mnist& data, const Workspace& ws);

/// Validates, dispatches on mode, and writes the run record. Does not touch
/// the results table.
RunOutcome train_run(const RunConfig& config, const Mnist& data, const Workspace& ws);

/// Encoder checkpoint stem named by a universal config's encoder_source.
std::string resolve_encoder_source(const RunConfig& config, const Workspace& ws);

TableMeta table_meta(const Mnist& data, const Workspace& ws);

std::string run_record_json(const RunConfig& config, const RunOutcome& outcome);
RunOutcome read_run_record(const std::string& path);

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

}  // namespace rdpc::train
