#include "rdpc/trainer.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <ATen/CPUGeneratorImpl.h>
#include <json.hpp>

#include "rdpc/objectives.hpp"
#include "rdpc/quantizer_torch.hpp"

namespace rdpc::train {

namespace fs = std::filesystem;

std::string Workspace::classifier() const {
    return classifier_stem.empty() ? out_dir + "/classifier" : classifier_stem;
}

std::string Workspace::checkpoint(const std::string& run_id, std::string_view component) const {
    return out_dir + "/checkpoints/" + run_id + "." + std::string(component);
}

std::string Workspace::run_record(const std::string& run_id) const { return out_dir + "/runs/" + run_id + ".json"; }

std::string Workspace::results() const { return out_dir + "/results.csv"; }

NonFiniteLoss::NonFiniteLoss(std::int64_t s, const std::string& what)
    : std::runtime_error("non-finite " + what + " at step " + std::to_string(s)), step(s) {}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) {
    return fnv1a64(std::to_string(seed) + ":" + std::string(stream));
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void say(std::ostream* log, const std::string& line) {
    if (log) *log << line << std::endl;
}

at::Generator cpu_generator(std::uint64_t seed) { return at::make_generator<at::CPUGeneratorImpl>(seed); }

torch::optim::Adam adam(std::vector<torch::Tensor> params, const AdamSettings& s) {
    return torch::optim::Adam(std::move(params), torch::optim::AdamOptions(s.lr).betas({s.beta1, s.beta2}));
}

double checked(const torch::Tensor& loss, std::int64_t step, const char* what) {
    const double v = loss.item<double>();
    if (!std::isfinite(v)) throw NonFiniteLoss(step, what);
    return v;
}

template <class F>
void for_batches(const ImageSet& data, std::int64_t batch, at::Generator& order, F&& body) {
    const auto n = data.size();
    const auto perm = torch::randperm(n, order, torch::kInt64);
    std::int64_t index = 0;
    for (std::int64_t b = 0; b + 1 < n; b += batch, ++index) {
        const auto idx = perm.slice(0, b, std::min(n, b + batch));
        if (idx.size(0) < 2) break;  // batch norm needs two samples
        body(index, data.images.index_select(0, idx), data.labels.index_select(0, idx));
    }
}

struct FitState {
    nets::Encoder& encoder;
    nets::Decoder& decoder;
    nets::Critic* critic;
    nets::Classifier& classifier;
    bool train_encoder;
};

// Shared loop for both protocols. In universal mode the encoder runs in
// eval mode without gradients and never reaches an optimizer.
void fit(const RunConfig& cfg, const ImageSet& train, FitState s, std::ostream* log,
         const std::function<void(int)>& after_epoch) {
    const auto& spec = cfg.quantizer;
    const bool rdp = cfg.objective == Objective::kRdp;
    if (rdp && !s.critic) throw std::logic_error("rdp training needs a critic");

    std::optional<torch::optim::Adam> opt_e;
    if (s.train_encoder) opt_e.emplace(adam(s.encoder->parameters(), cfg.encoder));
    auto opt_d = adam(s.decoder->parameters(), cfg.decoder);
    std::optional<torch::optim::Adam> opt_c;
    if (rdp) opt_c.emplace(adam((*s.critic)->parameters(), cfg.critic));

    auto order = cpu_generator(derive_seed(cfg.seed, "order"));
    auto gp_rng = cpu_generator(derive_seed(cfg.seed, "gp"));
    quant::TensorDither dither(derive_seed(cfg.seed, "dither"));
    obj::CriticFn critic_fn;
    if (rdp) critic_fn = [&](const torch::Tensor& t) { return (*s.critic)->forward(t); };

    if (s.train_encoder) s.encoder->train();
    s.decoder->train();
    if (rdp) (*s.critic)->train();

    auto reconstruct = [&](const torch::Tensor& x) {
        torch::Tensor fx;
        if (s.train_encoder) {
            fx = s.encoder->forward(x);
        } else {
            torch::NoGradGuard guard;
            fx = s.encoder->forward(x);
        }
        return s.decoder->forward(quant::transmit(fx, spec, dither, cfg.temperature).received);
    };
    auto generator_step = [&](const obj::LossBreakdown& loss, std::int64_t step) {
        const double v = checked(loss.total, step, "generator loss");
        if (opt_e) opt_e->zero_grad();
        opt_d.zero_grad();
        loss.total.backward();
        if (opt_e) opt_e->step();
        opt_d.step();
        return v;
    };

    std::int64_t step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = Clock::now();
        double sum_total = 0.0, sum_mse = 0.0, sum_aux = 0.0, sum_critic = 0.0;
        int gen_steps = 0, critic_updates = 0;
        for_batches(train, cfg.batch_size, order, [&](std::int64_t i, const torch::Tensor& x, const torch::Tensor& y) {
            ++step;
            if (!rdp) {
                auto xhat = reconstruct(x);
                auto loss = obj::composite_loss(cfg.objective, cfg.mode, x, xhat, y,
                                                s.classifier->log_probabilities(xhat), {}, cfg.tradeoff);
                sum_total += generator_step(loss, step);
                sum_mse += loss.mse.item<double>();
                sum_aux += loss.ce.item<double>();
                ++gen_steps;
                return;
            }
            torch::Tensor fake;
            {
                torch::NoGradGuard guard;
                fake = reconstruct(x);
            }
            auto closs = obj::critic_loss(critic_fn, x, fake, cfg.lambda_gp, gp_rng);
            sum_critic += checked(closs.total, step, "critic loss");
            opt_c->zero_grad();
            closs.total.backward();
            opt_c->step();
            ++critic_updates;
            if ((i + 1) % cfg.critic_steps != 0) return;

            auto xhat = reconstruct(x);
            auto loss = obj::composite_loss(cfg.objective, cfg.mode, x, xhat, y, {}, (*s.critic)->forward(xhat),
                                            cfg.tradeoff);
            sum_total += generator_step(loss, step);
            sum_mse += loss.mse.item<double>();
            sum_aux += loss.w1_term.item<double>();
            ++gen_steps;
        });
        std::ostringstream line;
        const double g = std::max(gen_steps, 1);
        line << "  epoch " << epoch + 1 << "/" << cfg.epochs << std::setprecision(5) << " loss " << sum_total / g
             << " mse " << sum_mse / g << (rdp ? " w1_term " : " ce ") << sum_aux / g;
        if (rdp) line << " critic " << sum_critic / std::max(critic_updates, 1);
        line << std::setprecision(3) << " (" << seconds_since(t0) << " s)";
        say(log, line.str());
        after_epoch(epoch);
    }
}

CurvePoint make_point(const RunConfig& cfg, const Evaluation& e) {
    CurvePoint p;
    p.run_id = run_id(cfg);
    p.mode = cfg.mode;
    p.objective = cfg.objective;
    p.dim = cfg.quantizer.dim;
    p.levels = cfg.quantizer.levels;
    p.rate = rate_of(cfg.quantizer);
    p.lambda_c = cfg.tradeoff.lambda_c;
    p.lambda_p = cfg.tradeoff.lambda_p;
    p.mse = e.mse;
    p.ce = e.ce;
    p.accuracy = e.accuracy;
    p.w1_proxy = e.w1_proxy;
    p.seed = cfg.seed;
    return p;
}

nets::CheckpointMeta meta_for(const RunConfig& cfg, std::string component, std::string architecture) {
    nets::CheckpointMeta m;
    m.component = std::move(component);
    m.run_id = run_id(cfg);
    m.seed = cfg.seed;
    m.spec = cfg.quantizer;
    m.architecture = std::move(architecture);
    return m;
}

void save_run(const RunConfig& cfg, const Workspace& ws, nets::Encoder& enc, nets::Decoder& dec,
              nets::Critic* critic) {
    const auto id = run_id(cfg);
    nets::save_checkpoint(*enc, ws.checkpoint(id, "encoder"), meta_for(cfg, "encoder", nets::describe(*enc)));
    nets::save_checkpoint(*dec, ws.checkpoint(id, "decoder"), meta_for(cfg, "decoder", nets::describe(*dec)));
    if (critic)
        nets::save_checkpoint(**critic, ws.checkpoint(id, "critic"), meta_for(cfg, "critic", nets::describe(**critic)));
}

ImageSet training_split(const Mnist& data, const RunConfig& cfg) { return data.train.head(cfg.train_limit); }
ImageSet test_split(const Mnist& data, const RunConfig& cfg) { return data.test.head(cfg.eval_limit); }

}  // namespace

ClassifierConfig classifier_config_from(const KeyValues& kv) {
    ClassifierConfig c;
    for (const auto& [key, value] : kv) {
        if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(value));
        else if (key == "epochs") c.epochs = static_cast<int>(parse_int(value));
        else if (key == "batch_size") c.batch_size = static_cast<int>(parse_int(value));
        else if (key == "lr") c.adam.lr = parse_double(value);
        else if (key == "beta1") c.adam.beta1 = parse_double(value);
        else if (key == "beta2") c.adam.beta2 = parse_double(value);
        else if (key == "train_limit") c.train_limit = parse_int(value);
        else if (key == "accuracy_floor") c.accuracy_floor = parse_double(value);
        else throw std::invalid_argument("unknown classifier config key: " + key);
    }
    if (c.epochs < 1 || c.batch_size < 2) throw std::invalid_argument("classifier config: epochs >= 1, batch_size >= 2");
    return c;
}

double classifier_accuracy(nets::Classifier& classifier, const ImageSet& images, std::int64_t batch) {
    torch::NoGradGuard guard;
    classifier->eval();
    std::int64_t correct = 0;
    for (std::int64_t b = 0; b < images.size(); b += batch) {
        const auto x = images.images.slice(0, b, b + batch);
        const auto y = images.labels.slice(0, b, b + batch);
        correct += classifier->forward(x).argmax(1).eq(y).sum().item<std::int64_t>();
    }
    return static_cast<double>(correct) / static_cast<double>(images.size());
}

nets::Classifier load_classifier(const std::string& stem) {
    nets::Classifier k;
    const auto meta = nets::load_checkpoint(*k, stem);
    if (meta.component != "classifier") throw std::runtime_error(stem + " is not a classifier checkpoint");
    nets::freeze(*k);
    return k;
}

ClassifierReport pretrain_classifier(const Mnist& data, const ClassifierConfig& cfg, const std::string& stem,
                                     bool resume, std::ostream* log) {
    ClassifierReport report;
    report.stem = stem;
    if (resume && nets::checkpoint_exists(stem)) {
        auto k = load_classifier(stem);
        const auto meta = nets::read_checkpoint_meta(stem);
        report.fingerprint = meta.fingerprint;
        report.test_accuracy = meta.test_accuracy;
        report.reused = true;
        say(log, "classifier: reusing " + stem);
    } else {
        torch::manual_seed(cfg.seed);
        nets::Classifier k;
        auto opt = adam(k->parameters(), cfg.adam);
        auto order = cpu_generator(derive_seed(cfg.seed, "classifier-order"));
        const auto train = data.train.head(cfg.train_limit);
        std::int64_t step = 0;
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            const auto t0 = Clock::now();
            k->train();
            double sum = 0.0;
            std::int64_t batches = 0;
            for_batches(train, cfg.batch_size, order, [&](std::int64_t, const torch::Tensor& x, const torch::Tensor& y) {
                auto loss = obj::ce_from_log_probs(y, k->log_probabilities(x));
                sum += checked(loss, ++step, "classifier loss");
                opt.zero_grad();
                loss.backward();
                opt.step();
                ++batches;
            });
            std::ostringstream line;
            line << "  classifier epoch " << epoch + 1 << "/" << cfg.epochs << " ce " << sum / std::max<std::int64_t>(batches, 1)
                 << " test_acc " << classifier_accuracy(k, data.test) << " (" << seconds_since(t0) << " s)";
            say(log, line.str());
        }
        report.test_accuracy = classifier_accuracy(k, data.test);
        nets::CheckpointMeta meta;
        meta.component = "classifier";
        meta.seed = cfg.seed;
        meta.architecture = nets::describe(*k);
        meta.test_accuracy = report.test_accuracy;
        nets::save_checkpoint(*k, stem, meta);
        report.fingerprint = nets::fingerprint(*k);
    }
    if (!(report.test_accuracy >= cfg.accuracy_floor)) {
        std::ostringstream msg;
        msg << "classifier test accuracy " << report.test_accuracy << " below floor " << cfg.accuracy_floor;
        throw AccuracyBelowFloor(msg.str());
    }
    return report;
}

Evaluation evaluate(nets::Encoder& encoder, nets::Decoder& decoder, nets::Critic* critic,
                    nets::Classifier& classifier, const ImageSet& test, const QuantizerSpec& spec,
                    std::uint64_t dither_seed, double temperature, std::int64_t batch) {
    torch::NoGradGuard guard;
    encoder->eval();
    decoder->eval();
    classifier->eval();
    if (critic) (*critic)->eval();
    quant::TensorDither dither(dither_seed);

    double sq = 0.0, ce = 0.0, w1 = 0.0;
    std::int64_t correct = 0;
    Evaluation e;
    const auto n = test.size();
    for (std::int64_t b = 0; b < n; b += batch) {
        const auto x = test.images.slice(0, b, b + batch);
        const auto y = test.labels.slice(0, b, b + batch);
        const auto m = static_cast<double>(x.size(0));
        const auto xhat = decoder->forward(quant::transmit(encoder->forward(x), spec, dither, temperature).received);
        sq += (x - xhat).pow(2).sum().item<double>();
        const auto probs = classifier->forward(xhat);
        const auto c = obj::ce_loss(y, probs);
        ce += c.value.item<double>() * m;
        e.ce_clamped = e.ce_clamped || c.clamped;
        correct += probs.argmax(1).eq(y).sum().item<std::int64_t>();
        if (critic) w1 += (*critic)->forward(x).sum().item<double>() - (*critic)->forward(xhat).sum().item<double>();
    }
    const auto nd = static_cast<double>(n);
    e.mse = sq / (nd * static_cast<double>(test.images[0].numel()));
    e.ce = ce / nd;
    e.accuracy = static_cast<double>(correct) / nd;
    if (critic) e.w1_proxy = w1 / nd;
    return e;
}

RunOutcome train_end_to_end(const RunConfig& cfg, const Mnist& data, const Workspace& ws) {
    if (cfg.mode != Mode::kEndToEnd) throw std::invalid_argument("train_end_to_end needs mode = end_to_end");
    const auto t0 = Clock::now();
    const auto id = run_id(cfg);
    auto classifier = load_classifier(ws.classifier());

    torch::manual_seed(cfg.seed);
    nets::Encoder encoder(cfg.quantizer);
    nets::Decoder decoder(cfg.quantizer);
    std::optional<nets::Critic> critic;
    if (cfg.objective == Objective::kRdp) critic.emplace();
    nets::Critic* critic_ptr = critic ? &*critic : nullptr;

    say(ws.log, "run " + id + " end_to_end " + std::string(to_string(cfg.objective)));
    fit(cfg, training_split(data, cfg), {encoder, decoder, critic_ptr, classifier, true}, ws.log, [](int) {});

    const auto e = evaluate(encoder, decoder, critic_ptr, classifier, test_split(data, cfg), cfg.quantizer,
                            derive_seed(cfg.seed, "eval"), cfg.temperature);
    save_run(cfg, ws, encoder, decoder, critic_ptr);

    RunOutcome out;
    out.point = make_point(cfg, e);
    out.encoder_stem = ws.checkpoint(id, "encoder");
    out.encoder_fingerprint_before = out.encoder_fingerprint_after = nets::fingerprint(*encoder);
    out.ce_clamped = e.ce_clamped;
    out.seconds = seconds_since(t0);
    return out;
}

std::string resolve_encoder_source(const RunConfig& cfg, const Workspace& ws) {
    if (nets::checkpoint_exists(cfg.encoder_source)) return cfg.encoder_source;
    const auto stem = ws.checkpoint(cfg.encoder_source, "encoder");
    if (nets::checkpoint_exists(stem)) return stem;
    throw std::runtime_error("encoder_source '" + cfg.encoder_source + "' names neither a checkpoint nor a finished run");
}

RunOutcome train_universal(const RunConfig& cfg, const Mnist& data, const Workspace& ws) {
    if (cfg.mode != Mode::kUniversal) throw std::invalid_argument("train_universal needs mode = universal");
    const auto t0 = Clock::now();
    const auto id = run_id(cfg);
    auto classifier = load_classifier(ws.classifier());

    const auto source = resolve_encoder_source(cfg, ws);
    const auto source_meta = nets::read_checkpoint_meta(source);
    if (source_meta.component != "encoder") throw std::runtime_error(source + " is not an encoder checkpoint");
    if (!(source_meta.spec == cfg.quantizer)) throw std::invalid_argument("encoder_source quantizer differs from config");
    nets::Encoder encoder(cfg.quantizer);
    nets::load_checkpoint(*encoder, source);
    nets::freeze(*encoder);

    RunOutcome out;
    out.encoder_stem = source;
    out.encoder_fingerprint_before = nets::fingerprint(*encoder);
    auto check = [&](const char* when) {
        const auto now = nets::fingerprint(*encoder);
        ++out.fingerprint_checks;
        if (now != out.encoder_fingerprint_before)
            throw FingerprintDrift("encoder fingerprint changed " + std::string(when) + ": " +
                                   out.encoder_fingerprint_before + " -> " + now);
        return now;
    };

    torch::manual_seed(cfg.seed);
    nets::Decoder decoder(cfg.quantizer);
    std::optional<nets::Critic> critic;
    if (cfg.objective == Objective::kRdp) {
        critic.emplace();
        const std::string prefix = source.substr(0, source.size() - std::string(".encoder").size());
        const auto critic_stem = prefix + ".critic";
        const bool available = source.ends_with(".encoder") && nets::checkpoint_exists(critic_stem);
        const auto init = cfg.critic_init.value_or(available ? CriticInit::kFromSource : CriticInit::kRandom);
        if (init == CriticInit::kFromSource) {
            if (!available) throw std::runtime_error("critic_init = from_source but " + critic_stem + " is missing");
            nets::load_checkpoint(**critic, critic_stem);
        }
        say(ws.log, "run " + id + " universal rdp, critic " + std::string(to_string(init)));
    } else {
        say(ws.log, "run " + id + " universal rdc");
    }
    nets::Critic* critic_ptr = critic ? &*critic : nullptr;

    fit(cfg, training_split(data, cfg), {encoder, decoder, critic_ptr, classifier, false}, ws.log,
        [&](int epoch) { check(("after epoch " + std::to_string(epoch + 1)).c_str()); });

    const auto e = evaluate(encoder, decoder, critic_ptr, classifier, test_split(data, cfg), cfg.quantizer,
                            derive_seed(cfg.seed, "eval"), cfg.temperature);
    out.encoder_fingerprint_after = check("after evaluation");
    save_run(cfg, ws, encoder, decoder, critic_ptr);

    out.point = make_point(cfg, e);
    out.ce_clamped = e.ce_clamped;
    out.seconds = seconds_since(t0);
    return out;
}

RunOutcome train_run(const RunConfig& cfg, const Mnist& data, const Workspace& ws) {
    if (const auto v = validate(cfg); !v.empty()) throw std::invalid_argument(v.front().field + ": " + v.front().rule);
    auto out = cfg.mode == Mode::kEndToEnd ? train_end_to_end(cfg, data, ws) : train_universal(cfg, data, ws);
    const auto path = ws.run_record(out.point.run_id);
    fs::create_directories(fs::path(path).parent_path());
    std::ofstream(path) << run_record_json(cfg, out) << '\n';
    std::ostringstream line;
    line << "run " << out.point.run_id << " done: mse " << out.point.mse << " ce " << out.point.ce << " acc "
         << out.point.accuracy << " w1 " << out.point.w1_proxy << " (" << out.seconds << " s)";
    say(ws.log, line.str());
    return out;
}

TableMeta table_meta(const Mnist& data, const Workspace& ws) {
    TableMeta m;
    m.dataset_hash = data.hash;
    if (nets::checkpoint_exists(ws.classifier()))
        m.classifier_fingerprint = nets::read_checkpoint_meta(ws.classifier()).fingerprint;
    return m;
}

std::string run_record_json(const RunConfig& cfg, const RunOutcome& o) {
    nlohmann::ordered_json j;
    j["run_id"] = o.point.run_id;
    j["config"] = serialize(cfg);
    j["point"] = to_csv_row(o.point);
    j["encoder_stem"] = o.encoder_stem;
    j["encoder_fingerprint_before"] = o.encoder_fingerprint_before;
    j["encoder_fingerprint_after"] = o.encoder_fingerprint_after;
    j["fingerprint_checks"] = o.fingerprint_checks;
    j["ce_clamped"] = o.ce_clamped;
    j["seconds"] = o.seconds;
    return j.dump(2);
}

RunOutcome read_run_record(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing run record " + path);
    const auto j = nlohmann::json::parse(in);
    RunOutcome o;
    o.point = from_csv_row(j.at("point").get<std::string>());
    o.encoder_stem = j.at("encoder_stem").get<std::string>();
    o.encoder_fingerprint_before = j.at("encoder_fingerprint_before").get<std::string>();
    o.encoder_fingerprint_after = j.at("encoder_fingerprint_after").get<std::string>();
    o.fingerprint_checks = j.at("fingerprint_checks").get<int>();
    o.ce_clamped = j.at("ce_clamped").get<bool>();
    o.seconds = j.at("seconds").get<double>();
    return o;
}

}  // namespace rdpc::train
