#include "rdpc/config_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rdpc {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

KeyValues parse_key_values(std::string_view text) {
    KeyValues kv;
    int line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected key = value");
        const auto key = std::string(trim(line.substr(0, eq)));
        const auto value = std::string(trim(line.substr(eq + 1)));
        if (key.empty()) throw std::invalid_argument("line " + std::to_string(line_no) + ": empty key");
        if (!kv.emplace(key, value).second) throw std::invalid_argument("duplicate key: " + key);
    }
    return kv;
}

KeyValues read_key_values_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_key_values(ss.str());
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
    s = trim(s);
    if (s == "inf" || s == "+inf" || s == "Infinity") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan" || s.empty()) return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument("not a number: " + std::string(s));
    return v;
}

std::int64_t parse_int(std::string_view s) {
    s = trim(s);
    std::int64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument("not an integer: " + std::string(s));
    return v;
}

RunConfig run_config_from(const KeyValues& kv) {
    RunConfig c;
    for (const auto& [key, value] : kv) {
        auto adam = [&](std::string_view prefix, AdamSettings& a) {
            if (!key.starts_with(prefix)) return false;
            const auto rest = std::string_view(key).substr(prefix.size());
            if (rest == "_lr") a.lr = parse_double(value);
            else if (rest == "_beta1") a.beta1 = parse_double(value);
            else if (rest == "_beta2") a.beta2 = parse_double(value);
            else return false;
            return true;
        };
        if (key == "mode") c.mode = parse_mode(value);
        else if (key == "objective") c.objective = parse_objective(value);
        else if (key == "dim") c.quantizer.dim = static_cast<int>(parse_int(value));
        else if (key == "levels") c.quantizer.levels = static_cast<int>(parse_int(value));
        else if (key == "lambda_c") c.tradeoff.lambda_c = parse_double(value);
        else if (key == "lambda_p") c.tradeoff.lambda_p = parse_double(value);
        else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(value));
        else if (key == "epochs") c.epochs = static_cast<int>(parse_int(value));
        else if (key == "batch_size") c.batch_size = static_cast<int>(parse_int(value));
        else if (key == "lambda_gp") c.lambda_gp = parse_double(value);
        else if (key == "critic_steps") c.critic_steps = static_cast<int>(parse_int(value));
        else if (key == "temperature") c.temperature = parse_double(value);
        else if (key == "encoder_source") c.encoder_source = value;
        else if (key == "critic_init") {
            if (value.empty() || value == "auto") c.critic_init.reset();
            else c.critic_init = parse_critic_init(value);
        }
        else if (key == "train_limit") c.train_limit = parse_int(value);
        else if (key == "eval_limit") c.eval_limit = parse_int(value);
        else if (adam("encoder", c.encoder) || adam("decoder", c.decoder) || adam("critic", c.critic) ||
                 adam("classifier", c.classifier)) {
        } else {
            throw std::invalid_argument("unknown config key: " + key);
        }
    }
    return c;
}

RunConfig parse_run_config(std::string_view text) { return run_config_from(parse_key_values(text)); }

std::string serialize(const RunConfig& c) {
    std::ostringstream o;
    auto line = [&](std::string_view k, const std::string& v) { o << k << " = " << v << '\n'; };
    auto adam = [&](std::string_view name, const AdamSettings& a) {
        line(std::string(name) + "_lr", format_double(a.lr));
        line(std::string(name) + "_beta1", format_double(a.beta1));
        line(std::string(name) + "_beta2", format_double(a.beta2));
    };
    line("mode", std::string(to_string(c.mode)));
    line("objective", std::string(to_string(c.objective)));
    line("dim", std::to_string(c.quantizer.dim));
    line("levels", std::to_string(c.quantizer.levels));
    line("lambda_c", format_double(c.tradeoff.lambda_c));
    line("lambda_p", format_double(c.tradeoff.lambda_p));
    line("seed", std::to_string(c.seed));
    line("epochs", std::to_string(c.epochs));
    line("batch_size", std::to_string(c.batch_size));
    adam("encoder", c.encoder);
    adam("decoder", c.decoder);
    adam("critic", c.critic);
    adam("classifier", c.classifier);
    line("lambda_gp", format_double(c.lambda_gp));
    line("critic_steps", std::to_string(c.critic_steps));
    line("temperature", format_double(c.temperature));
    line("encoder_source", c.encoder_source);
    line("critic_init", c.critic_init ? std::string(to_string(*c.critic_init)) : "auto");
    line("train_limit", std::to_string(c.train_limit));
    line("eval_limit", std::to_string(c.eval_limit));
    return o.str();
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[i] = kDigits[v & 0xf];
    return s;
}

std::string run_id(const RunConfig& config) { return hex64(fnv1a64(serialize(config))); }

}  // namespace rdpc
