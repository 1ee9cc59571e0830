#include "rdpc/results.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "rdpc/config_io.hpp"

namespace rdpc {

const CurvePoint* ResultsTable::find(std::string_view run_id) const {
    for (const auto& r : rows)
        if (r.run_id == run_id) return &r;
    return nullptr;
}

std::string to_csv_row(const CurvePoint& p) {
    std::ostringstream o;
    o << p.run_id << ',' << to_string(p.mode) << ',' << to_string(p.objective) << ',' << p.dim << ',' << p.levels
      << ',' << format_double(p.rate) << ',' << format_double(p.lambda_c) << ',' << format_double(p.lambda_p) << ','
      << format_double(p.mse) << ',' << format_double(p.ce) << ',' << format_double(p.accuracy) << ','
      << format_double(p.w1_proxy) << ',' << p.seed;
    return o.str();
}

CurvePoint from_csv_row(std::string_view line) {
    std::vector<std::string_view> f;
    while (true) {
        const auto comma = line.find(',');
        f.push_back(line.substr(0, comma));
        if (comma == std::string_view::npos) break;
        line = line.substr(comma + 1);
    }
    if (f.size() != 13) throw std::invalid_argument("results row must have 13 columns");
    CurvePoint p;
    p.run_id = std::string(f[0]);
    p.mode = parse_mode(f[1]);
    p.objective = parse_objective(f[2]);
    p.dim = static_cast<int>(parse_int(f[3]));
    p.levels = static_cast<int>(parse_int(f[4]));
    p.rate = parse_double(f[5]);
    p.lambda_c = parse_double(f[6]);
    p.lambda_p = parse_double(f[7]);
    p.mse = parse_double(f[8]);
    p.ce = parse_double(f[9]);
    p.accuracy = parse_double(f[10]);
    p.w1_proxy = parse_double(f[11]);
    p.seed = static_cast<std::uint64_t>(parse_int(f[12]));
    return p;
}

namespace {

std::string header_line(const TableMeta& m) {
    return "# rdpc-results schema=" + std::to_string(m.schema) + " dataset=" + m.dataset_hash +
           " classifier=" + m.classifier_fingerprint + " version=" + m.version;
}

TableMeta parse_header(std::string_view line) {
    TableMeta m;
    std::istringstream in{std::string(line.substr(1))};
    std::string token;
    in >> token;
    if (token != "rdpc-results") throw std::invalid_argument("not an rdpc results table");
    while (in >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const auto key = token.substr(0, eq), value = token.substr(eq + 1);
        if (key == "schema") m.schema = static_cast<int>(parse_int(value));
        else if (key == "dataset") m.dataset_hash = value;
        else if (key == "classifier") m.classifier_fingerprint = value;
        else if (key == "version") m.version = value;
    }
    if (m.schema != kResultsSchema) throw std::invalid_argument("unsupported results schema");
    return m;
}

}  // namespace

std::string to_csv(const ResultsTable& t) {
    std::string out = header_line(t.meta) + '\n' + std::string(kResultsColumns) + '\n';
    for (const auto& r : t.rows) out += to_csv_row(r) + '\n';
    return out;
}

ResultsTable from_csv(std::string_view text) {
    ResultsTable t;
    bool saw_header = false, saw_columns = false;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (line.front() == '#') {
            t.meta = parse_header(line);
            saw_header = true;
        } else if (!saw_columns) {
            if (line != kResultsColumns) throw std::invalid_argument("unexpected results columns");
            saw_columns = true;
        } else {
            auto row = from_csv_row(line);
            if (t.find(row.run_id)) throw std::invalid_argument("duplicate run_id " + row.run_id);
            t.rows.push_back(std::move(row));
        }
    }
    if (!saw_header && !t.rows.empty()) throw std::invalid_argument("results table lacks a schema header");
    return t;
}

namespace {

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

double number_from(const nlohmann::json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

std::string to_json(const ResultsTable& t) {
    nlohmann::ordered_json j;
    j["schema"] = t.meta.schema;
    j["dataset"] = t.meta.dataset_hash;
    j["classifier"] = t.meta.classifier_fingerprint;
    j["version"] = t.meta.version;
    j["ce_unit"] = "nats";
    auto rows = nlohmann::ordered_json::array();
    for (const auto& p : t.rows) {
        nlohmann::ordered_json r;
        r["run_id"] = p.run_id;
        r["mode"] = to_string(p.mode);
        r["objective"] = to_string(p.objective);
        r["dim"] = p.dim;
        r["L"] = p.levels;
        r["rate"] = p.rate;
        r["lambda_c"] = p.lambda_c;
        r["lambda_p"] = p.lambda_p;
        r["mse"] = number_or_null(p.mse);
        r["ce"] = number_or_null(p.ce);
        r["accuracy"] = number_or_null(p.accuracy);
        r["w1_proxy"] = number_or_null(p.w1_proxy);
        r["seed"] = p.seed;
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    return j.dump(2) + '\n';
}

ResultsTable from_json(std::string_view text) {
    const auto j = nlohmann::json::parse(text);
    ResultsTable t;
    t.meta.schema = j.at("schema").get<int>();
    t.meta.dataset_hash = j.at("dataset").get<std::string>();
    t.meta.classifier_fingerprint = j.at("classifier").get<std::string>();
    t.meta.version = j.at("version").get<std::string>();
    for (const auto& r : j.at("rows")) {
        CurvePoint p;
        p.run_id = r.at("run_id").get<std::string>();
        p.mode = parse_mode(r.at("mode").get<std::string>());
        p.objective = parse_objective(r.at("objective").get<std::string>());
        p.dim = r.at("dim").get<int>();
        p.levels = r.at("L").get<int>();
        p.rate = r.at("rate").get<double>();
        p.lambda_c = r.at("lambda_c").get<double>();
        p.lambda_p = r.at("lambda_p").get<double>();
        p.mse = number_from(r.at("mse"));
        p.ce = number_from(r.at("ce"));
        p.accuracy = number_from(r.at("accuracy"));
        p.w1_proxy = number_from(r.at("w1_proxy"));
        p.seed = r.at("seed").get<std::uint64_t>();
        t.rows.push_back(std::move(p));
    }
    return t;
}

ResultsTable read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) return {};
    std::stringstream ss;
    ss << in.rdbuf();
    return from_csv(ss.str());
}

namespace {

class FileLock {
public:
    explicit FileLock(const std::string& path) : fd_(::open((path + ".lock").c_str(), O_CREAT | O_RDWR, 0644)) {
        if (fd_ < 0 || ::flock(fd_, LOCK_EX) != 0) throw std::runtime_error("cannot lock " + path);
    }
    ~FileLock() {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    int fd_;
};

}  // namespace

bool append_row(const std::string& path, const TableMeta& meta, const CurvePoint& point) {
    FileLock lock(path);
    const auto existing = read_table(path);
    if (existing.find(point.run_id)) return false;
    std::error_code ec;
    const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path, ec) == 0;
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot write " + path);
    if (fresh)
        out << header_line(meta) << '\n' << kResultsColumns << '\n';
    out << to_csv_row(point) << '\n';
    return true;
}

bool export_table(const ResultsTable& table, ExportFormat format, const std::string& path) {
    if (table.rows.empty()) return false;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << (format == ExportFormat::kCsv ? to_csv(table) : to_json(table));
    return true;
}

}  // namespace rdpc
