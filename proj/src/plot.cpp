#include "rdpc/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "rdpc/config_io.hpp"

namespace rdpc::plot {

Axis parse_axis(std::string_view s) {
    if (s == "mse") return Axis::kMse;
    if (s == "ce") return Axis::kCe;
    if (s == "accuracy") return Axis::kAccuracy;
    if (s == "w1_proxy") return Axis::kW1Proxy;
    throw std::invalid_argument("unknown axis: " + std::string(s));
}

GroupBy parse_group_by(std::string_view s) {
    if (s == "rate") return GroupBy::kRate;
    if (s == "mode") return GroupBy::kMode;
    throw std::invalid_argument("unknown group_by: " + std::string(s));
}

std::string_view to_string(Axis a) {
    switch (a) {
        case Axis::kMse: return "mse";
        case Axis::kCe: return "ce";
        case Axis::kAccuracy: return "accuracy";
        case Axis::kW1Proxy: return "w1_proxy";
    }
    return "?";
}

double axis_value(const CurvePoint& p, Axis a) {
    switch (a) {
        case Axis::kMse: return p.mse;
        case Axis::kCe: return p.ce;
        case Axis::kAccuracy: return p.accuracy;
        case Axis::kW1Proxy: return p.w1_proxy;
    }
    return std::nan("");
}

namespace {

std::string rate_label(double rate) {
    std::ostringstream o;
    o.setf(std::ios::fixed);
    o.precision(2);
    o << "R=" << rate;
    return o.str();
}

}  // namespace

std::vector<Series> build_series(const ResultsTable& table, Axis x, Axis y, GroupBy group_by) {
    std::map<std::string, Series> groups;
    for (const auto& row : table.rows) {
        PlottedPoint p{row.run_id, "", axis_value(row, x), axis_value(row, y), row.mode == Mode::kEndToEnd};
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
        p.group = group_by == GroupBy::kRate ? rate_label(row.rate) : std::string(to_string(row.mode));
        auto& s = groups[p.group];
        s.group = p.group;
        s.points.push_back(p);
    }
    std::vector<Series> out;
    for (auto& [_, s] : groups) {
        std::stable_sort(s.points.begin(), s.points.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

const std::vector<cv::Scalar> kPalette = {{180, 119, 31}, {14, 127, 255}, {44, 160, 44}, {40, 39, 214},
                                          {189, 103, 148}, {75, 86, 140}, {194, 119, 227}};

std::string tick(double v) {
    std::ostringstream o;
    o.precision(3);
    o << v;
    return o.str();
}

}  // namespace

std::vector<Series> plot_tradeoff(const ResultsTable& table, Axis x, Axis y, GroupBy group_by,
                                  const std::string& path) {
    auto series = build_series(table, x, y, group_by);
    if (series.empty())
        throw std::invalid_argument("no rows with finite " + std::string(to_string(x)) + " and " +
                                    std::string(to_string(y)));

    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series)
        for (const auto& p : s.points) {
            x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
        }
    auto pad = [](double& lo, double& hi) {
        const double span = hi - lo;
        const double m = span > 0 ? 0.08 * span : std::max(1e-3, 0.1 * std::abs(lo));
        lo -= m, hi += m;
    };
    pad(x0, x1);
    pad(y0, y1);

    const int W = 900, H = 640, left = 90, right = 190, top = 30, bottom = 70;
    cv::Mat img(H, W, CV_8UC3, cv::Scalar(255, 255, 255));
    const int pw = W - left - right, ph = H - top - bottom;
    auto px = [&](double v) { return left + static_cast<int>(std::lround((v - x0) / (x1 - x0) * pw)); };
    auto py = [&](double v) { return top + ph - static_cast<int>(std::lround((v - y0) / (y1 - y0) * ph)); };

    const cv::Scalar black(0, 0, 0), grey(200, 200, 200);
    const auto font = cv::FONT_HERSHEY_SIMPLEX;
    for (int i = 0; i <= 5; ++i) {
        const double xv = x0 + (x1 - x0) * i / 5.0, yv = y0 + (y1 - y0) * i / 5.0;
        cv::line(img, {px(xv), top}, {px(xv), top + ph}, grey, 1);
        cv::line(img, {left, py(yv)}, {left + pw, py(yv)}, grey, 1);
        cv::putText(img, tick(xv), {px(xv) - 18, top + ph + 20}, font, 0.45, black, 1, cv::LINE_AA);
        cv::putText(img, tick(yv), {8, py(yv) + 5}, font, 0.45, black, 1, cv::LINE_AA);
    }
    cv::rectangle(img, {left, top}, {left + pw, top + ph}, black, 1);
    cv::putText(img, std::string(to_string(x)), {left + pw / 2 - 20, H - 20}, font, 0.6, black, 1, cv::LINE_AA);
    cv::putText(img, std::string(to_string(y)), {8, top - 10}, font, 0.6, black, 1, cv::LINE_AA);

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto color = kPalette[i % kPalette.size()];
        const auto& pts = series[i].points;
        for (std::size_t k = 1; k < pts.size(); ++k)
            cv::line(img, {px(pts[k - 1].x), py(pts[k - 1].y)}, {px(pts[k].x), py(pts[k].y)}, color, 1, cv::LINE_AA);
        for (const auto& p : pts) {
            cv::circle(img, {px(p.x), py(p.y)}, 6, color, cv::FILLED, cv::LINE_AA);
            if (p.outlined) cv::circle(img, {px(p.x), py(p.y)}, 7, black, 2, cv::LINE_AA);
        }
        const int ly = top + 20 + 24 * static_cast<int>(i);
        cv::circle(img, {left + pw + 25, ly - 5}, 6, color, cv::FILLED, cv::LINE_AA);
        cv::putText(img, series[i].group, {left + pw + 40, ly}, font, 0.5, black, 1, cv::LINE_AA);
    }
    const int ly = top + 20 + 24 * static_cast<int>(series.size()) + 10;
    cv::circle(img, {left + pw + 25, ly - 5}, 7, black, 2, cv::LINE_AA);
    cv::putText(img, "end_to_end", {left + pw + 40, ly}, font, 0.5, black, 1, cv::LINE_AA);

    if (!cv::imwrite(path, img)) throw std::runtime_error("cannot write " + path);
    std::ofstream trace(path + ".points.csv");
    trace << "run_id,group," << to_string(x) << ',' << to_string(y) << ",end_to_end\n";
    for (const auto& s : series)
        for (const auto& p : s.points)
            trace << p.run_id << ',' << p.group << ',' << format_double(p.x) << ',' << format_double(p.y) << ','
                  << (p.outlined ? 1 : 0) << '\n';
    return series;
}

void write_image_grid(const std::vector<std::vector<float>>& originals,
                      const std::vector<std::vector<float>>& reconstructions, int scale, const std::string& path) {
    const int n = static_cast<int>(originals.size());
    if (n == 0 || reconstructions.size() != originals.size()) throw std::invalid_argument("image grid: bad sizes");
    const int side = 28, tile = side * scale, gap = 2;
    cv::Mat grid(2 * tile + 3 * gap, n * (tile + gap) + gap, CV_8UC1, cv::Scalar(255));
    auto blit = [&](const std::vector<float>& px, int row, int col) {
        if (px.size() != static_cast<std::size_t>(side * side)) throw std::invalid_argument("image grid: expected 28x28");
        cv::Mat small(side, side, CV_8UC1);
        for (int r = 0; r < side; ++r)
            for (int c = 0; c < side; ++c)
                small.at<unsigned char>(r, c) =
                    static_cast<unsigned char>(std::lround(std::clamp(px[r * side + c], 0.0f, 1.0f) * 255.0f));
        cv::Mat big;
        cv::resize(small, big, {tile, tile}, 0, 0, cv::INTER_NEAREST);
        big.copyTo(grid(cv::Rect(gap + col * (tile + gap), gap + row * (tile + gap), tile, tile)));
    };
    for (int i = 0; i < n; ++i) {
        blit(originals[i], 0, i);
        blit(reconstructions[i], 1, i);
    }
    if (!cv::imwrite(path, grid)) throw std::runtime_error("cannot write " + path);
}

}  // namespace rdpc::plot
