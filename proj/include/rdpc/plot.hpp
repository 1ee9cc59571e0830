#pragma once

// PNG figures from a results table, and reconstruction grids from
// checkpoints.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rdpc/datamodel.hpp"
#include "rdpc/results.hpp"

namespace rdpc::plot {

enum class Axis { kMse, kCe, kAccuracy, kW1Proxy };
enum class GroupBy { kRate, kMode };

Axis parse_axis(std::string_view s);        // mse | ce | accuracy | w1_proxy
GroupBy parse_group_by(std::string_view s);  // rate | mode
std::string_view to_string(Axis a);
double axis_value(const CurvePoint& p, Axis a);

struct PlottedPoint {
    std::string run_id;
    std::string group;
    double x = 0.0;
    double y = 0.0;
    bool outlined = false;  // end-to-end
};

struct Series {
    std::string group;
    std::vector<PlottedPoint> points;  // sorted by x
};

/// Groups finite (x, y) rows; rows with a non-finite coordinate are left out.
std::vector<Series> build_series(const ResultsTable& table, Axis x, Axis y, GroupBy group_by);

/// Writes `path` (PNG) plus `path`.points.csv listing every plotted run_id.
/// Throws std::invalid_argument when nothing is plottable.
std::vector<Series> plot_tradeoff(const ResultsTable& table, Axis x, Axis y, GroupBy group_by,
                                  const std::string& path);

/// Writes a [2*tile + gap, n*(tile+gap)] grayscale grid: originals on top,
/// reconstructions below. Pixel values in [0, 1], row-major, 28x28 each.
void write_image_grid(const std::vector<std::vector<float>>& originals,
                      const std::vector<std::vector<float>>& reconstructions, int scale, const std::string& path);

}  // namespace rdpc::plot
