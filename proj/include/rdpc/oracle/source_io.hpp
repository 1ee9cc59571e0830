#pragma once

// Plain-text source descriptions for the `oracle` subcommand.
//
//     px     = 0.5 0.5
//     label0 = 0.9 0.1 ; 0.1 0.9      # p(S_0|X), rows separated by ';'
//     delta  = 0 1 ; 1 0              # Delta(x, xhat), nx x nxhat
//
// Constraint sets for universal-rate queries use one line per point:
//
//     point0 = 0.1 inf 0.6            # D P C_0 [C_1 ...]
//
// Surface grids name the second axis and list both axes, either explicitly
// or as lo:hi:count:
//
//     axis       = classification     # or perception
//     distortion = 0.02:0.44:8
//     second     = 0.56 0.6 0.7

#include <string>
#include <string_view>
#include <vector>

#include "rdpc/datamodel.hpp"

namespace rdpc::oracle {

Matrix parse_matrix(std::string_view text);
std::string format_matrix(const Matrix& m);

DiscreteSource parse_source(std::string_view text);
DiscreteSource read_source_file(const std::string& path);
std::string format_source(const DiscreteSource& source);

ConstraintRegion parse_region(std::string_view text, int num_labels);
ConstraintRegion read_region_file(const std::string& path, int num_labels);

struct SurfaceGrid {
    bool perception = false;  // second axis is P instead of C
    std::vector<double> distortions;
    std::vector<double> second;
};

/// Values of "a b c" or "lo:hi:count" (count >= 2, evenly spaced).
std::vector<double> parse_axis_values(std::string_view text);
SurfaceGrid parse_surface_grid(std::string_view text);
SurfaceGrid read_surface_grid_file(const std::string& path);

}  // namespace rdpc::oracle
