#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "vos/network.hpp"

namespace vos {

/// Inclusive evaluation window: resolution points per axis, endpoints on the
/// boundary. Needs resolution >= 2.
struct GridSpec {
    double x_min = -12.0;
    double x_max = 12.0;
    double y_min = -12.0;
    double y_max = 12.0;
    std::size_t resolution = 200;

    void validate() const;
};

/// ood_score at every grid point, row-major with the top row at y_max (image
/// orientation). Size = resolution^2. Model input must be 2-D.
std::vector<double> eval_score_grid(const Model& model, const GridSpec& grid);

/// Plain-text PGM (P2), 0 = score 0 (OOD) ... 255 = score 1 (ID); pixels are
/// lround(value * 255). Lines stay under 70 characters per the format note.
std::string grid_to_pgm(const std::vector<double>& values, std::size_t width,
                        std::size_t height);

/// Raw grid values as text for numeric diffing: one row per line, %.17g.
std::string grid_to_text(const std::vector<double>& values, std::size_t width,
                         std::size_t height);

/// Level-set boundary at `level` as SVG line segments (marching squares).
std::string grid_to_svg_contour(const std::vector<double>& values, std::size_t width,
                                std::size_t height, double level);

}  // namespace vos
