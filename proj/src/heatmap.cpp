#include "vos/heatmap.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "vos/evalkit.hpp"

namespace vos {

void GridSpec::validate() const {
    if (resolution < 2) throw std::invalid_argument("grid: resolution must be >= 2");
    if (!(x_min < x_max) || !(y_min < y_max)) {
        throw std::invalid_argument("grid: needs min < max on both axes");
    }
}

std::vector<double> eval_score_grid(const Model& model, const GridSpec& grid) {
    grid.validate();
    if (model.config().input_dim() != 2) {
        throw std::invalid_argument("eval_score_grid: model input must be 2-D");
    }
    const std::size_t n = grid.resolution;
    const double dx = (grid.x_max - grid.x_min) / static_cast<double>(n - 1);
    const double dy = (grid.y_max - grid.y_min) / static_cast<double>(n - 1);
    std::vector<double> values(n * n);
    Vector point(2);
    for (std::size_t r = 0; r < n; ++r) {
        point[1] = grid.y_max - static_cast<double>(r) * dy;
        for (std::size_t c = 0; c < n; ++c) {
            point[0] = grid.x_min + static_cast<double>(c) * dx;
            values[r * n + c] = ood_score(model, point);
        }
    }
    return values;
}

std::string grid_to_pgm(const std::vector<double>& values, std::size_t width,
                        std::size_t height) {
    if (values.size() != width * height || width == 0 || height == 0) {
        throw std::invalid_argument("grid_to_pgm: size mismatch");
    }
    std::string out = "P2\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    char buf[16];
    for (std::size_t r = 0; r < height; ++r) {
        std::size_t line_len = 0;
        for (std::size_t c = 0; c < width; ++c) {
            double v = values[r * width + c];
            if (!(v >= 0.0 && v <= 1.0)) {
                throw std::invalid_argument("grid_to_pgm: values must lie in [0, 1]");
            }
            long pixel = std::lround(v * 255.0);
            int len = std::snprintf(buf, sizeof(buf), "%ld", pixel);
            // Keep plain-PGM lines under 70 characters.
            if (line_len > 0 && line_len + 1 + static_cast<std::size_t>(len) > 68) {
                out += '\n';
                line_len = 0;
            }
            if (line_len > 0) {
                out += ' ';
                ++line_len;
            }
            out += buf;
            line_len += static_cast<std::size_t>(len);
        }
        out += '\n';
    }
    return out;
}

std::string grid_to_text(const std::vector<double>& values, std::size_t width,
                         std::size_t height) {
    if (values.size() != width * height) {
        throw std::invalid_argument("grid_to_text: size mismatch");
    }
    std::string out;
    char buf[40];
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", values[r * width + c]);
            if (c > 0) out += ' ';
            out += buf;
        }
        out += '\n';
    }
    return out;
}

namespace {

struct Point {
    double x, y;
};

// Linear interpolation of the level crossing between two grid corners.
Point lerp_edge(double ax, double ay, double av, double bx, double by, double bv,
                double level) {
    double t = (bv == av) ? 0.5 : (level - av) / (bv - av);
    if (t < 0.0) t = 0.0;
    if (t > 1.0) t = 1.0;
    return {ax + t * (bx - ax), ay + t * (by - ay)};
}

}  // namespace

std::string grid_to_svg_contour(const std::vector<double>& values, std::size_t width,
                                std::size_t height, double level) {
    if (values.size() != width * height || width < 2 || height < 2) {
        throw std::invalid_argument("grid_to_svg_contour: size mismatch");
    }
    std::string body;
    char buf[160];
    auto emit = [&](Point a, Point b) {
        std::snprintf(buf, sizeof(buf),
                      "  <line x1=\"%.4f\" y1=\"%.4f\" x2=\"%.4f\" y2=\"%.4f\"/>\n", a.x, a.y,
                      b.x, b.y);
        body += buf;
    };

    for (std::size_t r = 0; r + 1 < height; ++r) {
        for (std::size_t c = 0; c + 1 < width; ++c) {
            double tl = values[r * width + c];
            double tr = values[r * width + c + 1];
            double br = values[(r + 1) * width + c + 1];
            double bl = values[(r + 1) * width + c];
            int mask = (tl >= level ? 8 : 0) | (tr >= level ? 4 : 0) | (br >= level ? 2 : 0) |
                       (bl >= level ? 1 : 0);
            if (mask == 0 || mask == 15) continue;

            double x0 = static_cast<double>(c), y0 = static_cast<double>(r);
            double x1 = x0 + 1.0, y1 = y0 + 1.0;
            Point top = lerp_edge(x0, y0, tl, x1, y0, tr, level);
            Point right = lerp_edge(x1, y0, tr, x1, y1, br, level);
            Point bottom = lerp_edge(x0, y1, bl, x1, y1, br, level);
            Point left = lerp_edge(x0, y0, tl, x0, y1, bl, level);

            switch (mask) {
                case 1: case 14: emit(left, bottom); break;
                case 2: case 13: emit(bottom, right); break;
                case 3: case 12: emit(left, right); break;
                case 4: case 11: emit(top, right); break;
                case 6: case 9: emit(top, bottom); break;
                case 7: case 8: emit(left, top); break;
                case 5: case 10: {
                    // Saddle: disambiguate with the cell-center mean.
                    double center = 0.25 * (tl + tr + br + bl);
                    bool center_high = center >= level;
                    if ((mask == 5) == center_high) {
                        emit(left, top);
                        emit(bottom, right);
                    } else {
                        emit(left, bottom);
                        emit(top, right);
                    }
                    break;
                }
                default: break;
            }
        }
    }

    std::string out;
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 %zu %zu\" "
                  "width=\"512\" height=\"512\">\n",
                  width - 1, height - 1);
    out = buf;
    std::snprintf(buf, sizeof(buf),
                  "<g stroke=\"black\" stroke-width=\"%.4f\" fill=\"none\">\n",
                  static_cast<double>(width - 1) / 256.0);
    out += buf;
    out += body;
    out += "</g>\n</svg>\n";
    return out;
}

}  // namespace vos
