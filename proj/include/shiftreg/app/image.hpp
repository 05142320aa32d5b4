#pragma once

// Synthetic fluorescence frames. Site histograms (dynamics::OccupancyGrid) are
// written in a small text format, rendered onto a pixel grid with
// `pixels_per_site` pixels per trap separation, blurred by a Gaussian
// point-spread function and exported as plain PGM.
//
// Occupancy grid file:
//   # shiftreg-occupancy 1
//   # rows <n> cols <n> origin_x <m> origin_y <m> pitch <m>
//   <counts of row 0, tab separated>
//   ...

#include "shiftreg/app/config.hpp"
#include "shiftreg/dynamics/scenarios.hpp"
#include "shiftreg/error.hpp"
#include "shiftreg/io/format.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace shiftreg::app {

inline void write_occupancy(std::ostream& os, const dynamics::OccupancyGrid& g)
{
    os << "# shiftreg-occupancy 1\n# rows " << g.rows << " cols " << g.cols << " origin_x " << io::exact(g.origin_x)
       << " origin_y " << io::exact(g.origin_y) << " pitch " << io::exact(g.pitch) << "\n";
    for (int r = 0; r < g.rows; ++r) {
        for (int c = 0; c < g.cols; ++c)
            os << (c ? "\t" : "") << g.at(r, c);
        os << "\n";
    }
}

inline dynamics::OccupancyGrid read_occupancy(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line != "# shiftreg-occupancy 1")
        throw ConfigError("not an occupancy grid (bad magic line)", 1);
    dynamics::OccupancyGrid g;
    if (!std::getline(is, line))
        throw ConfigError("occupancy grid: missing geometry line", 2);
    {
        std::istringstream hs(line);
        std::string hash, k1, k2, k3, k4, k5;
        if (!(hs >> hash >> k1 >> g.rows >> k2 >> g.cols >> k3 >> g.origin_x >> k4 >> g.origin_y >> k5 >> g.pitch) ||
            k1 != "rows" || k2 != "cols" || k3 != "origin_x" || k4 != "origin_y" || k5 != "pitch" || g.rows < 0 ||
            g.cols < 0)
            throw ConfigError("occupancy grid: malformed geometry line", 2);
    }
    g.counts.reserve(static_cast<std::size_t>(g.rows) * g.cols);
    for (int r = 0; r < g.rows; ++r) {
        if (!std::getline(is, line))
            throw ConfigError("occupancy grid: expected " + std::to_string(g.rows) + " rows", r + 3);
        std::istringstream ls(line);
        int v = 0, n = 0;
        while (ls >> v) {
            if (v < 0)
                throw ConfigError("occupancy grid: negative count", r + 3);
            g.counts.push_back(v);
            ++n;
        }
        if (n != g.cols)
            throw ConfigError("occupancy grid: row has " + std::to_string(n) + " entries, expected " +
                                  std::to_string(g.cols),
                              r + 3);
    }
    return g;
}

struct OccupancyImage {
    int width = 0;
    int height = 0;
    double pixel_pitch = 0.0; // m
    double origin_x = 0.0;    // cell-plane centre of pixel (0, 0)
    double origin_y = 0.0;
    std::vector<double> pixels; // row-major, atoms per pixel

    double at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
    double total() const
    {
        double s = 0.0;
        for (double p : pixels)
            s += p;
        return s;
    }
    double peak() const { return pixels.empty() ? 0.0 : *std::max_element(pixels.begin(), pixels.end()); }

    // Intensity-weighted centre; (0, 0) for an empty frame.
    std::pair<double, double> centroid() const
    {
        double s = 0.0, sx = 0.0, sy = 0.0;
        for (int r = 0; r < height; ++r)
            for (int c = 0; c < width; ++c) {
                const double v = at(r, c);
                s += v;
                sx += v * (origin_x + c * pixel_pitch);
                sy += v * (origin_y + r * pixel_pitch);
            }
        if (!(s > 0.0))
            return {0.0, 0.0};
        return {sx / s, sy / s};
    }
};

namespace detail {

// Normalised over the full kernel; atoms whose blur spills past the frame
// edge are lost from the image, so the total can only go down.
inline std::vector<double> gaussian_kernel(double sigma_px)
{
    if (!(sigma_px > 0.0))
        return {1.0};
    const int radius = static_cast<int>(std::ceil(4.0 * sigma_px));
    std::vector<double> k(2 * radius + 1);
    double s = 0.0;
    for (int i = -radius; i <= radius; ++i)
        s += k[i + radius] = std::exp(-0.5 * i * i / (sigma_px * sigma_px));
    for (auto& v : k)
        v /= s;
    return k;
}

inline void blur(OccupancyImage& img, double sigma_px)
{
    const auto k = gaussian_kernel(sigma_px);
    if (k.size() == 1)
        return;
    const int radius = static_cast<int>(k.size() / 2);
    std::vector<double> tmp(img.pixels.size(), 0.0);
    for (int r = 0; r < img.height; ++r)
        for (int c = 0; c < img.width; ++c) {
            double s = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                const int cc = c + i;
                if (cc >= 0 && cc < img.width)
                    s += k[i + radius] * img.at(r, cc);
            }
            tmp[static_cast<std::size_t>(r) * img.width + c] = s;
        }
    for (int r = 0; r < img.height; ++r)
        for (int c = 0; c < img.width; ++c) {
            double s = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                const int rr = r + i;
                if (rr >= 0 && rr < img.height)
                    s += k[i + radius] * tmp[static_cast<std::size_t>(rr) * img.width + c];
            }
            img.pixels[static_cast<std::size_t>(r) * img.width + c] = s;
        }
}

} // namespace detail

// Each site's count lands on the pixel that contains the site centre (with an
// odd pixels_per_site that pixel is centred on it). The window is centred on
// the middle site of the grid.
inline OccupancyImage render_occupancy(const dynamics::OccupancyGrid& g, const ImageSpec& spec)
{
    const int pps = std::max(1, spec.pixels_per_site);
    int r0 = 0, c0 = 0, nr = g.rows, nc = g.cols;
    if (spec.window > 0) {
        nr = std::min(spec.window, g.rows);
        nc = std::min(spec.window, g.cols);
        r0 = g.rows / 2 - nr / 2;
        c0 = g.cols / 2 - nc / 2;
    }
    OccupancyImage img;
    img.width = nc * pps;
    img.height = nr * pps;
    img.pixel_pitch = g.pitch / pps;
    const double lead = (pps / 2) * img.pixel_pitch; // pixel 0 centre sits this far before the site centre
    img.origin_x = g.origin_x + c0 * g.pitch - lead;
    img.origin_y = g.origin_y + r0 * g.pitch - lead;
    img.pixels.assign(static_cast<std::size_t>(img.width) * img.height, 0.0);
    for (int r = 0; r < nr; ++r)
        for (int c = 0; c < nc; ++c)
            img.pixels[static_cast<std::size_t>(r * pps + pps / 2) * img.width + c * pps + pps / 2] =
                g.at(r0 + r, c0 + c);
    if (img.pixel_pitch > 0.0)
        detail::blur(img, spec.blur / img.pixel_pitch);
    return img;
}

inline std::vector<OccupancyImage> render_register_images(const dynamics::RegisterResult& result, const ImageSpec& spec)
{
    std::vector<OccupancyImage> out;
    for (const auto& f : result.frames)
        out.push_back(render_occupancy(f, spec));
    return out;
}

// Plain (ASCII) PGM, scaled so that `full_scale` maps to 255. A shared scale
// keeps a frame sequence comparable.
inline void write_pgm(std::ostream& os, const OccupancyImage& img, double full_scale)
{
    os << "P2\n" << img.width << ' ' << img.height << "\n255\n";
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            long v = 0;
            if (full_scale > 0.0)
                v = std::lround(255.0 * std::clamp(img.at(r, c) / full_scale, 0.0, 1.0));
            os << (c ? " " : "") << v;
        }
        os << "\n";
    }
}

// Pixel values in full precision next to the PGM.
inline void write_image_grid(std::ostream& os, const OccupancyImage& img)
{
    os << "# shiftreg-image 1\n# width " << img.width << " height " << img.height << " pixel_pitch "
       << io::exact(img.pixel_pitch) << " origin_x " << io::exact(img.origin_x) << " origin_y "
       << io::exact(img.origin_y) << "\n";
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c)
            os << (c ? "\t" : "") << io::sig(img.at(r, c), 9);
        os << "\n";
    }
}

} // namespace shiftreg::app
