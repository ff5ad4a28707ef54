#ifndef DDS_BEV_HPP
#define DDS_BEV_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dds/geometry.hpp"

namespace dds {

struct BevConfig {
  int image_size = 512;  // square output
  int margin = 8;        // pixels kept clear around the footprint
};

/// Fixed 20-entry class palette; labels index it modulo its size. Label -1
/// renders as the dark background.
std::array<std::uint8_t, 3> bev_palette(int label);

/// Orthographic top-down rasterization: +x right, +y up, one pixel per
/// point, highest point wins a contested pixel. Returns 8-bit RGB rows
/// top to bottom.
std::vector<std::uint8_t> render_bev(const PointCloud& cloud, const std::vector<int>& labels,
                                     const BevConfig& cfg = {});

/// Renders and writes a PNG.
void export_bev(const std::string& path, const PointCloud& cloud, const std::vector<int>& labels,
                const BevConfig& cfg = {});

/// 8-bit RGB PNG writer (row-major, top to bottom).
void write_png(const std::string& path, int width, int height,
               const std::vector<std::uint8_t>& rgb);

}  // namespace dds

#endif
