#include "dds/bev.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <png.h>

#include "dds/errors.hpp"

namespace dds {

namespace {

constexpr std::array<std::uint8_t, 3> kBackground = {24, 24, 24};

constexpr std::array<std::array<std::uint8_t, 3>, 20> kPalette = {{
    {31, 119, 180},  {255, 127, 14},  {44, 160, 44},   {214, 39, 40},   {148, 103, 189},
    {140, 86, 75},   {227, 119, 194}, {127, 127, 127}, {188, 189, 34},  {23, 190, 207},
    {174, 199, 232}, {255, 187, 120}, {152, 223, 138}, {255, 152, 150}, {197, 176, 213},
    {196, 156, 148}, {247, 182, 210}, {199, 199, 199}, {219, 219, 141}, {158, 218, 229},
}};

}  // namespace

std::array<std::uint8_t, 3> bev_palette(int label) {
  if (label < 0) return kBackground;
  return kPalette[static_cast<std::size_t>(label) % kPalette.size()];
}

std::vector<std::uint8_t> render_bev(const PointCloud& cloud, const std::vector<int>& labels,
                                     const BevConfig& cfg) {
  if (labels.size() != static_cast<std::size_t>(cloud.size()))
    throw LengthMismatch("label array does not match point count");
  if (cfg.image_size <= 2 * cfg.margin) throw Error("bev image size too small for margin");

  const int size = cfg.image_size;
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(size) * size * 3);
  for (std::size_t p = 0; p < rgb.size(); p += 3) {
    rgb[p] = kBackground[0];
    rgb[p + 1] = kBackground[1];
    rgb[p + 2] = kBackground[2];
  }

  const double min_x = cloud.positions.col(0).minCoeff();
  const double max_x = cloud.positions.col(0).maxCoeff();
  const double min_y = cloud.positions.col(1).minCoeff();
  const double max_y = cloud.positions.col(1).maxCoeff();
  const double extent = std::max({max_x - min_x, max_y - min_y, 1e-9});
  const double scale = static_cast<double>(size - 2 * cfg.margin) / extent;

  // Paint in ascending height so the highest point at a pixel wins.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(cloud.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return cloud.positions(a, 2) < cloud.positions(b, 2);
  });

  for (Eigen::Index i : order) {
    const int u = cfg.margin +
                  static_cast<int>(std::floor((cloud.positions(i, 0) - min_x) * scale));
    const int v = size - 1 - cfg.margin -
                  static_cast<int>(std::floor((cloud.positions(i, 1) - min_y) * scale));
    if (u < 0 || u >= size || v < 0 || v >= size) continue;
    const auto color = bev_palette(labels[static_cast<std::size_t>(i)]);
    const std::size_t p = (static_cast<std::size_t>(v) * size + u) * 3;
    rgb[p] = color[0];
    rgb[p + 1] = color[1];
    rgb[p + 2] = color[2];
  }
  return rgb;
}

void export_bev(const std::string& path, const PointCloud& cloud, const std::vector<int>& labels,
                const BevConfig& cfg) {
  write_png(path, cfg.image_size, cfg.image_size, render_bev(cloud, labels, cfg));
}

void write_png(const std::string& path, int width, int height,
               const std::vector<std::uint8_t>& rgb) {
  if (rgb.size() != static_cast<std::size_t>(width) * height * 3)
    throw Error("rgb buffer size does not match image dimensions");

  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw IoError("cannot open for writing: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw IoError("libpng write failed: " + path);
  }

  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int v = 0; v < height; ++v)
    png_write_row(png, const_cast<png_bytep>(rgb.data() + static_cast<std::size_t>(v) * width * 3));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

}  // namespace dds
