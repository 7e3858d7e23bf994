#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace rti {

// Interleaved RGB, row-major, top row first.
struct ImageRgb8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  ImageRgb8() = default;
  ImageRgb8(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}
  std::uint8_t& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  std::uint8_t at(int x, int y, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
};

// Same layout with linear floating-point values, nominally in [0, 1].
struct ImageRgbF {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  ImageRgbF() = default;
  ImageRgbF(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0.0f) {}
  float& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  float at(int x, int y, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
};

// Round half away from zero after clamping to [0, 1].
std::uint8_t quantize_unit(double v);
ImageRgb8 quantize(const ImageRgbF& img);
ImageRgbF to_float(const ImageRgb8& img);

using PngText = std::map<std::string, std::string>;

void write_png(const std::string& path, const ImageRgb8& img, const PngText& text = {});
ImageRgb8 read_png(const std::string& path, PngText* text = nullptr);

}  // namespace rti
