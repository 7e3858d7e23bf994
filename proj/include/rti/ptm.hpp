#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rti/geometry.hpp"
#include "rti/image.hpp"

namespace rti {

struct CaptureSet;
struct Scene;

inline constexpr int kPtmTerms = 6;   // l_u^2, l_v^2, l_u l_v, l_u, l_v, 1
inline constexpr int kPtmPlanes = 18; // terms x {R, G, B}, coefficient-major

inline int ptm_plane(int term, int channel) { return term * 3 + channel; }

std::array<double, kPtmTerms> ptm_basis(double lu, double lv);

// Unquantized coefficients, plane-major: plane p holds width*height values.
struct PtmCoefficients {
  int width = 0;
  int height = 0;
  std::vector<double> planes;

  PtmCoefficients() = default;
  PtmCoefficients(int w, int h)
      : width(w), height(h), planes(static_cast<std::size_t>(w) * h * kPtmPlanes, 0.0) {}
  std::size_t pixels() const { return static_cast<std::size_t>(width) * height; }
  double& at(int plane, std::size_t pixel) { return planes[plane * pixels() + pixel]; }
  double at(int plane, std::size_t pixel) const { return planes[plane * pixels() + pixel]; }
};

struct PtmPlane {
  std::vector<std::uint8_t> raw;
  float scale = 1.0f;
  std::int64_t bias = 0;

  double value(std::size_t pixel) const {
    return static_cast<double>(static_cast<std::int64_t>(raw[pixel]) - bias) * static_cast<double>(scale);
  }
};

// Stored form: 8-bit planes with per-plane affine dequantization
// coefficient = (raw - bias) * scale.
struct PtmImage {
  int width = 0;
  int height = 0;
  std::array<PtmPlane, kPtmPlanes> planes;
  std::string colorspace = "linear, 8-bit capture values scaled to [0, 1]";
};

// Least squares per pixel and channel. Throws IllConditioned when the design
// matrix built from `lights` is rank deficient or badly conditioned.
PtmCoefficients fit_ptm_coefficients(const std::vector<LightingVector>& lights,
                                     const std::vector<ImageRgbF>& images);
PtmCoefficients fit_ptm_coefficients(const std::vector<LightingVector>& lights,
                                     const std::vector<ImageRgb8>& images);
PtmImage fit_ptm(const CaptureSet& captures);

// Condition number of the design matrix for these lights.
double ptm_condition(const std::vector<LightingVector>& lights);

// Sum of squared residuals of a coefficient set against the inputs.
double ptm_residual(const PtmCoefficients& coeffs, const std::vector<LightingVector>& lights,
                    const std::vector<ImageRgbF>& images);

PtmImage quantize_ptm(const PtmCoefficients& coeffs);
PtmCoefficients dequantize_ptm(const PtmImage& ptm);

ImageRgbF relight_linear(const PtmCoefficients& coeffs, double lu, double lv);
ImageRgb8 relight(const PtmCoefficients& coeffs, double lu, double lv);
ImageRgb8 relight(const PtmImage& ptm, double lu, double lv);

struct NormalMap {
  int width = 0;
  int height = 0;
  std::vector<Vec3> normals;          // NaN where invalid
  std::vector<std::uint8_t> valid;    // 1 valid, 0 invalid

  std::size_t valid_count() const;
};

inline constexpr double kDeterminantEpsilon = 1e-9;

// Direction of maximum luminance of the fitted polynomial per pixel.
NormalMap normal_map(const PtmCoefficients& coeffs);
NormalMap normal_map(const PtmImage& ptm);

// Analytic normals of a synthetic scene, all valid.
NormalMap scene_normals(const Scene& scene);

struct NormalComparison {
  double delta = 0.0;      // mean angle over mutually valid pixels
  double max_angle = 0.0;
  std::size_t compared = 0;
  int width = 0;
  int height = 0;
  std::vector<double> angles;  // NaN where either map is invalid
};

NormalComparison compare_normals(const NormalMap& a, const NormalMap& b);

// Colour-coded angle map; `scale_max` <= 0 picks the largest angle.
ImageRgb8 heatmap(const NormalComparison& cmp, double scale_max, PngText* legend);

// Container I/O.
std::vector<std::uint8_t> encode_rtiptm(const PtmImage& ptm);
PtmImage decode_rtiptm(const std::vector<std::uint8_t>& bytes);
void write_rtiptm(const std::string& path, const PtmImage& ptm);
PtmImage read_rtiptm(const std::string& path);

// PNG with RGB = (n + 1) / 2, invalid pixels black; float sidecar keeps the
// exact normals and validity.
ImageRgb8 normal_map_image(const NormalMap& map);
void write_normal_map(const std::string& png_path, const std::string& sidecar_path,
                      const NormalMap& map);
NormalMap read_normal_sidecar(const std::string& path);
NormalMap read_normal_png(const std::string& path);

}  // namespace rti
