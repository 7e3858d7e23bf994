#include "rti/ptm.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <json.hpp>
#include <sstream>

#include "rti/capture.hpp"
#include "rti/common.hpp"

namespace rti {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "sidecar I/O assumes a little-endian host");

namespace {

constexpr double kMaxCondition = 1e7;
constexpr const char* kPtmMagic = "RTIPTM1\n";
constexpr const char* kNormalMagic = "RTINRM1\n";
constexpr std::array<const char*, 3> kChannels{"red", "green", "blue"};
constexpr std::array<const char*, kPtmTerms> kTerms{"lu^2", "lv^2", "lu*lv", "lu", "lv", "1"};

Eigen::MatrixXd design_matrix(const std::vector<LightingVector>& lights) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(lights.size()), kPtmTerms);
  for (std::size_t k = 0; k < lights.size(); ++k) {
    const auto b = ptm_basis(lights[k].u, lights[k].v);
    for (int i = 0; i < kPtmTerms; ++i) a(static_cast<Eigen::Index>(k), i) = b[i];
  }
  return a;
}

// Pseudo-inverse (6 x M) of the design matrix, after the conditioning check.
Eigen::MatrixXd design_pseudo_inverse(const std::vector<LightingVector>& lights) {
  if (lights.size() < static_cast<std::size_t>(kPtmTerms))
    fail(ErrorCode::IllConditioned, "PTM fit needs at least 6 lighting directions, got " +
                                        std::to_string(lights.size()));
  for (const auto& l : lights)
    if (!std::isfinite(l.u) || !std::isfinite(l.v))
      fail(ErrorCode::InvalidArgument, "lighting vector is not finite");
  const Eigen::MatrixXd a = design_matrix(lights);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double cond = s(kPtmTerms - 1) > 0.0 ? s(0) / s(kPtmTerms - 1) : std::numeric_limits<double>::infinity();
  if (!(cond < kMaxCondition)) {
    std::ostringstream msg;
    msg << "lighting design matrix is ill-conditioned (condition number " << cond
        << "): the " << lights.size()
        << " lighting vectors do not determine a biquadratic, e.g. they repeat, lie on one line"
           " or on one conic";
    fail(ErrorCode::IllConditioned, msg.str());
  }
  Eigen::VectorXd inv = s.cwiseInverse();
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

template <typename Img>
PtmCoefficients fit_impl(const std::vector<LightingVector>& lights, const std::vector<Img>& images,
                         double to_unit) {
  require(lights.size() == images.size(), "one lighting vector per image is required");
  require(!images.empty(), "no images to fit");
  const int w = images.front().width, h = images.front().height;
  for (const auto& img : images)
    require(img.width == w && img.height == h, "all images must share the same dimensions");
  const Eigen::MatrixXd pinv = design_pseudo_inverse(lights);
  const std::size_t m = images.size();

  PtmCoefficients out(w, h);
  parallel_for(static_cast<std::size_t>(h), [&](std::size_t row) {
    std::vector<double> samples(m);
    for (int x = 0; x < w; ++x) {
      const std::size_t px = row * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
      for (int c = 0; c < 3; ++c) {
        for (std::size_t k = 0; k < m; ++k) samples[k] = images[k].data[px * 3 + c] * to_unit;
        for (int i = 0; i < kPtmTerms; ++i) {
          double acc = 0.0;
          for (std::size_t k = 0; k < m; ++k) acc += pinv(i, static_cast<Eigen::Index>(k)) * samples[k];
          out.at(ptm_plane(i, c), px) = acc;
        }
      }
    }
  });
  return out;
}

double luminance(const PtmCoefficients& c, int term, std::size_t px) {
  return 0.299 * c.at(ptm_plane(term, 0), px) + 0.587 * c.at(ptm_plane(term, 1), px) +
         0.114 * c.at(ptm_plane(term, 2), px);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::Io, "failed writing " + path);
}

// Splits "<magic><json>\n<payload>" and returns the parsed header and the
// payload offset.
json parse_framed(const std::vector<std::uint8_t>& bytes, const char* magic, const char* what,
                  std::size_t& payload) {
  const std::size_t mlen = std::strlen(magic);
  if (bytes.size() < mlen || std::memcmp(bytes.data(), magic, mlen) != 0)
    fail(ErrorCode::Parse, std::string("bad magic: not a ") + what + " file");
  const auto nl = std::find(bytes.begin() + static_cast<std::ptrdiff_t>(mlen), bytes.end(), '\n');
  if (nl == bytes.end()) fail(ErrorCode::Parse, std::string(what) + " header is truncated");
  json header;
  try {
    header = json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(mlen), nl);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string(what) + " header is not valid JSON: " + e.what());
  }
  payload = static_cast<std::size_t>(nl - bytes.begin()) + 1;
  return header;
}

}  // namespace

std::array<double, kPtmTerms> ptm_basis(double lu, double lv) {
  return {lu * lu, lv * lv, lu * lv, lu, lv, 1.0};
}

double ptm_condition(const std::vector<LightingVector>& lights) {
  if (lights.size() < static_cast<std::size_t>(kPtmTerms)) return std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design_matrix(lights));
  const auto& s = svd.singularValues();
  return s(kPtmTerms - 1) > 0.0 ? s(0) / s(kPtmTerms - 1) : std::numeric_limits<double>::infinity();
}

PtmCoefficients fit_ptm_coefficients(const std::vector<LightingVector>& lights,
                                     const std::vector<ImageRgbF>& images) {
  return fit_impl(lights, images, 1.0);
}

PtmCoefficients fit_ptm_coefficients(const std::vector<LightingVector>& lights,
                                     const std::vector<ImageRgb8>& images) {
  return fit_impl(lights, images, 1.0 / 255.0);
}

PtmImage fit_ptm(const CaptureSet& captures) {
  if (captures.few_captures || captures.captures.size() < kMinCaptures)
    fail(ErrorCode::IllConditioned, "capture set has " + std::to_string(captures.captures.size()) +
                                        " images; a PTM fit needs at least 6");
  std::vector<ImageRgb8> images;
  images.reserve(captures.captures.size());
  for (const auto& c : captures.captures) images.push_back(c.image);
  return quantize_ptm(fit_ptm_coefficients(captures.recorded_lights(), images));
}

double ptm_residual(const PtmCoefficients& coeffs, const std::vector<LightingVector>& lights,
                    const std::vector<ImageRgbF>& images) {
  require(lights.size() == images.size(), "one lighting vector per image is required");
  double sum = 0.0;
  for (std::size_t k = 0; k < images.size(); ++k) {
    require(images[k].width == coeffs.width && images[k].height == coeffs.height,
            "image size does not match the PTM");
    const auto b = ptm_basis(lights[k].u, lights[k].v);
    for (std::size_t px = 0; px < coeffs.pixels(); ++px)
      for (int c = 0; c < 3; ++c) {
        double v = 0.0;
        for (int i = 0; i < kPtmTerms; ++i) v += b[i] * coeffs.at(ptm_plane(i, c), px);
        const double r = v - images[k].data[px * 3 + c];
        sum += r * r;
      }
  }
  return sum;
}

PtmImage quantize_ptm(const PtmCoefficients& coeffs) {
  PtmImage out;
  out.width = coeffs.width;
  out.height = coeffs.height;
  const std::size_t n = coeffs.pixels();
  for (int p = 0; p < kPtmPlanes; ++p) {
    const auto first = coeffs.planes.begin() + static_cast<std::ptrdiff_t>(p * n);
    const auto [lo_it, hi_it] = std::minmax_element(first, first + static_cast<std::ptrdiff_t>(n));
    const double lo = *lo_it, hi = *hi_it;
    if (!std::isfinite(lo) || !std::isfinite(hi)) fail(ErrorCode::InvalidArgument, "PTM coefficient is not finite");
    PtmPlane& plane = out.planes[p];
    plane.raw.assign(n, 0);
    const double magnitude = std::max(std::abs(lo), std::abs(hi));
    if (magnitude == 0.0) {
      plane.scale = 1.0f;
      plane.bias = 0;
      continue;
    }
    // A range this small relative to the values is stored as a constant.
    const bool constant = hi - lo <= 1e-9 * magnitude;
    plane.scale = static_cast<float>(constant ? magnitude / 100.0 : (hi - lo) / 254.0);
    const double scale = plane.scale;
    plane.bias = -static_cast<std::int64_t>(std::llround(lo / scale));
    for (std::size_t i = 0; i < n; ++i) {
      const auto raw = std::llround(coeffs.planes[p * n + i] / scale) + plane.bias;
      plane.raw[i] = static_cast<std::uint8_t>(std::clamp<long long>(raw, 0, 255));
    }
  }
  return out;
}

PtmCoefficients dequantize_ptm(const PtmImage& ptm) {
  PtmCoefficients out(ptm.width, ptm.height);
  const std::size_t n = out.pixels();
  for (int p = 0; p < kPtmPlanes; ++p) {
    require(ptm.planes[p].raw.size() == n, "PTM plane size does not match its dimensions");
    for (std::size_t i = 0; i < n; ++i) out.planes[p * n + i] = ptm.planes[p].value(i);
  }
  return out;
}

ImageRgbF relight_linear(const PtmCoefficients& coeffs, double lu, double lv) {
  if (!(std::isfinite(lu) && std::isfinite(lv)) || lu * lu + lv * lv > 1.0 + 1e-12)
    fail(ErrorCode::InvalidArgument, "lighting vector lies outside the unit disc");
  const auto b = ptm_basis(lu, lv);
  ImageRgbF img(coeffs.width, coeffs.height);
  for (std::size_t px = 0; px < coeffs.pixels(); ++px)
    for (int c = 0; c < 3; ++c) {
      double v = 0.0;
      for (int i = 0; i < kPtmTerms; ++i) v += b[i] * coeffs.at(ptm_plane(i, c), px);
      img.data[px * 3 + c] = static_cast<float>(v);
    }
  return img;
}

ImageRgb8 relight(const PtmCoefficients& coeffs, double lu, double lv) {
  if (!(std::isfinite(lu) && std::isfinite(lv)) || lu * lu + lv * lv > 1.0 + 1e-12)
    fail(ErrorCode::InvalidArgument, "lighting vector lies outside the unit disc");
  const auto b = ptm_basis(lu, lv);
  ImageRgb8 img(coeffs.width, coeffs.height);
  for (std::size_t px = 0; px < coeffs.pixels(); ++px)
    for (int c = 0; c < 3; ++c) {
      double v = 0.0;
      for (int i = 0; i < kPtmTerms; ++i) v += b[i] * coeffs.at(ptm_plane(i, c), px);
      img.data[px * 3 + c] = quantize_unit(v);
    }
  return img;
}

ImageRgb8 relight(const PtmImage& ptm, double lu, double lv) {
  return relight(dequantize_ptm(ptm), lu, lv);
}

std::size_t NormalMap::valid_count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), 1));
}

NormalMap normal_map(const PtmCoefficients& coeffs) {
  NormalMap map;
  map.width = coeffs.width;
  map.height = coeffs.height;
  const std::size_t n = coeffs.pixels();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  map.normals.assign(n, Vec3{nan, nan, nan});
  map.valid.assign(n, 0);
  for (std::size_t px = 0; px < n; ++px) {
    const double a1 = luminance(coeffs, 0, px), a2 = luminance(coeffs, 1, px);
    const double a3 = luminance(coeffs, 2, px), a4 = luminance(coeffs, 3, px);
    const double a5 = luminance(coeffs, 4, px);
    const double d = 4.0 * a1 * a2 - a3 * a3;
    // A maximum needs a negative-definite Hessian: a1 < 0 and D > 0.
    if (std::abs(d) < kDeterminantEpsilon || a1 >= 0.0 || d < 0.0) continue;
    const double lu = (a3 * a5 - 2.0 * a2 * a4) / d;
    const double lv = (a3 * a4 - 2.0 * a1 * a5) / d;
    const double r2 = lu * lu + lv * lv;
    if (!(r2 <= 1.0)) continue;
    map.normals[px] = Vec3{lu, lv, std::sqrt(1.0 - r2)}.normalized();
    map.valid[px] = 1;
  }
  return map;
}

NormalMap normal_map(const PtmImage& ptm) { return normal_map(dequantize_ptm(ptm)); }

NormalMap scene_normals(const Scene& scene) {
  NormalMap map;
  map.width = scene.width();
  map.height = scene.height_px();
  map.normals = scene.normal;
  map.valid.assign(scene.normal.size(), 1);
  return map;
}

NormalComparison compare_normals(const NormalMap& a, const NormalMap& b) {
  require(a.width == b.width && a.height == b.height, "normal maps differ in size");
  NormalComparison out;
  out.width = a.width;
  out.height = a.height;
  out.angles.assign(a.normals.size(), std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.normals.size(); ++i) {
    if (!a.valid[i] || !b.valid[i]) continue;
    const Vec3& na = a.normals[i];
    const Vec3& nb = b.normals[i];
    // Same angle as arccos of the clamped dot product, accurate near zero.
    const double angle = std::atan2(na.cross(nb).norm(), na.dot(nb));
    out.angles[i] = angle;
    sum += angle;
    out.max_angle = std::max(out.max_angle, angle);
    ++out.compared;
  }
  if (out.compared == 0) fail(ErrorCode::UndefinedMean, "normal maps share no valid pixel");
  out.delta = sum / static_cast<double>(out.compared);
  return out;
}

ImageRgb8 heatmap(const NormalComparison& cmp, double scale_max, PngText* legend) {
  const double top = scale_max > 0.0 ? scale_max : std::max(cmp.max_angle, 1e-12);
  ImageRgb8 img(cmp.width, cmp.height);
  for (std::size_t i = 0; i < cmp.angles.size(); ++i) {
    std::array<std::uint8_t, 3> rgb{64, 64, 128};
    if (!std::isnan(cmp.angles[i])) {
      // black -> red -> yellow -> white
      const double t = std::clamp(cmp.angles[i] / top, 0.0, 1.0) * 3.0;
      rgb = {quantize_unit(t), quantize_unit(t - 1.0), quantize_unit(t - 2.0)};
    }
    for (int c = 0; c < 3; ++c) img.data[i * 3 + c] = rgb[c];
  }
  if (legend) {
    (*legend)["Comment"] = "per-pixel angle between normal maps";
    (*legend)["rti:scale_min_rad"] = "0";
    (*legend)["rti:scale_max_rad"] = std::to_string(top);
    (*legend)["rti:colormap"] = "black-red-yellow-white, linear in angle";
    (*legend)["rti:invalid_rgb"] = "64,64,128";
    (*legend)["rti:mean_angle_rad"] = std::to_string(cmp.delta);
  }
  return img;
}

std::vector<std::uint8_t> encode_rtiptm(const PtmImage& ptm) {
  require(ptm.width > 0 && ptm.height > 0, "PTM has no pixels");
  const std::size_t n = static_cast<std::size_t>(ptm.width) * ptm.height;
  json header;
  header["width"] = ptm.width;
  header["height"] = ptm.height;
  header["channels"] = kChannels;
  header["terms"] = kTerms;
  header["plane_order"] = "term-major: (term 1: R,G,B), (term 2: R,G,B), ...";
  header["colorspace"] = ptm.colorspace;
  json scale = json::array(), bias = json::array();
  for (const auto& p : ptm.planes) {
    require(p.raw.size() == n, "PTM plane size does not match its dimensions");
    scale.push_back(p.scale);
    bias.push_back(p.bias);
  }
  header["scale"] = scale;
  header["bias"] = bias;

  const std::string head = std::string(kPtmMagic) + header.dump() + "\n";
  std::vector<std::uint8_t> out(head.begin(), head.end());
  out.reserve(out.size() + n * kPtmPlanes);
  for (const auto& p : ptm.planes) out.insert(out.end(), p.raw.begin(), p.raw.end());
  return out;
}

PtmImage decode_rtiptm(const std::vector<std::uint8_t>& bytes) {
  std::size_t offset = 0;
  const json header = parse_framed(bytes, kPtmMagic, ".rtiptm", offset);
  PtmImage ptm;
  try {
    ptm.width = header.at("width").get<int>();
    ptm.height = header.at("height").get<int>();
    if (header.contains("colorspace")) ptm.colorspace = header.at("colorspace").get<std::string>();
    const auto& scale = header.at("scale");
    const auto& bias = header.at("bias");
    if (!scale.is_array() || !bias.is_array() || scale.size() != kPtmPlanes || bias.size() != kPtmPlanes)
      fail(ErrorCode::Parse, ".rtiptm header needs 18 scale and 18 bias entries");
    for (int p = 0; p < kPtmPlanes; ++p) {
      ptm.planes[p].scale = scale[p].get<float>();
      ptm.planes[p].bias = bias[p].get<std::int64_t>();
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string(".rtiptm header field error: ") + e.what());
  }
  if (ptm.width <= 0 || ptm.height <= 0) fail(ErrorCode::Parse, ".rtiptm header has invalid dimensions");
  const std::size_t n = static_cast<std::size_t>(ptm.width) * ptm.height;
  if (bytes.size() - offset != n * kPtmPlanes)
    fail(ErrorCode::Parse, ".rtiptm plane data is " + std::to_string(bytes.size() - offset) +
                               " bytes, expected " + std::to_string(n * kPtmPlanes));
  for (int p = 0; p < kPtmPlanes; ++p) {
    const auto first = bytes.begin() + static_cast<std::ptrdiff_t>(offset + p * n);
    ptm.planes[p].raw.assign(first, first + static_cast<std::ptrdiff_t>(n));
  }
  return ptm;
}

void write_rtiptm(const std::string& path, const PtmImage& ptm) { write_file(path, encode_rtiptm(ptm)); }

PtmImage read_rtiptm(const std::string& path) { return decode_rtiptm(read_file(path)); }

ImageRgb8 normal_map_image(const NormalMap& map) {
  ImageRgb8 img(map.width, map.height);
  for (std::size_t i = 0; i < map.normals.size(); ++i) {
    if (!map.valid[i]) continue;
    const Vec3& n = map.normals[i];
    img.data[i * 3 + 0] = quantize_unit((n.x + 1.0) / 2.0);
    img.data[i * 3 + 1] = quantize_unit((n.y + 1.0) / 2.0);
    img.data[i * 3 + 2] = quantize_unit((n.z + 1.0) / 2.0);
  }
  return img;
}

void write_normal_map(const std::string& png_path, const std::string& sidecar_path,
                      const NormalMap& map) {
  PngText text;
  text["rti:encoding"] = "rgb = (n + 1) / 2, invalid pixels black";
  text["rti:valid_pixels"] = std::to_string(map.valid_count());
  write_png(png_path, normal_map_image(map), text);

  if (sidecar_path.empty()) return;
  json header{{"width", map.width},
              {"height", map.height},
              {"layout", "float32 little-endian x,y,z per pixel row-major, then uint8 validity per pixel"}};
  const std::string head = std::string(kNormalMagic) + header.dump() + "\n";
  std::vector<std::uint8_t> out(head.begin(), head.end());
  for (const auto& n : map.normals) {
    const float xyz[3] = {static_cast<float>(n.x), static_cast<float>(n.y), static_cast<float>(n.z)};
    const auto* b = reinterpret_cast<const std::uint8_t*>(xyz);
    out.insert(out.end(), b, b + sizeof xyz);
  }
  out.insert(out.end(), map.valid.begin(), map.valid.end());
  write_file(sidecar_path, out);
}

NormalMap read_normal_sidecar(const std::string& path) {
  const auto bytes = read_file(path);
  std::size_t offset = 0;
  const json header = parse_framed(bytes, kNormalMagic, "normal sidecar", offset);
  NormalMap map;
  try {
    map.width = header.at("width").get<int>();
    map.height = header.at("height").get<int>();
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, std::string("normal sidecar header field error: ") + e.what());
  }
  if (map.width <= 0 || map.height <= 0) fail(ErrorCode::Parse, "normal sidecar has invalid dimensions");
  const std::size_t n = static_cast<std::size_t>(map.width) * map.height;
  if (bytes.size() - offset != n * 13) fail(ErrorCode::Parse, "normal sidecar payload is truncated");
  map.normals.resize(n);
  map.valid.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset + n * 12), bytes.end());
  for (std::size_t i = 0; i < n; ++i) {
    float xyz[3];
    std::memcpy(xyz, bytes.data() + offset + i * 12, sizeof xyz);
    map.normals[i] = {xyz[0], xyz[1], xyz[2]};
  }
  return map;
}

NormalMap read_normal_png(const std::string& path) {
  const ImageRgb8 img = read_png(path);
  NormalMap map;
  map.width = img.width;
  map.height = img.height;
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  map.normals.assign(n, Vec3{nan, nan, nan});
  map.valid.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* p = &img.data[i * 3];
    if (p[0] == 0 && p[1] == 0 && p[2] == 0) continue;
    const Vec3 raw{p[0] / 127.5 - 1.0, p[1] / 127.5 - 1.0, p[2] / 127.5 - 1.0};
    if (raw.norm() < 1e-6) continue;
    map.normals[i] = raw.normalized();
    map.valid[i] = 1;
  }
  return map;
}

}  // namespace rti
