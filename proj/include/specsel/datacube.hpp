#pragma once

// Dataset ingestion, RGB-to-hyperspectral synthesis, min-max scaling, pixel
// sampling, and the binary cube cache.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "specsel/common.hpp"
#include "specsel/numeric.hpp"
#include "specsel/png_io.hpp"

namespace specsel {

// ---------------------------------------------------------------------------
// Domain types

struct WavelengthGrid {
  std::vector<double> points;                       // nm, strictly increasing
  std::array<double, 3> anchors{450.0, 550.0, 650.0};  // B, G, R anchor nm

  static WavelengthGrid linear(std::size_t count, double start, double stop,
                               std::array<double, 3> anchors = {450.0, 550.0, 650.0}) {
    if (count < 2) throw Error(ErrorKind::config, "wavelength grid needs at least 2 points");
    WavelengthGrid g;
    g.anchors = anchors;
    g.points.resize(count);
    double step = (stop - start) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i)
      g.points[i] = start + static_cast<double>(i) * step;
    g.validate();
    return g;
  }

  // 300 channels spanning UV through NIR.
  static WavelengthGrid standard() { return linear(300, 300.0, 1100.0); }

  std::size_t size() const { return points.size(); }

  void validate() const {
    if (points.empty()) throw Error(ErrorKind::config, "wavelength grid is empty");
    for (std::size_t i = 1; i < points.size(); ++i)
      if (points[i] <= points[i - 1])
        throw Error(ErrorKind::config, "wavelength grid must be strictly increasing");
    if (!(anchors[0] < anchors[1] && anchors[1] < anchors[2]))
      throw Error(ErrorKind::config, "anchor wavelengths must be strictly increasing");
    if (anchors[0] < points.front() || anchors[2] > points.back())
      throw Error(ErrorKind::config, "anchor wavelengths must lie within the grid span");
  }
};

struct SpectralCube {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> values;  // index: c*height*width + y*width + x

  SpectralCube() = default;
  SpectralCube(std::size_t c, std::size_t h, std::size_t w)
      : channels(c), height(h), width(w), values(c * h * w, 0.0f) {}

  std::size_t plane_size() const { return height * width; }

  float at(std::size_t c, std::size_t y, std::size_t x) const {
    return values[c * plane_size() + y * width + x];
  }
  float& at(std::size_t c, std::size_t y, std::size_t x) {
    return values[c * plane_size() + y * width + x];
  }

  const float* plane(std::size_t c) const { return values.data() + c * plane_size(); }
  float* plane(std::size_t c) { return values.data() + c * plane_size(); }
};

struct LabeledImage {
  RgbImage image;
  int label = 0;                    // image-level: 1 = anomalous
  std::vector<std::uint8_t> mask;   // per-pixel {0,1}; empty when absent
  std::string name;                 // class-relative path
  std::string defect_type;
};

struct LabeledDataset {
  std::string split;  // "train" or "test"
  std::vector<LabeledImage> items;
};

struct CubeItem {
  SpectralCube cube;
  int label = 0;
  std::vector<std::uint8_t> mask;  // empty or height*width entries in {0,1}
  std::string name;
};

using CubeDataset = std::vector<CubeItem>;

// ---------------------------------------------------------------------------
// MVTec-AD-style directory loader

namespace detail {

inline std::vector<std::filesystem::path> sorted_entries(const std::filesystem::path& dir,
                                                         bool dirs_only) {
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (dirs_only != entry.is_directory()) continue;
    if (!dirs_only && entry.path().extension() != ".png") continue;
    out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
  return out;
}

inline std::vector<std::uint8_t> binarize_mask(const GrayImage& g) {
  std::vector<std::uint8_t> out(g.values.size());
  for (std::size_t i = 0; i < g.values.size(); ++i) out[i] = g.values[i] >= 128 ? 1 : 0;
  return out;
}

}  // namespace detail

inline std::pair<LabeledDataset, LabeledDataset> load_mvtec_class(
    const std::filesystem::path& root, const std::string& class_name) {
  std::filesystem::path class_dir = root / class_name;
  if (!std::filesystem::is_directory(class_dir))
    throw Error(ErrorKind::dataset, "dataset class directory not found: " + class_dir.string());

  LabeledDataset train{"train", {}};
  std::filesystem::path train_good = class_dir / "train" / "good";
  if (!std::filesystem::is_directory(train_good))
    throw Error(ErrorKind::dataset, "missing directory " + train_good.string());
  for (const auto& file : detail::sorted_entries(train_good, false)) {
    LabeledImage item;
    item.image = read_rgb_png(file);
    item.label = 0;
    item.defect_type = "good";
    item.name = "train/good/" + file.filename().string();
    train.items.push_back(std::move(item));
  }

  LabeledDataset test{"test", {}};
  std::filesystem::path test_dir = class_dir / "test";
  if (!std::filesystem::is_directory(test_dir))
    throw Error(ErrorKind::dataset, "missing directory " + test_dir.string());
  for (const auto& type_dir : detail::sorted_entries(test_dir, true)) {
    std::string type = type_dir.filename().string();
    bool anomalous = type != "good";
    for (const auto& file : detail::sorted_entries(type_dir, false)) {
      LabeledImage item;
      item.image = read_rgb_png(file);
      item.label = anomalous ? 1 : 0;
      item.defect_type = type;
      item.name = "test/" + type + "/" + file.filename().string();
      if (anomalous) {
        std::string stem = file.stem().string();
        std::filesystem::path mask_dir = class_dir / "ground_truth" / type;
        std::filesystem::path mask_path = mask_dir / (stem + "_mask.png");
        if (!std::filesystem::exists(mask_path)) mask_path = mask_dir / (stem + ".png");
        if (!std::filesystem::exists(mask_path))
          throw Error(ErrorKind::dataset, "missing ground-truth mask for " + item.name);
        GrayImage mask = read_gray_png(mask_path);
        if (mask.height != item.image.height || mask.width != item.image.width)
          throw Error(ErrorKind::dataset,
                      "mask shape mismatch for " + item.name + " (mask " +
                          std::to_string(mask.width) + "x" + std::to_string(mask.height) +
                          ", image " + std::to_string(item.image.width) + "x" +
                          std::to_string(item.image.height) + ")");
        item.mask = detail::binarize_mask(mask);
      }
      test.items.push_back(std::move(item));
    }
  }
  return {std::move(train), std::move(test)};
}

// ---------------------------------------------------------------------------
// Resizing (half-pixel-center convention)

inline RgbImage resize_bilinear(const RgbImage& img, std::size_t target_h, std::size_t target_w) {
  if (target_h == 0 || target_w == 0)
    throw Error(ErrorKind::config, "resize target dimensions must be positive");

  RgbImage out;
  out.height = target_h;
  out.width = target_w;
  out.values.resize(target_h * target_w * 3);

  double scale_y = static_cast<double>(img.height) / static_cast<double>(target_h);
  double scale_x = static_cast<double>(img.width) / static_cast<double>(target_w);
  for (std::size_t y = 0; y < target_h; ++y) {
    double sy = (static_cast<double>(y) + 0.5) * scale_y - 0.5;
    sy = std::clamp(sy, 0.0, static_cast<double>(img.height - 1));
    std::size_t y0 = static_cast<std::size_t>(sy);
    std::size_t y1 = std::min(y0 + 1, img.height - 1);
    double fy = sy - static_cast<double>(y0);
    for (std::size_t x = 0; x < target_w; ++x) {
      double sx = (static_cast<double>(x) + 0.5) * scale_x - 0.5;
      sx = std::clamp(sx, 0.0, static_cast<double>(img.width - 1));
      std::size_t x0 = static_cast<std::size_t>(sx);
      std::size_t x1 = std::min(x0 + 1, img.width - 1);
      double fx = sx - static_cast<double>(x0);
      for (std::size_t c = 0; c < 3; ++c) {
        double top = (1.0 - fx) * img.at(y0, x0, c) + fx * img.at(y0, x1, c);
        double bot = (1.0 - fx) * img.at(y1, x0, c) + fx * img.at(y1, x1, c);
        out.at(y, x, c) = static_cast<float>((1.0 - fy) * top + fy * bot);
      }
    }
  }
  return out;
}

inline std::vector<std::uint8_t> resize_mask_nearest(const std::vector<std::uint8_t>& mask,
                                                     std::size_t h, std::size_t w,
                                                     std::size_t target_h, std::size_t target_w) {
  if (target_h == 0 || target_w == 0)
    throw Error(ErrorKind::config, "resize target dimensions must be positive");
  if (mask.size() != h * w) throw Error(ErrorKind::dataset, "mask size mismatch in resize");

  std::vector<std::uint8_t> out(target_h * target_w);
  double scale_y = static_cast<double>(h) / static_cast<double>(target_h);
  double scale_x = static_cast<double>(w) / static_cast<double>(target_w);
  for (std::size_t y = 0; y < target_h; ++y) {
    std::size_t sy = std::min(
        static_cast<std::size_t>((static_cast<double>(y) + 0.5) * scale_y), h - 1);
    for (std::size_t x = 0; x < target_w; ++x) {
      std::size_t sx = std::min(
          static_cast<std::size_t>((static_cast<double>(x) + 0.5) * scale_x), w - 1);
      out[y * target_w + x] = mask[sy * w + sx];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// RGB -> hyperspectral synthesis
//
// Per pixel, a natural cubic spline through (anchor_B, blue), (anchor_G,
// green), (anchor_R, red), evaluated at every grid point, linearly
// extrapolated outside the anchor span, clamped to [0,1].
//
// The evaluation uses the Horner difference form S = y_i + dx*(b + dx*(c +
// dx*d)) with dx measured from the segment's left knot. Two exactness
// guarantees depend on this form: a gray pixel has all knot differences
// exactly zero, so every coefficient is zero and the spectrum is exactly
// constant; and a grid point that coincides with an anchor has dx == 0, so
// the anchor value is reproduced exactly.

namespace detail {

enum class SplineRegion : std::uint8_t { left, seg0, seg1, right };

struct GridEval {
  std::vector<SplineRegion> region;
  std::vector<double> dx;
};

inline GridEval precompute_grid_eval(const WavelengthGrid& grid) {
  GridEval ge;
  ge.region.resize(grid.size());
  ge.dx.resize(grid.size());
  double x0 = grid.anchors[0], x1 = grid.anchors[1], x2 = grid.anchors[2];
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double x = grid.points[i];
    if (x < x0) {
      ge.region[i] = SplineRegion::left;
      ge.dx[i] = x - x0;
    } else if (x < x1) {
      ge.region[i] = SplineRegion::seg0;
      ge.dx[i] = x - x0;
    } else if (x < x2) {
      ge.region[i] = SplineRegion::seg1;
      ge.dx[i] = x - x1;
    } else {
      ge.region[i] = SplineRegion::right;
      ge.dx[i] = x - x2;
    }
  }
  return ge;
}

}  // namespace detail

inline SpectralCube synthesize_hsi(const RgbImage& img, const WavelengthGrid& grid) {
  grid.validate();
  if (img.height == 0 || img.width == 0)
    throw Error(ErrorKind::dataset, "cannot synthesize from an empty image");

  detail::GridEval ge = detail::precompute_grid_eval(grid);
  double h0 = grid.anchors[1] - grid.anchors[0];
  double h1 = grid.anchors[2] - grid.anchors[1];

  SpectralCube cube(grid.size(), img.height, img.width);
  std::size_t plane = cube.plane_size();
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      double y0 = img.at(y, x, 2);  // blue at the shortest anchor
      double y1 = img.at(y, x, 1);  // green
      double y2 = img.at(y, x, 0);  // red

      double s0 = (y1 - y0) / h0;
      double s1 = (y2 - y1) / h1;
      double m1 = 3.0 * (s1 - s0) / (h0 + h1);  // natural spline: M0 = M2 = 0

      double b0 = s0 - h0 * m1 / 6.0;
      double d0 = m1 / (6.0 * h0);
      double b1 = s1 - h1 * m1 / 3.0;
      double c1 = m1 / 2.0;
      double d1 = -m1 / (6.0 * h1);
      double slope_l = b0;
      double slope_r = s1 + h1 * m1 / 6.0;

      std::size_t base = y * img.width + x;
      for (std::size_t ch = 0; ch < grid.size(); ++ch) {
        double dx = ge.dx[ch];
        double v;
        switch (ge.region[ch]) {
          case detail::SplineRegion::left: v = y0 + dx * slope_l; break;
          case detail::SplineRegion::seg0: v = y0 + dx * (b0 + dx * dx * d0); break;
          case detail::SplineRegion::seg1: v = y1 + dx * (b1 + dx * (c1 + dx * d1)); break;
          default: v = y2 + dx * slope_r; break;
        }
        cube.values[ch * plane + base] = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return cube;
}

// ---------------------------------------------------------------------------
// Per-channel min-max scaling

struct MinMaxStats {
  std::vector<double> min_v;
  std::vector<double> max_v;
};

class MinMaxAccumulator {
 public:
  explicit MinMaxAccumulator(std::size_t channels)
      : min_(channels, std::numeric_limits<double>::infinity()),
        max_(channels, -std::numeric_limits<double>::infinity()) {}

  void add(const SpectralCube& cube) {
    if (cube.channels != min_.size())
      throw Error(ErrorKind::dataset, "cube channel count mismatch in scaling fit");
    std::size_t plane = cube.plane_size();
    for (std::size_t c = 0; c < cube.channels; ++c) {
      const float* p = cube.plane(c);
      double lo = min_[c], hi = max_[c];
      for (std::size_t i = 0; i < plane; ++i) {
        double v = p[i];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      min_[c] = lo;
      max_[c] = hi;
    }
    ++count_;
  }

  MinMaxStats finish() const {
    if (count_ == 0) throw Error(ErrorKind::dataset, "scaling fit needs at least one cube");
    return {min_, max_};
  }

 private:
  std::vector<double> min_, max_;
  std::size_t count_ = 0;
};

inline MinMaxStats minmax_fit(const std::vector<const SpectralCube*>& cubes) {
  if (cubes.empty()) throw Error(ErrorKind::dataset, "scaling fit needs at least one cube");
  MinMaxAccumulator acc(cubes.front()->channels);
  for (const SpectralCube* c : cubes) acc.add(*c);
  return acc.finish();
}

// (v - min) / (max - min) per channel, degenerate channels to 0, clamped to [0,1].
inline SpectralCube minmax_apply(const SpectralCube& cube, const MinMaxStats& stats) {
  if (cube.channels != stats.min_v.size())
    throw Error(ErrorKind::dataset, "cube channel count mismatch in scaling");
  SpectralCube out(cube.channels, cube.height, cube.width);
  std::size_t plane = cube.plane_size();
  for (std::size_t c = 0; c < cube.channels; ++c) {
    const float* src = cube.plane(c);
    float* dst = out.plane(c);
    double lo = stats.min_v[c];
    double range = stats.max_v[c] - lo;
    if (range == 0.0) {
      std::fill(dst, dst + plane, 0.0f);
      continue;
    }
    for (std::size_t i = 0; i < plane; ++i) {
      double v = (static_cast<double>(src[i]) - lo) / range;
      dst[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return out;
}

inline void save_minmax(const std::filesystem::path& path, const MinMaxStats& stats,
                        const WavelengthGrid& grid) {
  nlohmann::json j;
  j["version"] = 1;
  j["grid"]["points"] = grid.points;
  j["grid"]["anchors"] = grid.anchors;
  j["min"] = stats.min_v;
  j["max"] = stats.max_v;
  write_file(path, j.dump(2) + "\n");
}

inline std::pair<MinMaxStats, WavelengthGrid> load_minmax(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes = read_file(path);
  nlohmann::json j = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (j.is_discarded())
    throw Error(ErrorKind::artifact, "invalid JSON in " + path.string());
  try {
    if (j.at("version").get<int>() != 1)
      throw Error(ErrorKind::artifact, "unsupported scaling-stats version in " + path.string());
    WavelengthGrid grid;
    grid.points = j.at("grid").at("points").get<std::vector<double>>();
    auto anchors = j.at("grid").at("anchors").get<std::vector<double>>();
    if (anchors.size() != 3)
      throw Error(ErrorKind::artifact, "expected 3 anchors in " + path.string());
    grid.anchors = {anchors[0], anchors[1], anchors[2]};
    grid.validate();
    MinMaxStats stats;
    stats.min_v = j.at("min").get<std::vector<double>>();
    stats.max_v = j.at("max").get<std::vector<double>>();
    if (stats.min_v.size() != grid.size() || stats.max_v.size() != grid.size())
      throw Error(ErrorKind::artifact, "scaling stats length mismatch in " + path.string());
    return {std::move(stats), std::move(grid)};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::artifact, "malformed scaling stats " + path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Pixel sampling for the feature-selection stage

// Draws exactly per_image pixel spectra from one cube (without replacement)
// into rows [row_offset, row_offset + per_image) of x. Pixel label = mask
// value (0 when no mask). With balance set, the draw targets equal class
// counts up to availability.
inline void sample_cube_pixels(const SpectralCube& cube, const std::vector<std::uint8_t>& mask,
                               std::size_t per_image, bool balance, RngStream rng, Matrix& x,
                               std::vector<int>& y, std::size_t row_offset) {
  std::size_t plane = cube.plane_size();
  if (per_image > plane)
    throw Error(ErrorKind::dataset, "per-image sample count exceeds pixel count");
  if (!mask.empty() && mask.size() != plane)
    throw Error(ErrorKind::dataset, "mask size does not match cube plane");
  if (x.cols() != cube.channels || row_offset + per_image > x.rows())
    throw Error(ErrorKind::dataset, "sample matrix shape mismatch");

  std::vector<std::size_t> pos, neg;
  if (!mask.empty()) {
    for (std::size_t i = 0; i < plane; ++i) (mask[i] ? pos : neg).push_back(i);
  } else {
    neg.resize(plane);
    std::iota(neg.begin(), neg.end(), std::size_t{0});
  }

  // Partial Fisher-Yates: the first `take` entries become the sample.
  auto draw = [&rng](std::vector<std::size_t>& items, std::size_t take) {
    for (std::size_t i = 0; i < take; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.next_below(items.size() - i));
      std::swap(items[i], items[j]);
    }
  };

  std::vector<std::size_t> picked;
  std::vector<int> labels;
  picked.reserve(per_image);
  labels.reserve(per_image);
  if (balance && !pos.empty()) {
    std::size_t n_pos = std::min(per_image / 2, pos.size());
    std::size_t n_neg = std::min(per_image - n_pos, neg.size());
    n_pos = std::min(per_image - n_neg, pos.size());
    draw(pos, n_pos);
    draw(neg, n_neg);
    for (std::size_t i = 0; i < n_pos; ++i) { picked.push_back(pos[i]); labels.push_back(1); }
    for (std::size_t i = 0; i < n_neg; ++i) { picked.push_back(neg[i]); labels.push_back(0); }
  } else {
    std::vector<std::size_t> all(plane);
    std::iota(all.begin(), all.end(), std::size_t{0});
    draw(all, per_image);
    for (std::size_t i = 0; i < per_image; ++i) {
      picked.push_back(all[i]);
      labels.push_back(mask.empty() ? 0 : mask[all[i]]);
    }
  }

  for (std::size_t i = 0; i < picked.size(); ++i) {
    double* row = x.row(row_offset + i);
    std::size_t px = picked[i];
    for (std::size_t c = 0; c < cube.channels; ++c)
      row[c] = cube.values[c * plane + px];
    y[row_offset + i] = labels[i];
  }
}

struct PixelSample {
  Matrix x;
  std::vector<int> y;
};

// Sub-stream per item (key = item index), so sampling is independent of
// iteration order and matches any streaming regeneration of the same cubes.
inline PixelSample sample_pixels(const CubeDataset& items, std::size_t per_image, bool balance,
                                 const RngStream& rng) {
  if (items.empty()) throw Error(ErrorKind::dataset, "pixel sampling needs at least one cube");
  if (balance) {
    bool any_pos = false;
    for (const CubeItem& item : items)
      for (std::uint8_t m : item.mask) any_pos |= (m != 0);
    if (!any_pos)
      throw Error(ErrorKind::dataset, "balanced sampling requested but no anomalous pixels exist");
  }

  PixelSample s;
  s.x = Matrix(items.size() * per_image, items.front().cube.channels);
  s.y.resize(items.size() * per_image);
  for (std::size_t i = 0; i < items.size(); ++i)
    sample_cube_pixels(items[i].cube, items[i].mask, per_image, balance, rng.split(i), s.x, s.y,
                       i * per_image);
  return s;
}

// ---------------------------------------------------------------------------
// Binary cube cache

inline void save_cube(const std::filesystem::path& path, const SpectralCube& cube) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(18 + cube.values.size() * 4);
  bytes.insert(bytes.end(), {'H', 'S', 'I', 'C'});
  append_u16(bytes, 1);
  append_u32(bytes, static_cast<std::uint32_t>(cube.channels));
  append_u32(bytes, static_cast<std::uint32_t>(cube.height));
  append_u32(bytes, static_cast<std::uint32_t>(cube.width));
  for (float v : cube.values) append_f32(bytes, v);
  write_file(path, bytes);
}

inline SpectralCube load_cube(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes = read_file(path);
  ByteReader reader(bytes, path.string());
  reader.expect_magic("HSIC");
  std::uint16_t version = reader.take_u16();
  if (version != 1)
    throw Error(ErrorKind::artifact, "unsupported cube version in " + path.string());
  std::uint32_t c = reader.take_u32();
  std::uint32_t h = reader.take_u32();
  std::uint32_t w = reader.take_u32();
  if (c == 0 || h == 0 || w == 0)
    throw Error(ErrorKind::artifact, "zero dimension in " + path.string());
  SpectralCube cube(c, h, w);
  for (float& v : cube.values) {
    v = reader.take_f32();
    if (!(v >= 0.0f && v <= 1.0f))
      throw Error(ErrorKind::artifact, "cube value out of [0,1] in " + path.string());
  }
  reader.expect_done();
  return cube;
}

// ---------------------------------------------------------------------------
// Train/test split adjustment for supervised training

// Moves a seeded fraction of the anomalous test images into the training set
// (selection shuffled, original relative order preserved on both sides).
// Returns the names of the moved items.
inline std::vector<std::string> move_anomalous_to_train(LabeledDataset& train,
                                                        LabeledDataset& test, double fraction,
                                                        RngStream rng) {
  if (fraction < 0.0 || fraction > 1.0)
    throw Error(ErrorKind::config, "split fraction must be in [0,1]");

  std::vector<std::size_t> anomalous;
  for (std::size_t i = 0; i < test.items.size(); ++i)
    if (test.items[i].label == 1) anomalous.push_back(i);

  std::size_t count = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(anomalous.size())));
  shuffle(anomalous, rng);
  anomalous.resize(count);
  std::sort(anomalous.begin(), anomalous.end());

  std::vector<std::string> moved;
  for (std::size_t idx : anomalous) {
    moved.push_back(test.items[idx].name);
    train.items.push_back(std::move(test.items[idx]));
  }
  for (auto it = anomalous.rbegin(); it != anomalous.rend(); ++it)
    test.items.erase(test.items.begin() + static_cast<std::ptrdiff_t>(*it));
  return moved;
}

}  // namespace specsel
