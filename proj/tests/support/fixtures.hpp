#pragma once

// Shared test fixtures: scratch directories, a tiny MVTec-style PNG dataset,
// and a generator that plants a defect signal inside a contiguous channel
// band of otherwise-noise cubes.

#include <atomic>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "specsel/datacube.hpp"
#include "specsel/numeric.hpp"
#include "specsel/png_io.hpp"

namespace fixtures {

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("specsel_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline specsel::RgbImage make_rgb_image(std::size_t size, specsel::RngStream& rng) {
  specsel::RgbImage img;
  img.height = size;
  img.width = size;
  img.values.resize(size * size * 3);
  float base[3] = {0.3f + 0.4f * static_cast<float>(rng.next_double()),
                   0.3f + 0.4f * static_cast<float>(rng.next_double()),
                   0.3f + 0.4f * static_cast<float>(rng.next_double())};
  for (std::size_t y = 0; y < size; ++y)
    for (std::size_t x = 0; x < size; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        float noise = 0.08f * (static_cast<float>(rng.next_double()) - 0.5f);
        float v = base[c] + noise + 0.1f * static_cast<float>(x) / static_cast<float>(size);
        // Quantize exactly like an 8-bit decode so PNG round trips are exact.
        int q = static_cast<int>(std::clamp(v, 0.0f, 1.0f) * 255.0f + 0.5f);
        img.at(y, x, c) = static_cast<float>(q) / 255.0f;
      }
  return img;
}

// Writes <root>/<class_name>/{train/good, test/good, test/spot,
// ground_truth/spot} with seeded images; "spot" items carry a bright square
// defect and a matching mask.
inline void write_mvtec_fixture(const std::filesystem::path& root, const std::string& class_name,
                                std::size_t n_train_good, std::size_t n_test_good,
                                std::size_t n_test_defect, std::size_t img_size,
                                std::uint64_t seed) {
  specsel::RngStream rng(seed);
  std::filesystem::path class_dir = root / class_name;

  auto number = [](std::size_t i) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%03zu", i);
    return std::string(buf);
  };

  for (std::size_t i = 0; i < n_train_good; ++i) {
    specsel::RngStream item = rng.split(i);
    specsel::write_rgb_png(class_dir / "train" / "good" / (number(i) + ".png"),
                           make_rgb_image(img_size, item));
  }
  for (std::size_t i = 0; i < n_test_good; ++i) {
    specsel::RngStream item = rng.split(1000 + i);
    specsel::write_rgb_png(class_dir / "test" / "good" / (number(i) + ".png"),
                           make_rgb_image(img_size, item));
  }
  for (std::size_t i = 0; i < n_test_defect; ++i) {
    specsel::RngStream item = rng.split(2000 + i);
    specsel::RgbImage img = make_rgb_image(img_size, item);
    std::size_t side = img_size / 4 + item.next_below(img_size / 8 + 1);
    std::size_t ox = item.next_below(img_size - side + 1);
    std::size_t oy = item.next_below(img_size - side + 1);
    specsel::GrayImage mask;
    mask.height = img_size;
    mask.width = img_size;
    mask.values.assign(img_size * img_size, 0);
    for (std::size_t y = oy; y < oy + side; ++y)
      for (std::size_t x = ox; x < ox + side; ++x) {
        img.at(y, x, 0) = 1.0f;
        img.at(y, x, 1) = 20.0f / 255.0f;
        img.at(y, x, 2) = 20.0f / 255.0f;
        mask.values[y * img_size + x] = 255;
      }
    specsel::write_rgb_png(class_dir / "test" / "spot" / (number(i) + ".png"), img);
    specsel::write_gray_png(class_dir / "ground_truth" / "spot" / (number(i) + "_mask.png"),
                            mask);
  }
}

// ---------------------------------------------------------------------------
// Planted-band cube generator. A pure function of (config, index, anomalous):
// regenerating an item always reproduces it bit for bit, so large datasets
// can be streamed one cube at a time.

struct PlantedConfig {
  std::size_t channels = 300;
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t band_start = 120;  // defect lives in [band_start, band_start + band_width)
  std::size_t band_width = 10;
  double amplitude = 0.35;
  std::uint64_t seed = 7;
};

inline specsel::CubeItem make_planted_item(const PlantedConfig& cfg, std::size_t index,
                                           bool anomalous) {
  specsel::RngStream rng = specsel::RngStream(cfg.seed).split(index);
  specsel::CubeItem item;
  item.cube = specsel::SpectralCube(cfg.channels, cfg.height, cfg.width);
  item.label = anomalous ? 1 : 0;
  item.name = (anomalous ? "anom_" : "good_") + std::to_string(index);

  double base = 0.41 + 0.02 * rng.next_double();
  for (float& v : item.cube.values) {
    double noise = 0.2 * rng.next_double() - 0.1;
    v = static_cast<float>(std::clamp(base + noise, 0.0, 1.0));
  }

  if (anomalous) {
    std::size_t extent = std::min(cfg.height, cfg.width);
    std::size_t lo = std::max<std::size_t>(1, extent / 4);
    std::size_t side = lo + rng.next_below(std::max<std::size_t>(1, extent / 8) + 1);
    side = std::min(side, extent);
    std::size_t oy = rng.next_below(cfg.height - side + 1);
    std::size_t ox = rng.next_below(cfg.width - side + 1);
    // Each item boosts a random subset of the band at varying strength, so
    // items carry distinct spectral signatures and no channel is a perfect
    // stand-in for another.
    std::size_t signature = std::max<std::size_t>(1, cfg.band_width * 2 / 5);
    std::vector<std::size_t> order(cfg.band_width);
    std::iota(order.begin(), order.end(), std::size_t{0});
    specsel::shuffle(order, rng);
    std::vector<double> boost(cfg.band_width, 0.0);
    for (std::size_t i = 0; i < signature; ++i)
      boost[order[i]] = cfg.amplitude * (0.4 + 0.6 * rng.next_double());
    item.mask.assign(cfg.height * cfg.width, 0);
    std::size_t plane = item.cube.plane_size();
    for (std::size_t y = oy; y < oy + side; ++y)
      for (std::size_t x = ox; x < ox + side; ++x) {
        item.mask[y * cfg.width + x] = 1;
        for (std::size_t c = cfg.band_start; c < cfg.band_start + cfg.band_width; ++c) {
          float& v = item.cube.values[c * plane + y * cfg.width + x];
          v = static_cast<float>(
              std::min(static_cast<double>(v) + boost[c - cfg.band_start], 1.0));
        }
      }
  }
  return item;
}

// First `anomalous_count` items are anomalous, the rest normal; indices are
// globally unique via `index_offset` so train/test draws never collide.
inline specsel::CubeDataset make_planted_dataset(const PlantedConfig& cfg, std::size_t count,
                                                 std::size_t anomalous_count,
                                                 std::size_t index_offset) {
  specsel::CubeDataset items;
  items.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    items.push_back(make_planted_item(cfg, index_offset + i, i < anomalous_count));
  return items;
}

}  // namespace fixtures
