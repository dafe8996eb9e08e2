#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "specsel/datacube.hpp"
#include "support/fixtures.hpp"

using specsel::RgbImage;
using specsel::RngStream;
using specsel::SpectralCube;
using specsel::WavelengthGrid;

namespace {

// 300 points at a 2.5 nm step from 300 nm: contains 450/550/650 exactly.
WavelengthGrid anchor_aligned_grid() { return WavelengthGrid::linear(300, 300.0, 1047.5); }

RgbImage solid_pixel(float r, float g, float b) {
  RgbImage img;
  img.height = 1;
  img.width = 1;
  img.values = {r, g, b};
  return img;
}

}  // namespace

TEST_CASE("default wavelength grid shape") {
  WavelengthGrid g = WavelengthGrid::standard();
  CHECK(g.size() == 300);
  CHECK(g.points.front() == 300.0);
  CHECK(g.points.back() == 1100.0);
  for (std::size_t i = 1; i < g.size(); ++i) REQUIRE(g.points[i] > g.points[i - 1]);
  CHECK(g.anchors[0] == 450.0);
  CHECK(g.anchors[2] == 650.0);
  g.validate();

  WavelengthGrid aligned = anchor_aligned_grid();
  CHECK(aligned.points[60] == 450.0);
  CHECK(aligned.points[100] == 550.0);
  CHECK(aligned.points[140] == 650.0);
}

TEST_CASE("grid validation rejects bad shapes") {
  CHECK_THROWS_AS(WavelengthGrid::linear(1, 300.0, 1100.0), specsel::Error);
  WavelengthGrid g = WavelengthGrid::standard();
  g.points[5] = g.points[4];
  CHECK_THROWS_AS(g.validate(), specsel::Error);

  // Anchors (450/550/650) fall outside a [500,600] span.
  CHECK_THROWS_AS(WavelengthGrid::linear(10, 500.0, 600.0), specsel::Error);
}

TEST_CASE("bilinear resize is identity at equal size") {
  RngStream rng(31);
  RgbImage img = fixtures::make_rgb_image(16, rng);
  RgbImage out = specsel::resize_bilinear(img, 16, 16);
  CHECK(out.values == img.values);
}

TEST_CASE("bilinear resize of a constant image is constant") {
  RgbImage img;
  img.height = 7;
  img.width = 5;
  img.values.assign(7 * 5 * 3, 0.25f);
  RgbImage out = specsel::resize_bilinear(img, 3, 11);
  REQUIRE(out.values.size() == 3 * 11 * 3);
  for (float v : out.values) REQUIRE(v == 0.25f);
}

TEST_CASE("bilinear downsize matches the half-pixel formula") {
  // 4x4 ramp v(y,x) = x. Target 2x2: source x = (x+0.5)*2 - 0.5 = {0.5, 2.5},
  // so each output is the average of two adjacent columns: {0.5, 2.5}.
  RgbImage img;
  img.height = 4;
  img.width = 4;
  img.values.resize(4 * 4 * 3);
  for (std::size_t y = 0; y < 4; ++y)
    for (std::size_t x = 0; x < 4; ++x)
      for (std::size_t c = 0; c < 3; ++c) img.at(y, x, c) = static_cast<float>(x) / 3.0f;

  RgbImage out = specsel::resize_bilinear(img, 2, 2);
  CHECK(out.at(0, 0, 0) == Catch::Approx(0.5 / 3.0));
  CHECK(out.at(0, 1, 0) == Catch::Approx(2.5 / 3.0));
  CHECK(out.at(1, 0, 1) == Catch::Approx(0.5 / 3.0));
  CHECK(out.at(1, 1, 2) == Catch::Approx(2.5 / 3.0));

  CHECK_THROWS_AS(specsel::resize_bilinear(img, 0, 2), specsel::Error);
}

TEST_CASE("mask resize picks nearest pixels") {
  std::vector<std::uint8_t> mask = {1, 0, 0, 0};
  std::vector<std::uint8_t> up = specsel::resize_mask_nearest(mask, 2, 2, 4, 4);
  REQUIRE(up.size() == 16);
  CHECK(up[0] == 1);
  CHECK(up[5] == 1);
  CHECK(up[10] == 0);
  std::vector<std::uint8_t> down = specsel::resize_mask_nearest(up, 4, 4, 2, 2);
  CHECK(down == mask);
}

TEST_CASE("gray pixels synthesize to exactly constant spectra") {
  WavelengthGrid grid = WavelengthGrid::standard();
  for (float v : {0.0f, 0.125f, 0.5f, 37.0f / 255.0f, 1.0f}) {
    SpectralCube cube = specsel::synthesize_hsi(solid_pixel(v, v, v), grid);
    REQUIRE(cube.channels == 300);
    for (float got : cube.values) REQUIRE(got == v);
  }
}

TEST_CASE("anchor-coincident channels reproduce the RGB values") {
  WavelengthGrid grid = anchor_aligned_grid();
  RngStream rng(88);
  for (int trial = 0; trial < 50; ++trial) {
    float r = static_cast<float>(rng.next_double());
    float g = static_cast<float>(rng.next_double());
    float b = static_cast<float>(rng.next_double());
    SpectralCube cube = specsel::synthesize_hsi(solid_pixel(r, g, b), grid);
    REQUIRE(std::abs(cube.at(60, 0, 0) - b) <= 1e-9);
    REQUIRE(std::abs(cube.at(100, 0, 0) - g) <= 1e-9);
    REQUIRE(std::abs(cube.at(140, 0, 0) - r) <= 1e-9);
  }

  // Saturated red: the 650 nm channel is exactly 1.
  SpectralCube red = specsel::synthesize_hsi(solid_pixel(1.0f, 0.0f, 0.0f), grid);
  CHECK(std::abs(red.at(140, 0, 0) - 1.0f) <= 1e-9);
}

TEST_CASE("collinear anchors extrapolate linearly and clamp") {
  // Anchors (450,0.2), (550,0.5), (650,0.8) are collinear, so the spline is
  // the line 0.003*(x-450)+0.2; at 750 nm that is 1.1, clamped to 1.0.
  WavelengthGrid grid;
  grid.points = {400.0, 450.0, 550.0, 650.0, 750.0};
  SpectralCube cube = specsel::synthesize_hsi(solid_pixel(0.8f, 0.5f, 0.2f), grid);
  CHECK(std::abs(cube.at(0, 0, 0) - 0.05f) <= 1e-7);  // 0.2 - 100*0.003
  CHECK(std::abs(cube.at(1, 0, 0) - 0.2f) <= 1e-7);
  CHECK(std::abs(cube.at(2, 0, 0) - 0.5f) <= 1e-7);
  CHECK(std::abs(cube.at(3, 0, 0) - 0.8f) <= 1e-7);
  CHECK(cube.at(4, 0, 0) == 1.0f);
}

TEST_CASE("synthesis preserves monotone pixel ordering at anchors") {
  WavelengthGrid grid = anchor_aligned_grid();
  RgbImage img;
  img.height = 1;
  img.width = 3;
  img.values = {0.1f, 0.2f, 0.3f, 0.4f, 0.5f, 0.6f, 0.7f, 0.8f, 0.9f};
  SpectralCube cube = specsel::synthesize_hsi(img, grid);
  for (std::size_t ch : {std::size_t{60}, std::size_t{100}, std::size_t{140}}) {
    REQUIRE(cube.at(ch, 0, 0) < cube.at(ch, 0, 1));
    REQUIRE(cube.at(ch, 0, 1) < cube.at(ch, 0, 2));
  }
}

TEST_CASE("synthesis output stays in range and is deterministic") {
  WavelengthGrid grid = WavelengthGrid::standard();
  RngStream rng(3);
  RgbImage img = fixtures::make_rgb_image(8, rng);
  SpectralCube a = specsel::synthesize_hsi(img, grid);
  SpectralCube b = specsel::synthesize_hsi(img, grid);
  CHECK(a.values == b.values);
  for (float v : a.values) {
    REQUIRE(v >= 0.0f);
    REQUIRE(v <= 1.0f);
  }
}

TEST_CASE("minmax scaling maps the training range onto [0,1]") {
  SpectralCube cube(1, 1, 3);
  cube.values = {0.0f, 0.5f, 1.0f};
  // Channel range {0, 0.5, 1.0} scaled by min 0, max 1.0 is unchanged; use a
  // narrower cube to exercise actual scaling.
  SpectralCube narrow(1, 1, 3);
  narrow.values = {0.0f, 0.25f, 0.5f};
  specsel::MinMaxStats stats = specsel::minmax_fit({&narrow});
  SpectralCube scaled = specsel::minmax_apply(narrow, stats);
  CHECK(scaled.values[0] == 0.0f);
  CHECK(scaled.values[1] == 0.5f);
  CHECK(scaled.values[2] == 1.0f);
}

TEST_CASE("minmax degenerate channels map to zero and ranges clamp") {
  SpectralCube train(2, 1, 2);
  train.values = {0.4f, 0.4f,   // channel 0: constant
                  0.2f, 0.6f};  // channel 1: range [0.2, 0.6]
  specsel::MinMaxStats stats = specsel::minmax_fit({&train});

  SpectralCube probe(2, 1, 2);
  probe.values = {0.9f, 0.1f, 0.8f, 0.0f};
  SpectralCube scaled = specsel::minmax_apply(probe, stats);
  CHECK(scaled.values[0] == 0.0f);
  CHECK(scaled.values[1] == 0.0f);
  CHECK(scaled.values[2] == 1.0f);  // 0.8 above the training max, clamped
  CHECK(scaled.values[3] == 0.0f);  // below the training min, clamped

  CHECK_THROWS_AS(specsel::minmax_fit({}), specsel::Error);
}

TEST_CASE("minmax round trip keeps training cubes in unit range") {
  RngStream rng(17);
  specsel::CubeDataset items = fixtures::make_planted_dataset(
      {.channels = 12, .height = 8, .width = 8, .band_start = 3, .band_width = 4, .seed = 5}, 4,
      2, 0);
  std::vector<const SpectralCube*> ptrs;
  for (const auto& it : items) ptrs.push_back(&it.cube);
  specsel::MinMaxStats stats = specsel::minmax_fit(ptrs);
  for (const auto& it : items) {
    SpectralCube s = specsel::minmax_apply(it.cube, stats);
    for (float v : s.values) {
      REQUIRE(v >= 0.0f);
      REQUIRE(v <= 1.0f);
    }
  }
}

TEST_CASE("minmax stats survive a save/load round trip") {
  fixtures::TempDir tmp("minmax");
  WavelengthGrid grid = WavelengthGrid::linear(12, 400.0, 900.0);
  specsel::MinMaxStats stats;
  stats.min_v.assign(12, 0.125);
  stats.max_v.assign(12, 0.875);
  stats.min_v[3] = 0.0078125;
  stats.max_v[3] = 0.4000000059604645;  // not exactly representable in fewer digits

  std::filesystem::path path = tmp.path() / "minmax.json";
  specsel::save_minmax(path, stats, grid);
  auto [loaded, loaded_grid] = specsel::load_minmax(path);
  CHECK(loaded.min_v == stats.min_v);
  CHECK(loaded.max_v == stats.max_v);
  CHECK(loaded_grid.points == grid.points);
  CHECK(loaded_grid.anchors == grid.anchors);

  specsel::write_file(tmp.path() / "bad.json", std::string("{not json"));
  CHECK_THROWS_AS(specsel::load_minmax(tmp.path() / "bad.json"), specsel::Error);
}

TEST_CASE("pixel sampling respects counts, labels, and determinism") {
  fixtures::PlantedConfig cfg{.channels = 10, .height = 6, .width = 6,
                              .band_start = 2, .band_width = 3, .seed = 21};
  specsel::CubeDataset items = fixtures::make_planted_dataset(cfg, 3, 1, 0);

  RngStream rng(9);
  specsel::PixelSample s = specsel::sample_pixels(items, 10, false, rng);
  REQUIRE(s.x.rows() == 30);
  REQUIRE(s.x.cols() == 10);
  REQUIRE(s.y.size() == 30);

  // Normal cubes contribute only label 0.
  for (std::size_t i = 10; i < 30; ++i) REQUIRE(s.y[i] == 0);

  specsel::PixelSample again = specsel::sample_pixels(items, 10, false, RngStream(9));
  CHECK(again.x == s.x);
  CHECK(again.y == s.y);
}

TEST_CASE("balanced sampling equalizes classes up to availability") {
  fixtures::PlantedConfig cfg{.channels = 4, .height = 32, .width = 32,
                              .band_start = 0, .band_width = 2, .seed = 33};
  specsel::CubeDataset items = fixtures::make_planted_dataset(cfg, 1, 1, 0);
  std::size_t pos_available = 0;
  for (auto m : items[0].mask) pos_available += m;
  REQUIRE(pos_available >= 100);

  specsel::PixelSample s = specsel::sample_pixels(items, 100, true, RngStream(1));
  std::size_t pos = 0;
  for (int label : s.y) pos += static_cast<std::size_t>(label);
  CHECK(pos == 50);

  // Without any anomalous pixels, balance is impossible.
  specsel::CubeDataset normal = fixtures::make_planted_dataset(cfg, 2, 0, 10);
  CHECK_THROWS_AS(specsel::sample_pixels(normal, 10, true, RngStream(1)), specsel::Error);

  // Sampling more pixels than exist is an error.
  CHECK_THROWS_AS(specsel::sample_pixels(items, 32 * 32 + 1, false, RngStream(1)),
                  specsel::Error);
}

TEST_CASE("sampling without replacement never repeats a pixel") {
  fixtures::PlantedConfig cfg{.channels = 3, .height = 4, .width = 4,
                              .band_start = 0, .band_width = 1, .seed = 2};
  specsel::CubeDataset items = fixtures::make_planted_dataset(cfg, 1, 0, 0);
  specsel::PixelSample s = specsel::sample_pixels(items, 16, false, RngStream(4));
  std::set<std::vector<double>> rows;
  for (std::size_t r = 0; r < 16; ++r)
    rows.insert(std::vector<double>(s.x.row(r), s.x.row(r) + 3));
  // All 16 pixels drawn exactly once (noise makes collisions implausible).
  CHECK(rows.size() == 16);
}

TEST_CASE("cube cache round trips exactly") {
  fixtures::TempDir tmp("cache");
  fixtures::PlantedConfig cfg{.channels = 7, .height = 5, .width = 9,
                              .band_start = 1, .band_width = 2, .seed = 77};
  SpectralCube cube = fixtures::make_planted_item(cfg, 0, true).cube;

  std::filesystem::path path = tmp.path() / "cube.hsic";
  specsel::save_cube(path, cube);
  SpectralCube loaded = specsel::load_cube(path);
  CHECK(loaded.channels == 7);
  CHECK(loaded.height == 5);
  CHECK(loaded.width == 9);
  CHECK(loaded.values == cube.values);

  std::vector<std::uint8_t> bytes = specsel::read_file(path);
  bytes.resize(bytes.size() / 2);
  specsel::write_file(tmp.path() / "trunc.hsic", bytes);
  CHECK_THROWS_AS(specsel::load_cube(tmp.path() / "trunc.hsic"), specsel::Error);

  bytes = specsel::read_file(path);
  bytes[0] = 'X';
  specsel::write_file(tmp.path() / "magic.hsic", bytes);
  CHECK_THROWS_AS(specsel::load_cube(tmp.path() / "magic.hsic"), specsel::Error);
}

TEST_CASE("mvtec loader walks the layout in lexicographic order") {
  fixtures::TempDir tmp("mvtec");
  fixtures::write_mvtec_fixture(tmp.path(), "widget", 2, 3, 2, 16, 99);

  auto [train, test] = specsel::load_mvtec_class(tmp.path(), "widget");
  REQUIRE(train.items.size() == 2);
  for (const auto& item : train.items) {
    CHECK(item.label == 0);
    CHECK(item.mask.empty());
  }
  REQUIRE(test.items.size() == 5);
  std::vector<int> labels;
  for (const auto& item : test.items) labels.push_back(item.label);
  CHECK(labels == std::vector<int>{0, 0, 0, 1, 1});
  CHECK(test.items[0].name == "test/good/000.png");
  CHECK(test.items[3].name == "test/spot/000.png");
  for (std::size_t i = 3; i < 5; ++i) {
    REQUIRE(test.items[i].mask.size() == 16 * 16);
    std::size_t set = 0;
    for (auto m : test.items[i].mask) set += m;
    REQUIRE(set > 0);
  }

  CHECK_THROWS_AS(specsel::load_mvtec_class(tmp.path(), "missing"), specsel::Error);
}

TEST_CASE("mvtec loader rejects a mask of the wrong shape") {
  fixtures::TempDir tmp("badmask");
  fixtures::write_mvtec_fixture(tmp.path(), "widget", 1, 1, 1, 16, 5);

  specsel::GrayImage wrong;
  wrong.height = 8;
  wrong.width = 8;
  wrong.values.assign(64, 255);
  specsel::write_gray_png(tmp.path() / "widget" / "ground_truth" / "spot" / "000_mask.png",
                          wrong);

  try {
    specsel::load_mvtec_class(tmp.path(), "widget");
    FAIL("expected a shape-mismatch error");
  } catch (const specsel::Error& e) {
    CHECK(e.kind() == specsel::ErrorKind::dataset);
    CHECK(std::string(e.what()).find("test/spot/000.png") != std::string::npos);
  }
}

TEST_CASE("png io round trips 8-bit data") {
  fixtures::TempDir tmp("png");
  RngStream rng(41);
  RgbImage img = fixtures::make_rgb_image(12, rng);
  specsel::write_rgb_png(tmp.path() / "img.png", img);
  RgbImage back = specsel::read_rgb_png(tmp.path() / "img.png");
  REQUIRE(back.height == 12);
  REQUIRE(back.width == 12);
  CHECK(back.values == img.values);

  specsel::GrayImage gray;
  gray.height = 4;
  gray.width = 6;
  gray.values = {0, 255, 128, 127, 5, 250, 0, 0, 1, 2, 3, 4,
                 200, 100, 50, 25, 12, 6, 3, 1, 0, 255, 0, 255};
  specsel::write_gray_png(tmp.path() / "mask.png", gray);
  specsel::GrayImage gback = specsel::read_gray_png(tmp.path() / "mask.png");
  CHECK(gback.values == gray.values);

  CHECK_THROWS_AS(specsel::read_rgb_png(tmp.path() / "nope.png"), specsel::Error);
}

TEST_CASE("load, resize, synthesize pipeline is bit-deterministic") {
  fixtures::TempDir tmp("det");
  fixtures::write_mvtec_fixture(tmp.path(), "widget", 1, 1, 1, 20, 13);
  WavelengthGrid grid = WavelengthGrid::linear(40, 300.0, 1100.0);

  auto run = [&] {
    auto [train, test] = specsel::load_mvtec_class(tmp.path(), "widget");
    RgbImage resized = specsel::resize_bilinear(train.items[0].image, 12, 12);
    return specsel::synthesize_hsi(resized, grid);
  };
  SpectralCube a = run();
  SpectralCube b = run();
  CHECK(a.values == b.values);
}

TEST_CASE("anomalous test items move into training deterministically") {
  fixtures::TempDir tmp("split");
  fixtures::write_mvtec_fixture(tmp.path(), "widget", 2, 2, 4, 12, 55);
  auto [train, test] = specsel::load_mvtec_class(tmp.path(), "widget");
  REQUIRE(test.items.size() == 6);

  auto moved = specsel::move_anomalous_to_train(train, test, 0.5, RngStream(3));
  CHECK(moved.size() == 2);
  CHECK(train.items.size() == 4);
  CHECK(test.items.size() == 4);
  std::size_t anom_left = 0;
  for (const auto& item : test.items) anom_left += static_cast<std::size_t>(item.label);
  CHECK(anom_left == 2);

  // Same seed moves the same items.
  auto [train2, test2] = specsel::load_mvtec_class(tmp.path(), "widget");
  auto moved2 = specsel::move_anomalous_to_train(train2, test2, 0.5, RngStream(3));
  CHECK(moved2 == moved);

  auto [train3, test3] = specsel::load_mvtec_class(tmp.path(), "widget");
  CHECK_THROWS_AS(specsel::move_anomalous_to_train(train3, test3, 1.5, RngStream(3)),
                  specsel::Error);
}
