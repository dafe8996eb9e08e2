// End-to-end library walkthrough on synthetic data: build cubes with an
// anomaly signal planted in a known channel band, rank channels with forest
// importance, train the scorer on the top six, and compare its AUROC and
// latency against scoring the full cube.

#include <cstdio>
#include <vector>

#include "specsel/bench.hpp"
#include "specsel/datacube.hpp"
#include "specsel/evalmetrics.hpp"
#include "specsel/numeric.hpp"
#include "specsel/reduction.hpp"
#include "specsel/scorer.hpp"

using namespace specsel;

namespace {

constexpr std::size_t kChannels = 60;
constexpr std::size_t kSide = 32;
constexpr std::size_t kBandStart = 24;
constexpr std::size_t kBandWidth = 6;
constexpr std::size_t kTopN = 6;

CubeItem make_item(std::uint64_t index, bool anomalous) {
  RngStream rng = RngStream(19).split(index);
  CubeItem item;
  item.cube = SpectralCube(kChannels, kSide, kSide);
  item.label = anomalous ? 1 : 0;
  for (float& v : item.cube.values) v = static_cast<float>(0.4 + 0.2 * rng.next_double());
  if (anomalous) {
    std::size_t half = kSide / 2;
    std::size_t oy = rng.next_below(half), ox = rng.next_below(half);
    item.mask.assign(kSide * kSide, 0);
    for (std::size_t y = oy; y < oy + half; ++y)
      for (std::size_t x = ox; x < ox + half; ++x) {
        item.mask[y * kSide + x] = 1;
        for (std::size_t c = kBandStart; c < kBandStart + kBandWidth; ++c)
          item.cube.values[c * item.cube.plane_size() + y * kSide + x] += 0.3f;
      }
  }
  return item;
}

}  // namespace

int main() {
  CubeDataset train_set;
  for (std::size_t i = 0; i < 24; ++i) train_set.push_back(make_item(i, i % 2 == 0));

  PixelSample sample = sample_pixels(train_set, 120, true, RngStream(2).split(1));
  ForestConfig fc;
  fc.trees = 40;
  fc.seed = RngStream(2).split(2).seed();
  Forest forest = fit_random_forest(sample.x, sample.y, fc);
  ChannelRanking ranking = feature_importance(forest);

  std::printf("top-%zu channels by forest importance:", kTopN);
  for (std::size_t c : ranking.top_channels(kTopN)) {
    bool planted = c >= kBandStart && c < kBandStart + kBandWidth;
    std::printf(" %zu%s", c, planted ? "*" : "");
  }
  std::printf("  (* = inside the planted band %zu..%zu)\n", kBandStart,
              kBandStart + kBandWidth - 1);

  std::vector<SpectralCube> reduced;
  std::vector<TrainItem> items;
  for (const CubeItem& item : train_set) reduced.push_back(select_channels(item.cube, ranking, kTopN));
  for (std::size_t i = 0; i < train_set.size(); ++i)
    items.push_back({&reduced[i], train_set[i].label});

  TrainConfig tc;
  tc.learning_rate = 1e-3;
  tc.epochs = 20;
  tc.seed = RngStream(2).split(3).seed();
  ScorerNet net = init_model(kTopN, RngStream(2).split(4).seed());
  std::vector<double> history = train(net, items, tc);
  std::printf("trained %zu epochs, loss %.4f -> %.4f\n", history.size(), history.front(),
              history.back());

  CubeDataset test_set;
  for (std::size_t i = 0; i < 16; ++i) test_set.push_back(make_item(100 + i, i % 2 == 0));
  std::vector<double> scores;
  std::vector<int> labels;
  for (const CubeItem& item : test_set) {
    scores.push_back(score_cube(net, select_channels(item.cube, ranking, kTopN)));
    labels.push_back(item.label);
  }
  std::printf("test auroc on %zu cubes: %.1f%%\n", test_set.size(),
              to_percent(auroc(scores, labels)));

  ScorerNet full_net = init_model(kChannels, RngStream(2).split(5).seed());
  std::vector<const SpectralCube*> ptrs;
  for (const CubeItem& item : test_set) ptrs.push_back(&item.cube);
  LatencyReport full = time_pipeline(
      "origin", [&](const SpectralCube& c) { return score_cube(full_net, c); }, ptrs, 2, 5);
  LatencyReport topn = time_pipeline(
      "fs", [&](const SpectralCube& c) { return score_cube(net, select_channels(c, ranking, kTopN)); },
      ptrs, 2, 5);
  std::printf("latency: full cube %.3f ms, top-%zu %.3f ms, speedup %.2fx\n",
              1e3 * full.mean_sec, kTopN, 1e3 * topn.mean_sec, speedup(full, topn));
  return 0;
}
