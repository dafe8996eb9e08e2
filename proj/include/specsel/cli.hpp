#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "specsel/bench.hpp"
#include "specsel/common.hpp"
#include "specsel/datacube.hpp"
#include "specsel/evalmetrics.hpp"
#include "specsel/png_io.hpp"
#include "specsel/reduction.hpp"
#include "specsel/scorer.hpp"

namespace specsel::cli {

// Stage keys splitting the top-level seed; every stage stream is derived as
// RngStream(seed).split(stage) so methods never perturb each other.
inline constexpr std::uint64_t kStageSynth = 1;
inline constexpr std::uint64_t kStageSplit = 2;
inline constexpr std::uint64_t kStageSample = 3;
inline constexpr std::uint64_t kStageRank = 4;
inline constexpr std::uint64_t kStageTrain = 5;
inline constexpr std::uint64_t kStageBench = 6;

struct RunConfig {
  std::filesystem::path dataset_root;
  std::string class_name;
  std::size_t resize = 256;

  std::size_t grid_points = 300;
  double grid_start_nm = 300.0;
  double grid_stop_nm = 1100.0;
  std::array<double, 3> anchors = {450.0, 550.0, 650.0};

  std::string method = "fi";  // origin | fi | pi | pca
  std::size_t top_n = 6;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "runs";

  double split_fraction = 0.5;
  std::size_t sample_per_image = 200;
  bool sample_balance = true;

  std::size_t forest_trees = 100;
  std::size_t forest_max_depth = 8;
  std::size_t forest_min_leaf = 5;
  std::size_t forest_features_per_split = 0;  // 0 = ceil(sqrt(channels))
  std::size_t pi_repeats = 5;

  double train_lr = 1e-5;
  std::size_t train_batch = 8;
  std::size_t train_epochs = 50;
  bool train_early_stop = false;

  std::size_t bench_warmup = 5;
  std::size_t bench_reps = 20;
};

namespace detail {

template <typename T>
T get_as(const nlohmann::json& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::config, "config key '" + key + "' has the wrong type");
  }
}

}  // namespace detail

// Applies one flat dotted-key JSON object on top of the current values.
inline void apply_config_json(RunConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::config, "config root must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "dataset.root") cfg.dataset_root = detail::get_as<std::string>(value, key);
    else if (key == "dataset.class") cfg.class_name = detail::get_as<std::string>(value, key);
    else if (key == "dataset.resize") cfg.resize = detail::get_as<std::size_t>(value, key);
    else if (key == "grid.points") cfg.grid_points = detail::get_as<std::size_t>(value, key);
    else if (key == "grid.start_nm") cfg.grid_start_nm = detail::get_as<double>(value, key);
    else if (key == "grid.stop_nm") cfg.grid_stop_nm = detail::get_as<double>(value, key);
    else if (key == "grid.anchors") {
      auto a = detail::get_as<std::vector<double>>(value, key);
      if (a.size() != 3)
        throw Error(ErrorKind::config, "grid.anchors must list exactly 3 wavelengths");
      cfg.anchors = {a[0], a[1], a[2]};
    } else if (key == "method") cfg.method = detail::get_as<std::string>(value, key);
    else if (key == "top_n") cfg.top_n = detail::get_as<std::size_t>(value, key);
    else if (key == "seed") cfg.seed = detail::get_as<std::uint64_t>(value, key);
    else if (key == "out") cfg.out_dir = detail::get_as<std::string>(value, key);
    else if (key == "split.fraction") cfg.split_fraction = detail::get_as<double>(value, key);
    else if (key == "sample.per_image") cfg.sample_per_image = detail::get_as<std::size_t>(value, key);
    else if (key == "sample.balance") cfg.sample_balance = detail::get_as<bool>(value, key);
    else if (key == "forest.trees") cfg.forest_trees = detail::get_as<std::size_t>(value, key);
    else if (key == "forest.max_depth") cfg.forest_max_depth = detail::get_as<std::size_t>(value, key);
    else if (key == "forest.min_leaf") cfg.forest_min_leaf = detail::get_as<std::size_t>(value, key);
    else if (key == "forest.features_per_split")
      cfg.forest_features_per_split = detail::get_as<std::size_t>(value, key);
    else if (key == "pi.repeats") cfg.pi_repeats = detail::get_as<std::size_t>(value, key);
    else if (key == "train.lr") cfg.train_lr = detail::get_as<double>(value, key);
    else if (key == "train.batch") cfg.train_batch = detail::get_as<std::size_t>(value, key);
    else if (key == "train.epochs") cfg.train_epochs = detail::get_as<std::size_t>(value, key);
    else if (key == "train.early_stop") cfg.train_early_stop = detail::get_as<bool>(value, key);
    else if (key == "bench.warmup") cfg.bench_warmup = detail::get_as<std::size_t>(value, key);
    else if (key == "bench.reps") cfg.bench_reps = detail::get_as<std::size_t>(value, key);
    else throw Error(ErrorKind::config, "unknown config key '" + key + "'");
  }
}

inline void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes = read_file(path);
  nlohmann::json j = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::config, "invalid JSON in " + path.string());
  apply_config_json(cfg, j);
}

inline void validate_config(const RunConfig& cfg) {
  if (cfg.method != "origin" && cfg.method != "fi" && cfg.method != "pi" && cfg.method != "pca")
    throw Error(ErrorKind::usage,
                "unknown method '" + cfg.method + "' (expected origin, fi, pi, or pca)");
  if (cfg.class_name.empty()) throw Error(ErrorKind::config, "dataset.class is required");
  if (cfg.top_n == 0) throw Error(ErrorKind::config, "top_n must be at least 1");
  if (cfg.top_n > cfg.grid_points)
    throw Error(ErrorKind::config, "top_n cannot exceed the wavelength grid length");
  if (cfg.resize == 0) throw Error(ErrorKind::config, "dataset.resize must be positive");
  if (cfg.split_fraction < 0.0 || cfg.split_fraction > 1.0)
    throw Error(ErrorKind::config, "split.fraction must be in [0,1]");
  if (cfg.sample_per_image == 0)
    throw Error(ErrorKind::config, "sample.per_image must be positive");
}

inline WavelengthGrid config_grid(const RunConfig& cfg) {
  return WavelengthGrid::linear(cfg.grid_points, cfg.grid_start_nm, cfg.grid_stop_nm, cfg.anchors);
}

struct RunPaths {
  std::filesystem::path class_dir;
  std::filesystem::path cache_dir;
  std::filesystem::path cubes_dir;
  std::filesystem::path cache_manifest;
  std::filesystem::path minmax;
  std::filesystem::path method_dir;
  std::filesystem::path ranking;
  std::filesystem::path pca;
  std::filesystem::path weights;
  std::filesystem::path loss_history;
  std::filesystem::path eval_csv;
  std::filesystem::path bench_csv;
  std::filesystem::path bench_json;
  std::filesystem::path plot_svg;
  std::filesystem::path run_manifest;
};

inline RunPaths make_paths(const RunConfig& cfg) {
  RunPaths p;
  p.class_dir = cfg.out_dir / cfg.class_name;
  p.cache_dir = p.class_dir / "cache";
  p.cubes_dir = p.cache_dir / "cubes";
  p.cache_manifest = p.cache_dir / "manifest.json";
  p.minmax = p.cache_dir / "minmax.json";
  p.method_dir = p.class_dir / cfg.method;
  p.ranking = p.method_dir / "ranking.json";
  p.pca = p.method_dir / "pca.bin";
  p.weights = p.method_dir / "weights.bin";
  p.loss_history = p.method_dir / "loss_history.csv";
  p.eval_csv = p.method_dir / "eval.csv";
  p.bench_csv = p.method_dir / "bench.csv";
  p.bench_json = p.method_dir / "bench.json";
  p.plot_svg = p.method_dir / "importance.svg";
  p.run_manifest = p.method_dir / "manifest.json";
  return p;
}

inline std::uint64_t stage_seed(const RunConfig& cfg, std::uint64_t stage) {
  return RngStream(cfg.seed).split(stage).seed();
}

namespace detail {

inline std::string cube_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu.hsic", index);
  return buf;
}

inline std::string mask_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu_mask.png", index);
  return buf;
}

inline SpectralCube synth_one(const LabeledImage& item, const RunConfig& cfg,
                              const WavelengthGrid& grid) {
  RgbImage resized = resize_bilinear(item.image, cfg.resize, cfg.resize);
  return synthesize_hsi(resized, grid);
}

}  // namespace detail

// Builds the scaled cube cache: load the class, move a seeded fraction of
// anomalous test images into training, synthesize spectra, fit min-max
// scaling on the training cubes, and store scaled cubes plus a manifest.
inline void cmd_synth(const RunConfig& cfg, std::ostream& log) {
  validate_config(cfg);
  WavelengthGrid grid = config_grid(cfg);
  RunPaths paths = make_paths(cfg);

  auto [train, test] = load_mvtec_class(cfg.dataset_root, cfg.class_name);
  std::vector<std::string> moved = move_anomalous_to_train(
      train, test, cfg.split_fraction, RngStream(cfg.seed).split(kStageSplit));

  MinMaxAccumulator acc(grid.size());
  for (const LabeledImage& item : train.items)
    acc.add(detail::synth_one(item, cfg, grid));
  MinMaxStats stats = acc.finish();
  save_minmax(paths.minmax, stats, grid);

  struct Slot {
    const LabeledImage* item;
    const char* split;
  };
  std::vector<Slot> slots;
  for (const LabeledImage& item : train.items) slots.push_back({&item, "train"});
  for (const LabeledImage& item : test.items) slots.push_back({&item, "test"});

  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const LabeledImage& item = *slots[i].item;
    SpectralCube scaled = minmax_apply(detail::synth_one(item, cfg, grid), stats);
    std::string cube_name = detail::cube_file_name(i);
    save_cube(paths.cubes_dir / cube_name, scaled);

    nlohmann::json entry;
    entry["index"] = i;
    entry["name"] = item.name;
    entry["split"] = slots[i].split;
    entry["label"] = item.label;
    entry["defect_type"] = item.defect_type;
    entry["cube"] = "cubes/" + cube_name;
    entry["cube_hash"] = file_hash_hex(paths.cubes_dir / cube_name);
    if (!item.mask.empty()) {
      GrayImage mask_img;
      mask_img.height = cfg.resize;
      mask_img.width = cfg.resize;
      std::vector<std::uint8_t> resized_mask = resize_mask_nearest(
          item.mask, item.image.height, item.image.width, cfg.resize, cfg.resize);
      mask_img.values.resize(resized_mask.size());
      for (std::size_t k = 0; k < resized_mask.size(); ++k)
        mask_img.values[k] = resized_mask[k] ? 255 : 0;
      std::string mask_name = detail::mask_file_name(i);
      write_gray_png(paths.cubes_dir / mask_name, mask_img);
      entry["mask"] = "cubes/" + mask_name;
    } else {
      entry["mask"] = nullptr;
    }
    entries.push_back(entry);
  }

  nlohmann::json manifest;
  manifest["version"] = 1;
  manifest["class"] = cfg.class_name;
  manifest["resize"] = cfg.resize;
  manifest["grid"] = {{"points", cfg.grid_points},
                      {"start_nm", cfg.grid_start_nm},
                      {"stop_nm", cfg.grid_stop_nm},
                      {"anchors", cfg.anchors}};
  manifest["split_fraction"] = cfg.split_fraction;
  manifest["seed"] = cfg.seed;
  manifest["moved_to_train"] = moved;
  manifest["minmax_hash"] = file_hash_hex(paths.minmax);
  manifest["entries"] = entries;
  write_file(paths.cache_manifest, manifest.dump(2) + "\n");

  log << "synth: cached " << slots.size() << " cubes (" << train.items.size() << " train, "
      << test.items.size() << " test; " << moved.size() << " anomalous moved to train) under "
      << paths.cache_dir.string() << "\n";
}

struct CachedClass {
  WavelengthGrid grid;
  MinMaxStats stats;
  CubeDataset train;
  CubeDataset test;
};

// Loads the cube cache written by cmd_synth, verifying stored hashes.
inline CachedClass load_cache(const RunConfig& cfg) {
  RunPaths paths = make_paths(cfg);
  if (!std::filesystem::exists(paths.cache_manifest))
    throw Error(ErrorKind::artifact, "no cube cache at " + paths.cache_manifest.string() +
                                         "; run the synth command first");
  std::vector<std::uint8_t> bytes = read_file(paths.cache_manifest);
  nlohmann::json manifest = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (manifest.is_discarded())
    throw Error(ErrorKind::artifact, "invalid JSON in " + paths.cache_manifest.string());

  CachedClass cache;
  try {
    if (manifest.at("version").get<int>() != 1)
      throw Error(ErrorKind::artifact, "unsupported cache version");
    auto [stats, grid] = load_minmax(paths.minmax);
    cache.stats = std::move(stats);
    cache.grid = std::move(grid);
    for (const auto& entry : manifest.at("entries")) {
      CubeItem item;
      item.name = entry.at("name").get<std::string>();
      item.label = entry.at("label").get<int>();
      std::filesystem::path cube_path = paths.cache_dir / entry.at("cube").get<std::string>();
      if (file_hash_hex(cube_path) != entry.at("cube_hash").get<std::string>())
        throw Error(ErrorKind::artifact, "cube cache entry " + item.name +
                                             " does not match its recorded hash; re-run synth");
      item.cube = load_cube(cube_path);
      if (!entry.at("mask").is_null()) {
        GrayImage mask_img = read_gray_png(paths.cache_dir / entry.at("mask").get<std::string>());
        item.mask.resize(mask_img.values.size());
        for (std::size_t k = 0; k < mask_img.values.size(); ++k)
          item.mask[k] = mask_img.values[k] >= 128 ? 1 : 0;
      }
      std::string split = entry.at("split").get<std::string>();
      (split == "train" ? cache.train : cache.test).push_back(std::move(item));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::artifact,
                "malformed cache manifest " + paths.cache_manifest.string() + ": " + e.what());
  }
  if (cache.train.empty())
    throw Error(ErrorKind::artifact, "cube cache holds no training cubes");
  return cache;
}

namespace detail {

inline ForestConfig forest_config(const RunConfig& cfg, std::uint64_t seed) {
  ForestConfig fc;
  fc.trees = cfg.forest_trees;
  fc.max_depth = cfg.forest_max_depth;
  fc.min_leaf = cfg.forest_min_leaf;
  fc.features_per_split = cfg.forest_features_per_split;
  fc.seed = seed;
  return fc;
}

inline void print_top_channels(const ChannelRanking& ranking, const WavelengthGrid& grid,
                               std::size_t n, std::ostream& log) {
  std::vector<std::size_t> top = ranking.top_channels(n);
  log << ranking.method << " top-" << n << " channels:";
  for (std::size_t c : top) {
    log << ' ' << c << " (" << std::fixed << std::setprecision(1) << grid.points[c] << " nm)";
    log.unsetf(std::ios::fixed);
  }
  log << "\n";
}

}  // namespace detail

// Ranks channels (FI or PI) or fits the PCA model from sampled train pixels.
inline void cmd_rank(const RunConfig& cfg, std::ostream& log) {
  validate_config(cfg);
  if (cfg.method == "origin")
    throw Error(ErrorKind::usage, "method 'origin' uses every channel; nothing to rank");
  RunPaths paths = make_paths(cfg);
  CachedClass cache = load_cache(cfg);

  PixelSample sample = sample_pixels(cache.train, cfg.sample_per_image, cfg.sample_balance,
                                     RngStream(cfg.seed).split(kStageSample));
  RngStream rank_rng = RngStream(cfg.seed).split(kStageRank);

  if (cfg.method == "pca") {
    PcaModel model = fit_pca(sample.x);
    save_pca(paths.pca, model);
    log << "pca eigenvalues (descending, first " << std::min<std::size_t>(cfg.top_n, 8) << "):";
    for (std::size_t i = 0; i < std::min<std::size_t>(cfg.top_n, 8); ++i)
      log << ' ' << std::setprecision(6) << model.eigenvalues[i];
    log << "\n" << "pca model written to " << paths.pca.string() << "\n";
    return;
  }

  ChannelRanking ranking;
  if (cfg.method == "fi") {
    Forest forest =
        fit_random_forest(sample.x, sample.y, detail::forest_config(cfg, rank_rng.split(1).seed()));
    ranking = feature_importance(forest);
  } else {  // pi
    RngStream half_rng = rank_rng.split(3);
    std::vector<std::size_t> perm = random_permutation(sample.x.rows(), half_rng);
    std::size_t fit_count = sample.x.rows() / 2;
    if (fit_count == 0 || fit_count == sample.x.rows())
      throw Error(ErrorKind::dataset, "too few sampled pixels to split for validation");
    Matrix x_fit(fit_count, sample.x.cols());
    Matrix x_val(sample.x.rows() - fit_count, sample.x.cols());
    std::vector<int> y_fit(fit_count), y_val(sample.x.rows() - fit_count);
    for (std::size_t r = 0; r < sample.x.rows(); ++r) {
      const double* src = sample.x.row(perm[r]);
      if (r < fit_count) {
        std::copy_n(src, sample.x.cols(), x_fit.row(r));
        y_fit[r] = sample.y[perm[r]];
      } else {
        std::copy_n(src, sample.x.cols(), x_val.row(r - fit_count));
        y_val[r - fit_count] = sample.y[perm[r]];
      }
    }
    Forest forest =
        fit_random_forest(x_fit, y_fit, detail::forest_config(cfg, rank_rng.split(1).seed()));
    ranking = permutation_importance(forest, x_val, y_val, cfg.pi_repeats, rank_rng.split(2));
  }
  save_ranking(paths.ranking, ranking);
  detail::print_top_channels(ranking, cache.grid, cfg.top_n, log);
  log << "ranking written to " << paths.ranking.string() << "\n";
}

namespace detail {

// Applies the method's dimensionality reduction to one cube.
struct Reducer {
  std::string method;
  std::size_t top_n = 0;
  ChannelRanking ranking;  // fi/pi
  PcaModel pca;            // pca

  SpectralCube operator()(const SpectralCube& cube) const {
    if (method == "origin") return cube;
    if (method == "pca") return pca_transform(pca, cube, top_n);
    return select_channels(cube, ranking, top_n);
  }

  std::size_t output_channels(std::size_t input_channels) const {
    return method == "origin" ? input_channels : top_n;
  }
};

inline Reducer make_reducer(const RunConfig& cfg, std::size_t channels) {
  RunPaths paths = make_paths(cfg);
  Reducer r;
  r.method = cfg.method;
  r.top_n = cfg.top_n;
  if (cfg.method == "fi" || cfg.method == "pi") {
    if (!std::filesystem::exists(paths.ranking))
      throw Error(ErrorKind::artifact, "no ranking at " + paths.ranking.string() +
                                           "; run the rank command first");
    r.ranking = load_ranking(paths.ranking, channels);
    if (r.ranking.method != (cfg.method == "fi" ? "FI" : "PI"))
      throw Error(ErrorKind::artifact, "ranking at " + paths.ranking.string() +
                                           " was produced by method " + r.ranking.method);
  } else if (cfg.method == "pca") {
    if (!std::filesystem::exists(paths.pca))
      throw Error(ErrorKind::artifact,
                  "no PCA model at " + paths.pca.string() + "; run the rank command first");
    r.pca = load_pca(paths.pca, channels);
  }
  return r;
}

}  // namespace detail

// Trains the anomaly scorer on reduced training cubes and saves the weights.
inline void cmd_train(const RunConfig& cfg, std::ostream& log) {
  validate_config(cfg);
  RunPaths paths = make_paths(cfg);
  CachedClass cache = load_cache(cfg);
  detail::Reducer reduce = detail::make_reducer(cfg, cache.grid.size());

  std::vector<SpectralCube> reduced;
  reduced.reserve(cache.train.size());
  for (const CubeItem& item : cache.train) reduced.push_back(reduce(item.cube));
  std::vector<TrainItem> items;
  for (std::size_t i = 0; i < cache.train.size(); ++i)
    items.push_back({&reduced[i], cache.train[i].label});

  RngStream train_rng = RngStream(cfg.seed).split(kStageTrain);
  ScorerNet net =
      init_model(reduce.output_channels(cache.grid.size()), train_rng.split(0).seed());
  TrainConfig tc;
  tc.learning_rate = cfg.train_lr;
  tc.batch_size = cfg.train_batch;
  tc.epochs = cfg.train_epochs;
  tc.early_stop = cfg.train_early_stop;
  tc.seed = train_rng.split(1).seed();
  std::vector<double> history = train(net, items, tc);

  save_weights(paths.weights, net);
  std::ostringstream csv;
  csv << "epoch,loss\n" << std::setprecision(17);
  for (std::size_t e = 0; e < history.size(); ++e) csv << e << ',' << history[e] << '\n';
  write_file(paths.loss_history, csv.str());

  log << "train: " << history.size() << " epochs on " << items.size() << " cubes; final loss "
      << std::setprecision(6) << (history.empty() ? 0.0 : history.back()) << "; weights "
      << weights_checksum(net) << " -> " << paths.weights.string() << "\n";
}

// Scores the test cubes and reports AUROC as a percentage.
inline double cmd_eval(const RunConfig& cfg, std::ostream& log) {
  validate_config(cfg);
  RunPaths paths = make_paths(cfg);
  CachedClass cache = load_cache(cfg);
  if (cache.test.empty()) throw Error(ErrorKind::dataset, "cube cache holds no test cubes");
  detail::Reducer reduce = detail::make_reducer(cfg, cache.grid.size());
  ScorerNet net = load_weights(paths.weights.string(), reduce.output_channels(cache.grid.size()));

  std::vector<double> scores;
  std::vector<int> labels;
  for (const CubeItem& item : cache.test) {
    scores.push_back(score_cube(net, reduce(item.cube)));
    labels.push_back(item.label);
  }
  double percent = to_percent(auroc(scores, labels));

  std::ostringstream csv;
  csv << "class,method,auroc_percent,n\n";
  csv << cfg.class_name << ',' << cfg.method << ',' << std::fixed << std::setprecision(1)
      << percent << ',' << cache.test.size() << '\n';
  write_file(paths.eval_csv, csv.str());

  log << "eval: AUROC " << cfg.class_name << '/' << cfg.method << " = " << std::fixed
      << std::setprecision(1) << percent << " (n=" << cache.test.size() << ") -> "
      << paths.eval_csv.string() << "\n";
  return percent;
}

// Benchmarks origin against the configured method on freshly seeded nets.
inline std::vector<LatencyReport> cmd_bench(const RunConfig& cfg, std::ostream& log) {
  validate_config(cfg);
  RunPaths paths = make_paths(cfg);
  CachedClass cache = load_cache(cfg);
  if (cache.test.empty()) throw Error(ErrorKind::dataset, "cube cache holds no test cubes");

  std::vector<const SpectralCube*> cubes;
  for (const CubeItem& item : cache.test) cubes.push_back(&item.cube);

  RngStream bench_rng = RngStream(cfg.seed).split(kStageBench);
  ScorerNet origin_net = init_model(cache.grid.size(), bench_rng.split(0).seed());
  std::vector<LatencyReport> reports;
  reports.push_back(time_pipeline(
      "origin", [&](const SpectralCube& cube) { return score_cube(origin_net, cube); }, cubes,
      cfg.bench_warmup, cfg.bench_reps));

  if (cfg.method != "origin") {
    detail::Reducer reduce = detail::make_reducer(cfg, cache.grid.size());
    ScorerNet method_net = init_model(cfg.top_n, bench_rng.split(1).seed());
    reports.push_back(time_pipeline(
        cfg.method, [&](const SpectralCube& cube) { return score_cube(method_net, reduce(cube)); },
        cubes, cfg.bench_warmup, cfg.bench_reps));
  }

  save_latency_csv(paths.bench_csv, reports);
  save_latency_json(paths.bench_json, reports);

  log << "bench: " << reports[0].environment << "\n";
  for (const LatencyReport& r : reports)
    log << "  " << r.method << ": " << std::scientific << std::setprecision(3) << r.mean_sec
        << " sec/sample (median " << r.median_sec << ")\n";
  log.unsetf(std::ios::scientific);
  log << "speedup_vs_origin " << reports.back().method << " = " << std::fixed
      << std::setprecision(3) << speedup(reports.front(), reports.back()) << "\n";
  log.unsetf(std::ios::fixed);
  return reports;
}

// Renders the ranking as an SVG bar chart, one bar per channel in wavelength
// order, with the top-N bars highlighted.
inline void cmd_plot(const RunConfig& cfg, std::ostream& log) {
  validate_config(cfg);
  if (cfg.method != "fi" && cfg.method != "pi")
    throw Error(ErrorKind::usage, "plot needs an importance ranking; use method fi or pi");
  RunPaths paths = make_paths(cfg);
  if (!std::filesystem::exists(paths.ranking))
    throw Error(ErrorKind::artifact,
                "no ranking at " + paths.ranking.string() + "; run the rank command first");
  ChannelRanking ranking = load_ranking(paths.ranking);
  auto [stats, grid] = load_minmax(make_paths(cfg).minmax);
  if (grid.size() != ranking.channel_count)
    throw Error(ErrorKind::artifact, "ranking and cached grid disagree on channel count");

  std::vector<double> by_channel(ranking.channel_count, 0.0);
  double max_importance = 0.0;
  for (const RankingEntry& e : ranking.entries) {
    by_channel[e.channel] = e.importance;
    max_importance = std::max(max_importance, e.importance);
  }
  if (!(max_importance > 0.0))
    throw Error(ErrorKind::artifact, "ranking holds no positive importance to plot");
  std::vector<std::size_t> top = ranking.top_channels(std::min(cfg.top_n, ranking.channel_count));
  std::vector<bool> flagged(ranking.channel_count, false);
  for (std::size_t c : top) flagged[c] = true;

  const double width = 1000.0, height = 380.0;
  const double left = 60.0, right = 20.0, top_pad = 30.0, bottom = 50.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top_pad - bottom;
  const double bar_w = plot_w / static_cast<double>(ranking.channel_count);

  std::ostringstream svg;
  svg << std::fixed << std::setprecision(2);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << left << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">"
      << ranking.method << " channel importance (top " << top.size() << " highlighted)</text>\n";
  for (std::size_t c = 0; c < ranking.channel_count; ++c) {
    double h = plot_h * (by_channel[c] / max_importance);
    double x = left + bar_w * static_cast<double>(c);
    double y = top_pad + (plot_h - h);
    svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << std::max(bar_w - 0.2, 0.2)
        << "\" height=\"" << h << "\" fill=\"" << (flagged[c] ? "#d62728" : "#4878a8")
        << "\"><title>channel " << c << ", " << grid.points[c] << " nm: "
        << std::setprecision(6) << by_channel[c] << std::setprecision(2) << "</title></rect>\n";
  }
  std::size_t ticks = std::min<std::size_t>(6, ranking.channel_count);
  for (std::size_t t = 0; t < ticks; ++t) {
    std::size_t c = ticks == 1 ? 0 : t * (ranking.channel_count - 1) / (ticks - 1);
    double x = left + bar_w * (static_cast<double>(c) + 0.5);
    svg << "<text x=\"" << x << "\" y=\"" << height - 25.0
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
        << std::setprecision(0) << grid.points[c] << std::setprecision(2) << "</text>\n";
  }
  svg << "<text x=\"" << left + plot_w / 2.0 << "\" y=\"" << height - 8.0
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">wavelength (nm)"
      << "</text>\n";
  svg << "</svg>\n";
  write_file(paths.plot_svg, svg.str());
  log << "plot: " << ranking.channel_count << " bars -> " << paths.plot_svg.string() << "\n";
}

// synth -> rank -> train -> eval -> bench, then a manifest that pins the
// config, stage seeds, format versions, and artifact hashes.
inline void cmd_pipeline(const RunConfig& cfg, std::ostream& log) {
  validate_config(cfg);
  RunPaths paths = make_paths(cfg);
  cmd_synth(cfg, log);
  if (cfg.method != "origin") cmd_rank(cfg, log);
  cmd_train(cfg, log);
  cmd_eval(cfg, log);
  cmd_bench(cfg, log);

  nlohmann::json manifest;
  manifest["version"] = 1;
  manifest["class"] = cfg.class_name;
  manifest["method"] = cfg.method;
  manifest["config"] = {
      {"dataset.root", cfg.dataset_root.string()},
      {"dataset.class", cfg.class_name},
      {"dataset.resize", cfg.resize},
      {"grid.points", cfg.grid_points},
      {"grid.start_nm", cfg.grid_start_nm},
      {"grid.stop_nm", cfg.grid_stop_nm},
      {"grid.anchors", cfg.anchors},
      {"method", cfg.method},
      {"top_n", cfg.top_n},
      {"seed", cfg.seed},
      {"out", cfg.out_dir.string()},
      {"split.fraction", cfg.split_fraction},
      {"sample.per_image", cfg.sample_per_image},
      {"sample.balance", cfg.sample_balance},
      {"forest.trees", cfg.forest_trees},
      {"forest.max_depth", cfg.forest_max_depth},
      {"forest.min_leaf", cfg.forest_min_leaf},
      {"forest.features_per_split", cfg.forest_features_per_split},
      {"pi.repeats", cfg.pi_repeats},
      {"train.lr", cfg.train_lr},
      {"train.batch", cfg.train_batch},
      {"train.epochs", cfg.train_epochs},
      {"train.early_stop", cfg.train_early_stop},
      {"bench.warmup", cfg.bench_warmup},
      {"bench.reps", cfg.bench_reps},
  };
  manifest["seeds"] = {{"synth", stage_seed(cfg, kStageSynth)},
                       {"split", stage_seed(cfg, kStageSplit)},
                       {"sample", stage_seed(cfg, kStageSample)},
                       {"rank", stage_seed(cfg, kStageRank)},
                       {"train", stage_seed(cfg, kStageTrain)},
                       {"bench", stage_seed(cfg, kStageBench)}};
  manifest["formats"] = {{"cube", "HSIC v1"},
                         {"minmax", "minmax JSON v1"},
                         {"ranking", "ranking JSON v1"},
                         {"pca", "PCAM v1"},
                         {"weights", "SCNW v1"}};
  nlohmann::json artifacts;
  artifacts["cache_manifest"] = file_hash_hex(paths.cache_manifest);
  artifacts["minmax"] = file_hash_hex(paths.minmax);
  if (cfg.method == "fi" || cfg.method == "pi")
    artifacts["ranking"] = file_hash_hex(paths.ranking);
  else if (cfg.method == "pca")
    artifacts["pca"] = file_hash_hex(paths.pca);
  artifacts["weights"] = file_hash_hex(paths.weights);
  artifacts["loss_history"] = file_hash_hex(paths.loss_history);
  artifacts["eval"] = file_hash_hex(paths.eval_csv);
  manifest["artifacts"] = artifacts;
  write_file(paths.run_manifest, manifest.dump(2) + "\n");
  log << "pipeline: manifest -> " << paths.run_manifest.string() << "\n";
}

}  // namespace specsel::cli
