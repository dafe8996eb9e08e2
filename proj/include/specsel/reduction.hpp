#pragma once

// Dimensionality-reduction methods: random-forest feature importance,
// permutation importance, and PCA, plus channel selection/projection and
// the ranking/PCA artifact files.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "specsel/common.hpp"
#include "specsel/datacube.hpp"
#include "specsel/evalmetrics.hpp"
#include "specsel/numeric.hpp"

namespace specsel {

// ---------------------------------------------------------------------------
// Decision trees and forests (CART, Gini impurity, binary labels)

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double probability = 0.0;   // leaf: positive-class fraction
  double decrease = 0.0;      // split: Gini impurity decrease at this node
  std::size_t sample_count = 0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(const double* row) const {
    int i = 0;
    while (nodes[i].feature >= 0)
      i = row[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
    return nodes[i].probability;
  }
};

struct ForestConfig {
  std::size_t trees = 100;
  std::size_t max_depth = 8;
  std::size_t min_leaf = 5;
  std::size_t features_per_split = 0;  // 0: ceil(sqrt(feature count))
  std::uint64_t seed = 0;
};

struct Forest {
  std::vector<DecisionTree> trees;
  std::size_t feature_count = 0;

  double predict(const double* row) const {
    double s = 0.0;
    for (const DecisionTree& t : trees) s += t.predict(row);
    return s / static_cast<double>(trees.size());
  }

  std::vector<double> predict_rows(const Matrix& x) const {
    std::vector<double> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict(x.row(r));
    return out;
  }
};

namespace detail {

inline double gini(std::size_t pos, std::size_t total) {
  if (total == 0) return 0.0;
  double p = static_cast<double>(pos) / static_cast<double>(total);
  return 2.0 * p * (1.0 - p);
}

struct TreeBuilder {
  const Matrix& x;
  const std::vector<int>& y;
  const ForestConfig& cfg;
  std::size_t features_per_split;
  RngStream& rng;
  DecisionTree& tree;
  std::vector<std::size_t> feature_pool;          // persistent partial-shuffle buffer
  std::vector<std::pair<double, int>> sorted_buf;  // (value, label) scratch

  TreeBuilder(const Matrix& x_, const std::vector<int>& y_, const ForestConfig& cfg_,
              std::size_t fps, RngStream& rng_, DecisionTree& tree_)
      : x(x_), y(y_), cfg(cfg_), features_per_split(fps), rng(rng_), tree(tree_) {
    feature_pool.resize(x.cols());
    std::iota(feature_pool.begin(), feature_pool.end(), std::size_t{0});
  }

  // Returns the node index for the subtree over `rows`.
  int build(std::vector<std::size_t>& rows, std::size_t depth) {
    std::size_t n = rows.size();
    std::size_t pos = 0;
    for (std::size_t r : rows) pos += static_cast<std::size_t>(y[r]);

    int node_index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[node_index].sample_count = n;
    tree.nodes[node_index].probability =
        static_cast<double>(pos) / static_cast<double>(n);

    bool pure = (pos == 0 || pos == n);
    if (pure || depth >= cfg.max_depth || n < 2 * cfg.min_leaf) return node_index;

    // Seeded feature subset: partial Fisher-Yates over the persistent pool,
    // then sorted so candidates are scanned in ascending feature order
    // (ties between equal decreases resolve to the smaller feature index).
    std::size_t k = std::min(features_per_split, feature_pool.size());
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.next_below(feature_pool.size() - i));
      std::swap(feature_pool[i], feature_pool[j]);
    }
    std::vector<std::size_t> chosen(feature_pool.begin(),
                                    feature_pool.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(chosen.begin(), chosen.end());

    double node_gini = gini(pos, n);
    double best_decrease = -1.0;
    std::size_t best_feature = 0;
    double best_threshold = 0.0;

    for (std::size_t j : chosen) {
      sorted_buf.clear();
      for (std::size_t r : rows) sorted_buf.emplace_back(x(r, j), y[r]);
      std::sort(sorted_buf.begin(), sorted_buf.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });

      std::size_t left_pos = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_pos += static_cast<std::size_t>(sorted_buf[i].second);
        if (sorted_buf[i].first == sorted_buf[i + 1].first) continue;
        std::size_t nl = i + 1;
        std::size_t nr = n - nl;
        if (nl < cfg.min_leaf || nr < cfg.min_leaf) continue;
        double child =
            (static_cast<double>(nl) * gini(left_pos, nl) +
             static_cast<double>(nr) * gini(pos - left_pos, nr)) /
            static_cast<double>(n);
        double decrease = node_gini - child;
        if (decrease > best_decrease) {
          best_decrease = decrease;
          best_feature = j;
          best_threshold = 0.5 * (sorted_buf[i].first + sorted_buf[i + 1].first);
        }
      }
    }

    if (best_decrease < 0.0) return node_index;  // no valid boundary anywhere

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows)
      (x(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    tree.nodes[node_index].feature = static_cast<int>(best_feature);
    tree.nodes[node_index].threshold = best_threshold;
    tree.nodes[node_index].decrease = best_decrease;
    int left = build(left_rows, depth + 1);
    int right = build(right_rows, depth + 1);
    tree.nodes[node_index].left = left;
    tree.nodes[node_index].right = right;
    return node_index;
  }
};

inline void validate_forest_input(const Matrix& x, const std::vector<int>& y) {
  if (x.rows() == 0 || x.cols() == 0) throw Error(ErrorKind::dataset, "empty training matrix");
  if (x.rows() != y.size())
    throw Error(ErrorKind::dataset, "label count does not match sample count");
  if (x.rows() < 2) throw Error(ErrorKind::dataset, "need at least 2 samples");
  bool has0 = false, has1 = false;
  for (int label : y) {
    if (label == 0) has0 = true;
    else if (label == 1) has1 = true;
    else throw Error(ErrorKind::dataset, "labels must be 0 or 1");
  }
  if (!has0 || !has1) throw Error(ErrorKind::dataset, "training labels are single-class");
}

}  // namespace detail

// Trains one tree on the given rows (no bootstrap). Exposed so exhaustive
// split-enumeration checks can probe the split selection directly.
inline DecisionTree fit_decision_tree(const Matrix& x, const std::vector<int>& y,
                                      const ForestConfig& cfg, RngStream& rng,
                                      std::vector<std::size_t> rows) {
  DecisionTree tree;
  std::size_t fps = cfg.features_per_split == 0
                        ? static_cast<std::size_t>(
                              std::ceil(std::sqrt(static_cast<double>(x.cols()))))
                        : std::min(cfg.features_per_split, x.cols());
  detail::TreeBuilder builder(x, y, cfg, fps, rng, tree);
  builder.build(rows, 0);
  return tree;
}

inline Forest fit_random_forest(const Matrix& x, const std::vector<int>& y,
                                const ForestConfig& cfg) {
  detail::validate_forest_input(x, y);
  if (cfg.trees == 0) throw Error(ErrorKind::config, "forest needs at least one tree");
  if (cfg.min_leaf == 0) throw Error(ErrorKind::config, "min_leaf must be positive");

  Forest forest;
  forest.feature_count = x.cols();
  forest.trees.resize(cfg.trees);
  RngStream base(cfg.seed);
  std::size_t n = x.rows();
  for (std::size_t t = 0; t < cfg.trees; ++t) {
    RngStream tree_rng = base.split(t);
    std::vector<std::size_t> bootstrap(n);
    for (std::size_t i = 0; i < n; ++i)
      bootstrap[i] = static_cast<std::size_t>(tree_rng.next_below(n));
    forest.trees[t] = fit_decision_tree(x, y, cfg, tree_rng, std::move(bootstrap));
  }
  return forest;
}

// ---------------------------------------------------------------------------
// Channel rankings

struct RankingEntry {
  std::size_t channel = 0;
  double importance = 0.0;
};

struct ChannelRanking {
  std::string method;  // "FI" or "PI"
  std::size_t channel_count = 0;
  std::vector<RankingEntry> entries;  // importance descending, ties by channel

  std::vector<std::size_t> top_channels(std::size_t n) const {
    if (n > entries.size())
      throw Error(ErrorKind::config, "requested more channels than the ranking holds");
    std::vector<std::size_t> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = entries[i].channel;
    return out;
  }
};

namespace detail {

inline ChannelRanking make_ranking(std::string method, std::vector<double> scores) {
  ChannelRanking r;
  r.method = std::move(method);
  r.channel_count = scores.size();
  r.entries.resize(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) r.entries[i] = {i, scores[i]};
  std::stable_sort(r.entries.begin(), r.entries.end(), [](const auto& a, const auto& b) {
    if (a.importance != b.importance) return a.importance > b.importance;
    return a.channel < b.channel;
  });
  return r;
}

}  // namespace detail

// Mean decrease in impurity: each split contributes its sample count times
// its Gini decrease to its feature; scores are normalized to sum to 1
// (uniform when no split exists anywhere).
inline ChannelRanking feature_importance(const Forest& forest) {
  if (forest.trees.empty()) throw Error(ErrorKind::dataset, "forest is untrained");
  std::vector<double> raw(forest.feature_count, 0.0);
  for (const DecisionTree& tree : forest.trees)
    for (const TreeNode& node : tree.nodes)
      if (node.feature >= 0)
        raw[static_cast<std::size_t>(node.feature)] +=
            static_cast<double>(node.sample_count) * node.decrease;

  double total = std::accumulate(raw.begin(), raw.end(), 0.0);
  if (total == 0.0) {
    std::fill(raw.begin(), raw.end(), 1.0 / static_cast<double>(raw.size()));
  } else {
    for (double& v : raw) v /= total;
  }
  return detail::make_ranking("FI", std::move(raw));
}

// PI_j = s - mean_k s_{k,j}: the AUROC drop when column j of the validation
// matrix is shuffled (fresh sub-stream per (feature, repeat)).
inline ChannelRanking permutation_importance(const Forest& forest, const Matrix& x_val,
                                             const std::vector<int>& y_val, std::size_t repeats,
                                             const RngStream& rng) {
  if (repeats == 0) throw Error(ErrorKind::config, "permutation importance needs repeats >= 1");
  detail::validate_forest_input(x_val, y_val);
  if (x_val.cols() != forest.feature_count)
    throw Error(ErrorKind::dataset, "validation feature count does not match forest");

  double base_score = auroc(forest.predict_rows(x_val), y_val);

  Matrix work = x_val;
  std::size_t m = work.rows();
  std::vector<double> saved(m), column(m);
  std::vector<double> scores(work.cols());
  for (std::size_t j = 0; j < work.cols(); ++j) {
    for (std::size_t r = 0; r < m; ++r) saved[r] = work(r, j);
    double permuted_sum = 0.0;
    for (std::size_t k = 0; k < repeats; ++k) {
      RngStream sub = rng.split(j * repeats + k);
      column = saved;
      shuffle(column, sub);
      for (std::size_t r = 0; r < m; ++r) work(r, j) = column[r];
      permuted_sum += auroc(forest.predict_rows(work), y_val);
    }
    for (std::size_t r = 0; r < m; ++r) work(r, j) = saved[r];
    scores[j] = base_score - permuted_sum / static_cast<double>(repeats);
  }
  return detail::make_ranking("PI", std::move(scores));
}

// ---------------------------------------------------------------------------
// PCA

struct PcaModel {
  std::vector<double> mean;
  std::vector<double> eigenvalues;  // descending
  Matrix components;                // column k is the k-th eigenvector
};

inline PcaModel fit_pca(const Matrix& x) {
  if (x.rows() < 2) throw Error(ErrorKind::dataset, "PCA needs at least 2 samples");
  PcaModel model;
  model.mean = column_means(x);
  EigenResult eig = sym_eig(covariance(x));
  for (double& v : eig.values) {
    if (v < -1e-10)
      throw Error(ErrorKind::numeric, "covariance produced a significantly negative eigenvalue");
    if (v < 0.0) v = 0.0;
  }
  model.eigenvalues = std::move(eig.values);
  model.components = std::move(eig.vectors);
  return model;
}

// Per pixel: subtract the mean spectrum, project onto the first n components.
inline SpectralCube pca_transform(const PcaModel& model, const SpectralCube& cube,
                                  std::size_t n_components) {
  std::size_t c = model.mean.size();
  if (cube.channels != c)
    throw Error(ErrorKind::dataset, "cube channel count does not match the PCA model");
  if (n_components > c)
    throw Error(ErrorKind::config, "cannot project onto more components than channels");

  SpectralCube out(n_components, cube.height, cube.width);
  std::size_t plane = cube.plane_size();
  std::vector<double> centered(c);
  for (std::size_t p = 0; p < plane; ++p) {
    for (std::size_t ch = 0; ch < c; ++ch)
      centered[ch] = static_cast<double>(cube.values[ch * plane + p]) - model.mean[ch];
    for (std::size_t k = 0; k < n_components; ++k) {
      double s = 0.0;
      for (std::size_t ch = 0; ch < c; ++ch) s += centered[ch] * model.components(ch, k);
      out.values[k * plane + p] = static_cast<float>(s);
    }
  }
  return out;
}

inline SpectralCube pca_inverse_transform(const PcaModel& model, const SpectralCube& reduced) {
  std::size_t c = model.mean.size();
  if (reduced.channels > c)
    throw Error(ErrorKind::dataset, "reduced cube has more channels than the PCA model");
  SpectralCube out(c, reduced.height, reduced.width);
  std::size_t plane = reduced.plane_size();
  for (std::size_t p = 0; p < plane; ++p) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      double s = model.mean[ch];
      for (std::size_t k = 0; k < reduced.channels; ++k)
        s += static_cast<double>(reduced.values[k * plane + p]) * model.components(ch, k);
      out.values[ch * plane + p] = static_cast<float>(s);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Channel selection

inline SpectralCube select_channels(const SpectralCube& cube, const ChannelRanking& ranking,
                                    std::size_t n) {
  if (n > cube.channels)
    throw Error(ErrorKind::config, "cannot select more channels than the cube has");
  std::vector<std::size_t> top = ranking.top_channels(n);
  SpectralCube out(n, cube.height, cube.width);
  std::size_t plane = cube.plane_size();
  for (std::size_t i = 0; i < n; ++i) {
    if (top[i] >= cube.channels)
      throw Error(ErrorKind::artifact, "ranking channel index out of range for this cube");
    std::copy_n(cube.plane(top[i]), plane, out.values.begin() + static_cast<std::ptrdiff_t>(i * plane));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Artifact files

inline void save_ranking(const std::filesystem::path& path, const ChannelRanking& ranking) {
  nlohmann::json j;
  j["version"] = 1;
  j["method"] = ranking.method;
  j["channel_count"] = ranking.channel_count;
  j["entries"] = nlohmann::json::array();
  for (const RankingEntry& e : ranking.entries)
    j["entries"].push_back({{"channel", e.channel}, {"importance", e.importance}});
  write_file(path, j.dump(2) + "\n");
}

inline ChannelRanking load_ranking(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes = read_file(path);
  nlohmann::json j = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::artifact, "invalid JSON in " + path.string());
  try {
    if (j.at("version").get<int>() != 1)
      throw Error(ErrorKind::artifact, "unsupported ranking version in " + path.string());
    ChannelRanking r;
    r.method = j.at("method").get<std::string>();
    r.channel_count = j.at("channel_count").get<std::size_t>();
    std::vector<bool> seen(r.channel_count, false);
    for (const auto& e : j.at("entries")) {
      RankingEntry entry{e.at("channel").get<std::size_t>(), e.at("importance").get<double>()};
      if (entry.channel >= r.channel_count || seen[entry.channel])
        throw Error(ErrorKind::artifact,
                    "ranking channel indices invalid or duplicated in " + path.string());
      seen[entry.channel] = true;
      r.entries.push_back(entry);
    }
    if (r.entries.size() != r.channel_count)
      throw Error(ErrorKind::artifact, "ranking entry count mismatch in " + path.string());
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::artifact, "malformed ranking " + path.string() + ": " + e.what());
  }
}

inline ChannelRanking load_ranking(const std::filesystem::path& path,
                                   std::size_t expected_channels) {
  ChannelRanking r = load_ranking(path);
  if (r.channel_count != expected_channels)
    throw Error(ErrorKind::artifact,
                "ranking in " + path.string() + " covers " + std::to_string(r.channel_count) +
                    " channels, expected " + std::to_string(expected_channels));
  return r;
}

inline void save_pca(const std::filesystem::path& path, const PcaModel& model) {
  std::size_t c = model.mean.size();
  std::vector<std::uint8_t> bytes;
  bytes.reserve(10 + 8 * (2 * c + c * c));
  bytes.insert(bytes.end(), {'P', 'C', 'A', 'M'});
  append_u16(bytes, 1);
  append_u32(bytes, static_cast<std::uint32_t>(c));
  for (double v : model.mean) append_f64(bytes, v);
  for (double v : model.eigenvalues) append_f64(bytes, v);
  for (std::size_t r = 0; r < c; ++r)
    for (std::size_t k = 0; k < c; ++k) append_f64(bytes, model.components(r, k));
  write_file(path, bytes);
}

inline PcaModel load_pca(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes = read_file(path);
  ByteReader reader(bytes, path.string());
  reader.expect_magic("PCAM");
  if (reader.take_u16() != 1)
    throw Error(ErrorKind::artifact, "unsupported PCA version in " + path.string());
  std::uint32_t c = reader.take_u32();
  if (c == 0) throw Error(ErrorKind::artifact, "empty PCA model in " + path.string());
  PcaModel model;
  model.mean.resize(c);
  model.eigenvalues.resize(c);
  model.components = Matrix(c, c);
  for (double& v : model.mean) v = reader.take_f64();
  for (double& v : model.eigenvalues) v = reader.take_f64();
  for (std::size_t r = 0; r < c; ++r)
    for (std::size_t k = 0; k < c; ++k) model.components(r, k) = reader.take_f64();
  reader.expect_done();
  return model;
}

inline PcaModel load_pca(const std::filesystem::path& path, std::size_t expected_channels) {
  PcaModel model = load_pca(path);
  if (model.mean.size() != expected_channels)
    throw Error(ErrorKind::artifact,
                "PCA model in " + path.string() + " covers " +
                    std::to_string(model.mean.size()) + " channels, expected " +
                    std::to_string(expected_channels));
  return model;
}

}  // namespace specsel
