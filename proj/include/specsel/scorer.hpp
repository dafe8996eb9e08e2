#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "specsel/common.hpp"
#include "specsel/datacube.hpp"
#include "specsel/numeric.hpp"

namespace specsel {

// Output widths of the four stride-2 convolution blocks.
inline constexpr std::array<std::size_t, 4> kConvWidths = {16, 32, 64, 64};
inline constexpr std::size_t kKernel = 3;
inline constexpr std::size_t kDenseIn = kConvWidths[3];

template <typename S>
struct ConvLayer {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::vector<S> weight;  // [out][in][3][3]
  std::vector<S> bias;    // [out]

  S weight_at(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) const {
    return weight[((o * in_channels + i) * kKernel + ky) * kKernel + kx];
  }
};

// Four 3x3 stride-2 convolution blocks with ReLU, global average pooling,
// and a dense layer producing one sigmoid logit per image.
template <typename S>
struct BasicScorerNet {
  std::size_t input_channels = 0;
  std::array<ConvLayer<S>, 4> conv;
  std::vector<S> dense_weight;  // [64]
  std::vector<S> dense_bias;    // [1]
};

using ScorerNet = BasicScorerNet<float>;

// Named view into one parameter tensor of a net.
template <typename S>
struct TensorView {
  std::string name;
  std::vector<std::uint32_t> dims;
  S* data = nullptr;
  std::size_t size = 0;
};

template <typename S>
struct TrainItemT {
  const SpectralCube* cube = nullptr;
  int label = 0;
};

using TrainItem = TrainItemT<float>;

struct TrainConfig {
  double learning_rate = 1e-5;
  std::size_t batch_size = 8;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t epochs = 50;
  std::uint64_t seed = 0;
  bool early_stop = false;
};

// First/second moment accumulators aligned with parameter_views order.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::uint64_t t = 0;
};

template <typename S>
struct BatchTensor {
  std::size_t batch = 0, channels = 0, height = 0, width = 0;
  std::vector<S> values;

  BatchTensor() = default;
  BatchTensor(std::size_t b, std::size_t c, std::size_t h, std::size_t w)
      : batch(b), channels(c), height(h), width(w), values(b * c * h * w, S(0)) {}

  S& at(std::size_t b, std::size_t c, std::size_t y, std::size_t x) {
    return values[((b * channels + c) * height + y) * width + x];
  }
  S at(std::size_t b, std::size_t c, std::size_t y, std::size_t x) const {
    return values[((b * channels + c) * height + y) * width + x];
  }
};

namespace detail {

template <typename S>
BasicScorerNet<S> make_net(std::size_t n_channels) {
  if (n_channels == 0) throw Error(ErrorKind::config, "scorer needs at least one input channel");
  BasicScorerNet<S> net;
  net.input_channels = n_channels;
  std::size_t in = n_channels;
  for (std::size_t l = 0; l < 4; ++l) {
    net.conv[l].in_channels = in;
    net.conv[l].out_channels = kConvWidths[l];
    net.conv[l].weight.assign(kConvWidths[l] * in * kKernel * kKernel, S(0));
    net.conv[l].bias.assign(kConvWidths[l], S(0));
    in = kConvWidths[l];
  }
  net.dense_weight.assign(kDenseIn, S(0));
  net.dense_bias.assign(1, S(0));
  return net;
}

template <typename S, typename Net>
std::vector<TensorView<S>> views_impl(Net& net) {
  std::vector<TensorView<S>> out;
  for (std::size_t l = 0; l < 4; ++l) {
    auto& layer = net.conv[l];
    std::string base = "conv" + std::to_string(l + 1);
    out.push_back({base + ".weight",
                   {static_cast<std::uint32_t>(layer.out_channels),
                    static_cast<std::uint32_t>(layer.in_channels), kKernel, kKernel},
                   layer.weight.data(), layer.weight.size()});
    out.push_back({base + ".bias",
                   {static_cast<std::uint32_t>(layer.out_channels)},
                   layer.bias.data(), layer.bias.size()});
  }
  out.push_back({"dense.weight", {1, static_cast<std::uint32_t>(kDenseIn)},
                 net.dense_weight.data(), net.dense_weight.size()});
  out.push_back({"dense.bias", {1}, net.dense_bias.data(), net.dense_bias.size()});
  return out;
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// Stride-2 zero-padded 3x3 convolution followed by ReLU. Accumulates in
// double regardless of the storage type.
template <typename S>
BatchTensor<S> conv_relu(const BatchTensor<S>& in, const ConvLayer<S>& layer) {
  std::size_t oh = (in.height + 1) / 2;
  std::size_t ow = (in.width + 1) / 2;
  BatchTensor<S> out(in.batch, layer.out_channels, oh, ow);
  for (std::size_t b = 0; b < in.batch; ++b) {
    for (std::size_t o = 0; o < layer.out_channels; ++o) {
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          double acc = static_cast<double>(layer.bias[o]);
          for (std::size_t i = 0; i < layer.in_channels; ++i) {
            for (std::size_t ky = 0; ky < kKernel; ++ky) {
              std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(2 * oy + ky) - 1;
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(in.height)) continue;
              for (std::size_t kx = 0; kx < kKernel; ++kx) {
                std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(2 * ox + kx) - 1;
                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(in.width)) continue;
                acc += static_cast<double>(
                           in.at(b, i, static_cast<std::size_t>(iy), static_cast<std::size_t>(ix))) *
                       static_cast<double>(layer.weight_at(o, i, ky, kx));
              }
            }
          }
          out.at(b, o, oy, ox) = acc > 0.0 ? static_cast<S>(acc) : S(0);
        }
      }
    }
  }
  return out;
}

template <typename S>
struct ForwardTrace {
  std::array<BatchTensor<S>, 4> act;  // post-ReLU block outputs
  std::vector<double> gap;            // batch x 64
  std::vector<double> logit;          // batch
  std::vector<double> prob;           // batch
};

template <typename S>
void validate_batch(const BasicScorerNet<S>& net, const BatchTensor<S>& batch) {
  if (batch.batch == 0 || batch.height == 0 || batch.width == 0)
    throw Error(ErrorKind::dataset, "empty scorer batch");
  if (batch.channels != net.input_channels)
    throw Error(ErrorKind::dataset, "batch channel count does not match the model");
  for (S v : batch.values)
    if (!std::isfinite(static_cast<double>(v)))
      throw Error(ErrorKind::numeric, "non-finite value in scorer input");
}

template <typename S>
ForwardTrace<S> forward_trace(const BasicScorerNet<S>& net, const BatchTensor<S>& batch) {
  validate_batch(net, batch);
  ForwardTrace<S> trace;
  const BatchTensor<S>* cur = &batch;
  for (std::size_t l = 0; l < 4; ++l) {
    trace.act[l] = conv_relu(*cur, net.conv[l]);
    cur = &trace.act[l];
  }
  const BatchTensor<S>& top = trace.act[3];
  double inv_area = 1.0 / static_cast<double>(top.height * top.width);
  trace.gap.assign(batch.batch * kDenseIn, 0.0);
  trace.logit.resize(batch.batch);
  trace.prob.resize(batch.batch);
  for (std::size_t b = 0; b < batch.batch; ++b) {
    for (std::size_t k = 0; k < kDenseIn; ++k) {
      double sum = 0.0;
      for (std::size_t y = 0; y < top.height; ++y)
        for (std::size_t x = 0; x < top.width; ++x) sum += static_cast<double>(top.at(b, k, y, x));
      trace.gap[b * kDenseIn + k] = sum * inv_area;
    }
    double logit = static_cast<double>(net.dense_bias[0]);
    for (std::size_t k = 0; k < kDenseIn; ++k)
      logit += trace.gap[b * kDenseIn + k] * static_cast<double>(net.dense_weight[k]);
    trace.logit[b] = logit;
    trace.prob[b] = sigmoid(logit);
  }
  return trace;
}

}  // namespace detail

template <typename S>
std::vector<TensorView<S>> parameter_views(BasicScorerNet<S>& net) {
  return detail::views_impl<S>(net);
}

template <typename S>
std::vector<TensorView<const S>> parameter_views(const BasicScorerNet<S>& net) {
  return detail::views_impl<const S>(net);
}

template <typename S>
BasicScorerNet<S> zeros_like(const BasicScorerNet<S>& net) {
  return detail::make_net<S>(net.input_channels);
}

// He-uniform weights from a seeded stream, zero biases. Weight tensors are
// filled in order conv1..conv4 then dense.
template <typename S = float>
BasicScorerNet<S> init_model(std::size_t n_channels, std::uint64_t seed) {
  BasicScorerNet<S> net = detail::make_net<S>(n_channels);
  RngStream rng(seed);
  auto fill = [&rng](std::vector<S>& w, std::size_t fan_in) {
    double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (S& v : w) v = static_cast<S>((rng.next_double() * 2.0 - 1.0) * limit);
  };
  for (std::size_t l = 0; l < 4; ++l)
    fill(net.conv[l].weight, net.conv[l].in_channels * kKernel * kKernel);
  fill(net.dense_weight, kDenseIn);
  return net;
}

// FNV-1a over the little-endian f32 bytes of all parameters in view order.
template <typename S>
std::string weights_checksum(const BasicScorerNet<S>& net) {
  std::vector<std::uint8_t> buf;
  for (const auto& view : parameter_views(net))
    for (std::size_t i = 0; i < view.size; ++i)
      append_f32(buf, static_cast<float>(view.data[i]));
  return to_hex(fnv1a64(buf.data(), buf.size()));
}

template <typename S>
std::vector<double> forward(const BasicScorerNet<S>& net, const BatchTensor<S>& batch) {
  return detail::forward_trace(net, batch).prob;
}

template <typename S>
std::vector<double> forward_logits(const BasicScorerNet<S>& net, const BatchTensor<S>& batch) {
  return detail::forward_trace(net, batch).logit;
}

// Mean of -[y log q + (1-y) log(1-q)] with q clamped to [1e-7, 1-1e-7].
inline double cross_entropy(const std::vector<int>& y, const std::vector<double>& q) {
  if (y.empty()) throw Error(ErrorKind::dataset, "cross entropy over an empty batch");
  if (y.size() != q.size())
    throw Error(ErrorKind::dataset, "label and probability counts differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 0 && y[i] != 1) throw Error(ErrorKind::dataset, "labels must be 0 or 1");
    double p = std::min(std::max(q[i], 1e-7), 1.0 - 1e-7);
    sum += y[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
  }
  return sum / static_cast<double>(y.size());
}

template <typename S>
struct BackwardResult {
  BasicScorerNet<S> grads;
  std::vector<double> probs;
  double loss = 0.0;
};

// Analytic gradients of the mean cross-entropy over the batch.
template <typename S>
BackwardResult<S> backward(const BasicScorerNet<S>& net, const BatchTensor<S>& batch,
                           const std::vector<int>& y) {
  if (y.size() != batch.batch)
    throw Error(ErrorKind::dataset, "label count does not match batch size");
  detail::ForwardTrace<S> trace = detail::forward_trace(net, batch);

  BackwardResult<S> result;
  result.grads = zeros_like(net);
  result.probs = trace.prob;
  result.loss = cross_entropy(y, trace.prob);

  std::size_t bsz = batch.batch;
  std::vector<double> dlogit(bsz);
  for (std::size_t b = 0; b < bsz; ++b)
    dlogit[b] = (trace.prob[b] - static_cast<double>(y[b])) / static_cast<double>(bsz);

  // Double accumulators per parameter tensor, flushed into grads at the end.
  auto views = parameter_views(result.grads);
  std::vector<std::vector<double>> acc(views.size());
  for (std::size_t i = 0; i < views.size(); ++i) acc[i].assign(views[i].size, 0.0);
  std::vector<double>& d_dense_w = acc[8];
  std::vector<double>& d_dense_b = acc[9];

  const BatchTensor<S>& top = trace.act[3];
  double inv_area = 1.0 / static_cast<double>(top.height * top.width);
  std::vector<double> dact(top.values.size(), 0.0);
  for (std::size_t b = 0; b < bsz; ++b) {
    d_dense_b[0] += dlogit[b];
    for (std::size_t k = 0; k < kDenseIn; ++k) {
      d_dense_w[k] += dlogit[b] * trace.gap[b * kDenseIn + k];
      double g = dlogit[b] * static_cast<double>(net.dense_weight[k]) * inv_area;
      for (std::size_t y2 = 0; y2 < top.height; ++y2)
        for (std::size_t x2 = 0; x2 < top.width; ++x2)
          dact[((b * top.channels + k) * top.height + y2) * top.width + x2] = g;
    }
  }

  for (int l = 3; l >= 0; --l) {
    const BatchTensor<S>& out = trace.act[l];
    const BatchTensor<S>* in = l == 0 ? &batch : &trace.act[l - 1];
    const ConvLayer<S>& layer = net.conv[l];
    std::vector<double>& dw = acc[2 * static_cast<std::size_t>(l)];
    std::vector<double>& db = acc[2 * static_cast<std::size_t>(l) + 1];
    std::vector<double> din(in->values.size(), 0.0);

    for (std::size_t b = 0; b < bsz; ++b) {
      for (std::size_t o = 0; o < layer.out_channels; ++o) {
        for (std::size_t oy = 0; oy < out.height; ++oy) {
          for (std::size_t ox = 0; ox < out.width; ++ox) {
            if (!(out.at(b, o, oy, ox) > S(0))) continue;  // ReLU mask
            double g = dact[((b * out.channels + o) * out.height + oy) * out.width + ox];
            if (g == 0.0) continue;
            db[o] += g;
            for (std::size_t i = 0; i < layer.in_channels; ++i) {
              for (std::size_t ky = 0; ky < kKernel; ++ky) {
                std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(2 * oy + ky) - 1;
                if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(in->height)) continue;
                for (std::size_t kx = 0; kx < kKernel; ++kx) {
                  std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(2 * ox + kx) - 1;
                  if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(in->width)) continue;
                  std::size_t ii = ((b * in->channels + i) * in->height +
                                    static_cast<std::size_t>(iy)) *
                                       in->width +
                                   static_cast<std::size_t>(ix);
                  dw[((o * layer.in_channels + i) * kKernel + ky) * kKernel + kx] +=
                      g * static_cast<double>(in->values[ii]);
                  if (l > 0) din[ii] += g * static_cast<double>(layer.weight_at(o, i, ky, kx));
                }
              }
            }
          }
        }
      }
    }
    dact = std::move(din);
  }

  for (std::size_t i = 0; i < views.size(); ++i)
    for (std::size_t j = 0; j < views[i].size; ++j)
      views[i].data[j] = static_cast<S>(acc[i][j]);
  return result;
}

inline void validate_train_config(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0)) throw Error(ErrorKind::config, "learning rate must be positive");
  if (cfg.batch_size == 0) throw Error(ErrorKind::config, "batch size must be at least 1");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0 && cfg.beta2 >= 0.0 && cfg.beta2 < 1.0))
    throw Error(ErrorKind::config, "Adam betas must lie in [0, 1)");
  if (!(cfg.epsilon > 0.0)) throw Error(ErrorKind::config, "Adam epsilon must be positive");
}

template <typename S>
AdamState make_adam_state(const BasicScorerNet<S>& net) {
  AdamState state;
  for (const auto& view : parameter_views(net)) {
    state.m.emplace_back(view.size, 0.0);
    state.v.emplace_back(view.size, 0.0);
  }
  return state;
}

// Bias-corrected Adam update; increments state.t by one.
template <typename S>
void adam_step(BasicScorerNet<S>& net, const BasicScorerNet<S>& grads, AdamState& state,
               const TrainConfig& cfg) {
  validate_train_config(cfg);
  auto pviews = parameter_views(net);
  auto gviews = parameter_views(grads);
  if (state.m.size() != pviews.size())
    throw Error(ErrorKind::config, "Adam state does not match the parameter list");
  for (std::size_t i = 0; i < pviews.size(); ++i)
    if (gviews[i].size != pviews[i].size || state.m[i].size() != pviews[i].size)
      throw Error(ErrorKind::config, "gradient shape does not match parameters");

  state.t += 1;
  double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < pviews.size(); ++i) {
    for (std::size_t j = 0; j < pviews[i].size; ++j) {
      double g = static_cast<double>(gviews[i].data[j]);
      double m = state.m[i][j] = cfg.beta1 * state.m[i][j] + (1.0 - cfg.beta1) * g;
      double v = state.v[i][j] = cfg.beta2 * state.v[i][j] + (1.0 - cfg.beta2) * g * g;
      double step = cfg.learning_rate * (m / bc1) / (std::sqrt(v / bc2) + cfg.epsilon);
      pviews[i].data[j] = static_cast<S>(static_cast<double>(pviews[i].data[j]) - step);
    }
  }
}

namespace detail {

template <typename S>
BatchTensor<S> gather_batch(const std::vector<TrainItemT<S>>& items,
                            const std::vector<std::size_t>& order, std::size_t begin,
                            std::size_t count, std::vector<int>& y_out) {
  const SpectralCube& first = *items[order[begin]].cube;
  BatchTensor<S> batch(count, first.channels, first.height, first.width);
  y_out.resize(count);
  for (std::size_t b = 0; b < count; ++b) {
    const TrainItemT<S>& item = items[order[begin + b]];
    y_out[b] = item.label;
    const std::vector<float>& src = item.cube->values;
    std::size_t base = b * src.size();
    for (std::size_t i = 0; i < src.size(); ++i)
      batch.values[base + i] = static_cast<S>(src[i]);
  }
  return batch;
}

template <typename S>
void validate_train_items(const BasicScorerNet<S>& net, const std::vector<TrainItemT<S>>& items) {
  if (items.empty()) throw Error(ErrorKind::dataset, "no training images");
  bool has0 = false, has1 = false;
  const SpectralCube* first = items.front().cube;
  for (const auto& item : items) {
    if (item.cube == nullptr) throw Error(ErrorKind::dataset, "null training cube");
    if (item.label == 0) has0 = true;
    else if (item.label == 1) has1 = true;
    else throw Error(ErrorKind::dataset, "labels must be 0 or 1");
    if (item.cube->channels != net.input_channels)
      throw Error(ErrorKind::dataset, "training cube channels do not match the model");
    if (item.cube->height != first->height || item.cube->width != first->width)
      throw Error(ErrorKind::dataset, "training cubes must share one shape");
  }
  if (!has0 || !has1) throw Error(ErrorKind::dataset, "training labels are single-class");
}

}  // namespace detail

// Mini-batch Adam training; returns the per-epoch mean sample loss. Batches
// are drawn in a freshly seeded shuffled order each epoch. With early_stop,
// training ends once five epochs pass without relative improvement 1e-4.
template <typename S>
std::vector<double> train(BasicScorerNet<S>& net, const std::vector<TrainItemT<S>>& items,
                          const TrainConfig& cfg) {
  validate_train_config(cfg);
  detail::validate_train_items(net, items);

  std::size_t n = items.size();
  AdamState state = make_adam_state(net);
  std::vector<double> history;
  RngStream epoch_rng(cfg.seed);
  std::vector<int> y;
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    RngStream shuffle_rng = epoch_rng.split(e);
    std::vector<std::size_t> order = random_permutation(n, shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
      std::size_t count = std::min(cfg.batch_size, n - begin);
      BatchTensor<S> batch = detail::gather_batch(items, order, begin, count, y);
      BackwardResult<S> result = backward(net, batch, y);
      adam_step(net, result.grads, state, cfg);
      loss_sum += result.loss * static_cast<double>(count);
    }
    history.push_back(loss_sum / static_cast<double>(n));
    if (cfg.early_stop && history.size() >= 6) {
      double past = history[history.size() - 6];
      double now = history.back();
      if (past - now < 1e-4 * std::max(std::abs(past), 1e-12)) break;
    }
  }
  return history;
}

// Convenience single-image score.
template <typename S>
double score_cube(const BasicScorerNet<S>& net, const SpectralCube& cube) {
  BatchTensor<S> batch(1, cube.channels, cube.height, cube.width);
  for (std::size_t i = 0; i < cube.values.size(); ++i)
    batch.values[i] = static_cast<S>(cube.values[i]);
  return forward(net, batch)[0];
}

template <typename S>
void save_weights(const std::filesystem::path& path, const BasicScorerNet<S>& net) {
  std::vector<std::uint8_t> buf;
  buf.insert(buf.end(), {'S', 'C', 'N', 'W'});
  append_u16(buf, 1);
  append_u32(buf, static_cast<std::uint32_t>(net.input_channels));
  for (const auto& view : parameter_views(net)) {
    append_u16(buf, static_cast<std::uint16_t>(view.name.size()));
    buf.insert(buf.end(), view.name.begin(), view.name.end());
    buf.push_back(static_cast<std::uint8_t>(view.dims.size()));
    for (std::uint32_t d : view.dims) append_u32(buf, d);
    for (std::size_t i = 0; i < view.size; ++i)
      append_f32(buf, static_cast<float>(view.data[i]));
  }
  write_file(path, buf);
}

inline ScorerNet load_weights(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes = read_file(path);
  ByteReader reader(bytes, path.string());
  reader.expect_magic("SCNW");
  if (reader.take_u16() != 1)
    throw Error(ErrorKind::artifact, "unsupported weights version in " + path.string());
  std::uint32_t n = reader.take_u32();
  if (n == 0) throw Error(ErrorKind::artifact, "weights file declares zero channels");

  ScorerNet net = detail::make_net<float>(n);
  auto views = parameter_views(net);
  std::vector<bool> seen(views.size(), false);
  while (reader.remaining() > 0) {
    std::string name = reader.take_string(reader.take_u16());
    std::size_t rank = reader.take_u8();
    std::vector<std::uint32_t> dims(rank);
    std::size_t count = 1;
    for (std::size_t d = 0; d < rank; ++d) {
      dims[d] = reader.take_u32();
      count *= dims[d];
    }
    std::size_t idx = views.size();
    for (std::size_t i = 0; i < views.size(); ++i)
      if (views[i].name == name) idx = i;
    if (idx == views.size())
      throw Error(ErrorKind::artifact, "unexpected tensor '" + name + "' in " + path.string());
    if (seen[idx])
      throw Error(ErrorKind::artifact, "duplicate tensor '" + name + "' in " + path.string());
    if (dims != views[idx].dims || count != views[idx].size)
      throw Error(ErrorKind::artifact, "tensor '" + name + "' has the wrong shape in " + path.string());
    for (std::size_t i = 0; i < count; ++i) views[idx].data[i] = reader.take_f32();
    seen[idx] = true;
  }
  for (std::size_t i = 0; i < views.size(); ++i)
    if (!seen[i])
      throw Error(ErrorKind::artifact,
                  "missing tensor '" + views[i].name + "' in " + path.string());
  return net;
}

inline ScorerNet load_weights(const std::filesystem::path& path, std::size_t expected_channels) {
  ScorerNet net = load_weights(path);
  if (net.input_channels != expected_channels)
    throw Error(ErrorKind::artifact,
                "weights in " + path.string() + " expect " +
                    std::to_string(net.input_channels) + " channels, not " +
                    std::to_string(expected_channels));
  return net;
}

}  // namespace specsel
