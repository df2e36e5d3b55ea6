#include "gestfuse/cnn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include "gestfuse/error.hpp"
#include "gestfuse/vision_features.hpp"

namespace gestfuse {

namespace {

[[noreturn]] void shape_error(const std::string& what) { raise(Errc::shape_mismatch, what); }

std::string shape_str(std::span<const int> s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "x" : "") + std::to_string(s[i]);
  return out + "]";
}

class Conv2dLayer final : public Layer {
 public:
  Conv2dLayer(int in_ch, int out_ch, int k)
      : in_ch_(in_ch), out_ch_(out_ch), k_(k),
        weight_(Tensor::zeros({out_ch, in_ch, k, k})), bias_(Tensor::zeros({out_ch})) {}

  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv2dLayer>(*this); }

  LayerSpec spec() const override {
    LayerSpec s;
    s.kind = LayerSpec::Kind::conv2d;
    s.in_channels = in_ch_;
    s.out_channels = out_ch_;
    s.kernel = k_;
    return s;
  }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    if (in.size() != 3 || in[0] != in_ch_ || in[1] < k_ || in[2] < k_)
      shape_error("conv " + std::to_string(out_ch_) + "@" + std::to_string(k_) + "x" +
                  std::to_string(k_) + " cannot consume " + shape_str(in));
    return {out_ch_, in[1] - k_ + 1, in[2] - k_ + 1};
  }

  Tensor forward(const Tensor& x, LayerContext* ctx) const override {
    const int h = x.shape[1], w = x.shape[2];
    const int oh = h - k_ + 1, ow = w - k_ + 1;
    Tensor out = Tensor::zeros({out_ch_, oh, ow});
    for (int oc = 0; oc < out_ch_; ++oc) {
      double* dst = out.data.data() + static_cast<std::size_t>(oc) * oh * ow;
      for (int y = 0; y < oh; ++y)
        for (int xo = 0; xo < ow; ++xo) {
          double acc = bias_.data[static_cast<std::size_t>(oc)];
          for (int ic = 0; ic < in_ch_; ++ic) {
            const double* src = x.data.data() + (static_cast<std::size_t>(ic) * h + y) * w + xo;
            const double* ker =
                weight_.data.data() + ((static_cast<std::size_t>(oc) * in_ch_ + ic) * k_) * k_;
            for (int dy = 0; dy < k_; ++dy)
              for (int dx = 0; dx < k_; ++dx) acc += ker[dy * k_ + dx] * src[dy * w + dx];
          }
          dst[y * ow + xo] = acc;
        }
    }
    if (ctx) {
      ctx->input = x;
      ctx->output = out;
    }
    return out;
  }

  Tensor backward(const LayerContext& ctx, const Tensor& dy,
                  std::span<Tensor> own_grads) const override {
    const Tensor& x = ctx.input;
    const int h = x.shape[1], w = x.shape[2];
    const int oh = h - k_ + 1, ow = w - k_ + 1;
    Tensor& dw = own_grads[0];
    Tensor& db = own_grads[1];
    Tensor dx = Tensor::zeros(x.shape);
    for (int oc = 0; oc < out_ch_; ++oc) {
      const double* dout = dy.data.data() + static_cast<std::size_t>(oc) * oh * ow;
      double bacc = 0.0;
      for (int i = 0; i < oh * ow; ++i) bacc += dout[i];
      db.data[static_cast<std::size_t>(oc)] += bacc;
      for (int ic = 0; ic < in_ch_; ++ic) {
        const double* src = x.data.data() + static_cast<std::size_t>(ic) * h * w;
        double* dsrc = dx.data.data() + static_cast<std::size_t>(ic) * h * w;
        const double* ker =
            weight_.data.data() + ((static_cast<std::size_t>(oc) * in_ch_ + ic) * k_) * k_;
        double* dker =
            dw.data.data() + ((static_cast<std::size_t>(oc) * in_ch_ + ic) * k_) * k_;
        for (int y = 0; y < oh; ++y)
          for (int xo = 0; xo < ow; ++xo) {
            const double g = dout[y * ow + xo];
            if (g == 0.0) continue;
            for (int ddy = 0; ddy < k_; ++ddy)
              for (int ddx = 0; ddx < k_; ++ddx) {
                dker[ddy * k_ + ddx] += g * src[(y + ddy) * w + (xo + ddx)];
                dsrc[(y + ddy) * w + (xo + ddx)] += g * ker[ddy * k_ + ddx];
              }
          }
      }
    }
    return dx;
  }

  std::vector<Tensor*> param_tensors() override { return {&weight_, &bias_}; }

 private:
  int in_ch_, out_ch_, k_;
  Tensor weight_, bias_;
};

class Conv1dLayer final : public Layer {
 public:
  Conv1dLayer(int in_ch, int out_ch, int k)
      : in_ch_(in_ch), out_ch_(out_ch), k_(k),
        weight_(Tensor::zeros({out_ch, in_ch, k})), bias_(Tensor::zeros({out_ch})) {}

  std::unique_ptr<Layer> clone() const override { return std::make_unique<Conv1dLayer>(*this); }

  LayerSpec spec() const override {
    LayerSpec s;
    s.kind = LayerSpec::Kind::conv1d;
    s.in_channels = in_ch_;
    s.out_channels = out_ch_;
    s.kernel = k_;
    return s;
  }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    if (in.size() != 2 || in[0] != in_ch_ || in[1] < k_)
      shape_error("conv1d " + std::to_string(out_ch_) + "@" + std::to_string(k_) +
                  " cannot consume " + shape_str(in));
    return {out_ch_, in[1] - k_ + 1};
  }

  Tensor forward(const Tensor& x, LayerContext* ctx) const override {
    const int len = x.shape[1], olen = len - k_ + 1;
    Tensor out = Tensor::zeros({out_ch_, olen});
    for (int oc = 0; oc < out_ch_; ++oc)
      for (int t = 0; t < olen; ++t) {
        double acc = bias_.data[static_cast<std::size_t>(oc)];
        for (int ic = 0; ic < in_ch_; ++ic) {
          const double* src = x.data.data() + static_cast<std::size_t>(ic) * len + t;
          const double* ker =
              weight_.data.data() + (static_cast<std::size_t>(oc) * in_ch_ + ic) * k_;
          for (int dt = 0; dt < k_; ++dt) acc += ker[dt] * src[dt];
        }
        out.data[static_cast<std::size_t>(oc) * olen + t] = acc;
      }
    if (ctx) {
      ctx->input = x;
      ctx->output = out;
    }
    return out;
  }

  Tensor backward(const LayerContext& ctx, const Tensor& dy,
                  std::span<Tensor> own_grads) const override {
    const Tensor& x = ctx.input;
    const int len = x.shape[1], olen = len - k_ + 1;
    Tensor& dw = own_grads[0];
    Tensor& db = own_grads[1];
    Tensor dx = Tensor::zeros(x.shape);
    for (int oc = 0; oc < out_ch_; ++oc) {
      const double* dout = dy.data.data() + static_cast<std::size_t>(oc) * olen;
      for (int t = 0; t < olen; ++t) db.data[static_cast<std::size_t>(oc)] += dout[t];
      for (int ic = 0; ic < in_ch_; ++ic) {
        const double* src = x.data.data() + static_cast<std::size_t>(ic) * len;
        double* dsrc = dx.data.data() + static_cast<std::size_t>(ic) * len;
        const double* ker =
            weight_.data.data() + (static_cast<std::size_t>(oc) * in_ch_ + ic) * k_;
        double* dker = dw.data.data() + (static_cast<std::size_t>(oc) * in_ch_ + ic) * k_;
        for (int t = 0; t < olen; ++t) {
          const double g = dout[t];
          if (g == 0.0) continue;
          for (int dt = 0; dt < k_; ++dt) {
            dker[dt] += g * src[t + dt];
            dsrc[t + dt] += g * ker[dt];
          }
        }
      }
    }
    return dx;
  }

  std::vector<Tensor*> param_tensors() override { return {&weight_, &bias_}; }

 private:
  int in_ch_, out_ch_, k_;
  Tensor weight_, bias_;
};

class MaxPool2dLayer final : public Layer {
 public:
  static constexpr int kWindow = 2;

  std::unique_ptr<Layer> clone() const override { return std::make_unique<MaxPool2dLayer>(*this); }

  LayerSpec spec() const override {
    LayerSpec s;
    s.kind = LayerSpec::Kind::maxpool2d;
    return s;
  }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    if (in.size() != 3 || in[1] % kWindow != 0 || in[2] % kWindow != 0)
      shape_error("2x2 max-pool cannot consume " + shape_str(in));
    return {in[0], in[1] / kWindow, in[2] / kWindow};
  }

  Tensor forward(const Tensor& x, LayerContext* ctx) const override {
    const int c = x.shape[0], h = x.shape[1], w = x.shape[2];
    const int oh = h / kWindow, ow = w / kWindow;
    Tensor out = Tensor::zeros({c, oh, ow});
    std::vector<std::size_t> argmax(out.size());
    for (int ch = 0; ch < c; ++ch) {
      const double* src = x.data.data() + static_cast<std::size_t>(ch) * h * w;
      for (int y = 0; y < oh; ++y)
        for (int xo = 0; xo < ow; ++xo) {
          std::size_t best = static_cast<std::size_t>(2 * y) * w + 2 * xo;
          for (int dy = 0; dy < kWindow; ++dy)
            for (int dx = 0; dx < kWindow; ++dx) {
              const std::size_t idx = static_cast<std::size_t>(2 * y + dy) * w + (2 * xo + dx);
              if (src[idx] > src[best]) best = idx;
            }
          const std::size_t flat = (static_cast<std::size_t>(ch) * oh + y) * ow + xo;
          out.data[flat] = src[best];
          argmax[flat] = static_cast<std::size_t>(ch) * h * w + best;
        }
    }
    if (ctx) {
      ctx->input = x;
      ctx->output = out;
      ctx->pool_argmax = std::move(argmax);
    }
    return out;
  }

  Tensor backward(const LayerContext& ctx, const Tensor& dy, std::span<Tensor>) const override {
    Tensor dx = Tensor::zeros(ctx.input.shape);
    for (std::size_t i = 0; i < dy.data.size(); ++i)
      dx.data[ctx.pool_argmax[i]] += dy.data[i];
    return dx;
  }
};

class DenseLayer final : public Layer {
 public:
  DenseLayer(int in_dim, int out_dim)
      : in_dim_(in_dim), out_dim_(out_dim),
        weight_(Tensor::zeros({out_dim, in_dim})), bias_(Tensor::zeros({out_dim})) {}

  std::unique_ptr<Layer> clone() const override { return std::make_unique<DenseLayer>(*this); }

  LayerSpec spec() const override {
    LayerSpec s;
    s.kind = LayerSpec::Kind::dense;
    s.in_dim = in_dim_;
    s.out_dim = out_dim_;
    return s;
  }

  std::vector<int> output_shape(const std::vector<int>& in) const override {
    if (shape_size(in) != static_cast<std::size_t>(in_dim_))
      shape_error("dense layer of fan-in " + std::to_string(in_dim_) + " cannot consume " +
                  shape_str(in));
    return {out_dim_};
  }

  Tensor forward(const Tensor& x, LayerContext* ctx) const override {
    Tensor out = Tensor::zeros({out_dim_});
    for (int o = 0; o < out_dim_; ++o) {
      const double* row = weight_.data.data() + static_cast<std::size_t>(o) * in_dim_;
      double acc = bias_.data[static_cast<std::size_t>(o)];
      for (int i = 0; i < in_dim_; ++i) acc += row[i] * x.data[static_cast<std::size_t>(i)];
      out.data[static_cast<std::size_t>(o)] = acc;
    }
    if (ctx) {
      ctx->input = x;
      ctx->output = out;
    }
    return out;
  }

  Tensor backward(const LayerContext& ctx, const Tensor& dy,
                  std::span<Tensor> own_grads) const override {
    Tensor& dw = own_grads[0];
    Tensor& db = own_grads[1];
    Tensor dx = Tensor::zeros(ctx.input.shape);
    for (int o = 0; o < out_dim_; ++o) {
      const double g = dy.data[static_cast<std::size_t>(o)];
      db.data[static_cast<std::size_t>(o)] += g;
      if (g == 0.0) continue;
      const double* row = weight_.data.data() + static_cast<std::size_t>(o) * in_dim_;
      double* drow = dw.data.data() + static_cast<std::size_t>(o) * in_dim_;
      for (int i = 0; i < in_dim_; ++i) {
        drow[i] += g * ctx.input.data[static_cast<std::size_t>(i)];
        dx.data[static_cast<std::size_t>(i)] += g * row[i];
      }
    }
    return dx;
  }

  std::vector<Tensor*> param_tensors() override { return {&weight_, &bias_}; }

 private:
  int in_dim_, out_dim_;
  Tensor weight_, bias_;
};

class ReluLayer final : public Layer {
 public:
  std::unique_ptr<Layer> clone() const override { return std::make_unique<ReluLayer>(*this); }

  LayerSpec spec() const override {
    LayerSpec s;
    s.kind = LayerSpec::Kind::relu;
    return s;
  }

  std::vector<int> output_shape(const std::vector<int>& in) const override { return in; }

  Tensor forward(const Tensor& x, LayerContext* ctx) const override {
    Tensor out = x;
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    if (ctx) {
      ctx->input = x;
      ctx->output = out;
    }
    return out;
  }

  Tensor backward(const LayerContext& ctx, const Tensor& dy, std::span<Tensor>) const override {
    Tensor dx = dy;
    for (std::size_t i = 0; i < dx.data.size(); ++i)
      if (ctx.input.data[i] <= 0.0) dx.data[i] = 0.0;
    return dx;
  }
};

class SoftmaxLayer final : public Layer {
 public:
  std::unique_ptr<Layer> clone() const override { return std::make_unique<SoftmaxLayer>(*this); }

  LayerSpec spec() const override {
    LayerSpec s;
    s.kind = LayerSpec::Kind::softmax;
    return s;
  }

  std::vector<int> output_shape(const std::vector<int>& in) const override { return in; }

  Tensor forward(const Tensor& x, LayerContext* ctx) const override {
    Tensor out = x;
    const double m = *std::max_element(out.data.begin(), out.data.end());
    double sum = 0.0;
    for (double& v : out.data) {
      v = std::exp(v - m);
      sum += v;
    }
    for (double& v : out.data) v /= sum;
    if (ctx) {
      ctx->input = x;
      ctx->output = out;
    }
    return out;
  }

  Tensor backward(const LayerContext& ctx, const Tensor& dy, std::span<Tensor>) const override {
    // Generic Jacobian product; training bypasses this via the fused
    // probabilities-minus-one-hot path in CnnModel::backward.
    const Tensor& p = ctx.output;
    double dot = 0.0;
    for (std::size_t i = 0; i < p.data.size(); ++i) dot += p.data[i] * dy.data[i];
    Tensor dx = dy;
    for (std::size_t i = 0; i < p.data.size(); ++i) dx.data[i] = p.data[i] * (dy.data[i] - dot);
    return dx;
  }
};

}  // namespace

std::unique_ptr<Layer> make_layer(const LayerSpec& spec) {
  switch (spec.kind) {
    case LayerSpec::Kind::conv2d:
      return std::make_unique<Conv2dLayer>(spec.in_channels, spec.out_channels, spec.kernel);
    case LayerSpec::Kind::conv1d:
      return std::make_unique<Conv1dLayer>(spec.in_channels, spec.out_channels, spec.kernel);
    case LayerSpec::Kind::maxpool2d:
      return std::make_unique<MaxPool2dLayer>();
    case LayerSpec::Kind::dense:
      return std::make_unique<DenseLayer>(spec.in_dim, spec.out_dim);
    case LayerSpec::Kind::relu:
      return std::make_unique<ReluLayer>();
    case LayerSpec::Kind::softmax:
      return std::make_unique<SoftmaxLayer>();
  }
  raise(Errc::bad_config, "unknown layer kind");
}

CnnModel::CnnModel(std::vector<int> input_shape, std::vector<std::unique_ptr<Layer>> layers,
                   std::string modality)
    : input_shape_(std::move(input_shape)), layers_(std::move(layers)),
      modality_(std::move(modality)) {
  if (layers_.empty()) shape_error("a model needs at least one layer");
  std::vector<int> shape = input_shape_;
  for (const auto& layer : layers_) shape = layer->output_shape(shape);
  if (shape != std::vector<int>{kGestureCount})
    shape_error("model must end in " + std::to_string(kGestureCount) + " classes, ends in " +
                shape_str(shape));
  if (layers_.back()->spec().kind != LayerSpec::Kind::softmax)
    shape_error("model must end with a softmax layer");
}

CnnModel::CnnModel(const CnnModel& other)
    : input_shape_(other.input_shape_), modality_(other.modality_) {
  layers_.reserve(other.layers_.size());
  for (const auto& layer : other.layers_) layers_.push_back(layer->clone());
}

CnnModel& CnnModel::operator=(const CnnModel& other) {
  if (this == &other) return *this;
  CnnModel copy(other);
  *this = std::move(copy);
  return *this;
}

void CnnModel::init_params(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto& layer : layers_) {
    const LayerSpec s = layer->spec();
    double fan_in = 0.0;
    switch (s.kind) {
      case LayerSpec::Kind::conv2d:
        fan_in = static_cast<double>(s.in_channels) * s.kernel * s.kernel;
        break;
      case LayerSpec::Kind::conv1d:
        fan_in = static_cast<double>(s.in_channels) * s.kernel;
        break;
      case LayerSpec::Kind::dense:
        fan_in = s.in_dim;
        break;
      default:
        continue;
    }
    const double limit = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> u(-limit, limit);
    auto params = layer->param_tensors();
    for (double& v : params[0]->data) v = u(rng);          // weights
    std::fill(params[1]->data.begin(), params[1]->data.end(), 0.0);  // biases
  }
}

std::vector<Tensor*> CnnModel::parameters() {
  std::vector<Tensor*> out;
  for (auto& layer : layers_)
    for (Tensor* t : layer->param_tensors()) out.push_back(t);
  return out;
}

std::vector<const Tensor*> CnnModel::parameters() const {
  std::vector<const Tensor*> out;
  for (const auto& layer : layers_)
    // Parameter storage itself is non-const inside the layer; expose a
    // read-only view without duplicating the accessor.
    for (Tensor* t : const_cast<Layer*>(layer.get())->param_tensors()) out.push_back(t);
  return out;
}

void CnnModel::check_input(const Tensor& input) const {
  if (input.shape != input_shape_)
    shape_error("input " + shape_str(input.shape) + " does not match model input " +
                shape_str(input_shape_));
}

std::vector<double> CnnModel::run(const Tensor& input, std::vector<LayerContext>* ctxs) const {
  Tensor x = input;
  for (std::size_t i = 0; i < layers_.size(); ++i)
    x = layers_[i]->forward(x, ctxs ? &(*ctxs)[i] : nullptr);
  return x.data;
}

std::vector<double> CnnModel::forward(const Tensor& input) const {
  check_input(input);
  return run(input, nullptr);
}

std::vector<Tensor> CnnModel::zero_grads() const {
  std::vector<Tensor> grads;
  for (const Tensor* p : parameters()) grads.push_back(Tensor::zeros(p->shape));
  return grads;
}

double CnnModel::backward(const Tensor& input, int label, std::vector<Tensor>& grads) const {
  check_input(input);
  if (label < 0 || label >= kGestureCount)
    raise(Errc::invalid_label, "label " + std::to_string(label) + " outside 0.." +
                                   std::to_string(kGestureCount - 1));
  const auto params = parameters();
  if (grads.empty()) {
    grads = zero_grads();
  } else if (grads.size() != params.size()) {
    shape_error("gradient list does not match the parameter list");
  }

  std::vector<LayerContext> ctxs(layers_.size());
  const std::vector<double> p = run(input, &ctxs);
  const double loss = -std::log(std::max(p[static_cast<std::size_t>(label)], 1e-300));

  // Softmax + cross-entropy backpropagate together as p - onehot.
  Tensor dy;
  dy.shape = {kGestureCount};
  dy.data = p;
  dy.data[static_cast<std::size_t>(label)] -= 1.0;

  std::size_t grad_end = grads.size();
  for (std::size_t i = layers_.size() - 1; i-- > 0;) {
    const std::size_t count = layers_[i]->param_tensors().size();
    grad_end -= count;
    dy = layers_[i]->backward(ctxs[i], dy, {grads.data() + grad_end, count});
  }
  return loss;
}

CnnModel build_cnn(std::vector<int> input_shape, std::span<const LayerSpec> specs,
                   std::string modality) {
  std::vector<std::unique_ptr<Layer>> layers;
  for (const LayerSpec& s : specs) layers.push_back(make_layer(s));
  return CnnModel(std::move(input_shape), std::move(layers), std::move(modality));
}

CnnModel make_vision_cnn(std::uint64_t seed, std::string modality) {
  using K = LayerSpec::Kind;
  std::vector<LayerSpec> specs;
  auto conv = [](int ic, int oc, int k) {
    LayerSpec s;
    s.kind = K::conv2d;
    s.in_channels = ic;
    s.out_channels = oc;
    s.kernel = k;
    return s;
  };
  auto dense = [](int i, int o) {
    LayerSpec s;
    s.kind = K::dense;
    s.in_dim = i;
    s.out_dim = o;
    return s;
  };
  const LayerSpec relu{K::relu, 0, 0, 0, 0, 0}, pool{K::maxpool2d, 0, 0, 0, 0, 0},
      softmax{K::softmax, 0, 0, 0, 0, 0};
  specs = {conv(1, 6, 5),  relu, pool, conv(6, 16, 5), relu, pool,
           dense(16 * 12 * 12, 120), relu, dense(120, 84), relu, dense(84, 5), softmax};
  CnnModel model = build_cnn({1, kPatchSide, kPatchSide}, specs, std::move(modality));
  model.init_params(seed);
  return model;
}

CnnModel make_emg_cnn(std::uint64_t seed, std::string modality) {
  using K = LayerSpec::Kind;
  auto conv = [](int ic, int oc, int k) {
    LayerSpec s;
    s.kind = K::conv1d;
    s.in_channels = ic;
    s.out_channels = oc;
    s.kernel = k;
    return s;
  };
  auto dense = [](int i, int o) {
    LayerSpec s;
    s.kind = K::dense;
    s.in_dim = i;
    s.out_dim = o;
    return s;
  };
  const LayerSpec relu{K::relu, 0, 0, 0, 0, 0}, softmax{K::softmax, 0, 0, 0, 0, 0};
  const std::vector<LayerSpec> specs = {conv(1, 6, 5),  relu, conv(6, 16, 5), relu,
                                        dense(16 * 8, 64), relu, dense(64, 5),  softmax};
  CnnModel model = build_cnn({1, 16}, specs, std::move(modality));
  model.init_params(seed);
  return model;
}

void adadelta_step(std::span<Tensor*> params, std::span<const Tensor> grads,
                   AdadeltaState& state) {
  if (params.size() != grads.size())
    shape_error("parameter and gradient lists differ in length");
  if (state.eg2.empty()) {
    for (const Tensor* p : params) {
      state.eg2.push_back(Tensor::zeros(p->shape));
      state.edx2.push_back(Tensor::zeros(p->shape));
    }
  }
  if (state.eg2.size() != params.size())
    shape_error("optimizer state does not match the parameter list");
  for (std::size_t t = 0; t < params.size(); ++t) {
    Tensor& p = *params[t];
    const Tensor& g = grads[t];
    if (!same_shape(p, g) || !same_shape(p, state.eg2[t]))
      shape_error("parameter/gradient shape mismatch at tensor " + std::to_string(t));
    for (std::size_t i = 0; i < p.data.size(); ++i) {
      const double gi = g.data[i];
      double& eg2 = state.eg2[t].data[i];
      double& edx2 = state.edx2[t].data[i];
      eg2 = state.rho * eg2 + (1.0 - state.rho) * gi * gi;
      const double dx = -std::sqrt(edx2 + state.epsilon) / std::sqrt(eg2 + state.epsilon) * gi;
      edx2 = state.rho * edx2 + (1.0 - state.rho) * dx * dx;
      p.data[i] += dx;
    }
  }
}

TrainResult train_cnn(CnnModel& model, std::span<const Tensor> inputs,
                      std::span<const int> labels, const TrainConfig& config,
                      std::uint64_t seed) {
  if (inputs.empty()) raise(Errc::empty_dataset, "no training samples");
  if (inputs.size() != labels.size())
    shape_error("input and label counts differ");
  if (config.batch_size <= 0) raise(Errc::bad_config, "batch size must be positive");

  // Gradients of one batch are accumulated over a fixed number of lanes and
  // reduced in lane order, so results do not depend on the host's core count.
  constexpr std::size_t kLanes = 4;

  TrainResult result;
  AdadeltaState state;
  state.rho = config.rho;
  state.epsilon = config.epsilon;
  auto params = model.parameters();

  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);

  std::array<std::vector<Tensor>, kLanes> lane_grads;
  for (auto& g : lane_grads) g = model.zero_grads();
  std::vector<Tensor> batch_grads = model.zero_grads();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const std::size_t batch = stop - start;

      std::array<double, kLanes> lane_loss{};
      {
        std::vector<std::thread> workers;
        for (std::size_t lane = 0; lane < std::min(kLanes, batch); ++lane)
          workers.emplace_back([&, lane] {
            for (auto& t : lane_grads[lane])
              std::fill(t.data.begin(), t.data.end(), 0.0);
            for (std::size_t b = lane; b < batch; b += kLanes)
              lane_loss[lane] += model.backward(inputs[order[start + b]],
                                                labels[order[start + b]], lane_grads[lane]);
          });
        for (auto& w : workers) w.join();
      }

      const double inv_batch = 1.0 / static_cast<double>(batch);
      for (std::size_t t = 0; t < batch_grads.size(); ++t) {
        std::fill(batch_grads[t].data.begin(), batch_grads[t].data.end(), 0.0);
        for (std::size_t lane = 0; lane < std::min(kLanes, batch); ++lane)
          for (std::size_t i = 0; i < batch_grads[t].data.size(); ++i)
            batch_grads[t].data[i] += lane_grads[lane][t].data[i];
        for (double& v : batch_grads[t].data) v *= inv_batch;
      }
      adadelta_step(params, batch_grads, state);
      for (std::size_t lane = 0; lane < kLanes; ++lane) loss_sum += lane_loss[lane];
    }
    result.loss_history.push_back(loss_sum / static_cast<double>(inputs.size()));
  }
  return result;
}

}  // namespace gestfuse
