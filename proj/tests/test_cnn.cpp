#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <span>
#include <vector>

#include "gestfuse/cnn.hpp"
#include "gestfuse/cnn_io.hpp"
#include "gestfuse/error.hpp"
#include "gestfuse/fgcn.hpp"
#include "support/tempdir.hpp"

using namespace gestfuse;
using testsupport::TempDir;

namespace {

LayerSpec conv2d(int ic, int oc, int k) {
  LayerSpec s;
  s.kind = LayerSpec::Kind::conv2d;
  s.in_channels = ic;
  s.out_channels = oc;
  s.kernel = k;
  return s;
}

LayerSpec conv1d(int ic, int oc, int k) {
  LayerSpec s;
  s.kind = LayerSpec::Kind::conv1d;
  s.in_channels = ic;
  s.out_channels = oc;
  s.kernel = k;
  return s;
}

LayerSpec dense(int in, int out) {
  LayerSpec s;
  s.kind = LayerSpec::Kind::dense;
  s.in_dim = in;
  s.out_dim = out;
  return s;
}

LayerSpec plain(LayerSpec::Kind kind) {
  LayerSpec s;
  s.kind = kind;
  return s;
}

Tensor random_tensor(std::vector<int> shape, std::uint64_t seed) {
  Tensor t = Tensor::zeros(std::move(shape));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double& v : t.data) v = n(rng);
  return t;
}

double loss_of(const CnnModel& model, const Tensor& input, int label) {
  const auto p = model.forward(input);
  return -std::log(p[static_cast<std::size_t>(label)]);
}

// Central-difference check of every parameter gradient of `model` at `input`.
void check_gradients(CnnModel& model, const Tensor& input, int label) {
  std::vector<Tensor> grads;
  model.backward(input, label, grads);

  const double h = 1e-5;
  auto params = model.parameters();
  REQUIRE(params.size() == grads.size());
  double worst = 0.0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t i = 0; i < params[t]->data.size(); ++i) {
      const double orig = params[t]->data[i];
      params[t]->data[i] = orig + h;
      const double lp = loss_of(model, input, label);
      params[t]->data[i] = orig - h;
      const double lm = loss_of(model, input, label);
      params[t]->data[i] = orig;
      const double numeric = (lp - lm) / (2.0 * h);
      const double analytic = grads[t].data[i];
      const double rel =
          std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
      worst = std::max(worst, rel);
    }
  }
  CHECK(worst <= 1e-4);
}

}  // namespace

TEST_SUITE_BEGIN("cnn");

TEST_CASE("vision network reduces 60x60 patches through the documented shapes") {
  const CnnModel model = make_vision_cnn(1);
  CHECK(model.input_shape() == std::vector<int>{1, 60, 60});
  CHECK(model.modality() == "DVS");

  // Fold the input shape through the stack and record each stage.
  std::vector<std::vector<int>> stages;
  std::vector<int> shape = model.input_shape();
  for (const auto& layer : model.layers()) {
    shape = layer->output_shape(shape);
    stages.push_back(shape);
  }
  CHECK(stages[0] == std::vector<int>{6, 56, 56});   // conv 6@5x5
  CHECK(stages[2] == std::vector<int>{6, 28, 28});   // pool
  CHECK(stages[3] == std::vector<int>{16, 24, 24});  // conv 16@5x5
  CHECK(stages[5] == std::vector<int>{16, 12, 12});  // pool
  CHECK(stages[6] == std::vector<int>{120});
  CHECK(stages[8] == std::vector<int>{84});
  CHECK(stages[10] == std::vector<int>{5});
  CHECK(stages.back() == std::vector<int>{5});

  const auto probs = model.forward(random_tensor({1, 60, 60}, 7));
  CHECK(probs.size() == 5);
}

TEST_CASE("time-domain network reduces the 16-value vector through the documented shapes") {
  const CnnModel model = make_emg_cnn(1);
  CHECK(model.input_shape() == std::vector<int>{1, 16});
  CHECK(model.modality() == "EMG");

  std::vector<std::vector<int>> stages;
  std::vector<int> shape = model.input_shape();
  for (const auto& layer : model.layers()) {
    shape = layer->output_shape(shape);
    stages.push_back(shape);
  }
  CHECK(stages[0] == std::vector<int>{6, 12});  // conv1d 6@5
  CHECK(stages[2] == std::vector<int>{16, 8});  // conv1d 16@5
  CHECK(stages[4] == std::vector<int>{64});     // dense over the 128 flattened values
  CHECK(stages.back() == std::vector<int>{5});

  CHECK(model.forward(random_tensor({1, 16}, 3)).size() == 5);
}

TEST_CASE("output is a probability distribution") {
  const CnnModel model = make_vision_cnn(11);
  const auto p = model.forward(random_tensor({1, 60, 60}, 5));
  double sum = 0.0;
  for (double v : p) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    sum += v;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("softmax stays finite for extreme logit magnitudes") {
  const std::vector<LayerSpec> specs = {dense(5, 5), plain(LayerSpec::Kind::softmax)};
  CnnModel model = build_cnn({5}, specs, "EMG");
  auto params = model.parameters();
  // Weight row i picks out input i scaled enormously.
  for (int i = 0; i < 5; ++i) params[0]->data[static_cast<std::size_t>(i) * 5 + i] = 400.0;
  Tensor x = Tensor::zeros({5});
  x.data = {1.0, 2.0, 3.0, 4.0, 5.0};
  const auto p = model.forward(x);
  for (double v : p) CHECK(std::isfinite(v));
  CHECK(p[4] == doctest::Approx(1.0));
}

TEST_CASE("a zero-parameter model predicts the uniform distribution and ln(5) loss") {
  const std::vector<LayerSpec> specs = {conv1d(1, 6, 5),  plain(LayerSpec::Kind::relu),
                                        conv1d(6, 16, 5), plain(LayerSpec::Kind::relu),
                                        dense(128, 64),   plain(LayerSpec::Kind::relu),
                                        dense(64, 5),     plain(LayerSpec::Kind::softmax)};
  const CnnModel model = build_cnn({1, 16}, specs, "EMG");  // parameters default to zero
  const Tensor x = random_tensor({1, 16}, 21);
  const auto p = model.forward(x);
  for (double v : p) CHECK(v == doctest::Approx(0.2).epsilon(1e-12));

  std::vector<Tensor> grads;
  const double loss = model.backward(x, 2, grads);
  CHECK(loss == doctest::Approx(std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("parameter initialization is seeded, bounded, and zeroes biases") {
  CnnModel a = make_vision_cnn(42);
  CnnModel b = make_vision_cnn(42);
  CnnModel c = make_vision_cnn(43);

  const auto pa = a.parameters();
  const auto pb = b.parameters();
  const auto pc = c.parameters();
  bool differs_from_c = false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i]->data == pb[i]->data);
    if (pa[i]->data != pc[i]->data) differs_from_c = true;
  }
  CHECK(differs_from_c);

  // First conv layer: fan-in 1*5*5 = 25, limit sqrt(6/25).
  const double limit = std::sqrt(6.0 / 25.0);
  const Tensor* w0 = pa[0];
  CHECK(w0->shape == std::vector<int>{6, 1, 5, 5});
  for (double v : w0->data) CHECK(std::abs(v) <= limit);
  const Tensor* b0 = pa[1];
  for (double v : b0->data) CHECK(v == 0.0);
}

TEST_CASE("dense-softmax gradients match the closed form") {
  const std::vector<LayerSpec> specs = {dense(4, 5), plain(LayerSpec::Kind::softmax)};
  CnnModel model = build_cnn({4}, specs, "EMG");
  model.init_params(9);

  const Tensor x = random_tensor({4}, 17);
  const int label = 3;
  const auto p = model.forward(x);

  std::vector<Tensor> grads;
  model.backward(x, label, grads);

  // d loss / d W[o][i] = (p_o - [o == label]) * x_i ; d loss / d b_o = p_o - [o == label].
  for (int o = 0; o < 5; ++o) {
    const double delta = p[static_cast<std::size_t>(o)] - (o == label ? 1.0 : 0.0);
    CHECK(grads[1].data[static_cast<std::size_t>(o)] == doctest::Approx(delta).epsilon(1e-12));
    for (int i = 0; i < 4; ++i)
      CHECK(grads[0].data[static_cast<std::size_t>(o) * 4 + i] ==
            doctest::Approx(delta * x.data[static_cast<std::size_t>(i)]).epsilon(1e-12));
  }
}

TEST_CASE("numeric gradient check covers the 2-d stack (conv2d, pool, relu, dense, softmax)") {
  const std::vector<LayerSpec> specs = {conv2d(1, 2, 3), plain(LayerSpec::Kind::relu),
                                        plain(LayerSpec::Kind::maxpool2d), dense(18, 5),
                                        plain(LayerSpec::Kind::softmax)};
  CnnModel model = build_cnn({1, 8, 8}, specs, "DVS");
  model.init_params(31);
  check_gradients(model, random_tensor({1, 8, 8}, 77), 1);
}

TEST_CASE("numeric gradient check covers the 1-d stack (conv1d, relu, dense, softmax)") {
  const std::vector<LayerSpec> specs = {conv1d(1, 2, 3), plain(LayerSpec::Kind::relu),
                                        conv1d(2, 3, 3), plain(LayerSpec::Kind::relu),
                                        dense(24, 5),    plain(LayerSpec::Kind::softmax)};
  CnnModel model = build_cnn({1, 12}, specs, "EMG");
  model.init_params(5);
  check_gradients(model, random_tensor({1, 12}, 91), 4);
}

TEST_CASE("gradients accumulate across backward calls") {
  CnnModel model = make_emg_cnn(2);
  const Tensor x = random_tensor({1, 16}, 6);

  std::vector<Tensor> once;
  model.backward(x, 1, once);
  std::vector<Tensor> twice;
  model.backward(x, 1, twice);
  model.backward(x, 1, twice);

  for (std::size_t t = 0; t < once.size(); ++t)
    for (std::size_t i = 0; i < once[t].data.size(); ++i)
      CHECK(twice[t].data[i] == doctest::Approx(2.0 * once[t].data[i]).epsilon(1e-12));
}

TEST_CASE("max-pool keeps window maxima and routes gradient to the first maximum") {
  const auto layer = make_layer(plain(LayerSpec::Kind::maxpool2d));
  Tensor x = Tensor::zeros({1, 4, 4});
  x.data = {1, 2, 5, 4,
            3, 0, 5, 5,   // top-right window ties at 5: top-left of them wins
            9, 9, 1, 1,
            9, 9, 0, 2};
  LayerContext ctx;
  const Tensor y = layer->forward(x, &ctx);
  CHECK(y.shape == std::vector<int>{1, 2, 2});
  CHECK(y.data == std::vector<double>{3, 5, 9, 2});

  Tensor dy = Tensor::zeros({1, 2, 2});
  dy.data = {1.0, 2.0, 3.0, 4.0};
  const Tensor dx = layer->backward(ctx, dy, {});
  // 3 sits at (1,0); the tied 5s resolve to (0,2); the tied 9s to (2,0); 2 at (3,3).
  std::vector<double> want(16, 0.0);
  want[4] = 1.0;
  want[2] = 2.0;
  want[8] = 3.0;
  want[15] = 4.0;
  CHECK(dx.data == want);
}

TEST_CASE("convolution matches a hand-computed window sum") {
  const auto layer = make_layer(conv2d(1, 1, 2));
  auto params = layer->param_tensors();
  std::fill(params[0]->data.begin(), params[0]->data.end(), 1.0);  // 2x2 kernel of ones
  Tensor x = Tensor::zeros({1, 3, 3});
  x.data = {1, 2, 3,
            4, 5, 6,
            7, 8, 9};
  const Tensor y = layer->forward(x, nullptr);
  CHECK(y.shape == std::vector<int>{1, 2, 2});
  CHECK(y.data == std::vector<double>{12, 16, 24, 28});

  params[1]->data[0] = 0.5;  // bias shifts every output
  const Tensor y2 = layer->forward(x, nullptr);
  CHECK(y2.data == std::vector<double>{12.5, 16.5, 24.5, 28.5});
}

TEST_CASE("relu zeroes negatives and keeps positives") {
  const auto layer = make_layer(plain(LayerSpec::Kind::relu));
  Tensor x = Tensor::zeros({4});
  x.data = {-1.5, 0.0, 2.5, -0.0};
  const Tensor y = layer->forward(x, nullptr);
  CHECK(y.data == std::vector<double>{0.0, 0.0, 2.5, 0.0});
}

TEST_CASE("model rejects bad inputs, labels, and layer stacks") {
  const CnnModel model = make_emg_cnn(1);
  std::vector<Tensor> grads;

  CHECK_THROWS_AS((void)model.forward(random_tensor({1, 17}, 1)), Error);
  CHECK_THROWS_AS((void)model.backward(random_tensor({1, 16}, 1), 5, grads), Error);
  CHECK_THROWS_AS((void)model.backward(random_tensor({1, 16}, 1), -1, grads), Error);

  try {
    (void)model.forward(random_tensor({16}, 1));
    FAIL("shape mismatch not raised");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::shape_mismatch);
  }

  // A stack that does not end in 5 classes is rejected at construction.
  const std::vector<LayerSpec> bad = {dense(16, 4), plain(LayerSpec::Kind::softmax)};
  CHECK_THROWS_AS((void)build_cnn({1, 16}, bad, "EMG"), Error);
  // ... as is one that does not end in softmax.
  const std::vector<LayerSpec> bad2 = {dense(16, 5)};
  CHECK_THROWS_AS((void)build_cnn({1, 16}, bad2, "EMG"), Error);
}

TEST_CASE("optimizer recurrence matches a hand-stepped oracle") {
  Tensor w = Tensor::zeros({2});
  w.data = {1.0, -2.0};
  std::vector<Tensor*> params{&w};
  AdadeltaState state;

  // Oracle: independent recurrence per element.
  double eg2[2] = {0, 0}, edx2[2] = {0, 0}, ref[2] = {1.0, -2.0};
  const double rho = 0.95, eps = 1e-6;

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int step = 0; step < 25; ++step) {
    Tensor g = Tensor::zeros({2});
    g.data = {n(rng), n(rng)};
    for (int i = 0; i < 2; ++i) {
      eg2[i] = rho * eg2[i] + (1 - rho) * g.data[i] * g.data[i];
      const double dx = -std::sqrt(edx2[i] + eps) / std::sqrt(eg2[i] + eps) * g.data[i];
      edx2[i] = rho * edx2[i] + (1 - rho) * dx * dx;
      ref[i] += dx;
    }
    std::vector<Tensor> grads{g};
    adadelta_step(params, grads, state);
    CHECK(w.data[0] == doctest::Approx(ref[0]).epsilon(1e-15));
    CHECK(w.data[1] == doctest::Approx(ref[1]).epsilon(1e-15));
  }
}

TEST_CASE("optimizer leaves parameters untouched for a zero gradient") {
  Tensor w = Tensor::zeros({3});
  w.data = {1.0, 2.0, 3.0};
  std::vector<Tensor*> params{&w};
  std::vector<Tensor> grads{Tensor::zeros({3})};
  AdadeltaState state;
  adadelta_step(params, grads, state);
  CHECK(w.data == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("optimizer rejects mismatched parameter and gradient shapes") {
  Tensor w = Tensor::zeros({3});
  std::vector<Tensor*> params{&w};
  std::vector<Tensor> grads{Tensor::zeros({4})};
  AdadeltaState state;
  try {
    adadelta_step(params, grads, state);
    FAIL("shape mismatch not raised");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::shape_mismatch);
  }
}

namespace {

// Five well-separated 1x16 patterns with mild additive noise.
void make_emg_toy(int per_class, std::uint64_t seed, std::vector<Tensor>& inputs,
                  std::vector<int>& labels) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.1);
  for (int k = 0; k < 5; ++k)
    for (int r = 0; r < per_class; ++r) {
      Tensor t = Tensor::zeros({1, 16});
      for (double& v : t.data) v = noise(rng);
      t.data[static_cast<std::size_t>(k) * 3] += 4.0;
      inputs.push_back(std::move(t));
      labels.push_back(k);
    }
}

int count_correct(const CnnModel& model, std::span<const Tensor> inputs,
                  std::span<const int> labels) {
  int correct = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto p = model.forward(inputs[i]);
    const auto arg = std::max_element(p.begin(), p.end()) - p.begin();
    if (arg == labels[i]) ++correct;
  }
  return correct;
}

}  // namespace

TEST_CASE("training memorizes a small separable time-domain set") {
  std::vector<Tensor> inputs;
  std::vector<int> labels;
  make_emg_toy(4, 123, inputs, labels);

  CnnModel model = make_emg_cnn(7);
  TrainConfig config;
  config.epochs = 150;
  config.batch_size = 8;
  const TrainResult result = train_cnn(model, inputs, labels, config, 99);

  REQUIRE(result.loss_history.size() == 150);
  CHECK(result.loss_history.back() < result.loss_history.front());
  CHECK(count_correct(model, inputs, labels) == static_cast<int>(inputs.size()));
}

TEST_CASE("training memorizes a small separable image set") {
  std::vector<Tensor> inputs;
  std::vector<int> labels;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.05);
  for (int k = 0; k < 5; ++k)
    for (int r = 0; r < 2; ++r) {
      Tensor t = Tensor::zeros({1, 60, 60});
      for (double& v : t.data) v = noise(rng);
      const int base = 8 + k * 9;
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
          t.data[static_cast<std::size_t>(base + y) * 60 + base + x] += 1.0;
      inputs.push_back(std::move(t));
      labels.push_back(k);
    }

  CnnModel model = make_vision_cnn(11);
  TrainConfig config;
  config.epochs = 40;
  config.batch_size = 10;
  const TrainResult result = train_cnn(model, inputs, labels, config, 4);

  CHECK(result.loss_history.back() < result.loss_history.front());
  CHECK(count_correct(model, inputs, labels) == static_cast<int>(inputs.size()));
}

TEST_CASE("zero training epochs leave the model untouched") {
  std::vector<Tensor> inputs;
  std::vector<int> labels;
  make_emg_toy(2, 8, inputs, labels);

  CnnModel model = make_emg_cnn(13);
  const CnnModel before = model;
  TrainConfig config;
  config.epochs = 0;
  const TrainResult result = train_cnn(model, inputs, labels, config, 1);

  CHECK(result.loss_history.empty());
  const auto pa = model.parameters();
  const auto pb = before.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->data == pb[i]->data);
}

TEST_CASE("training is bit-reproducible for a fixed seed") {
  std::vector<Tensor> inputs;
  std::vector<int> labels;
  make_emg_toy(3, 44, inputs, labels);

  TrainConfig config;
  config.epochs = 12;
  config.batch_size = 4;

  CnnModel a = make_emg_cnn(21);
  CnnModel b = make_emg_cnn(21);
  const TrainResult ra = train_cnn(a, inputs, labels, config, 55);
  const TrainResult rb = train_cnn(b, inputs, labels, config, 55);
  CHECK(ra.loss_history == rb.loss_history);
  const auto pa = a.parameters();
  const auto pb = b.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->data == pb[i]->data);

  CnnModel c = make_emg_cnn(21);
  const TrainResult rc = train_cnn(c, inputs, labels, config, 56);
  CHECK(ra.loss_history != rc.loss_history);
}

TEST_CASE("training rejects an empty dataset and mismatched labels") {
  CnnModel model = make_emg_cnn(1);
  TrainConfig config;
  std::vector<Tensor> inputs;
  std::vector<int> labels;
  try {
    (void)train_cnn(model, inputs, labels, config, 0);
    FAIL("empty dataset not raised");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_dataset);
  }

  inputs.push_back(random_tensor({1, 16}, 1));
  labels = {0, 1};
  CHECK_THROWS_AS((void)train_cnn(model, inputs, labels, config, 0), Error);
}

TEST_CASE("binary container round-trips a model bit-for-bit") {
  TempDir dir;
  CnnModel model = make_emg_cnn(77);
  const auto path = dir.path() / "emg.fgcn";
  save_cnn(path, model);

  const CnnModel back = load_cnn(path);
  CHECK(back.modality() == "EMG");
  CHECK(back.input_shape() == model.input_shape());
  REQUIRE(back.layers().size() == model.layers().size());
  for (std::size_t i = 0; i < back.layers().size(); ++i)
    CHECK(back.layers()[i]->spec() == model.layers()[i]->spec());

  const auto pa = model.parameters();
  const auto pb = back.parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->data == pb[i]->data);

  const Tensor x = random_tensor({1, 16}, 9);
  CHECK(model.forward(x) == back.forward(x));
}

TEST_CASE("binary container starts with the documented magic and version") {
  TempDir dir;
  const auto path = dir.path() / "m.fgcn";
  save_cnn(path, make_emg_cnn(1));
  std::ifstream in(path, std::ios::binary);
  char head[8];
  REQUIRE(in.read(head, 8));
  CHECK(head[0] == 'F');
  CHECK(head[1] == 'G');
  CHECK(head[2] == 'C');
  CHECK(head[3] == 'N');
  const unsigned version = static_cast<unsigned char>(head[4]) |
                           (static_cast<unsigned char>(head[5]) << 8) |
                           (static_cast<unsigned char>(head[6]) << 16) |
                           (static_cast<unsigned char>(head[7]) << 24);
  CHECK(version == 1);
}

TEST_CASE("loading rejects wrong magic, truncation, and mismatched blobs") {
  TempDir dir;

  const auto bad_magic = dir.write("bad.fgcn", "NOPE rest of file");
  try {
    (void)load_cnn(bad_magic);
    FAIL("bad magic not raised");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::io_error);
  }

  const auto good = dir.path() / "good.fgcn";
  save_cnn(good, make_emg_cnn(3));
  std::string bytes;
  {
    std::ifstream in(good, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  const auto truncated = dir.write("trunc.fgcn", bytes.substr(0, bytes.size() / 2));
  try {
    (void)load_cnn(truncated);
    FAIL("truncation not raised");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::io_error);
  }

  try {
    (void)load_cnn(dir.path() / "absent.fgcn");
    FAIL("missing file not raised");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::missing_file);
  }
}

TEST_CASE("JSON dump round-trips a model exactly") {
  CnnModel model = make_vision_cnn(31, "DAV");
  const std::string text = cnn_to_json(model);
  const CnnModel back = cnn_from_json(text);

  CHECK(back.modality() == "DAV");
  const auto pa = model.parameters();
  const auto pb = back.parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->data == pb[i]->data);

  CHECK_THROWS_AS((void)cnn_from_json("{ not json"), Error);
  CHECK_THROWS_AS((void)cnn_from_json("{\"kind\":\"cnn\"}"), Error);
}

TEST_CASE("architecture descriptor alone rebuilds a zeroed skeleton") {
  const CnnModel model = make_emg_cnn(5);
  const CnnModel skeleton = cnn_from_descriptor_json(cnn_descriptor_json(model));
  CHECK(skeleton.input_shape() == model.input_shape());
  CHECK(skeleton.layers().size() == model.layers().size());
  for (const Tensor* p : skeleton.parameters())
    for (double v : p->data) CHECK(v == 0.0);
}

TEST_SUITE_END();
