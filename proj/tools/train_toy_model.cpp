// Trains the toy classifier on synthetic patches and trajectory rasters, then
// quantizes it to the NPU's int8 format.
//
//   train_toy_model --out data/toy_model.npu [--train 6000] [--epochs 8] [--seed 1]

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <random>
#include <vector>

#include "CLI11.hpp"
#include "antiuav/fixtures.hpp"
#include "antiuav/npu/model.hpp"
#include "antiuav/npu/simulator.hpp"

namespace {

using antiuav::fixtures::LabeledInput;
namespace npu = antiuav::npu;

struct FloatConv {
  int in_c, out_c, k = 3, pad = 1;
  std::vector<float> w, b, gw, gb, vw, vb;

  FloatConv(int in, int out, std::mt19937_64& rng) : in_c(in), out_c(out) {
    const auto n = static_cast<std::size_t>(out_c * in_c * k * k);
    std::normal_distribution<float> init(0.0f, std::sqrt(2.0f / static_cast<float>(in_c * k * k)));
    w.resize(n);
    for (auto& v : w) v = init(rng);
    b.assign(static_cast<std::size_t>(out_c), 0.0f);
    gw.assign(n, 0.0f);
    gb.assign(b.size(), 0.0f);
    vw.assign(n, 0.0f);
    vb.assign(b.size(), 0.0f);
  }

  // same-padding conv, input [in_c][h][w]
  void forward(const std::vector<float>& in, int h, int wd, std::vector<float>& out) const {
    out.assign(static_cast<std::size_t>(out_c * h * wd), 0.0f);
    for (int oc = 0; oc < out_c; ++oc) {
      float* o = &out[static_cast<std::size_t>(oc * h * wd)];
      for (int i = 0; i < h * wd; ++i) o[i] = b[static_cast<std::size_t>(oc)];
      for (int ic = 0; ic < in_c; ++ic) {
        const float* x = &in[static_cast<std::size_t>(ic * h * wd)];
        for (int ky = 0; ky < k; ++ky) {
          for (int kx = 0; kx < k; ++kx) {
            const float wv = w[static_cast<std::size_t>(((oc * in_c + ic) * k + ky) * k + kx)];
            for (int y = 0; y < h; ++y) {
              const int iy = y + ky - pad;
              if (iy < 0 || iy >= h) continue;
              for (int xx = 0; xx < wd; ++xx) {
                const int ix = xx + kx - pad;
                if (ix < 0 || ix >= wd) continue;
                o[y * wd + xx] += wv * x[iy * wd + ix];
              }
            }
          }
        }
      }
    }
  }

  void backward(const std::vector<float>& in, int h, int wd, const std::vector<float>& gout, std::vector<float>& gin) {
    gin.assign(in.size(), 0.0f);
    for (int oc = 0; oc < out_c; ++oc) {
      const float* g = &gout[static_cast<std::size_t>(oc * h * wd)];
      for (int i = 0; i < h * wd; ++i) gb[static_cast<std::size_t>(oc)] += g[i];
      for (int ic = 0; ic < in_c; ++ic) {
        const float* x = &in[static_cast<std::size_t>(ic * h * wd)];
        float* gx = &gin[static_cast<std::size_t>(ic * h * wd)];
        for (int ky = 0; ky < k; ++ky) {
          for (int kx = 0; kx < k; ++kx) {
            const auto wi = static_cast<std::size_t>(((oc * in_c + ic) * k + ky) * k + kx);
            const float wv = w[wi];
            float acc = 0.0f;
            for (int y = 0; y < h; ++y) {
              const int iy = y + ky - pad;
              if (iy < 0 || iy >= h) continue;
              for (int xx = 0; xx < wd; ++xx) {
                const int ix = xx + kx - pad;
                if (ix < 0 || ix >= wd) continue;
                acc += g[y * wd + xx] * x[iy * wd + ix];
                gx[iy * wd + ix] += g[y * wd + xx] * wv;
              }
            }
            gw[wi] += acc;
          }
        }
      }
    }
  }
};

struct FloatFc {
  int in, out;
  std::vector<float> w, b, gw, gb, vw, vb;

  FloatFc(int i, int o, std::mt19937_64& rng) : in(i), out(o) {
    std::normal_distribution<float> init(0.0f, std::sqrt(1.0f / static_cast<float>(in)));
    w.resize(static_cast<std::size_t>(in * out));
    for (auto& v : w) v = init(rng);
    b.assign(static_cast<std::size_t>(out), 0.0f);
    gw.assign(w.size(), 0.0f);
    gb.assign(b.size(), 0.0f);
    vw.assign(w.size(), 0.0f);
    vb.assign(b.size(), 0.0f);
  }
};

void relu_pool_forward(std::vector<float>& x, int c, int h, int w, std::vector<float>& pooled, std::vector<int>& argmax) {
  for (auto& v : x) v = std::max(v, 0.0f);
  const int oh = h / 2, ow = w / 2;
  pooled.assign(static_cast<std::size_t>(c * oh * ow), 0.0f);
  argmax.assign(pooled.size(), 0);
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < oh; ++y)
      for (int xx = 0; xx < ow; ++xx) {
        int best = (ch * h + 2 * y) * w + 2 * xx;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            const int idx = (ch * h + 2 * y + dy) * w + 2 * xx + dx;
            if (x[static_cast<std::size_t>(idx)] > x[static_cast<std::size_t>(best)]) best = idx;
          }
        const auto o = static_cast<std::size_t>((ch * oh + y) * ow + xx);
        pooled[o] = x[static_cast<std::size_t>(best)];
        argmax[o] = best;
      }
}

void relu_pool_backward(const std::vector<float>& pre, const std::vector<float>& gpooled, const std::vector<int>& argmax,
                        std::vector<float>& gpre) {
  gpre.assign(pre.size(), 0.0f);
  for (std::size_t i = 0; i < gpooled.size(); ++i) {
    const auto src = static_cast<std::size_t>(argmax[i]);
    if (pre[src] > 0.0f) gpre[src] += gpooled[i];
  }
}

struct Net {
  FloatConv c1, c2, c3;
  FloatFc fc;

  explicit Net(std::mt19937_64& rng) : c1(1, 8, rng), c2(8, 16, rng), c3(16, 16, rng), fc(256, 2, rng) {}

  struct Trace {
    std::vector<float> x0, a1, p1, a2, p2, a3, p3, logits;
    std::vector<int> m1, m2, m3;
  };

  void forward(const antiuav::ClassifierInput& input, Trace& t) const {
    t.x0.resize(1024);
    for (std::size_t i = 0; i < 1024; ++i) t.x0[i] = static_cast<float>(input.pixels[i]) / 255.0f;
    c1.forward(t.x0, 32, 32, t.a1);
    relu_pool_forward(t.a1, 8, 32, 32, t.p1, t.m1);
    c2.forward(t.p1, 16, 16, t.a2);
    relu_pool_forward(t.a2, 16, 16, 16, t.p2, t.m2);
    c3.forward(t.p2, 8, 8, t.a3);
    relu_pool_forward(t.a3, 16, 8, 8, t.p3, t.m3);
    t.logits.assign(2, 0.0f);
    for (int o = 0; o < 2; ++o) {
      float s = fc.b[static_cast<std::size_t>(o)];
      for (int i = 0; i < 256; ++i) s += fc.w[static_cast<std::size_t>(o * 256 + i)] * t.p3[static_cast<std::size_t>(i)];
      t.logits[static_cast<std::size_t>(o)] = s;
    }
  }

  // Accumulates gradients, returns the loss.
  float backward(Trace& t, int label) {
    const float m = std::max(t.logits[0], t.logits[1]);
    const float e0 = std::exp(t.logits[0] - m), e1 = std::exp(t.logits[1] - m);
    const float p[2] = {e0 / (e0 + e1), e1 / (e0 + e1)};
    std::vector<float> gp3(256, 0.0f);
    for (int o = 0; o < 2; ++o) {
      const float g = p[o] - (o == label ? 1.0f : 0.0f);
      fc.gb[static_cast<std::size_t>(o)] += g;
      for (int i = 0; i < 256; ++i) {
        fc.gw[static_cast<std::size_t>(o * 256 + i)] += g * t.p3[static_cast<std::size_t>(i)];
        gp3[static_cast<std::size_t>(i)] += g * fc.w[static_cast<std::size_t>(o * 256 + i)];
      }
    }
    std::vector<float> ga3, gp2, ga2, gp1, ga1, gx;
    relu_pool_backward(t.a3, gp3, t.m3, ga3);
    c3.backward(t.p2, 8, 8, ga3, gp2);
    relu_pool_backward(t.a2, gp2, t.m2, ga2);
    c2.backward(t.p1, 16, 16, ga2, gp1);
    relu_pool_backward(t.a1, gp1, t.m1, ga1);
    c1.backward(t.x0, 32, 32, ga1, gx);
    return -std::log(std::max(p[label], 1e-7f));
  }

  void step(float lr, float momentum, int batch) {
    auto upd = [&](std::vector<float>& w, std::vector<float>& g, std::vector<float>& v) {
      for (std::size_t i = 0; i < w.size(); ++i) {
        v[i] = momentum * v[i] - lr * g[i] / static_cast<float>(batch);
        w[i] += v[i];
        g[i] = 0.0f;
      }
    };
    for (FloatConv* c : {&c1, &c2, &c3}) {
      upd(c->w, c->gw, c->vw);
      upd(c->b, c->gb, c->vb);
    }
    upd(fc.w, fc.gw, fc.vw);
    upd(fc.b, fc.gb, fc.vb);
  }

  int predict(const antiuav::ClassifierInput& input) const {
    Trace t;
    forward(input, t);
    return t.logits[1] > t.logits[0] ? 1 : 0;
  }
};

float max_abs(const std::vector<float>& v) {
  float m = 0.0f;
  for (auto x : v) m = std::max(m, std::abs(x));
  return m;
}

npu::Layer quantize_conv(const FloatConv& c, float s_in, float s_out, int pool) {
  npu::Layer L;
  L.type = npu::LayerType::Conv;
  L.out_c = c.out_c;
  L.in_c = c.in_c;
  L.kernel = c.k;
  L.stride = 1;
  L.pad = c.pad;
  L.pool = pool;
  const float s_w = std::max(max_abs(c.w), 1e-8f) / 127.0f;
  for (auto w : c.w) L.weights.push_back(static_cast<std::int8_t>(std::clamp(std::lround(w / s_w), -127L, 127L)));
  for (auto b : c.b) L.bias.push_back(static_cast<std::int32_t>(std::lround(b / (s_in * s_w))));
  L.scale = s_in * s_w / s_out;
  return L;
}

// Activation scale from a high percentile of positive activations.
float activation_scale(std::vector<float> values) {
  values.erase(std::remove_if(values.begin(), values.end(), [](float v) { return v <= 0.0f; }), values.end());
  if (values.empty()) return 1.0f / 255.0f;
  const auto k = static_cast<std::size_t>(0.9995 * static_cast<double>(values.size() - 1));
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
  return std::max(values[k], 1e-6f) / 255.0f;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Train and quantize the toy UAV classifier"};
  std::string out = "toy_model.npu";
  std::size_t train_count = 6000;
  std::size_t holdout_count = 1000;
  int epochs = 8;
  std::uint64_t seed = 1;
  float lr = 0.02f;
  app.add_option("--out", out, "output weight blob");
  app.add_option("--train", train_count, "training samples");
  app.add_option("--holdout", holdout_count, "holdout samples");
  app.add_option("--epochs", epochs, "epochs");
  app.add_option("--seed", seed, "seed");
  app.add_option("--lr", lr, "learning rate");
  CLI11_PARSE(app, argc, argv);

  const auto train = antiuav::fixtures::make_dataset(train_count, seed);
  const auto holdout = antiuav::fixtures::make_dataset(holdout_count, seed + 1000);

  std::mt19937_64 rng(seed * 7919 + 17);
  Net net(rng);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const int batch = 16;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const float rate = lr * (epoch >= epochs * 3 / 4 ? 0.1f : 1.0f);
    double loss = 0.0;
    int in_batch = 0;
    Net::Trace t;
    for (auto idx : order) {
      net.forward(train[idx].input, t);
      loss += net.backward(t, train[idx].label);
      if (++in_batch == batch) {
        net.step(rate, 0.9f, batch);
        in_batch = 0;
      }
    }
    if (in_batch) net.step(rate, 0.9f, in_batch);
    std::size_t correct = 0;
    for (const auto& s : holdout) correct += net.predict(s.input) == s.label;
    std::printf("epoch %d  loss %.4f  float holdout %.4f\n", epoch, loss / static_cast<double>(train.size()),
                static_cast<double>(correct) / static_cast<double>(holdout.size()));
  }

  // Calibrate activation scales on a slice of the training set.
  std::vector<float> acts1, acts2, acts3;
  Net::Trace t;
  for (std::size_t i = 0; i < std::min<std::size_t>(train.size(), 800); ++i) {
    net.forward(train[i].input, t);
    acts1.insert(acts1.end(), t.a1.begin(), t.a1.end());
    acts2.insert(acts2.end(), t.a2.begin(), t.a2.end());
    acts3.insert(acts3.end(), t.a3.begin(), t.a3.end());
  }
  const float s0 = 1.0f / 255.0f;
  const float s1 = activation_scale(std::move(acts1));
  const float s2 = activation_scale(std::move(acts2));
  const float s3 = activation_scale(std::move(acts3));

  npu::Model model;
  model.layers.push_back(quantize_conv(net.c1, s0, s1, 2));
  model.layers.push_back(quantize_conv(net.c2, s1, s2, 2));
  model.layers.push_back(quantize_conv(net.c3, s2, s3, 2));
  npu::Layer fc;
  fc.type = npu::LayerType::Fc;
  fc.out_c = 2;
  fc.in_c = 256;
  const float s_w = std::max(max_abs(net.fc.w), 1e-8f) / 127.0f;
  for (auto w : net.fc.w) fc.weights.push_back(static_cast<std::int8_t>(std::clamp(std::lround(w / s_w), -127L, 127L)));
  for (auto b : net.fc.b) fc.bias.push_back(static_cast<std::int32_t>(std::lround(b / (s3 * s_w))));
  fc.scale = s3 * s_w;
  model.layers.push_back(std::move(fc));
  npu::save_model(out, model);

  npu::Classifier classifier(model);
  std::size_t correct = 0;
  for (const auto& s : holdout) correct += classifier.classify(s.input).label == s.label;
  std::printf("int8 holdout accuracy %.4f -> %s\n", static_cast<double>(correct) / static_cast<double>(holdout.size()),
              out.c_str());
  return 0;
}
