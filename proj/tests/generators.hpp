#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "antiuav/npu/isa.hpp"
#include "antiuav/npu/model.hpp"
#include "antiuav/npu/pe_array.hpp"

namespace gen {

namespace npu = antiuav::npu;

template <typename Op>
Op random_fields(std::mt19937_64& rng) {
  Op op;
  for (const auto& f : Op::layout()) {
    const std::uint64_t mask = (std::uint64_t{1} << f.width) - 1;
    op.*(f.member) = static_cast<std::uint32_t>(rng() & mask);
  }
  return op;
}

inline npu::Instruction random_instruction(std::mt19937_64& rng) {
  switch (rng() % 8) {
    case 0: return random_fields<npu::LoadW>(rng);
    case 1: return random_fields<npu::LoadA>(rng);
    case 2: return random_fields<npu::Conv>(rng);
    case 3: return random_fields<npu::Pool>(rng);
    case 4: return random_fields<npu::Fc>(rng);
    case 5: return random_fields<npu::Store>(rng);
    case 6: return random_fields<npu::Preload>(rng);
    default: return npu::End{};
  }
}

struct ConvCase {
  npu::ConvShape shape;
  npu::Tensor act;
  std::vector<std::int8_t> weights;
  std::vector<std::int32_t> bias;
};

// Operands are sparse on purpose so zero-skipping gets exercised.
inline ConvCase random_conv_case(std::mt19937_64& rng, bool fc = false) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  ConvCase c;
  auto& s = c.shape;
  if (fc) {
    s = {pick(1, 300), 1, 1, pick(1, 40), 1, 1, 0};
  } else {
    s.in_c = pick(1, 8);
    s.in_h = pick(1, 14);
    s.in_w = pick(1, 14);
    s.out_c = pick(1, 24);
    s.kernel = 1 + 2 * pick(0, 2);
    s.stride = pick(1, 2);
    s.pad = pick(0, 2);
    while (s.in_h + 2 * s.pad < s.kernel || s.in_w + 2 * s.pad < s.kernel) ++s.pad;
  }
  c.act = npu::Tensor(s.in_c, s.in_h, s.in_w);
  const int act_zero = pick(0, 90);
  const int w_zero = pick(0, 70);
  for (auto& v : c.act.data) v = pick(0, 99) < act_zero ? 0 : static_cast<std::uint8_t>(pick(1, 255));
  c.weights.resize(s.weight_count());
  for (auto& v : c.weights) v = pick(0, 99) < w_zero ? 0 : static_cast<std::int8_t>(pick(-128, 127));
  c.bias.resize(static_cast<std::size_t>(s.out_c));
  for (auto& v : c.bias) v = pick(-5000, 5000);
  return c;
}

// 1x32x32 input, 1..3 conv layers (3x3, pad 1, optional 2x2 pool), FC to 2
// classes, random int8 weights.
inline npu::Model random_model(std::mt19937_64& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  npu::Model m;
  int c = 1, side = 32;
  const int convs = pick(1, 3);
  for (int i = 0; i < convs; ++i) {
    npu::Layer L;
    L.type = npu::LayerType::Conv;
    L.in_c = c;
    L.out_c = pick(1, 8);
    L.kernel = 3;
    L.pad = 1;
    L.pool = pick(0, 1) ? 2 : 0;
    L.scale = 0.002f * static_cast<float>(pick(1, 10));
    L.weights.resize(static_cast<std::size_t>(L.out_c * L.in_c * 9));
    for (auto& w : L.weights) w = static_cast<std::int8_t>(pick(-127, 127));
    for (int o = 0; o < L.out_c; ++o) L.bias.push_back(pick(-2000, 2000));
    c = L.out_c;
    if (L.pool) side /= 2;
    m.layers.push_back(L);
  }
  npu::Layer f;
  f.type = npu::LayerType::Fc;
  f.in_c = c * side * side;
  f.out_c = 2;
  f.scale = 0.001f;
  f.weights.resize(static_cast<std::size_t>(f.in_c * 2));
  for (auto& w : f.weights) w = static_cast<std::int8_t>(pick(-127, 127));
  f.bias = {pick(-100, 100), pick(-100, 100)};
  m.layers.push_back(f);
  return m;
}

}  // namespace gen
