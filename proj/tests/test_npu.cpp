#include <random>
#include <string>

#include "antiuav/error.hpp"
#include "antiuav/fixtures.hpp"
#include "antiuav/isp.hpp"
#include "antiuav/npu/assembler.hpp"
#include "antiuav/npu/isa.hpp"
#include "antiuav/npu/model.hpp"
#include "antiuav/npu/pe_array.hpp"
#include "antiuav/npu/simulator.hpp"
#include "doctest.h"
#include "generators.hpp"
#include "oracles.hpp"

using namespace antiuav;
using namespace antiuav::npu;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::Io;
}

const Model& shipped_model() {
  static const Model m = load_model(std::string(ANTIUAV_DATA_DIR) + "/toy_model.npu");
  return m;
}

// conv 1->2 (3x3, pool 2) then FC 512->2, random weights.
Model small_model(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> w(-60, 60);
  Model m;
  Layer c;
  c.type = LayerType::Conv;
  c.out_c = 2;
  c.in_c = 1;
  c.kernel = 3;
  c.pad = 1;
  c.pool = 2;
  c.scale = 0.01f;
  for (int i = 0; i < 18; ++i) c.weights.push_back(static_cast<std::int8_t>(w(rng)));
  c.bias = {100, -50};
  Layer f;
  f.type = LayerType::Fc;
  f.out_c = 2;
  f.in_c = 512;
  f.scale = 0.001f;
  for (int i = 0; i < 1024; ++i) f.weights.push_back(static_cast<std::int8_t>(w(rng)));
  f.bias = {7, -7};
  m.layers = {c, f};
  return m;
}

ClassifierInput random_input(std::mt19937_64& rng) {
  ClassifierInput in;
  for (auto& p : in.pixels) p = static_cast<std::uint8_t>(rng() % 3 == 0 ? 0 : rng() % 256);
  return in;
}

std::vector<std::uint8_t> pixels_of(const ClassifierInput& in) { return {in.pixels.begin(), in.pixels.end()}; }

}  // namespace

TEST_CASE("golden instruction words") {
  CHECK(encode_instruction(End{}) == 0x7u);
  CHECK((encode_instruction(End{}) & 0x7u) == 0b111u);
  CHECK(encode_instruction(LoadW{3, 1}) == 0x818u);
  CHECK(encode_instruction(LoadA{0, 1, 32, 32}) == 0x8080011u);
  CHECK(encode_instruction(Conv{1, 0, 1, 8, 16, 16, 16, 3, 1, 1, 1}) == 0x2ac101010022aull);
  CHECK(encode_instruction(Pool{0, 1, 16, 16, 16, 2, 2}) == 0x908080213ull);
  CHECK(encode_instruction(Fc{1, 0, 1, 256, 2, 0}) == 0x80402cu);
  CHECK(encode_instruction(Store{2}) == 0x15u);
  CHECK(encode_instruction(Preload{2, 0}) == 0x16u);
  CHECK(decode_instruction(0x2ac101010022aull) == Instruction{Conv{1, 0, 1, 8, 16, 16, 16, 3, 1, 1, 1}});
}

TEST_CASE("opcode occupies the low three bits") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    const auto inst = gen::random_instruction(rng);
    CHECK((encode_instruction(inst) & 0x7u) == static_cast<unsigned>(opcode_of(inst)));
  }
}

TEST_CASE("encode/decode roundtrip fuzz") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20000; ++i) {
    const auto inst = gen::random_instruction(rng);
    const auto word = encode_instruction(inst);
    REQUIRE(decode_instruction(word) == inst);
    CHECK(encode_instruction(decode_instruction(word)) == word);
  }
}

TEST_CASE("nonzero reserved bits are rejected") {
  CHECK(code_of([] { decode_instruction(0x7u | (1ull << 3)); }) == ErrorCode::FieldOverflow);
  CHECK(code_of([] { decode_instruction(0x7u | (1ull << 63)); }) == ErrorCode::FieldOverflow);
  CHECK(code_of([] { decode_instruction(0x818u | (1ull << 12)); }) == ErrorCode::FieldOverflow);
  CHECK(code_of([] { decode_instruction(0x2ac101010022aull | (1ull << 50)); }) == ErrorCode::FieldOverflow);
}

TEST_CASE("encode rejects oversized fields") {
  CHECK(code_of([] { encode_instruction(LoadW{256, 0}); }) == ErrorCode::FieldOverflow);
  CHECK(code_of([] { encode_instruction(LoadW{0, 2}); }) == ErrorCode::FieldOverflow);
  CHECK(code_of([] { encode_instruction(Conv{0, 0, 0, 1024, 1, 1, 1, 1, 1, 0, 1}); }) == ErrorCode::FieldOverflow);
  CHECK(code_of([] { encode_instruction(Store{65536}); }) == ErrorCode::FieldOverflow);
}

TEST_CASE("assembler and disassembler") {
  const auto prog = assemble(
      "# header\n"
      "LOAD_A dst=0 c=1 h=32 w=32\n"
      "\n"
      "LOAD_W layer=3 bank=1   # trailing\n"
      "CONV src=1 dst=0 bank=1 in_c=8 in_h=16 in_w=16 out_c=16 kernel=3 stride=1 pad=1 relu=1\n"
      "STORE length=0x2\n"
      "END\n");
  REQUIRE(prog.size() == 5);
  CHECK(encode_program(prog) ==
        std::vector<std::uint64_t>{0x8080011u, 0x818u, 0x2ac101010022aull, 0x15u, 0x7u});
  CHECK(assemble(disassemble(prog)) == prog);
  CHECK(decode_program(parse_words(format_words(encode_program(prog)))) == prog);

  auto err = [](const char* src) {
    try {
      assemble(src);
    } catch (const Error& e) {
      return std::pair{e.code(), e.location().value_or(0)};
    }
    return std::pair{ErrorCode::Io, std::size_t{0}};
  };
  CHECK(err("END\nJUMP x=1\n") == std::pair{ErrorCode::UnknownOpcode, std::size_t{2}});
  CHECK(err("\n\nLOAD_W layer=300\n") == std::pair{ErrorCode::FieldOverflow, std::size_t{3}});
  CHECK(err("LOAD_W colour=1\n") == std::pair{ErrorCode::MalformedLine, std::size_t{1}});
  CHECK(err("LOAD_W layer\n") == std::pair{ErrorCode::MalformedLine, std::size_t{1}});
  CHECK(err("LOAD_W layer=abc\n") == std::pair{ErrorCode::MalformedLine, std::size_t{1}});
}

TEST_CASE("conv with all-zero activations yields the bias") {
  std::mt19937_64 rng(5);
  auto c = gen::random_conv_case(rng);
  std::fill(c.act.data.begin(), c.act.data.end(), 0);
  const auto r = conv2d_output_stationary(c.act, c.weights, c.bias, c.shape);
  for (int oc = 0; oc < r.out_c; ++oc)
    for (int y = 0; y < r.out_h; ++y)
      for (int x = 0; x < r.out_w; ++x) CHECK(r.at(oc, y, x) == c.bias[static_cast<std::size_t>(oc)]);
  CHECK(r.macs.executed == 0);
  CHECK(r.macs.skipped == r.macs.dense);
  CHECK(r.macs.dense > 0);
}

TEST_CASE("1x1 identity kernel passes activations through") {
  Tensor act(1, 5, 7);
  for (std::size_t i = 0; i < act.data.size(); ++i) act.data[i] = static_cast<std::uint8_t>(i % 4 == 0 ? 0 : i * 7);
  const std::vector<std::int8_t> w{1};
  const std::vector<std::int32_t> b{0};
  const auto r = conv2d_output_stationary(act, w, b, {1, 5, 7, 1, 1, 1, 0});
  std::uint64_t nonzero = 0;
  for (std::size_t i = 0; i < act.data.size(); ++i) {
    CHECK(r.acc[i] == act.data[i]);
    CHECK(requantize(r.acc[i], 1.0f) == act.data[i]);
    nonzero += act.data[i] != 0;
  }
  CHECK(r.macs.executed == nonzero);
}

TEST_CASE("random 8x8x4 conv matches the nested-loop oracle") {
  std::mt19937_64 rng(21);
  Tensor act(4, 8, 8);
  for (auto& v : act.data) v = static_cast<std::uint8_t>(rng() % 2 ? 0 : rng() % 256);
  std::vector<std::int8_t> w(3 * 3 * 4 * 8);
  for (auto& v : w) v = static_cast<std::int8_t>(rng() % 3 == 0 ? 0 : static_cast<int>(rng() % 256) - 128);
  std::vector<std::int32_t> b(8);
  for (auto& v : b) v = static_cast<std::int32_t>(rng() % 2001) - 1000;
  const auto r = conv2d_output_stationary(act, w, b, {4, 8, 8, 8, 3, 1, 1});
  const auto o = oracle::conv(act.data, 4, 8, 8, w, b, 8, 3, 1, 1);
  CHECK(r.acc == o.acc);
  CHECK(r.macs.dense == o.dense);
  CHECK(r.macs.executed == o.nonzero_products);
  CHECK(r.macs.dense == r.macs.executed + r.macs.skipped);
}

TEST_CASE("random conv and FC configurations match the oracle") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 60; ++i) {
    const bool fc = i % 3 == 2;
    const auto c = gen::random_conv_case(rng, fc);
    const auto& s = c.shape;
    const auto r = conv2d_output_stationary(c.act, c.weights, c.bias, s);
    const auto o = oracle::conv(c.act.data, s.in_c, s.in_h, s.in_w, c.weights, c.bias, s.out_c, s.kernel, s.stride, s.pad);
    REQUIRE(r.acc == o.acc);
    CHECK(r.macs.executed == o.nonzero_products);
    CHECK(r.macs.dense == r.macs.executed + r.macs.skipped);
    CHECK(r.macs.waves <= r.macs.dense_waves);
  }
}

TEST_CASE("conv shape errors") {
  Tensor act(2, 4, 4);
  const std::vector<std::int8_t> w(2 * 2 * 9);
  const std::vector<std::int32_t> b(2);
  CHECK(code_of([&] { conv2d_output_stationary(act, w, b, {3, 4, 4, 2, 3, 1, 1}); }) == ErrorCode::ShapeMismatch);
  CHECK(code_of([&] { conv2d_output_stationary(act, w, std::vector<std::int32_t>(3), {2, 4, 4, 2, 3, 1, 1}); }) ==
        ErrorCode::ShapeMismatch);
  CHECK(code_of([&] { conv2d_output_stationary(act, std::vector<std::int8_t>(2 * 2 * 25), b, {2, 4, 4, 2, 5, 1, 0}); }) ==
        ErrorCode::ShapeMismatch);
}

TEST_CASE("requantize rounds and saturates") {
  CHECK(requantize(-10, 0.5f) == 0);
  CHECK(requantize(5, 0.5f) == 3);
  CHECK(requantize(4, 0.5f) == 2);
  CHECK(requantize(1000, 1.0f) == 255);
  CHECK(requantize(255, 1.0f) == 255);
}

TEST_CASE("PE array is output stationary") {
  PeArray pe;
  pe.clear();
  CHECK(pe.mac(0, 0, 3, 4));
  CHECK_FALSE(pe.mac(0, 0, 0, 4));
  CHECK(pe.mac(0, 0, 2, -1));
  CHECK(pe.drain(0, 0) == 10);
  CHECK(pe.drain(1, 1) == 0);
  CHECK_THROWS_AS(pe.mac(0, 0, 1, 1), std::logic_error);
  CHECK(pe.executed(0, 0) == 2);
  CHECK(pe.skipped(0, 0) == 1);
  pe.clear();
  CHECK(pe.mac(0, 0, 1, 1));
  CHECK(pe.drain(0, 0) == 1);
}

TEST_CASE("program [END] runs with a single timeline entry") {
  const Npu npu(small_model(1));
  const std::vector<Instruction> prog{End{}};
  const auto r = npu.run_program(prog, ClassifierInput{});
  CHECK_FALSE(r.output.has_value());
  CHECK(r.timeline.entries.size() == 1);
  CHECK(r.macs.dense == 0);
}

TEST_CASE("preload shortens the schedule without changing outputs") {
  std::mt19937_64 rng(8);
  for (const auto& model : {small_model(2), shipped_model()}) {
    const Npu npu(model);
    const auto with = compile_program(model, true);
    const auto without = compile_program(model, false);
    for (int i = 0; i < 3; ++i) {
      const auto in = random_input(rng);
      const auto a = npu.run_program(with, in, ScheduleMode::Overlapped);
      const auto b = npu.run_program(with, in, ScheduleMode::Sequential);
      const auto c = npu.run_program(without, in, ScheduleMode::Overlapped);
      REQUIRE(a.output.has_value());
      CHECK(a.output->logits == b.output->logits);
      CHECK(a.output->logits == c.output->logits);
      CHECK(a.macs == b.macs);
      CHECK(a.timeline.total_cycles < b.timeline.total_cycles);
      CHECK(a.timeline.total_cycles < c.timeline.total_cycles);
      CHECK(a.timeline.total_cycles < a.timeline.isolated_cycles);
      CHECK(b.timeline.total_cycles == b.timeline.isolated_cycles);
    }
  }
}

TEST_CASE("timeline entries are ordered and blocking ops serialize") {
  const Npu npu(small_model(3));
  const auto r = npu.run_program(compile_program(npu.model(), true), ClassifierInput{}, ScheduleMode::Sequential);
  for (std::size_t i = 1; i < r.timeline.entries.size(); ++i) {
    CHECK(r.timeline.entries[i].start >= r.timeline.entries[i - 1].end);
    CHECK(r.timeline.entries[i].end - r.timeline.entries[i].start == r.timeline.entries[i].cycles);
  }
}

TEST_CASE("malformed programs") {
  const Npu npu(small_model(4));
  auto err = [&](std::vector<Instruction> prog) {
    try {
      npu.run_program(prog, ClassifierInput{});
    } catch (const Error& e) {
      return std::pair{e.code(), e.location().value_or(999)};
    }
    return std::pair{ErrorCode::Io, std::size_t{999}};
  };
  const auto mp = ErrorCode::MalformedProgram;
  CHECK(err({}).first == mp);
  CHECK(err({LoadW{0, 0}}).first == mp);
  CHECK(err({End{}, End{}}) == std::pair{mp, std::size_t{0}});
  CHECK(err({LoadW{0, 0}, Conv{0, 1, 0, 1, 32, 32, 2, 3, 1, 1, 1}, End{}}) == std::pair{mp, std::size_t{1}});
  CHECK(err({LoadA{0, 1, 32, 32}, Conv{0, 1, 0, 1, 32, 32, 2, 3, 1, 1, 1}, End{}}) == std::pair{mp, std::size_t{1}});
  CHECK(err({LoadA{0, 1, 32, 32}, LoadW{0, 0}, Conv{0, 1, 0, 1, 16, 32, 2, 3, 1, 1, 1}, End{}}) ==
        std::pair{mp, std::size_t{2}});
  CHECK(err({LoadA{0, 1, 32, 32}, LoadW{1, 0}, Conv{0, 1, 0, 1, 32, 32, 2, 3, 1, 1, 1}, End{}}) ==
        std::pair{mp, std::size_t{2}});
  CHECK(err({LoadA{0, 1, 16, 16}, End{}}) == std::pair{mp, std::size_t{0}});
  CHECK(err({LoadW{7, 0}, End{}}) == std::pair{mp, std::size_t{0}});
  CHECK(err({Store{2}, End{}}) == std::pair{mp, std::size_t{0}});
}

TEST_CASE("model blob roundtrip and errors") {
  const auto m = small_model(5);
  const auto blob = encode_model(m);
  CHECK(blob.substr(0, 4) == "NPU1");
  CHECK(decode_model(blob) == m);
  CHECK(decode_model(encode_model(shipped_model())) == shipped_model());
  CHECK(code_of([&] { decode_model("NPU2" + blob.substr(4)); }) == ErrorCode::MalformedModel);
  CHECK(code_of([&] { decode_model(blob.substr(0, blob.size() - 1)); }) == ErrorCode::MalformedModel);
  CHECK(code_of([&] { decode_model(blob + "x"); }) == ErrorCode::MalformedModel);
  CHECK(code_of([&] { decode_model(""); }) == ErrorCode::MalformedModel);
  auto broken = m;
  broken.layers[1].in_c = 100;
  broken.layers[1].weights.resize(200);
  CHECK(code_of([&] { broken.validate(); }) == ErrorCode::ModelShapeMismatch);
}

TEST_CASE("shipped model matches the forward-pass oracle") {
  const auto& m = shipped_model();
  m.validate();
  CHECK(m.layers.size() == 4);
  CHECK(m.classes == std::vector<std::string>{"uav", "non_uav"});
  Classifier cls(m);
  std::mt19937_64 rng(13);
  for (int i = 0; i < 5; ++i) {
    const auto in = random_input(rng);
    const auto c = cls.classify(in);
    CHECK(c.logits == oracle::forward(m, pixels_of(in)));
  }
  const ClassifierInput zero;
  const auto z = cls.classify(zero);
  const auto logits = oracle::forward(m, pixels_of(zero));
  CHECK(z.logits == logits);
  CHECK(z.label == (logits[1] > logits[0] ? 1 : 0));
  CHECK(cls.invocations() == 6);
  CHECK(cls.cycles() > 0);
}

TEST_CASE("classify is deterministic and checks the model shape") {
  std::mt19937_64 rng(17);
  const auto in = random_input(rng);
  const auto a = classify(in, small_model(6));
  const auto b = classify(in, small_model(6));
  CHECK(a.label == b.label);
  CHECK(a.logits == b.logits);
  CHECK(a.confidence == b.confidence);
  CHECK(a.confidence >= 0.5);
  CHECK(a.confidence <= 1.0);
  CHECK((a.name == "uav" || a.name == "non_uav"));

  Model m16 = small_model(6);
  m16.in_h = m16.in_w = 16;
  m16.layers[1].in_c = 128;
  m16.layers[1].weights.resize(256);
  CHECK(code_of([&] { classify(in, m16); }) == ErrorCode::ModelShapeMismatch);
}

TEST_CASE("straight and zigzag trajectories get distinct labels") {
  std::mt19937_64 rng(31);
  Classifier cls(shipped_model());
  int straight_ok = 0, zigzag_ok = 0;
  for (int i = 0; i < 20; ++i) {
    const auto s = rasterize_trajectory(fixtures::make_trajectory_sample(fixtures::ObjectClass::Uav, rng));
    const auto z = rasterize_trajectory(fixtures::make_trajectory_sample(fixtures::ObjectClass::NonUav, rng));
    straight_ok += cls.classify(s).label == 0;
    zigzag_ok += cls.classify(z).label == 1;
  }
  CHECK(straight_ok >= 19);
  CHECK(zigzag_ok >= 19);
}
