#include "antiuav/npu/simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "antiuav/error.hpp"

namespace antiuav::npu {

namespace {

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

[[noreturn]] void malformed(std::size_t index, const std::string& why) {
  throw Error(ErrorCode::MalformedProgram, why, index);
}

// Functional state of the datapath.
struct Datapath {
  std::array<std::optional<Tensor>, 2> buffers;
  std::array<std::optional<std::size_t>, 2> banks;  // layer index held by each bank
  std::vector<std::int32_t> output;
  float output_scale = 1.0f;
};

const Tensor& source(const Datapath& dp, std::uint32_t buf, std::size_t index) {
  if (!dp.buffers[buf]) malformed(index, "activation buffer " + std::to_string(buf) + " is empty");
  return *dp.buffers[buf];
}

const Layer& bank_layer(const Datapath& dp, const Model& model, std::uint32_t bank, std::size_t index) {
  if (!dp.banks[bank]) malformed(index, "weight bank " + std::to_string(bank) + " is empty");
  return model.layers[*dp.banks[bank]];
}

Classification make_classification(const std::vector<std::int32_t>& logits, float scale, const Model& model) {
  Classification out;
  out.logits = logits;
  out.label = static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
  out.name = static_cast<std::size_t>(out.label) < model.classes.size() ? model.classes[static_cast<std::size_t>(out.label)]
                                                                       : std::to_string(out.label);
  const double top = static_cast<double>(logits[static_cast<std::size_t>(out.label)]) * scale;
  double denom = 0.0;
  for (auto l : logits) denom += std::exp(static_cast<double>(l) * scale - top);
  out.confidence = 1.0 / denom;
  return out;
}

}  // namespace

Npu::Npu(Model model) : model_(std::move(model)) { model_.validate(); }

RunResult Npu::run_program(std::span<const Instruction> program, const ClassifierInput& input,
                           ScheduleMode mode) const {
  if (program.empty() || opcode_of(program.back()) != Opcode::End) {
    malformed(program.size(), "program must end with END");
  }
  Datapath dp;
  RunResult result;

  // Timing state.
  std::uint64_t cursor = 0;    // dispatch time of the next instruction
  std::uint64_t dma_free = 0;  // DMA engine busy until
  std::array<std::uint64_t, 2> bank_ready{0, 0};
  std::uint64_t horizon = 0;

  for (std::size_t i = 0; i < program.size(); ++i) {
    const auto& inst = program[i];
    const auto op = opcode_of(inst);
    if (op == Opcode::End && i + 1 != program.size()) malformed(i, "END before the last instruction");

    std::uint64_t cycles = kSetupCycles;
    std::uint64_t earliest = cursor;
    bool blocking = true;

    if (const auto* ld = std::get_if<LoadW>(&inst); ld || std::holds_alternative<Preload>(inst)) {
      const std::uint32_t layer = ld ? ld->layer : std::get<Preload>(inst).layer;
      const std::uint32_t bank = ld ? ld->bank : std::get<Preload>(inst).bank;
      if (layer >= model_.layers.size()) malformed(i, "layer " + std::to_string(layer) + " not in model");
      dp.banks[bank] = layer;
      cycles += ceil_div(model_.layers[layer].byte_size(), kDmaBytesPerCycle);
      blocking = ld != nullptr || mode == ScheduleMode::Sequential;
      earliest = std::max(earliest, dma_free);
      const auto end = earliest + cycles;
      bank_ready[bank] = end;
      dma_free = end;
    } else if (const auto* la = std::get_if<LoadA>(&inst)) {
      if (static_cast<int>(la->c) != model_.in_c || static_cast<int>(la->h) != kClassifierSide ||
          static_cast<int>(la->w) != kClassifierSide || model_.in_h != kClassifierSide || model_.in_w != kClassifierSide) {
        malformed(i, "LOAD_A shape does not match the classifier input");
      }
      Tensor t(model_.in_c, model_.in_h, model_.in_w);
      for (int c = 0; c < t.c; ++c)
        for (int y = 0; y < t.h; ++y)
          for (int x = 0; x < t.w; ++x) t.at(c, y, x) = input.at(x, y);
      cycles += ceil_div(t.size(), kDmaBytesPerCycle);
      dp.buffers[la->dst] = std::move(t);
      earliest = std::max(earliest, dma_free);
      dma_free = earliest + cycles;
    } else if (const auto* cv = std::get_if<Conv>(&inst)) {
      const auto& src = source(dp, cv->src, i);
      const auto& L = bank_layer(dp, model_, cv->bank, i);
      const ConvShape shape{static_cast<int>(cv->in_c), static_cast<int>(cv->in_h), static_cast<int>(cv->in_w),
                            static_cast<int>(cv->out_c), static_cast<int>(cv->kernel), static_cast<int>(cv->stride),
                            static_cast<int>(cv->pad)};
      if (src.c != shape.in_c || src.h != shape.in_h || src.w != shape.in_w) malformed(i, "CONV input shape does not match buffer");
      if (L.type != LayerType::Conv || L.in_c != shape.in_c || L.out_c != shape.out_c || L.kernel != shape.kernel ||
          L.stride != shape.stride || L.pad != shape.pad) {
        malformed(i, "CONV fields do not match the weights in bank " + std::to_string(cv->bank));
      }
      if (cv->relu != 1) malformed(i, "CONV requires relu=1 (activations are unsigned)");
      if (shape.in_h + 2 * shape.pad < shape.kernel || shape.in_w + 2 * shape.pad < shape.kernel) malformed(i, "kernel exceeds input");
      const auto conv = conv2d_output_stationary(src, L.weights, L.bias, shape);
      Tensor out(conv.out_c, conv.out_h, conv.out_w);
      for (std::size_t k = 0; k < conv.acc.size(); ++k) out.data[k] = requantize(conv.acc[k], L.scale);
      dp.buffers[cv->dst] = std::move(out);
      result.macs += conv.macs;
      cycles += conv.macs.waves;
      earliest = std::max(earliest, bank_ready[cv->bank]);
    } else if (const auto* pl = std::get_if<Pool>(&inst)) {
      const auto& src = source(dp, pl->src, i);
      if (src.c != static_cast<int>(pl->c) || src.h != static_cast<int>(pl->in_h) || src.w != static_cast<int>(pl->in_w)) {
        malformed(i, "POOL shape does not match buffer");
      }
      if (pl->size < 1 || pl->stride < 1 || src.h < static_cast<int>(pl->size) || src.w < static_cast<int>(pl->size)) {
        malformed(i, "bad POOL window");
      }
      auto out = max_pool(src, static_cast<int>(pl->size), static_cast<int>(pl->stride));
      cycles += ceil_div(out.size(), kPoolLanes);
      dp.buffers[pl->dst] = std::move(out);
    } else if (const auto* fc = std::get_if<Fc>(&inst)) {
      const auto& src = source(dp, fc->src, i);
      const auto& L = bank_layer(dp, model_, fc->bank, i);
      if (src.size() != fc->in_len) malformed(i, "FC in_len does not match buffer size");
      if (L.type != LayerType::Fc || L.in_c != static_cast<int>(fc->in_len) || L.out_c != static_cast<int>(fc->out_len)) {
        malformed(i, "FC fields do not match the weights in bank " + std::to_string(fc->bank));
      }
      Tensor flat(static_cast<int>(fc->in_len), 1, 1);
      flat.data = src.data;
      const auto res = conv2d_output_stationary(flat, L.weights, L.bias, {flat.c, 1, 1, L.out_c, 1, 1, 0});
      if (fc->relu) {
        Tensor out(L.out_c, 1, 1);
        for (std::size_t k = 0; k < res.acc.size(); ++k) out.data[k] = requantize(res.acc[k], L.scale);
        dp.buffers[fc->dst] = std::move(out);
      } else {
        dp.output = res.acc;
        dp.output_scale = L.scale;
      }
      result.macs += res.macs;
      cycles += res.macs.waves;
      earliest = std::max(earliest, bank_ready[fc->bank]);
    } else if (const auto* st = std::get_if<Store>(&inst)) {
      if (dp.output.empty() || dp.output.size() != st->length) malformed(i, "STORE length does not match the output register");
      result.output = make_classification(dp.output, dp.output_scale, model_);
      cycles += ceil_div(4ULL * st->length, kDmaBytesPerCycle);
      earliest = std::max(earliest, dma_free);
      dma_free = earliest + cycles;
    } else {
      cycles = 1;
      earliest = std::max(earliest, horizon);  // END retires once everything drained
    }

    TimelineEntry entry{i, op, earliest, earliest + cycles, cycles};
    result.timeline.entries.push_back(entry);
    result.timeline.isolated_cycles += cycles;
    horizon = std::max(horizon, entry.end);
    if (blocking) cursor = entry.end;
  }
  result.timeline.total_cycles = horizon;
  return result;
}

std::vector<Instruction> compile_program(const Model& model, bool preload) {
  model.validate();
  const auto shapes = model.layer_shapes();
  std::vector<Instruction> prog;
  prog.emplace_back(LoadA{0, static_cast<std::uint32_t>(model.in_c), static_cast<std::uint32_t>(model.in_h),
                          static_cast<std::uint32_t>(model.in_w)});
  prog.emplace_back(LoadW{0, 0});
  std::uint32_t buf = 0;
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const auto& L = model.layers[i];
    const auto& s = shapes[i];
    const auto bank = static_cast<std::uint32_t>(i % 2);
    if (i + 1 < model.layers.size()) {
      if (preload) prog.emplace_back(Preload{static_cast<std::uint32_t>(i + 1), 1 - bank});
    }
    if (L.type == LayerType::Conv) {
      prog.emplace_back(Conv{buf, 1 - buf, bank, static_cast<std::uint32_t>(s.in_c), static_cast<std::uint32_t>(s.in_h),
                             static_cast<std::uint32_t>(s.in_w), static_cast<std::uint32_t>(s.out_c),
                             static_cast<std::uint32_t>(s.kernel), static_cast<std::uint32_t>(s.stride),
                             static_cast<std::uint32_t>(s.pad), 1});
      buf = 1 - buf;
      if (L.pool > 0) {
        prog.emplace_back(Pool{buf, 1 - buf, static_cast<std::uint32_t>(s.out_c), static_cast<std::uint32_t>(s.out_h()),
                               static_cast<std::uint32_t>(s.out_w()), static_cast<std::uint32_t>(L.pool),
                               static_cast<std::uint32_t>(L.pool)});
        buf = 1 - buf;
      }
    } else {
      const bool last = i + 1 == model.layers.size();
      prog.emplace_back(Fc{buf, 1 - buf, bank, static_cast<std::uint32_t>(s.in_c), static_cast<std::uint32_t>(s.out_c),
                           last ? 0u : 1u});
      if (!last) buf = 1 - buf;
    }
    if (!preload && i + 1 < model.layers.size()) {
      prog.emplace_back(LoadW{static_cast<std::uint32_t>(i + 1), 1 - bank});
    }
  }
  prog.emplace_back(Store{static_cast<std::uint32_t>(model.layers.back().out_c)});
  prog.emplace_back(End{});
  return prog;
}

Classifier::Classifier(Model model) : npu_(std::move(model)), program_(compile_program(npu_.model(), true)) {}

Classification Classifier::classify(const ClassifierInput& input) {
  const auto& m = npu_.model();
  if (m.in_c != 1 || m.in_h != kClassifierSide || m.in_w != kClassifierSide) {
    throw Error(ErrorCode::ModelShapeMismatch, "model input is not 1x32x32");
  }
  auto run = npu_.run_program(program_, input);
  ++invocations_;
  macs_ += run.macs;
  cycles_ += run.timeline.total_cycles;
  return std::move(*run.output);
}

Classification classify(const ClassifierInput& input, const Model& model) {
  Classifier c(model);
  return c.classify(input);
}

}  // namespace antiuav::npu
