#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "antiuav/isp.hpp"
#include "antiuav/npu/isa.hpp"
#include "antiuav/npu/model.hpp"
#include "antiuav/npu/pe_array.hpp"

namespace antiuav::npu {

// Overlapped: PRELOAD runs on the DMA engine while later instructions
// proceed; a compute instruction reading the bank waits for it.
// Sequential: PRELOAD blocks like LOAD_W.
enum class ScheduleMode { Overlapped, Sequential };

struct TimelineEntry {
  std::size_t index = 0;
  Opcode opcode = Opcode::End;
  std::uint64_t start = 0;
  std::uint64_t end = 0;
  std::uint64_t cycles = 0;  // isolated cost
};

struct Timeline {
  std::vector<TimelineEntry> entries;
  std::uint64_t total_cycles = 0;
  std::uint64_t isolated_cycles = 0;  // sum of isolated costs
};

struct Classification {
  int label = 0;
  std::string name;
  double confidence = 0.0;
  std::vector<std::int32_t> logits;
};

struct RunResult {
  std::optional<Classification> output;  // set by STORE
  Timeline timeline;
  MacReport macs;
};

// Cycle constants of the abstract timing model.
inline constexpr std::uint64_t kSetupCycles = 4;
inline constexpr std::uint64_t kDmaBytesPerCycle = 8;
inline constexpr std::uint64_t kPoolLanes = 16;

class Npu {
 public:
  explicit Npu(Model model);

  const Model& model() const { return model_; }

  // Executes the program on one input. Numerics are identical in both
  // schedule modes. Throws MalformedProgram (with instruction index).
  RunResult run_program(std::span<const Instruction> program, const ClassifierInput& input,
                        ScheduleMode mode = ScheduleMode::Overlapped) const;

 private:
  Model model_;
};

// Straight-line program for the model: LOAD_A, weight loads, CONV/POOL per
// layer, FC, STORE, END. With preload, layer i+1's weights are fetched into
// the other bank while layer i computes.
std::vector<Instruction> compile_program(const Model& model, bool preload = true);

// Serves classify() requests with a compiled program and tallies NPU usage.
class Classifier {
 public:
  explicit Classifier(Model model);

  // Throws ModelShapeMismatch if the input does not match the model input.
  Classification classify(const ClassifierInput& input);

  std::size_t invocations() const { return invocations_; }
  const MacReport& macs() const { return macs_; }
  std::uint64_t cycles() const { return cycles_; }
  const Npu& npu() const { return npu_; }

 private:
  Npu npu_;
  std::vector<Instruction> program_;
  std::size_t invocations_ = 0;
  MacReport macs_;
  std::uint64_t cycles_ = 0;
};

Classification classify(const ClassifierInput& input, const Model& model);

}  // namespace antiuav::npu
