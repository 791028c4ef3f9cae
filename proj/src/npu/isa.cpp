#include "antiuav/npu/isa.hpp"

#include <string>

#include "antiuav/error.hpp"

namespace antiuav::npu {

std::string_view opcode_name(Opcode op) {
  switch (op) {
    case Opcode::LoadW: return "LOAD_W";
    case Opcode::LoadA: return "LOAD_A";
    case Opcode::Conv: return "CONV";
    case Opcode::Pool: return "POOL";
    case Opcode::Fc: return "FC";
    case Opcode::Store: return "STORE";
    case Opcode::Preload: return "PRELOAD";
    case Opcode::End: return "END";
  }
  return "?";
}

Opcode opcode_of(const Instruction& inst) {
  return std::visit([](const auto& op) { return std::decay_t<decltype(op)>::opcode; }, inst);
}

namespace {

inline constexpr unsigned kOpcodeBits = 3;

template <typename Op>
std::uint64_t pack(const Op& op) {
  std::uint64_t word = static_cast<std::uint64_t>(Op::opcode);
  unsigned shift = kOpcodeBits;
  for (const auto& f : Op::layout()) {
    const std::uint64_t value = op.*(f.member);
    if (value >> f.width) {
      throw Error(ErrorCode::FieldOverflow, std::string(opcode_name(Op::opcode)) + "." + std::string(f.name) +
                                                " = " + std::to_string(value) + " exceeds " +
                                                std::to_string(f.width) + " bits");
    }
    word |= value << shift;
    shift += f.width;
  }
  return word;
}

template <typename Op>
Op unpack(std::uint64_t word) {
  Op op;
  unsigned shift = kOpcodeBits;
  for (const auto& f : Op::layout()) {
    op.*(f.member) = static_cast<std::uint32_t>((word >> shift) & ((std::uint64_t{1} << f.width) - 1));
    shift += f.width;
  }
  if (shift < 64 && (word >> shift) != 0) {
    throw Error(ErrorCode::FieldOverflow,
                std::string(opcode_name(Op::opcode)) + " has nonzero reserved bits above bit " + std::to_string(shift));
  }
  return op;
}

}  // namespace

std::uint64_t encode_instruction(const Instruction& inst) {
  return std::visit([](const auto& op) { return pack(op); }, inst);
}

Instruction decode_instruction(std::uint64_t word) {
  switch (static_cast<Opcode>(word & 0x7u)) {
    case Opcode::LoadW: return unpack<LoadW>(word);
    case Opcode::LoadA: return unpack<LoadA>(word);
    case Opcode::Conv: return unpack<Conv>(word);
    case Opcode::Pool: return unpack<Pool>(word);
    case Opcode::Fc: return unpack<Fc>(word);
    case Opcode::Store: return unpack<Store>(word);
    case Opcode::Preload: return unpack<Preload>(word);
    case Opcode::End: return unpack<End>(word);
  }
  throw Error(ErrorCode::UnknownOpcode, "opcode " + std::to_string(word & 0x7u));
}

}  // namespace antiuav::npu
