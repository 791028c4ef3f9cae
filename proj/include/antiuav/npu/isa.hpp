#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <variant>

// 64-bit NPU control words. Bits [2:0] hold the opcode; operand fields are
// packed LSB-first from bit 3 in the order listed by each layout(). Bits above
// the last field are reserved and must be zero. ISA.md is the normative table.
namespace antiuav::npu {

enum class Opcode : std::uint8_t {
  LoadW = 0,
  LoadA = 1,
  Conv = 2,
  Pool = 3,
  Fc = 4,
  Store = 5,
  Preload = 6,
  End = 7,
};

std::string_view opcode_name(Opcode op);

template <typename T>
struct Field {
  std::string_view name;
  unsigned width;
  std::uint32_t T::*member;
};

// Load layer weights into a weight bank (blocking).
struct LoadW {
  std::uint32_t layer = 0;
  std::uint32_t bank = 0;
  static constexpr Opcode opcode = Opcode::LoadW;
  static constexpr auto layout() {
    return std::array{Field<LoadW>{"layer", 8, &LoadW::layer}, Field<LoadW>{"bank", 1, &LoadW::bank}};
  }
  bool operator==(const LoadW&) const = default;
};

// Load the classifier input into an activation buffer, declaring its shape.
struct LoadA {
  std::uint32_t dst = 0;
  std::uint32_t c = 0;
  std::uint32_t h = 0;
  std::uint32_t w = 0;
  static constexpr Opcode opcode = Opcode::LoadA;
  static constexpr auto layout() {
    return std::array{Field<LoadA>{"dst", 1, &LoadA::dst}, Field<LoadA>{"c", 10, &LoadA::c},
                      Field<LoadA>{"h", 8, &LoadA::h}, Field<LoadA>{"w", 8, &LoadA::w}};
  }
  bool operator==(const LoadA&) const = default;
};

struct Conv {
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  std::uint32_t bank = 0;
  std::uint32_t in_c = 0;
  std::uint32_t in_h = 0;
  std::uint32_t in_w = 0;
  std::uint32_t out_c = 0;
  std::uint32_t kernel = 0;
  std::uint32_t stride = 0;
  std::uint32_t pad = 0;
  std::uint32_t relu = 0;
  static constexpr Opcode opcode = Opcode::Conv;
  static constexpr auto layout() {
    return std::array{Field<Conv>{"src", 1, &Conv::src},       Field<Conv>{"dst", 1, &Conv::dst},
                      Field<Conv>{"bank", 1, &Conv::bank},     Field<Conv>{"in_c", 10, &Conv::in_c},
                      Field<Conv>{"in_h", 8, &Conv::in_h},     Field<Conv>{"in_w", 8, &Conv::in_w},
                      Field<Conv>{"out_c", 10, &Conv::out_c},  Field<Conv>{"kernel", 3, &Conv::kernel},
                      Field<Conv>{"stride", 2, &Conv::stride}, Field<Conv>{"pad", 2, &Conv::pad},
                      Field<Conv>{"relu", 1, &Conv::relu}};
  }
  bool operator==(const Conv&) const = default;
};

struct Pool {
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  std::uint32_t c = 0;
  std::uint32_t in_h = 0;
  std::uint32_t in_w = 0;
  std::uint32_t size = 0;
  std::uint32_t stride = 0;
  static constexpr Opcode opcode = Opcode::Pool;
  static constexpr auto layout() {
    return std::array{Field<Pool>{"src", 1, &Pool::src},   Field<Pool>{"dst", 1, &Pool::dst},
                      Field<Pool>{"c", 10, &Pool::c},      Field<Pool>{"in_h", 8, &Pool::in_h},
                      Field<Pool>{"in_w", 8, &Pool::in_w}, Field<Pool>{"size", 3, &Pool::size},
                      Field<Pool>{"stride", 3, &Pool::stride}};
  }
  bool operator==(const Pool&) const = default;
};

// relu = 0 writes int32 logits to the output register; relu = 1 writes a
// requantized activation vector to dst.
struct Fc {
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  std::uint32_t bank = 0;
  std::uint32_t in_len = 0;
  std::uint32_t out_len = 0;
  std::uint32_t relu = 0;
  static constexpr Opcode opcode = Opcode::Fc;
  static constexpr auto layout() {
    return std::array{Field<Fc>{"src", 1, &Fc::src},         Field<Fc>{"dst", 1, &Fc::dst},
                      Field<Fc>{"bank", 1, &Fc::bank},       Field<Fc>{"in_len", 16, &Fc::in_len},
                      Field<Fc>{"out_len", 12, &Fc::out_len}, Field<Fc>{"relu", 1, &Fc::relu}};
  }
  bool operator==(const Fc&) const = default;
};

// Drain `length` logits from the output register to the host.
struct Store {
  std::uint32_t length = 0;
  static constexpr Opcode opcode = Opcode::Store;
  static constexpr auto layout() { return std::array{Field<Store>{"length", 16, &Store::length}}; }
  bool operator==(const Store&) const = default;
};

// Same effect as LoadW but issued asynchronously on the DMA engine.
struct Preload {
  std::uint32_t layer = 0;
  std::uint32_t bank = 0;
  static constexpr Opcode opcode = Opcode::Preload;
  static constexpr auto layout() {
    return std::array{Field<Preload>{"layer", 8, &Preload::layer}, Field<Preload>{"bank", 1, &Preload::bank}};
  }
  bool operator==(const Preload&) const = default;
};

struct End {
  static constexpr Opcode opcode = Opcode::End;
  static constexpr auto layout() { return std::array<Field<End>, 0>{}; }
  bool operator==(const End&) const = default;
};

// Alternative index equals the opcode value.
using Instruction = std::variant<LoadW, LoadA, Conv, Pool, Fc, Store, Preload, End>;

Opcode opcode_of(const Instruction& inst);

// Throws FieldOverflow when a field exceeds its width.
std::uint64_t encode_instruction(const Instruction& inst);
// Throws UnknownOpcode or FieldOverflow (nonzero reserved bits).
Instruction decode_instruction(std::uint64_t word);

}  // namespace antiuav::npu
