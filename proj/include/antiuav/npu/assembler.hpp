#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "antiuav/npu/isa.hpp"

namespace antiuav::npu {

// One instruction per line: `MNEMONIC field=value ...`. Omitted fields are 0,
// '#' starts a comment. Errors carry the 1-based line number.
std::vector<Instruction> assemble(std::string_view source);

std::string disassemble(const Instruction& inst);
std::string disassemble(const std::vector<Instruction>& program);

// Hex word listing, one `0x%016x` per line, and its inverse.
std::string format_words(const std::vector<std::uint64_t>& words);
std::vector<std::uint64_t> parse_words(std::string_view text);

std::vector<std::uint64_t> encode_program(const std::vector<Instruction>& program);
std::vector<Instruction> decode_program(const std::vector<std::uint64_t>& words);

}  // namespace antiuav::npu
