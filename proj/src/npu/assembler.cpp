#include "antiuav/npu/assembler.hpp"

#include <charconv>
#include <cstdio>
#include <optional>
#include <sstream>

#include "antiuav/error.hpp"

namespace antiuav::npu {

namespace {

std::optional<Opcode> opcode_from_name(std::string_view name) {
  for (unsigned i = 0; i < 8; ++i) {
    const auto op = static_cast<Opcode>(i);
    if (opcode_name(op) == name) return op;
  }
  return std::nullopt;
}

template <typename Op>
Op parse_fields(const std::vector<std::string>& tokens, std::size_t line_no) {
  Op op;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const auto& tok = tokens[i];
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::MalformedLine, "expected field=value, got '" + tok + "'", line_no);
    const auto name = std::string_view(tok).substr(0, eq);
    const auto text = std::string_view(tok).substr(eq + 1);
    std::uint64_t value = 0;
    const int base = text.starts_with("0x") ? 16 : 10;
    const auto digits = base == 16 ? text.substr(2) : text;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value, base);
    if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size()) {
      throw Error(ErrorCode::MalformedLine, "bad value in '" + tok + "'", line_no);
    }
    bool found = false;
    for (const auto& f : Op::layout()) {
      if (f.name != name) continue;
      if (value >> f.width) {
        throw Error(ErrorCode::FieldOverflow, tok + " exceeds " + std::to_string(f.width) + " bits", line_no);
      }
      op.*(f.member) = static_cast<std::uint32_t>(value);
      found = true;
    }
    if (!found) {
      throw Error(ErrorCode::MalformedLine,
                  "unknown field '" + std::string(name) + "' for " + std::string(opcode_name(Op::opcode)), line_no);
    }
  }
  return op;
}

}  // namespace

std::vector<Instruction> assemble(std::string_view source) {
  std::vector<Instruction> program;
  std::istringstream in{std::string(source)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tokens;
    for (std::string tok; ls >> tok;) tokens.push_back(tok);
    if (tokens.empty()) continue;
    const auto op = opcode_from_name(tokens.front());
    if (!op) throw Error(ErrorCode::UnknownOpcode, "mnemonic '" + tokens.front() + "'", line_no);
    switch (*op) {
      case Opcode::LoadW: program.emplace_back(parse_fields<LoadW>(tokens, line_no)); break;
      case Opcode::LoadA: program.emplace_back(parse_fields<LoadA>(tokens, line_no)); break;
      case Opcode::Conv: program.emplace_back(parse_fields<Conv>(tokens, line_no)); break;
      case Opcode::Pool: program.emplace_back(parse_fields<Pool>(tokens, line_no)); break;
      case Opcode::Fc: program.emplace_back(parse_fields<Fc>(tokens, line_no)); break;
      case Opcode::Store: program.emplace_back(parse_fields<Store>(tokens, line_no)); break;
      case Opcode::Preload: program.emplace_back(parse_fields<Preload>(tokens, line_no)); break;
      case Opcode::End: program.emplace_back(parse_fields<End>(tokens, line_no)); break;
    }
  }
  return program;
}

std::string disassemble(const Instruction& inst) {
  return std::visit(
      [](const auto& op) {
        using Op = std::decay_t<decltype(op)>;
        std::string out(opcode_name(Op::opcode));
        for (const auto& f : Op::layout()) {
          out += ' ';
          out += f.name;
          out += '=';
          out += std::to_string(op.*(f.member));
        }
        return out;
      },
      inst);
}

std::string disassemble(const std::vector<Instruction>& program) {
  std::string out;
  for (const auto& inst : program) out += disassemble(inst) + "\n";
  return out;
}

std::string format_words(const std::vector<std::uint64_t>& words) {
  std::string out;
  char buf[24];
  for (auto w : words) {
    std::snprintf(buf, sizeof buf, "0x%016llx\n", static_cast<unsigned long long>(w));
    out += buf;
  }
  return out;
}

std::vector<std::uint64_t> parse_words(std::string_view text) {
  std::vector<std::uint64_t> words;
  std::istringstream in{std::string(text)};
  std::string tok;
  std::size_t index = 0;
  while (in >> tok) {
    ++index;
    std::string_view digits(tok);
    if (digits.starts_with("0x") || digits.starts_with("0X")) digits.remove_prefix(2);
    std::uint64_t w = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), w, 16);
    if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size()) {
      throw Error(ErrorCode::MalformedLine, "bad instruction word '" + tok + "'", index);
    }
    words.push_back(w);
  }
  return words;
}

std::vector<std::uint64_t> encode_program(const std::vector<Instruction>& program) {
  std::vector<std::uint64_t> words;
  words.reserve(program.size());
  for (const auto& inst : program) words.push_back(encode_instruction(inst));
  return words;
}

std::vector<Instruction> decode_program(const std::vector<std::uint64_t>& words) {
  std::vector<Instruction> program;
  program.reserve(words.size());
  for (auto w : words) program.push_back(decode_instruction(w));
  return program;
}

}  // namespace antiuav::npu
