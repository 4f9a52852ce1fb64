#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace nopcode {

// The Dalvik opcode alphabet: every defined one-byte opcode and its smali
// mnemonic. Payload pseudo-instructions (packed-switch-payload,
// sparse-switch-payload, fill-array-data-payload) are data tables, not
// executed instructions, and are deliberately absent.
class OpcodeTable {
 public:
  OpcodeTable(std::vector<std::pair<std::string, std::uint8_t>> entries);

  std::optional<std::uint8_t> lookup(std::string_view mnemonic) const;
  std::optional<std::string_view> mnemonic(std::uint8_t byte) const;
  bool is_defined(std::uint8_t byte) const { return defined_[byte]; }

  // Defined opcode bytes in ascending order.
  const std::vector<std::uint8_t>& defined_bytes() const { return defined_bytes_; }
  std::size_t size() const { return defined_bytes_.size(); }

 private:
  std::unordered_map<std::string, std::uint8_t> by_mnemonic_;
  std::array<std::string, 256> by_byte_;
  std::array<bool, 256> defined_{};
  std::vector<std::uint8_t> defined_bytes_;
};

// The built-in table of all defined Dalvik opcodes (compiled in, stable
// across runs).
const OpcodeTable& load_opcode_table();

}  // namespace nopcode
