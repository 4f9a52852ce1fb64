#include "nopcode/opcodes.hpp"

#include <stdexcept>

namespace nopcode {

OpcodeTable::OpcodeTable(std::vector<std::pair<std::string, std::uint8_t>> entries) {
  for (auto& [name, byte] : entries) {
    if (defined_[byte]) {
      throw std::logic_error("opcode byte defined twice: " + std::to_string(byte));
    }
    defined_[byte] = true;
    by_byte_[byte] = name;
    by_mnemonic_.emplace(std::move(name), byte);
  }
  for (int b = 0; b < 256; ++b) {
    if (defined_[b]) defined_bytes_.push_back(static_cast<std::uint8_t>(b));
  }
}

std::optional<std::uint8_t> OpcodeTable::lookup(std::string_view mnemonic) const {
  auto it = by_mnemonic_.find(std::string(mnemonic));
  if (it == by_mnemonic_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string_view> OpcodeTable::mnemonic(std::uint8_t byte) const {
  if (!defined_[byte]) return std::nullopt;
  return std::string_view(by_byte_[byte]);
}

const OpcodeTable& load_opcode_table() {
  static const OpcodeTable table({
      {"nop", 0x00},
      {"move", 0x01},
      {"move/from16", 0x02},
      {"move/16", 0x03},
      {"move-wide", 0x04},
      {"move-wide/from16", 0x05},
      {"move-wide/16", 0x06},
      {"move-object", 0x07},
      {"move-object/from16", 0x08},
      {"move-object/16", 0x09},
      {"move-result", 0x0a},
      {"move-result-wide", 0x0b},
      {"move-result-object", 0x0c},
      {"move-exception", 0x0d},
      {"return-void", 0x0e},
      {"return", 0x0f},
      {"return-wide", 0x10},
      {"return-object", 0x11},
      {"const/4", 0x12},
      {"const/16", 0x13},
      {"const", 0x14},
      {"const/high16", 0x15},
      {"const-wide/16", 0x16},
      {"const-wide/32", 0x17},
      {"const-wide", 0x18},
      {"const-wide/high16", 0x19},
      {"const-string", 0x1a},
      {"const-string/jumbo", 0x1b},
      {"const-class", 0x1c},
      {"monitor-enter", 0x1d},
      {"monitor-exit", 0x1e},
      {"check-cast", 0x1f},
      {"instance-of", 0x20},
      {"array-length", 0x21},
      {"new-instance", 0x22},
      {"new-array", 0x23},
      {"filled-new-array", 0x24},
      {"filled-new-array/range", 0x25},
      {"fill-array-data", 0x26},
      {"throw", 0x27},
      {"goto", 0x28},
      {"goto/16", 0x29},
      {"goto/32", 0x2a},
      {"packed-switch", 0x2b},
      {"sparse-switch", 0x2c},
      {"cmpl-float", 0x2d},
      {"cmpg-float", 0x2e},
      {"cmpl-double", 0x2f},
      {"cmpg-double", 0x30},
      {"cmp-long", 0x31},
      {"if-eq", 0x32},
      {"if-ne", 0x33},
      {"if-lt", 0x34},
      {"if-ge", 0x35},
      {"if-gt", 0x36},
      {"if-le", 0x37},
      {"if-eqz", 0x38},
      {"if-nez", 0x39},
      {"if-ltz", 0x3a},
      {"if-gez", 0x3b},
      {"if-gtz", 0x3c},
      {"if-lez", 0x3d},
      // 0x3e..0x43 unused
      {"aget", 0x44},
      {"aget-wide", 0x45},
      {"aget-object", 0x46},
      {"aget-boolean", 0x47},
      {"aget-byte", 0x48},
      {"aget-char", 0x49},
      {"aget-short", 0x4a},
      {"aput", 0x4b},
      {"aput-wide", 0x4c},
      {"aput-object", 0x4d},
      {"aput-boolean", 0x4e},
      {"aput-byte", 0x4f},
      {"aput-char", 0x50},
      {"aput-short", 0x51},
      {"iget", 0x52},
      {"iget-wide", 0x53},
      {"iget-object", 0x54},
      {"iget-boolean", 0x55},
      {"iget-byte", 0x56},
      {"iget-char", 0x57},
      {"iget-short", 0x58},
      {"iput", 0x59},
      {"iput-wide", 0x5a},
      {"iput-object", 0x5b},
      {"iput-boolean", 0x5c},
      {"iput-byte", 0x5d},
      {"iput-char", 0x5e},
      {"iput-short", 0x5f},
      {"sget", 0x60},
      {"sget-wide", 0x61},
      {"sget-object", 0x62},
      {"sget-boolean", 0x63},
      {"sget-byte", 0x64},
      {"sget-char", 0x65},
      {"sget-short", 0x66},
      {"sput", 0x67},
      {"sput-wide", 0x68},
      {"sput-object", 0x69},
      {"sput-boolean", 0x6a},
      {"sput-byte", 0x6b},
      {"sput-char", 0x6c},
      {"sput-short", 0x6d},
      {"invoke-virtual", 0x6e},
      {"invoke-super", 0x6f},
      {"invoke-direct", 0x70},
      {"invoke-static", 0x71},
      {"invoke-interface", 0x72},
      // 0x73 unused
      {"invoke-virtual/range", 0x74},
      {"invoke-super/range", 0x75},
      {"invoke-direct/range", 0x76},
      {"invoke-static/range", 0x77},
      {"invoke-interface/range", 0x78},
      // 0x79..0x7a unused
      {"neg-int", 0x7b},
      {"not-int", 0x7c},
      {"neg-long", 0x7d},
      {"not-long", 0x7e},
      {"neg-float", 0x7f},
      {"neg-double", 0x80},
      {"int-to-long", 0x81},
      {"int-to-float", 0x82},
      {"int-to-double", 0x83},
      {"long-to-int", 0x84},
      {"long-to-float", 0x85},
      {"long-to-double", 0x86},
      {"float-to-int", 0x87},
      {"float-to-long", 0x88},
      {"float-to-double", 0x89},
      {"double-to-int", 0x8a},
      {"double-to-long", 0x8b},
      {"double-to-float", 0x8c},
      {"int-to-byte", 0x8d},
      {"int-to-char", 0x8e},
      {"int-to-short", 0x8f},
      {"add-int", 0x90},
      {"sub-int", 0x91},
      {"mul-int", 0x92},
      {"div-int", 0x93},
      {"rem-int", 0x94},
      {"and-int", 0x95},
      {"or-int", 0x96},
      {"xor-int", 0x97},
      {"shl-int", 0x98},
      {"shr-int", 0x99},
      {"ushr-int", 0x9a},
      {"add-long", 0x9b},
      {"sub-long", 0x9c},
      {"mul-long", 0x9d},
      {"div-long", 0x9e},
      {"rem-long", 0x9f},
      {"and-long", 0xa0},
      {"or-long", 0xa1},
      {"xor-long", 0xa2},
      {"shl-long", 0xa3},
      {"shr-long", 0xa4},
      {"ushr-long", 0xa5},
      {"add-float", 0xa6},
      {"sub-float", 0xa7},
      {"mul-float", 0xa8},
      {"div-float", 0xa9},
      {"rem-float", 0xaa},
      {"add-double", 0xab},
      {"sub-double", 0xac},
      {"mul-double", 0xad},
      {"div-double", 0xae},
      {"rem-double", 0xaf},
      {"add-int/2addr", 0xb0},
      {"sub-int/2addr", 0xb1},
      {"mul-int/2addr", 0xb2},
      {"div-int/2addr", 0xb3},
      {"rem-int/2addr", 0xb4},
      {"and-int/2addr", 0xb5},
      {"or-int/2addr", 0xb6},
      {"xor-int/2addr", 0xb7},
      {"shl-int/2addr", 0xb8},
      {"shr-int/2addr", 0xb9},
      {"ushr-int/2addr", 0xba},
      {"add-long/2addr", 0xbb},
      {"sub-long/2addr", 0xbc},
      {"mul-long/2addr", 0xbd},
      {"div-long/2addr", 0xbe},
      {"rem-long/2addr", 0xbf},
      {"and-long/2addr", 0xc0},
      {"or-long/2addr", 0xc1},
      {"xor-long/2addr", 0xc2},
      {"shl-long/2addr", 0xc3},
      {"shr-long/2addr", 0xc4},
      {"ushr-long/2addr", 0xc5},
      {"add-float/2addr", 0xc6},
      {"sub-float/2addr", 0xc7},
      {"mul-float/2addr", 0xc8},
      {"div-float/2addr", 0xc9},
      {"rem-float/2addr", 0xca},
      {"add-double/2addr", 0xcb},
      {"sub-double/2addr", 0xcc},
      {"mul-double/2addr", 0xcd},
      {"div-double/2addr", 0xce},
      {"rem-double/2addr", 0xcf},
      {"add-int/lit16", 0xd0},
      {"rsub-int", 0xd1},
      {"mul-int/lit16", 0xd2},
      {"div-int/lit16", 0xd3},
      {"rem-int/lit16", 0xd4},
      {"and-int/lit16", 0xd5},
      {"or-int/lit16", 0xd6},
      {"xor-int/lit16", 0xd7},
      {"add-int/lit8", 0xd8},
      {"rsub-int/lit8", 0xd9},
      {"mul-int/lit8", 0xda},
      {"div-int/lit8", 0xdb},
      {"rem-int/lit8", 0xdc},
      {"and-int/lit8", 0xdd},
      {"or-int/lit8", 0xde},
      {"xor-int/lit8", 0xdf},
      {"shl-int/lit8", 0xe0},
      {"shr-int/lit8", 0xe1},
      {"ushr-int/lit8", 0xe2},
      // 0xe3..0xf9 unused in dex (odex quickened forms live there)
      {"invoke-polymorphic", 0xfa},
      {"invoke-polymorphic/range", 0xfb},
      {"invoke-custom", 0xfc},
      {"invoke-custom/range", 0xfd},
      {"const-method-handle", 0xfe},
      {"const-method-type", 0xff},
  });
  return table;
}

}  // namespace nopcode
