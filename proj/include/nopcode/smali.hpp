#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nopcode/opcodes.hpp"

namespace nopcode {

// One method's opcode stream. `opcodes` may be empty (abstract/native).
struct OpcodeSeq {
  std::string class_name;  // smali form, e.g. "Lcom/a/B;"
  std::string method_sig;  // name + descriptor, e.g. "f(I)V"
  std::vector<std::uint8_t> opcodes;

  bool operator==(const OpcodeSeq&) const = default;
};

// All methods of one application, sorted by (class_name, in-file method
// order) so downstream output never depends on directory traversal order.
struct AppRecord {
  std::string app_id;
  std::vector<OpcodeSeq> methods;
  std::optional<std::string> label;

  bool operator==(const AppRecord&) const = default;
};

// Parses the span between `.method` and `.end method` inclusive. Directive
// lines ('.'), label lines (':'), comments ('#') and blanks contribute
// nothing; bodies of block directives (.annotation, .array-data,
// .packed-switch, .sparse-switch, ...) are skipped wholesale. Every other
// line contributes exactly the opcode byte of its leading mnemonic.
// Throws UnknownMnemonicError otherwise.
OpcodeSeq parse_smali_method(const std::string& method_text, const OpcodeTable& table);

// Parses a whole .smali class file (class name from the `.class` directive,
// one OpcodeSeq per method). `file` is used only for error messages.
std::vector<OpcodeSeq> parse_smali_class(const std::string& text, const std::string& file,
                                         const OpcodeTable& table);

// Parses the given .smali files into one AppRecord. The file list is
// canonicalized (sorted) first, and methods are re-sorted by class name, so
// the result is independent of the order the caller discovered the files in.
AppRecord parse_smali_files(std::vector<std::filesystem::path> files, const std::string& app_id,
                            const OpcodeTable& table);

// Walks root_dir for *.smali (other files ignored) and parses them.
AppRecord parse_smali_tree(const std::filesystem::path& root_dir, const std::string& app_id,
                           const OpcodeTable& table);

// AppRecord field checks (non-empty app id without tab/newline, methods
// sorted, opcodes within the table). Throws InputError on violation.
void validate_app_record(const AppRecord& app, const OpcodeTable& table);

}  // namespace nopcode
