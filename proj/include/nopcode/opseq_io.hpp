#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "nopcode/smali.hpp"

namespace nopcode {

// OPSEQ interchange format. Text, UTF-8, LF. One method per line:
//   app_id<TAB>class->method_sig<TAB>hex_opcodes
// hex_opcodes is lowercase, two chars per opcode, possibly empty. Lines are
// emitted sorted by (app_id, class, method position); `#` lines are headers.
// Labels travel as `#label<TAB>app_id<TAB>label` headers so a labeled corpus
// round-trips through a single file; plain corpora carry no headers at all.
//
// Apps are written in sorted app_id order (the canonical corpus order), so
// write-then-read is the identity on canonically ordered corpora.
void write_opseq(const std::vector<AppRecord>& apps, std::ostream& sink,
                 const std::vector<std::string>& extra_headers = {});

// Throws FormatError (bad field counts, odd/invalid hex, undefined opcode
// bytes, labels for unknown apps) and DuplicateAppIdError (an app id
// appearing in two separate blocks).
std::vector<AppRecord> read_opseq(std::istream& source, const OpcodeTable& table);

void write_opseq_file(const std::vector<AppRecord>& apps, const std::filesystem::path& path,
                      const std::vector<std::string>& extra_headers = {});
std::vector<AppRecord> read_opseq_file(const std::filesystem::path& path,
                                       const OpcodeTable& table);

}  // namespace nopcode
