#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nopcode/smali.hpp"

namespace nopcode {

// A gram is n consecutive opcode bytes, stored raw. Byte-lexicographic
// order of raw grams equals lexicographic order of their hex encodings,
// so sorting raw keys yields the canonical feature order directly.
using Gram = std::string;

// Gram with multiplicity.
using GramCounts = std::unordered_map<Gram, std::uint64_t>;

std::string gram_hex(const Gram& gram);
Gram gram_from_hex(std::string_view hex);

// Slides a length-n window over one opcode stream, accumulating into `out`.
// Exactly max(0, m-n+1) windows for a stream of length m; windows never
// cross method boundaries because the stream is a single method.
void count_ngrams(const std::vector<std::uint8_t>& opcodes, int n, GramCounts& out);

GramCounts extract_ngrams(const OpcodeSeq& seq, int n);

// Union over all methods of the app, multiplicities summed.
GramCounts app_gram_counts(const AppRecord& app, int n);

std::uint64_t total_multiplicity(const GramCounts& counts);

}  // namespace nopcode
