#include "nopcode/ngram.hpp"

#include <stdexcept>

#include "nopcode/util.hpp"

namespace nopcode {

std::string gram_hex(const Gram& gram) { return to_hex(gram); }

Gram gram_from_hex(std::string_view hex) { return from_hex(hex); }

void count_ngrams(const std::vector<std::uint8_t>& opcodes, int n, GramCounts& out) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  const std::size_t m = opcodes.size();
  const std::size_t window = static_cast<std::size_t>(n);
  if (m < window) return;
  Gram gram(window, '\0');
  for (std::size_t i = 0; i + window <= m; ++i) {
    for (std::size_t j = 0; j < window; ++j) {
      gram[j] = static_cast<char>(opcodes[i + j]);
    }
    ++out[gram];
  }
}

GramCounts extract_ngrams(const OpcodeSeq& seq, int n) {
  GramCounts counts;
  count_ngrams(seq.opcodes, n, counts);
  return counts;
}

GramCounts app_gram_counts(const AppRecord& app, int n) {
  GramCounts counts;
  for (const auto& method : app.methods) {
    count_ngrams(method.opcodes, n, counts);
  }
  return counts;
}

std::uint64_t total_multiplicity(const GramCounts& counts) {
  std::uint64_t total = 0;
  for (const auto& [gram, count] : counts) total += count;
  return total;
}

}  // namespace nopcode
