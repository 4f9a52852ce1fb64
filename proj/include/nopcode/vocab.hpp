#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "nopcode/ngram.hpp"
#include "nopcode/smali.hpp"

namespace nopcode {

struct VocabEntry {
  Gram gram;
  std::uint64_t doc_freq = 0;    // apps containing the gram
  std::uint64_t total_freq = 0;  // summed multiplicity

  bool operator==(const VocabEntry&) const = default;
};

// Corpus-wide index of unique grams. Feature indices are positions in the
// gram-sorted entry list, so indexing is deterministic across runs and
// independent of insertion order.
struct Vocabulary {
  int n = 0;
  std::vector<VocabEntry> entries;  // sorted by gram ascending
  std::unordered_map<Gram, std::uint32_t> index;

  std::size_t size() const { return entries.size(); }
  std::optional<std::uint32_t> find(const Gram& gram) const;

  // Sorts, indexes, and checks uniqueness.
  static Vocabulary from_entries(int n, std::vector<VocabEntry> entries);
};

Vocabulary build_vocabulary(const std::vector<AppRecord>& corpus, int n);

// Entry sets unioned, doc/total frequencies summed, indices reassigned
// canonically. Callers guarantee the two were built from disjoint app sets.
// Throws MixedNError when window lengths differ.
Vocabulary merge_vocab(const Vocabulary& a, const Vocabulary& b);

struct VocabBuildOptions {
  // Working-map ceiling; reaching it flushes counts to hash-partitioned
  // spill files that are aggregated and merge-sorted at finish time.
  std::size_t mem_budget = 1'000'000;
  std::filesystem::path spill_dir;  // empty: a temp dir is created on demand
  unsigned spill_fanout = 64;
};

// Incremental, memory-bounded vocabulary construction. Feed whole apps (one
// add per app keeps doc_freq correct); call exactly one finish_* method.
class VocabularyBuilder {
 public:
  explicit VocabularyBuilder(int n, VocabBuildOptions options = {});
  ~VocabularyBuilder();

  VocabularyBuilder(const VocabularyBuilder&) = delete;
  VocabularyBuilder& operator=(const VocabularyBuilder&) = delete;

  void add_app(const AppRecord& app);
  // `counts` must be the grams of a single app.
  void add_app_counts(const GramCounts& counts);

  // Streams entries in gram order. Holds at most one spill partition plus
  // merge cursors in memory. Returns the number of unique grams.
  std::uint64_t finish_stream(const std::function<void(const VocabEntry&)>& fn);
  // In-memory result; intended for corpora that fit the budget.
  Vocabulary finish();
  // Writes vocab.tsv (gram_hex <TAB> doc_freq <TAB> total_freq, sorted).
  std::uint64_t finish_to_file(const std::filesystem::path& path,
                               const std::vector<std::string>& headers = {});

  bool spilled() const { return spilled_; }

 private:
  void spill();

  int n_;
  VocabBuildOptions options_;
  std::unordered_map<Gram, std::pair<std::uint64_t, std::uint64_t>> counts_;
  bool spilled_ = false;
  bool owns_spill_dir_ = false;
  bool finished_ = false;
};

void write_vocab_file(const Vocabulary& vocab, const std::filesystem::path& path,
                      const std::vector<std::string>& headers = {});
Vocabulary read_vocab_file(const std::filesystem::path& path);

// Entries [offset, offset+limit) of a sorted vocab.tsv, as a standalone
// Vocabulary with local indices. Global index = first_global_index + local.
struct VocabSlice {
  std::uint64_t first_global_index = 0;
  Vocabulary vocab;
};
VocabSlice read_vocab_slice(const std::filesystem::path& path, std::uint64_t offset,
                            std::uint64_t limit);

std::uint64_t count_vocab_entries(const std::filesystem::path& path);

}  // namespace nopcode
