#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nopcode/dataset.hpp"

namespace nopcode {

// counts[bucket][klass]: samples whose discretized feature value landed in
// `bucket` and whose label is class `klass` (label_set order).
struct ContingencyTable {
  std::vector<std::vector<std::uint64_t>> counts;

  std::size_t buckets() const { return counts.size(); }
  std::size_t classes() const { return counts.empty() ? 0 : counts.front().size(); }
  std::uint64_t total() const;
};

// Shannon entropy in bits of an explicit distribution. Probabilities must be
// non-negative and sum to 1 within 1e-9; 0 log 0 counts as 0.
double entropy(const std::vector<double>& probabilities);

// H(class | bucket), weighting each bucket by its sample share. Zero-count
// buckets contribute nothing. Throws EmptyTableError on an all-zero table.
double conditional_entropy(const ContingencyTable& table);

// H(class) - H(class | bucket), clamped so rounding noise in [-1e-12, 0)
// reads as exactly 0.
double info_gain(const ContingencyTable& table);

// presence: bucket 1 iff value > 0.
// equal_width: `bins` equal intervals over the observed *nonzero* range of
// the feature; zeros share the lowest bucket. With values {0,0,3,5} and two
// bins the buckets are {0,0,3} and {5}.
struct Discretizer {
  enum class Kind { presence, equal_width };
  Kind kind = Kind::presence;
  unsigned bins = 2;

  static Discretizer presence() { return {Kind::presence, 2}; }
  static Discretizer equal_width(unsigned bins);
};

// Bucket of a nonzero value under equal-width binning of [lo, hi]: floor
// into `bins` intervals, clamped so value == hi lands in the top bucket and
// a degenerate range (hi <= lo) collapses to bucket 0.
unsigned bucket_of_nonzero(double value, double lo, double hi, unsigned bins);

// Table for one feature over `rows` (all rows when null). Bucket count is 2
// for presence, `bins` for equal_width.
ContingencyTable contingency_of(const LabeledDataset& ds, std::uint32_t feature,
                                const Discretizer& discretizer,
                                const std::vector<std::size_t>* rows = nullptr);

struct IGScore {
  std::uint32_t feature_index = 0;  // global index
  Gram gram;
  double ig = 0.0;

  bool operator==(const IGScore&) const = default;
};

// Invariant: scores sorted by ig descending, gram ascending on ties. Grams
// are unique, so the order is total and runs reproduce it exactly.
struct RankedFeatures {
  std::vector<IGScore> scores;
};

// Scores features [lo, hi) of `ds` in one sparse pass; global index of local
// feature f is index_offset + f. Order of arithmetic per feature matches
// contingency_of + info_gain, so sharded and monolithic runs agree bitwise.
std::vector<IGScore> score_range(const LabeledDataset& ds, const Discretizer& discretizer,
                                 std::uint32_t lo, std::uint32_t hi,
                                 std::uint32_t index_offset = 0,
                                 const std::vector<std::size_t>* rows = nullptr);

RankedFeatures rank_shard(const LabeledDataset& ds, const Discretizer& discretizer,
                          std::uint32_t lo, std::uint32_t hi, std::uint32_t index_offset = 0,
                          const std::vector<std::size_t>* rows = nullptr);

RankedFeatures rank_all(const LabeledDataset& ds, const Discretizer& discretizer,
                        const std::vector<std::size_t>* rows = nullptr);

// Concatenate shard rankings into one canonical ranking. Shards must cover
// disjoint features; a repeated feature index throws DuplicateFeatureError.
RankedFeatures merge_rankings(const std::vector<RankedFeatures>& shards);

// Keeps scores with ig strictly greater than `threshold`, then the best
// `top_k` of those (0 keeps all). Order is preserved.
RankedFeatures select(const RankedFeatures& ranked, double threshold, std::size_t top_k = 0);

// Selected features as ascending global indices (the projection order).
std::vector<std::uint32_t> selected_indices(const RankedFeatures& ranked);

struct TopFeature {
  std::size_t rank = 0;  // 1-based
  std::string gram_hex;
  double ig = 0.0;
  std::vector<std::uint64_t> class_doc_freq;  // label_set order
  std::string exclusive;                      // sole owning label, or "-"
};

// Report rows for the strongest `limit` ranked features (0 = all).
std::vector<TopFeature> top_table(const LabeledDataset& ds, const RankedFeatures& ranked,
                                  std::size_t limit = 0);

// Shard ranking files hold `gram_hex <TAB> ig` in ranking order with full
// double precision; `# ` comment lines are skipped on read.
void write_shard_ranking(const RankedFeatures& ranked, const std::filesystem::path& path,
                         const std::vector<std::string>& headers = {});

// Streaming merge of sorted shard ranking files: applies the same threshold
// and top_k rules as select() and writes `rank <TAB> gram <TAB> ig` to `out`.
// Returns the number of grams written. Memory is one line per input file.
std::uint64_t external_merge_rankings(const std::vector<std::filesystem::path>& shard_files,
                                      const std::filesystem::path& out, double threshold,
                                      std::size_t top_k = 0,
                                      const std::vector<std::string>& headers = {});

}  // namespace nopcode
