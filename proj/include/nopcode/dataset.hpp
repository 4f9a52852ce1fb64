#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nopcode/smali.hpp"
#include "nopcode/vocab.hpp"

namespace nopcode {

enum class FeatureMode { binary, frequency };

std::string_view mode_name(FeatureMode mode);
FeatureMode mode_from_name(std::string_view name);  // throws InputError

// Sorted sparse feature vector; absent indices are zero, stored values never
// are. In binary mode every stored value is exactly 1.
struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> values;

  double get(std::uint32_t index) const;
  std::size_t nnz() const { return values.size(); }

  bool operator==(const SparseVector&) const = default;
};

struct DatasetRow {
  std::string app_id;
  SparseVector features;

  bool operator==(const DatasetRow&) const = default;
};

// Rows are sorted by app_id; row_labels is parallel to rows; label_set is the
// sorted distinct labels. feature_names[i] is the hex spelling of feature i,
// in gram order, so column identity survives save/load and projection.
struct LabeledDataset {
  FeatureMode mode = FeatureMode::binary;
  int n = 0;
  std::vector<std::string> feature_names;
  std::vector<DatasetRow> rows;
  std::vector<std::string> row_labels;
  std::vector<std::string> label_set;

  std::size_t vocab_size() const { return feature_names.size(); }
  std::size_t label_index(std::string_view label) const;  // throws InputError
  void validate() const;
};

SparseVector featurize(const AppRecord& app, const Vocabulary& vocab, FeatureMode mode);

// Same mapping, starting from the app's precomputed gram counts. Lets a
// sharded pass reuse one count per app instead of re-walking its opcodes.
SparseVector featurize_counts(const GramCounts& counts, const Vocabulary& vocab,
                              FeatureMode mode);

// Every app must have a label. Rows come out sorted by app_id.
LabeledDataset featurize_corpus(const std::vector<AppRecord>& corpus, const Vocabulary& vocab,
                                FeatureMode mode,
                                const std::unordered_map<std::string, std::string>& labels,
                                unsigned jobs = 1);

// Binary view of a frequency dataset: value -> 1 if nonzero.
LabeledDataset to_binary(const LabeledDataset& ds);

// Keeps only `keep` (sorted, unique, in-range) columns, re-indexed 0..k-1 in
// the same order.
LabeledDataset project(const LabeledDataset& ds, const std::vector<std::uint32_t>& keep);

struct Fold {
  std::vector<std::size_t> train;  // row indices, ascending
  std::vector<std::size_t> test;
};

// Stratified k-fold split: per-class counts across folds differ by at most
// one, folds partition the rows, assignment depends only on (ds, k, seed).
// Throws KTooLargeError when k exceeds the row count.
std::vector<Fold> stratified_folds(const LabeledDataset& ds, unsigned k, std::uint64_t seed);

}  // namespace nopcode
