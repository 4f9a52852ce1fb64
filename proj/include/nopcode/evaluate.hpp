#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nopcode/classifiers.hpp"
#include "nopcode/dataset.hpp"
#include "nopcode/info_gain.hpp"

namespace nopcode {

struct ConfusionMatrix {
  std::vector<std::string> labels;                 // sorted distinct
  std::vector<std::vector<std::uint64_t>> counts;  // [actual][predicted]

  static ConfusionMatrix for_labels(std::vector<std::string> labels);
  void add(const std::string& actual, const std::string& predicted);
  std::uint64_t total() const;
  // Cell-wise sum; label sets must match exactly.
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);

  bool operator==(const ConfusionMatrix&) const = default;
};

struct ClassMetrics {
  std::string label;
  std::uint64_t support = 0;
  std::uint64_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  // An undefined ratio (0/0) is reported as 0 and flagged.
  bool precision_undefined = false;
  bool recall_undefined = false;
};

struct Metrics {
  std::vector<ClassMetrics> per_class;  // label order
  double accuracy = 0.0;
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
};

// Per-class precision/recall/f1, support-weighted averages, and accuracy.
// Throws EmptyMatrixError when the matrix has no samples.
Metrics weighted_metrics(const ConfusionMatrix& matrix);

// Feature selection applied inside each fold, on training rows only, so the
// test fold never influences which features survive.
struct SelectionRule {
  bool enabled = false;
  Discretizer discretizer = Discretizer::presence();
  double threshold = 0.1;
  std::size_t top_k = 0;
};

struct FoldResult {
  ConfusionMatrix confusion;
  Metrics metrics;
  std::size_t selected_features = 0;  // dataset width used by this fold
  double seconds = 0.0;
};

struct CVResult {
  unsigned k = 0;
  std::uint64_t seed = 0;
  std::vector<FoldResult> folds;
  ConfusionMatrix confusion;  // sum over folds
  Metrics metrics;            // computed from the summed matrix
  double total_seconds = 0.0;
};

// Stratified k-fold cross-validation. Everything except the timing fields is
// a pure function of (ds, spec, k, seed, selection).
CVResult cross_validate(const LabeledDataset& ds, const ClassifierSpec& spec, unsigned k,
                        std::uint64_t seed, const SelectionRule& selection = {});

}  // namespace nopcode
