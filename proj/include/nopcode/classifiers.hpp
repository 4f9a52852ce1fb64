#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nopcode/dataset.hpp"

namespace nopcode {

enum class ClassifierKind { naive_bayes, svm, random_forest };
enum class NBVariant { automatic, bernoulli, multinomial };

std::string_view classifier_name(ClassifierKind kind);
ClassifierKind classifier_from_name(std::string_view name);  // throws InputError

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::naive_bayes;
  std::uint64_t seed = 0;

  // naive Bayes: `automatic` resolves to bernoulli on binary data and
  // multinomial on frequency data. Forcing bernoulli onto frequency data
  // throws ModeMismatchError; multinomial accepts both.
  NBVariant nb_variant = NBVariant::automatic;
  double nb_alpha = 1.0;

  // linear SVM, one-vs-rest, stochastic subgradient with step 1/(lambda*t).
  double svm_lambda = 1e-4;
  unsigned svm_epochs = 10;

  // random forest: Gini splits over sqrt(|features|) candidates per node.
  // max_depth 0 means unbounded; bootstrap off trains every tree on the full
  // sample (useful when the forest must reproduce its training set).
  unsigned rf_trees = 100;
  unsigned rf_max_depth = 0;
  bool rf_bootstrap = true;
};

struct RFNode {
  std::int32_t feature = -1;  // -1 at leaves
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint32_t leaf_class = 0;  // majority class at leaves
};

struct Model {
  ClassifierSpec spec;
  std::vector<std::string> label_set;  // sorted, as in the training dataset
  std::size_t vocab_size = 0;
  FeatureMode trained_mode = FeatureMode::binary;

  // naive Bayes (variant in nb_used): per-class log prior and per-feature
  // conditional log probabilities.
  NBVariant nb_used = NBVariant::automatic;
  std::vector<double> nb_log_prior;
  std::vector<std::vector<double>> nb_log_p1;  // bernoulli: log P(present | c)
  std::vector<std::vector<double>> nb_log_p0;  // bernoulli: log P(absent | c)
  std::vector<double> nb_base;                 // bernoulli: sum_f log_p0[c][f]
  std::vector<std::vector<double>> nb_log_p;   // multinomial: log P(f | c)

  // svm: one weight vector and bias per class.
  std::vector<std::vector<double>> svm_w;
  std::vector<double> svm_b;

  // random forest: nodes per tree, root at index 0.
  std::vector<std::vector<RFNode>> rf_forest;
};

struct Prediction {
  std::string label;
  // One score per label in label_set order. Naive Bayes scores are class
  // posteriors summing to 1; the forest reports vote fractions; the SVM
  // reports raw margins.
  std::vector<double> scores;
};

// Trains on `rows` of `ds` (all rows when null). Throws EmptyDatasetError /
// SingleClassError when the training slice is degenerate.
Model train(const LabeledDataset& ds, const ClassifierSpec& spec,
            const std::vector<std::size_t>* rows = nullptr);

// Ties pick the earliest label in label_set order. Feature indices at or
// beyond vocab_size throw DimensionMismatchError.
Prediction predict(const Model& model, const SparseVector& features);

}  // namespace nopcode
