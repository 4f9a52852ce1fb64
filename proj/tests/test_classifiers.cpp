#include "nopcode/classifiers.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "doctest.h"
#include "nopcode/errors.hpp"
#include "nopcode/util.hpp"
#include "test_helpers.hpp"

using namespace nopcode;

namespace {

// Dataset from an explicit dense matrix; labels row-parallel.
LabeledDataset matrix_dataset(FeatureMode mode,
                              const std::vector<std::vector<double>>& matrix,
                              const std::vector<std::string>& labels) {
  LabeledDataset ds;
  ds.mode = mode;
  ds.n = 1;
  for (std::size_t f = 0; f < matrix.front().size(); ++f) {
    char hex[3];
    std::snprintf(hex, sizeof hex, "%02zx", f);
    ds.feature_names.push_back(hex);
  }
  for (std::size_t r = 0; r < matrix.size(); ++r) {
    DatasetRow row;
    row.app_id = "app" + std::to_string(100 + r);
    for (std::size_t f = 0; f < matrix[r].size(); ++f) {
      if (matrix[r][f] != 0.0) {
        row.features.values.emplace_back(std::uint32_t(f), matrix[r][f]);
      }
    }
    ds.rows.push_back(std::move(row));
    ds.row_labels.push_back(labels[r]);
  }
  std::set<std::string> distinct(labels.begin(), labels.end());
  ds.label_set.assign(distinct.begin(), distinct.end());
  ds.validate();
  return ds;
}

SparseVector sparse_of(const std::vector<double>& dense) {
  SparseVector v;
  for (std::size_t f = 0; f < dense.size(); ++f) {
    if (dense[f] != 0.0) v.values.emplace_back(std::uint32_t(f), dense[f]);
  }
  return v;
}

// Two well-separated classes: class m rows light up feature 0, class g rows
// light up feature 1, plus a noisy shared feature 2.
LabeledDataset separable_dataset(std::size_t per_class, FeatureMode mode,
                                 std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> matrix;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < per_class; ++i) {
    double noise = double(rng.below(2));
    matrix.push_back({1, 0, noise});
    labels.push_back("m");
    noise = double(rng.below(2));
    matrix.push_back({0, 1, noise});
    labels.push_back("g");
  }
  if (mode == FeatureMode::frequency) {
    for (auto& row : matrix)
      for (auto& v : row) v *= 3;
  }
  return matrix_dataset(mode, matrix, labels);
}

}  // namespace

TEST_CASE("bernoulli naive Bayes reproduces hand-computed probabilities") {
  // 4 samples: m = {f0}, {f0}, g = {f1}, {f0, f1}. With alpha = 1:
  //   P(f0 present | m) = (2 + 1) / (2 + 2) = 3/4
  //   P(f0 present | g) = (1 + 1) / (2 + 2) = 1/2
  //   P(f1 present | m) = (0 + 1) / (2 + 2) = 1/4
  LabeledDataset ds = matrix_dataset(FeatureMode::binary,
                                     {{1, 0}, {1, 0}, {0, 1}, {1, 1}},
                                     {"m", "m", "g", "g"});
  ClassifierSpec spec;
  spec.kind = ClassifierKind::naive_bayes;
  Model model = train(ds, spec);
  CHECK(model.nb_used == NBVariant::bernoulli);
  REQUIRE(model.label_set == std::vector<std::string>{"g", "m"});

  std::size_t g = 0, m = 1;
  CHECK(model.nb_log_prior[m] == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(std::exp(model.nb_log_p1[m][0]) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(std::exp(model.nb_log_p1[g][0]) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::exp(model.nb_log_p1[m][1]) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(std::exp(model.nb_log_p0[m][1]) == doctest::Approx(0.75).epsilon(1e-12));

  // Posterior for a sample with only f0, by direct Bayes rule.
  Prediction pred = predict(model, sparse_of({1, 0}));
  double score_m = 0.5 * 0.75 * 0.75;  // P(m) P(f0|m) P(!f1|m)
  double score_g = 0.5 * 0.5 * 0.25;   // P(g) P(f0|g) P(!f1|g), P(f1|g) = 3/4
  double want_m = score_m / (score_m + score_g);
  CHECK(pred.label == "m");
  REQUIRE(pred.scores.size() == 2);
  CHECK(pred.scores[m] == doctest::Approx(want_m).epsilon(1e-9));
  CHECK(pred.scores[g] + pred.scores[m] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("multinomial naive Bayes reproduces hand-computed probabilities") {
  // Class m: counts f0 = 5, f1 = 1; class g: f0 = 1, f1 = 2. Alpha = 1, V = 2:
  //   P(f0 | m) = (5 + 1) / (6 + 2) = 3/4,  P(f1 | m) = 1/4
  //   P(f0 | g) = (1 + 1) / (3 + 2) = 2/5,  P(f1 | g) = 3/5
  LabeledDataset ds = matrix_dataset(FeatureMode::frequency,
                                     {{5, 1}, {1, 2}}, {"m", "g"});
  ClassifierSpec spec;
  spec.kind = ClassifierKind::naive_bayes;
  Model model = train(ds, spec);
  CHECK(model.nb_used == NBVariant::multinomial);

  std::size_t g = 0, m = 1;
  CHECK(std::exp(model.nb_log_p[m][0]) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(std::exp(model.nb_log_p[m][1]) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(std::exp(model.nb_log_p[g][0]) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(std::exp(model.nb_log_p[g][1]) == doctest::Approx(0.6).epsilon(1e-12));

  // A document with two f0 occurrences: posterior odds (3/4)^2 : (2/5)^2.
  Prediction pred = predict(model, sparse_of({2, 0}));
  double sm = 0.5 * 0.75 * 0.75;
  double sg = 0.5 * 0.4 * 0.4;
  CHECK(pred.label == "m");
  CHECK(pred.scores[m] == doctest::Approx(sm / (sm + sg)).epsilon(1e-9));
}

TEST_CASE("naive Bayes variant rules") {
  LabeledDataset freq = matrix_dataset(FeatureMode::frequency,
                                       {{2, 0}, {0, 3}}, {"m", "g"});
  ClassifierSpec spec;
  spec.kind = ClassifierKind::naive_bayes;
  spec.nb_variant = NBVariant::bernoulli;
  CHECK_THROWS_AS(train(freq, spec), ModeMismatchError);

  spec.nb_variant = NBVariant::multinomial;  // multinomial accepts both modes
  CHECK(train(freq, spec).nb_used == NBVariant::multinomial);
  LabeledDataset bin = matrix_dataset(FeatureMode::binary,
                                      {{1, 0}, {0, 1}}, {"m", "g"});
  CHECK(train(bin, spec).nb_used == NBVariant::multinomial);

  spec.nb_variant = NBVariant::automatic;
  CHECK(train(bin, spec).nb_used == NBVariant::bernoulli);
  CHECK(train(freq, spec).nb_used == NBVariant::multinomial);

  spec.nb_alpha = 0.0;
  CHECK_THROWS_AS(train(bin, spec), InputError);
}

TEST_CASE("all classifiers separate an easy dataset") {
  for (ClassifierKind kind : {ClassifierKind::naive_bayes, ClassifierKind::svm,
                              ClassifierKind::random_forest}) {
    CAPTURE(classifier_name(kind));
    LabeledDataset ds = separable_dataset(20, FeatureMode::binary, 5);
    ClassifierSpec spec;
    spec.kind = kind;
    spec.seed = 7;
    Model model = train(ds, spec);
    for (std::size_t r = 0; r < ds.rows.size(); ++r) {
      Prediction pred = predict(model, ds.rows[r].features);
      CHECK(pred.label == ds.row_labels[r]);
      REQUIRE(pred.scores.size() == model.label_set.size());
    }
  }
}

TEST_CASE("svm margins favour the true class on separable data") {
  LabeledDataset ds = separable_dataset(50, FeatureMode::binary, 11);
  ClassifierSpec spec;
  spec.kind = ClassifierKind::svm;
  spec.seed = 3;
  Model model = train(ds, spec);
  REQUIRE(model.svm_w.size() == 2);
  REQUIRE(model.svm_w[0].size() == ds.vocab_size());

  Prediction pm = predict(model, sparse_of({1, 0, 0}));
  Prediction pg = predict(model, sparse_of({0, 1, 0}));
  CHECK(pm.label == "m");
  CHECK(pg.label == "g");
  // Raw margins: the matching one-vs-rest score is positive, the other
  // negative, for a point deep in either class region.
  std::size_t g = 0, m = 1;
  CHECK(pm.scores[m] > 0.0);
  CHECK(pm.scores[g] < 0.0);

  Model again = train(ds, spec);
  CHECK(again.svm_w == model.svm_w);
  CHECK(again.svm_b == model.svm_b);
  spec.seed = 4;
  Model other = train(ds, spec);
  CHECK(other.svm_w != model.svm_w);  // seed reaches the sample order
}

TEST_CASE("random forest memorizes training data without bootstrap") {
  // Noise-free target: strict feature-value regions; every tree sees the
  // full sample, so the forest must reproduce the training labels exactly.
  std::vector<std::vector<double>> matrix;
  std::vector<std::string> labels;
  Rng rng(21);
  for (int i = 0; i < 30; ++i) {
    double a = double(rng.below(4));
    double b = double(rng.below(4));
    matrix.push_back({a, b});
    labels.push_back(a >= 2 ? "hi" : (b >= 2 ? "mid" : "lo"));
  }
  LabeledDataset ds = matrix_dataset(FeatureMode::frequency, matrix, labels);

  ClassifierSpec spec;
  spec.kind = ClassifierKind::random_forest;
  spec.seed = 1;
  spec.rf_trees = 15;
  spec.rf_bootstrap = false;
  Model model = train(ds, spec);
  REQUIRE(model.rf_forest.size() == 15);
  for (std::size_t r = 0; r < ds.rows.size(); ++r) {
    Prediction pred = predict(model, ds.rows[r].features);
    CHECK(pred.label == ds.row_labels[r]);
    double total = std::accumulate(pred.scores.begin(), pred.scores.end(), 0.0);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));  // vote fractions
  }

  Model again = train(ds, spec);
  for (std::size_t t = 0; t < model.rf_forest.size(); ++t) {
    REQUIRE(again.rf_forest[t].size() == model.rf_forest[t].size());
  }
  Prediction p1 = predict(model, sparse_of({3, 0}));
  Prediction p2 = predict(again, sparse_of({3, 0}));
  CHECK(p1.label == p2.label);
  CHECK(p1.scores == p2.scores);
}

TEST_CASE("random forest respects the depth cap") {
  LabeledDataset ds = separable_dataset(10, FeatureMode::binary, 9);
  ClassifierSpec spec;
  spec.kind = ClassifierKind::random_forest;
  spec.rf_trees = 5;
  spec.rf_max_depth = 1;  // a stump: root plus two leaves at most
  spec.rf_bootstrap = false;
  Model model = train(ds, spec);
  for (const auto& tree : model.rf_forest) CHECK(tree.size() <= 3);
}

TEST_CASE("prediction ties resolve to the earliest label") {
  // One sample per class with identical features: posteriors tie exactly.
  LabeledDataset ds = matrix_dataset(FeatureMode::binary, {{1}, {1}}, {"b", "a"});
  ClassifierSpec spec;
  spec.kind = ClassifierKind::naive_bayes;
  Model model = train(ds, spec);
  Prediction pred = predict(model, sparse_of({1}));
  CHECK(pred.scores[0] == doctest::Approx(pred.scores[1]).epsilon(1e-12));
  CHECK(pred.label == "a");
}

TEST_CASE("degenerate training slices are rejected") {
  LabeledDataset ds = matrix_dataset(FeatureMode::binary, {{1, 0}, {0, 1}},
                                     {"m", "g"});
  ClassifierSpec spec;
  std::vector<std::size_t> none;
  CHECK_THROWS_AS(train(ds, spec, &none), EmptyDatasetError);
  std::vector<std::size_t> one_class = {0};
  CHECK_THROWS_AS(train(ds, spec, &one_class), SingleClassError);
  std::vector<std::size_t> bad_index = {0, 7};
  CHECK_THROWS_AS(train(ds, spec, &bad_index), InputError);
  LabeledDataset empty;
  CHECK_THROWS_AS(train(empty, spec), EmptyDatasetError);
}

TEST_CASE("prediction validates feature indices") {
  LabeledDataset ds = matrix_dataset(FeatureMode::binary, {{1, 0}, {0, 1}},
                                     {"m", "g"});
  for (ClassifierKind kind : {ClassifierKind::naive_bayes, ClassifierKind::svm,
                              ClassifierKind::random_forest}) {
    CAPTURE(classifier_name(kind));
    ClassifierSpec spec;
    spec.kind = kind;
    Model model = train(ds, spec);
    SparseVector out_of_range;
    out_of_range.values = {{9, 1.0}};
    CHECK_THROWS_AS(predict(model, out_of_range), DimensionMismatchError);
  }
}

TEST_CASE("training restricted to rows ignores the rest") {
  // Rows 0..3 are consistent; row 4 is poisoned. Training on 0..3 only must
  // classify like the clean data.
  LabeledDataset ds = matrix_dataset(
      FeatureMode::binary,
      {{1, 0}, {1, 0}, {0, 1}, {0, 1}, {1, 0}},
      {"m", "m", "g", "g", "g"});
  std::vector<std::size_t> clean = {0, 1, 2, 3};
  ClassifierSpec spec;
  spec.kind = ClassifierKind::naive_bayes;
  Model model = train(ds, spec, &clean);
  CHECK(predict(model, sparse_of({1, 0})).label == "m");
  CHECK(predict(model, sparse_of({0, 1})).label == "g");
}

TEST_CASE("classifier names parse") {
  CHECK(classifier_from_name("nb") == ClassifierKind::naive_bayes);
  CHECK(classifier_from_name("naive-bayes") == ClassifierKind::naive_bayes);
  CHECK(classifier_from_name("svm") == ClassifierKind::svm);
  CHECK(classifier_from_name("rf") == ClassifierKind::random_forest);
  CHECK(classifier_from_name("random-forest") == ClassifierKind::random_forest);
  CHECK_THROWS_AS(classifier_from_name("knn"), InputError);
  CHECK(classifier_name(ClassifierKind::svm) == "svm");
}
