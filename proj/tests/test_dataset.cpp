#include "nopcode/dataset.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "nopcode/errors.hpp"
#include "nopcode/vocab.hpp"
#include "test_helpers.hpp"

using namespace nopcode;

namespace {

AppRecord app_of(const std::string& id, std::vector<std::uint8_t> ops) {
  AppRecord app;
  app.app_id = id;
  OpcodeSeq m;
  m.class_name = "La;";
  m.method_sig = "m()V";
  m.opcodes = std::move(ops);
  app.methods.push_back(std::move(m));
  return app;
}

LabeledDataset tiny_dataset(FeatureMode mode) {
  std::vector<AppRecord> corpus = {
      app_of("a", {0x01, 0x01, 0x02}),
      app_of("b", {0x02, 0x03}),
  };
  Vocabulary vocab = build_vocabulary(corpus, 1);
  std::unordered_map<std::string, std::string> labels = {{"a", "m"}, {"b", "g"}};
  return featurize_corpus(corpus, vocab, mode, labels);
}

}  // namespace

TEST_CASE("frequency features count gram multiplicity") {
  LabeledDataset ds = tiny_dataset(FeatureMode::frequency);
  REQUIRE(ds.rows.size() == 2);
  REQUIRE(ds.feature_names == std::vector<std::string>{"01", "02", "03"});
  // rows are app_id-sorted: a then b
  CHECK(ds.rows[0].features.get(0) == 2.0);
  CHECK(ds.rows[0].features.get(1) == 1.0);
  CHECK(ds.rows[0].features.get(2) == 0.0);
  CHECK(ds.rows[1].features.get(1) == 1.0);
  CHECK(ds.rows[1].features.get(2) == 1.0);
  CHECK(ds.row_labels == std::vector<std::string>{"m", "g"});
  CHECK(ds.label_set == std::vector<std::string>{"g", "m"});
  ds.validate();
}

TEST_CASE("binary features are the indicator of frequency features") {
  LabeledDataset freq = tiny_dataset(FeatureMode::frequency);
  LabeledDataset bin = tiny_dataset(FeatureMode::binary);
  REQUIRE(freq.rows.size() == bin.rows.size());
  for (std::size_t r = 0; r < freq.rows.size(); ++r) {
    for (std::uint32_t f = 0; f < freq.vocab_size(); ++f) {
      double expected = freq.rows[r].features.get(f) > 0.0 ? 1.0 : 0.0;
      CHECK(bin.rows[r].features.get(f) == expected);
    }
  }
  CHECK(to_binary(freq).rows == bin.rows);
  bin.validate();
}

TEST_CASE("grams outside the vocabulary are dropped") {
  std::vector<AppRecord> corpus = {app_of("a", {0x01, 0x02})};
  Vocabulary vocab = build_vocabulary(corpus, 1);
  AppRecord unseen = app_of("x", {0x01, 0x7f});
  SparseVector vec = featurize(unseen, vocab, FeatureMode::binary);
  CHECK(vec.nnz() == 1);
  CHECK(vec.get(*vocab.find(gram_from_hex("01"))) == 1.0);
}

TEST_CASE("featurize_corpus rejects duplicates and missing labels") {
  std::vector<AppRecord> corpus = {app_of("a", {0x01}), app_of("a", {0x02})};
  Vocabulary vocab = build_vocabulary(corpus, 1);
  std::unordered_map<std::string, std::string> labels = {{"a", "m"}};
  CHECK_THROWS_AS(featurize_corpus(corpus, vocab, FeatureMode::binary, labels),
                  DuplicateAppIdError);

  std::vector<AppRecord> corpus2 = {app_of("a", {0x01}), app_of("b", {0x02})};
  CHECK_THROWS_AS(featurize_corpus(corpus2, vocab, FeatureMode::binary, labels),
                  InputError);
}

TEST_CASE("project keeps the requested columns and renumbers them") {
  LabeledDataset ds = tiny_dataset(FeatureMode::frequency);
  LabeledDataset projected = project(ds, {0, 2});
  CHECK(projected.feature_names == std::vector<std::string>{"01", "03"});
  CHECK(projected.rows[0].features.get(0) == 2.0);  // old column 0
  CHECK(projected.rows[0].features.get(1) == 0.0);  // old column 2
  CHECK(projected.rows[1].features.get(1) == 1.0);
  CHECK(projected.vocab_size() == 2);
  projected.validate();

  CHECK_THROWS_AS(project(ds, {2, 0}), InputError);   // not ascending
  CHECK_THROWS_AS(project(ds, {0, 9}), InputError);   // out of range
  LabeledDataset none = project(ds, {});
  CHECK(none.vocab_size() == 0);
  CHECK(none.rows[0].features.nnz() == 0);
}

TEST_CASE("validate catches malformed rows") {
  LabeledDataset ds = tiny_dataset(FeatureMode::binary);
  LabeledDataset bad = ds;
  bad.rows[0].features.values.push_back({1, 1.0});  // duplicate index
  CHECK_THROWS(bad.validate());
  bad = ds;
  bad.rows[0].features.values = {{9, 1.0}};  // out of range
  CHECK_THROWS(bad.validate());
  bad = ds;
  bad.rows[0].features.values = {{0, 0.0}};  // explicit zero
  CHECK_THROWS(bad.validate());
  bad = ds;
  bad.rows[0].features.values = {{0, 2.0}};  // non-indicator in binary mode
  CHECK_THROWS(bad.validate());
  std::swap(ds.rows[0], ds.rows[1]);  // rows out of app_id order
  std::swap(ds.row_labels[0], ds.row_labels[1]);
  CHECK_THROWS(ds.validate());
}

TEST_CASE("stratified folds partition rows and respect class balance") {
  // 4 classes x 15 rows, k = 7: every row appears in exactly one test fold
  // and per-class fold loads differ by at most one.
  std::vector<AppRecord> corpus;
  std::unordered_map<std::string, std::string> labels;
  const char* classes[] = {"a", "b", "c", "d"};
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < 15; ++i) {
      std::string id = std::string(classes[c]) + std::to_string(i);
      corpus.push_back(app_of(id, {std::uint8_t(c), std::uint8_t(i % 7)}));
      labels[id] = classes[c];
    }
  }
  Vocabulary vocab = build_vocabulary(corpus, 1);
  LabeledDataset ds = featurize_corpus(corpus, vocab, FeatureMode::binary, labels);

  const int k = 7;
  auto folds = stratified_folds(ds, k, 42);
  REQUIRE(folds.size() == std::size_t(k));

  std::vector<int> seen(ds.rows.size(), 0);
  for (const auto& fold : folds) {
    CHECK_FALSE(fold.test.empty());
    for (auto row : fold.test) seen.at(row) += 1;
    std::set<std::size_t> train(fold.train.begin(), fold.train.end());
    for (auto row : fold.test) CHECK(train.count(row) == 0);
    CHECK(fold.train.size() + fold.test.size() == ds.rows.size());

    std::map<std::string, int> per_class;
    for (auto row : fold.test) per_class[ds.row_labels[row]] += 1;
    for (const auto& [label, count] : per_class) {
      CHECK(count >= 15 / k);
      CHECK(count <= 15 / k + 1);
    }
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));

  auto again = stratified_folds(ds, k, 42);
  for (int f = 0; f < k; ++f) {
    CHECK(again[f].test == folds[f].test);
    CHECK(again[f].train == folds[f].train);
  }
  auto other_seed = stratified_folds(ds, k, 43);
  bool any_diff = false;
  for (int f = 0; f < k; ++f) any_diff |= other_seed[f].test != folds[f].test;
  CHECK(any_diff);
}

TEST_CASE("stratified folds with k equal to per-class support") {
  // 2 classes x 10 rows, k = 10: each test fold holds exactly one row of
  // each class.
  std::vector<AppRecord> corpus;
  std::unordered_map<std::string, std::string> labels;
  for (int i = 0; i < 10; ++i) {
    std::string m = "m" + std::to_string(i);
    std::string g = "g" + std::to_string(i);
    corpus.push_back(app_of(m, {0x01, std::uint8_t(i)}));
    corpus.push_back(app_of(g, {0x02, std::uint8_t(i)}));
    labels[m] = "malware";
    labels[g] = "goodware";
  }
  Vocabulary vocab = build_vocabulary(corpus, 1);
  LabeledDataset ds = featurize_corpus(corpus, vocab, FeatureMode::binary, labels);

  auto folds = stratified_folds(ds, 10, 7);
  for (const auto& fold : folds) {
    REQUIRE(fold.test.size() == 2);
    std::set<std::string> fold_labels;
    for (auto row : fold.test) fold_labels.insert(ds.row_labels[row]);
    CHECK(fold_labels == std::set<std::string>{"goodware", "malware"});
  }
}

TEST_CASE("stratified fold validation errors") {
  LabeledDataset ds = tiny_dataset(FeatureMode::binary);
  CHECK_THROWS_AS(stratified_folds(ds, 1, 0), InputError);
  CHECK_THROWS_AS(stratified_folds(ds, 3, 0), KTooLargeError);
  LabeledDataset empty;
  CHECK_THROWS_AS(stratified_folds(empty, 2, 0), EmptyDatasetError);
}
