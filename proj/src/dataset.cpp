#include "nopcode/dataset.hpp"

#include <algorithm>
#include <set>

#include "nopcode/errors.hpp"
#include "nopcode/ngram.hpp"
#include "nopcode/util.hpp"

namespace nopcode {

std::string_view mode_name(FeatureMode mode) {
  return mode == FeatureMode::binary ? "binary" : "frequency";
}

FeatureMode mode_from_name(std::string_view name) {
  if (name == "binary") return FeatureMode::binary;
  if (name == "frequency") return FeatureMode::frequency;
  throw InputError("unknown feature mode '" + std::string(name) +
                   "' (expected binary or frequency)");
}

double SparseVector::get(std::uint32_t index) const {
  auto it = std::lower_bound(values.begin(), values.end(), index,
                             [](const auto& pair, std::uint32_t key) { return pair.first < key; });
  if (it == values.end() || it->first != index) return 0.0;
  return it->second;
}

std::size_t LabeledDataset::label_index(std::string_view label) const {
  auto it = std::lower_bound(label_set.begin(), label_set.end(), label);
  if (it == label_set.end() || *it != label) {
    throw InputError("label '" + std::string(label) + "' is not in the dataset");
  }
  return static_cast<std::size_t>(it - label_set.begin());
}

void LabeledDataset::validate() const {
  if (rows.size() != row_labels.size()) {
    throw Error("dataset has " + std::to_string(rows.size()) + " rows but " +
                std::to_string(row_labels.size()) + " labels");
  }
  if (!std::is_sorted(label_set.begin(), label_set.end()) ||
      std::adjacent_find(label_set.begin(), label_set.end()) != label_set.end()) {
    throw Error("dataset label_set is not sorted and distinct");
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (r > 0 && rows[r - 1].app_id >= rows[r].app_id) {
      throw Error("dataset rows are not sorted by app_id (row " + std::to_string(r) + ")");
    }
    label_index(row_labels[r]);
    const auto& values = rows[r].features.values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i].first >= vocab_size()) {
        throw Error("row '" + rows[r].app_id + "' references feature " +
                    std::to_string(values[i].first) + " outside vocabulary of size " +
                    std::to_string(vocab_size()));
      }
      if (i > 0 && values[i - 1].first >= values[i].first) {
        throw Error("row '" + rows[r].app_id + "' has unsorted feature indices");
      }
      if (values[i].second == 0.0) {
        throw Error("row '" + rows[r].app_id + "' stores an explicit zero");
      }
      if (mode == FeatureMode::binary && values[i].second != 1.0) {
        throw Error("binary row '" + rows[r].app_id + "' stores a value other than 1");
      }
    }
  }
}

SparseVector featurize(const AppRecord& app, const Vocabulary& vocab, FeatureMode mode) {
  return featurize_counts(app_gram_counts(app, vocab.n), vocab, mode);
}

SparseVector featurize_counts(const GramCounts& counts, const Vocabulary& vocab,
                              FeatureMode mode) {
  SparseVector vec;
  vec.values.reserve(counts.size());
  for (const auto& [gram, multiplicity] : counts) {
    auto idx = vocab.find(gram);
    if (!idx) continue;  // out-of-vocabulary grams are dropped
    double value = mode == FeatureMode::binary ? 1.0 : static_cast<double>(multiplicity);
    vec.values.emplace_back(*idx, value);
  }
  std::sort(vec.values.begin(), vec.values.end());
  return vec;
}

LabeledDataset featurize_corpus(const std::vector<AppRecord>& corpus, const Vocabulary& vocab,
                                FeatureMode mode,
                                const std::unordered_map<std::string, std::string>& labels,
                                unsigned jobs) {
  std::vector<const AppRecord*> apps;
  apps.reserve(corpus.size());
  for (const auto& app : corpus) apps.push_back(&app);
  std::stable_sort(apps.begin(), apps.end(),
                   [](const AppRecord* a, const AppRecord* b) { return a->app_id < b->app_id; });
  for (std::size_t i = 1; i < apps.size(); ++i) {
    if (apps[i - 1]->app_id == apps[i]->app_id) throw DuplicateAppIdError(apps[i]->app_id);
  }

  LabeledDataset ds;
  ds.mode = mode;
  ds.n = vocab.n;
  ds.feature_names.reserve(vocab.size());
  for (const auto& entry : vocab.entries) ds.feature_names.push_back(gram_hex(entry.gram));

  ds.rows.resize(apps.size());
  ds.row_labels.resize(apps.size());
  std::set<std::string> label_set;
  for (std::size_t i = 0; i < apps.size(); ++i) {
    auto it = labels.find(apps[i]->app_id);
    if (it == labels.end()) throw InputError("no label for app '" + apps[i]->app_id + "'");
    ds.row_labels[i] = it->second;
    label_set.insert(it->second);
  }
  ds.label_set.assign(label_set.begin(), label_set.end());

  parallel_for(apps.size(), jobs, [&](std::size_t i) {
    ds.rows[i].app_id = apps[i]->app_id;
    ds.rows[i].features = featurize(*apps[i], vocab, mode);
  });
  return ds;
}

LabeledDataset to_binary(const LabeledDataset& ds) {
  LabeledDataset out = ds;
  out.mode = FeatureMode::binary;
  for (auto& row : out.rows) {
    for (auto& [index, value] : row.features.values) value = 1.0;
  }
  return out;
}

LabeledDataset project(const LabeledDataset& ds, const std::vector<std::uint32_t>& keep) {
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] >= ds.vocab_size()) {
      throw InputError("projection index " + std::to_string(keep[i]) +
                       " is outside vocabulary of size " + std::to_string(ds.vocab_size()));
    }
    if (i > 0 && keep[i - 1] >= keep[i]) {
      throw InputError("projection indices must be strictly ascending");
    }
  }
  LabeledDataset out;
  out.mode = ds.mode;
  out.n = ds.n;
  out.row_labels = ds.row_labels;
  out.label_set = ds.label_set;
  out.feature_names.reserve(keep.size());
  for (auto index : keep) out.feature_names.push_back(ds.feature_names[index]);
  out.rows.reserve(ds.rows.size());
  for (const auto& row : ds.rows) {
    DatasetRow projected;
    projected.app_id = row.app_id;
    auto it = row.features.values.begin();
    for (std::uint32_t new_index = 0; new_index < keep.size(); ++new_index) {
      std::uint32_t old_index = keep[new_index];
      while (it != row.features.values.end() && it->first < old_index) ++it;
      if (it != row.features.values.end() && it->first == old_index) {
        projected.features.values.emplace_back(new_index, it->second);
      }
    }
    out.rows.push_back(std::move(projected));
  }
  return out;
}

std::vector<Fold> stratified_folds(const LabeledDataset& ds, unsigned k, std::uint64_t seed) {
  if (ds.rows.empty()) throw EmptyDatasetError();
  if (k < 2) throw InputError("k-fold split needs k >= 2, got " + std::to_string(k));
  if (k > ds.rows.size()) throw KTooLargeError(k, ds.rows.size());

  // Row indices per class, in label_set order.
  std::vector<std::vector<std::size_t>> by_class(ds.label_set.size());
  for (std::size_t r = 0; r < ds.rows.size(); ++r) {
    by_class[ds.label_index(ds.row_labels[r])].push_back(r);
  }

  // Deal each class's shuffled members to folds with one cursor that runs on
  // across classes: per-class fold counts differ by at most one, and total
  // fold sizes do too, so no fold is empty while k <= row count.
  std::vector<std::size_t> fold_of(ds.rows.size());
  std::size_t cursor = 0;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    Rng rng(mix64(seed, fnv1a64(ds.label_set[c])));
    rng.shuffle(members);
    for (std::size_t member : members) fold_of[member] = cursor++ % k;
  }

  std::vector<Fold> folds(k);
  for (std::size_t r = 0; r < ds.rows.size(); ++r) {
    for (unsigned f = 0; f < k; ++f) {
      (fold_of[r] == f ? folds[f].test : folds[f].train).push_back(r);
    }
  }
  for (const auto& fold : folds) {
    if (fold.test.empty()) throw Error("internal: stratified split produced an empty fold");
  }
  return folds;
}

}  // namespace nopcode
