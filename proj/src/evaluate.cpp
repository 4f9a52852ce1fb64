#include "nopcode/evaluate.hpp"

#include <algorithm>
#include <chrono>

#include "nopcode/errors.hpp"

namespace nopcode {

ConfusionMatrix ConfusionMatrix::for_labels(std::vector<std::string> labels) {
  if (!std::is_sorted(labels.begin(), labels.end()) ||
      std::adjacent_find(labels.begin(), labels.end()) != labels.end()) {
    throw InputError("confusion matrix labels must be sorted and distinct");
  }
  ConfusionMatrix matrix;
  matrix.counts.assign(labels.size(), std::vector<std::uint64_t>(labels.size(), 0));
  matrix.labels = std::move(labels);
  return matrix;
}

void ConfusionMatrix::add(const std::string& actual, const std::string& predicted) {
  auto find = [this](const std::string& label) {
    auto it = std::lower_bound(labels.begin(), labels.end(), label);
    if (it == labels.end() || *it != label) {
      throw InputError("label '" + label + "' is not in the confusion matrix");
    }
    return static_cast<std::size_t>(it - labels.begin());
  };
  counts[find(actual)][find(predicted)] += 1;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t sum = 0;
  for (const auto& row : counts) {
    for (std::uint64_t c : row) sum += c;
  }
  return sum;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (labels != other.labels) throw InputError("confusion matrices have different labels");
  for (std::size_t a = 0; a < counts.size(); ++a) {
    for (std::size_t p = 0; p < counts.size(); ++p) counts[a][p] += other.counts[a][p];
  }
  return *this;
}

Metrics weighted_metrics(const ConfusionMatrix& matrix) {
  std::uint64_t total = matrix.total();
  if (total == 0) throw EmptyMatrixError();
  std::size_t classes = matrix.labels.size();

  Metrics metrics;
  metrics.per_class.resize(classes);
  std::uint64_t diagonal = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    ClassMetrics& m = metrics.per_class[c];
    m.label = matrix.labels[c];
    m.tp = matrix.counts[c][c];
    diagonal += m.tp;
    for (std::size_t o = 0; o < classes; ++o) {
      if (o == c) continue;
      m.fn += matrix.counts[c][o];
      m.fp += matrix.counts[o][c];
    }
    m.support = m.tp + m.fn;
    if (m.tp + m.fp == 0) {
      m.precision_undefined = true;  // reported as 0
    } else {
      m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    }
    if (m.support == 0) {
      m.recall_undefined = true;
    } else {
      m.recall = static_cast<double>(m.tp) / static_cast<double>(m.support);
    }
    if (m.precision + m.recall > 0.0) {
      m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    }
    double weight = static_cast<double>(m.support) / static_cast<double>(total);
    metrics.weighted_precision += weight * m.precision;
    metrics.weighted_recall += weight * m.recall;
    metrics.weighted_f1 += weight * m.f1;
  }
  metrics.accuracy = static_cast<double>(diagonal) / static_cast<double>(total);
  return metrics;
}

CVResult cross_validate(const LabeledDataset& ds, const ClassifierSpec& spec, unsigned k,
                        std::uint64_t seed, const SelectionRule& selection) {
  auto folds = stratified_folds(ds, k, seed);

  CVResult result;
  result.k = k;
  result.seed = seed;
  result.confusion = ConfusionMatrix::for_labels(ds.label_set);
  result.folds.reserve(folds.size());

  for (const Fold& fold : folds) {
    auto started = std::chrono::steady_clock::now();
    FoldResult fr;
    fr.confusion = ConfusionMatrix::for_labels(ds.label_set);

    const LabeledDataset* active = &ds;
    LabeledDataset projected;
    if (selection.enabled) {
      RankedFeatures ranked = rank_all(ds, selection.discretizer, &fold.train);
      RankedFeatures kept = select(ranked, selection.threshold, selection.top_k);
      projected = project(ds, selected_indices(kept));
      active = &projected;
    }
    fr.selected_features = active->vocab_size();

    Model model = train(*active, spec, &fold.train);
    for (std::size_t r : fold.test) {
      Prediction prediction = predict(model, active->rows[r].features);
      fr.confusion.add(active->row_labels[r], prediction.label);
    }
    fr.metrics = weighted_metrics(fr.confusion);
    fr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    result.confusion += fr.confusion;
    result.total_seconds += fr.seconds;
    result.folds.push_back(std::move(fr));
  }
  result.metrics = weighted_metrics(result.confusion);
  return result;
}

}  // namespace nopcode
