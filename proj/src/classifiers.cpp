#include "nopcode/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "nopcode/errors.hpp"
#include "nopcode/util.hpp"

namespace nopcode {

std::string_view classifier_name(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::naive_bayes: return "nb";
    case ClassifierKind::svm: return "svm";
    case ClassifierKind::random_forest: return "rf";
  }
  return "?";
}

ClassifierKind classifier_from_name(std::string_view name) {
  if (name == "nb" || name == "naive-bayes") return ClassifierKind::naive_bayes;
  if (name == "svm") return ClassifierKind::svm;
  if (name == "rf" || name == "random-forest") return ClassifierKind::random_forest;
  throw InputError("unknown classifier '" + std::string(name) + "' (expected nb, svm, or rf)");
}

namespace {

struct TrainView {
  std::vector<std::size_t> rows;        // dataset row indices
  std::vector<std::uint32_t> class_of;  // parallel to `rows`, model class ids
  std::vector<std::string> label_set;   // sorted labels present in `rows`
};

TrainView make_view(const LabeledDataset& ds, const std::vector<std::size_t>* rows) {
  TrainView view;
  if (rows) {
    view.rows = *rows;
  } else {
    view.rows.resize(ds.rows.size());
    for (std::size_t i = 0; i < view.rows.size(); ++i) view.rows[i] = i;
  }
  if (view.rows.empty()) throw EmptyDatasetError();
  std::set<std::string> labels;
  for (std::size_t r : view.rows) {
    if (r >= ds.rows.size()) {
      throw InputError("training row index " + std::to_string(r) + " is out of range");
    }
    labels.insert(ds.row_labels[r]);
  }
  if (labels.size() < 2) throw SingleClassError();
  view.label_set.assign(labels.begin(), labels.end());
  view.class_of.reserve(view.rows.size());
  for (std::size_t r : view.rows) {
    auto it = std::lower_bound(view.label_set.begin(), view.label_set.end(), ds.row_labels[r]);
    view.class_of.push_back(static_cast<std::uint32_t>(it - view.label_set.begin()));
  }
  return view;
}

void train_naive_bayes(const LabeledDataset& ds, const TrainView& view, Model& model) {
  NBVariant variant = model.spec.nb_variant;
  if (variant == NBVariant::automatic) {
    variant = ds.mode == FeatureMode::binary ? NBVariant::bernoulli : NBVariant::multinomial;
  }
  if (variant == NBVariant::bernoulli && ds.mode != FeatureMode::binary) {
    throw ModeMismatchError("bernoulli naive Bayes requires binary features");
  }
  double alpha = model.spec.nb_alpha;
  if (!(alpha > 0.0)) throw InputError("naive Bayes alpha must be positive");
  model.nb_used = variant;

  std::size_t classes = view.label_set.size();
  std::size_t vocab = ds.vocab_size();
  std::vector<std::uint64_t> class_docs(classes, 0);
  for (std::uint32_t c : view.class_of) class_docs[c] += 1;
  model.nb_log_prior.resize(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    model.nb_log_prior[c] = std::log(static_cast<double>(class_docs[c]) /
                                     static_cast<double>(view.rows.size()));
  }

  if (variant == NBVariant::bernoulli) {
    std::vector<std::vector<std::uint64_t>> present(classes,
                                                    std::vector<std::uint64_t>(vocab, 0));
    for (std::size_t i = 0; i < view.rows.size(); ++i) {
      for (const auto& [index, value] : ds.rows[view.rows[i]].features.values) {
        (void)value;
        present[view.class_of[i]][index] += 1;
      }
    }
    model.nb_log_p1.assign(classes, std::vector<double>(vocab, 0.0));
    model.nb_log_p0.assign(classes, std::vector<double>(vocab, 0.0));
    model.nb_base.assign(classes, 0.0);
    for (std::size_t c = 0; c < classes; ++c) {
      double denom = static_cast<double>(class_docs[c]) + 2.0 * alpha;
      for (std::size_t f = 0; f < vocab; ++f) {
        double on = static_cast<double>(present[c][f]);
        model.nb_log_p1[c][f] = std::log((on + alpha) / denom);
        model.nb_log_p0[c][f] =
            std::log((static_cast<double>(class_docs[c]) - on + alpha) / denom);
        model.nb_base[c] += model.nb_log_p0[c][f];
      }
    }
    return;
  }

  std::vector<std::vector<double>> counts(classes, std::vector<double>(vocab, 0.0));
  std::vector<double> totals(classes, 0.0);
  for (std::size_t i = 0; i < view.rows.size(); ++i) {
    for (const auto& [index, value] : ds.rows[view.rows[i]].features.values) {
      counts[view.class_of[i]][index] += value;
      totals[view.class_of[i]] += value;
    }
  }
  model.nb_log_p.assign(classes, std::vector<double>(vocab, 0.0));
  for (std::size_t c = 0; c < classes; ++c) {
    double denom = totals[c] + alpha * static_cast<double>(vocab);
    for (std::size_t f = 0; f < vocab; ++f) {
      model.nb_log_p[c][f] = std::log((counts[c][f] + alpha) / denom);
    }
  }
}

void train_svm(const LabeledDataset& ds, const TrainView& view, Model& model) {
  double lambda = model.spec.svm_lambda;
  if (!(lambda > 0.0)) throw InputError("svm lambda must be positive");
  if (model.spec.svm_epochs == 0) throw InputError("svm needs at least one epoch");

  std::size_t classes = view.label_set.size();
  std::size_t vocab = ds.vocab_size();
  model.svm_w.assign(classes, std::vector<double>(vocab, 0.0));
  model.svm_b.assign(classes, 0.0);

  for (std::size_t c = 0; c < classes; ++c) {
    // w is kept as scale * w_raw so the per-step shrink is O(1).
    std::vector<double>& w_raw = model.svm_w[c];
    double scale = 1.0;
    double bias = 0.0;
    Rng rng(mix64(model.spec.seed, fnv1a64(view.label_set[c])));
    std::vector<std::size_t> order(view.rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::uint64_t t = 0;
    for (unsigned epoch = 0; epoch < model.spec.svm_epochs; ++epoch) {
      rng.shuffle(order);
      for (std::size_t i : order) {
        ++t;
        double eta = 1.0 / (lambda * static_cast<double>(t));
        const SparseVector& x = ds.rows[view.rows[i]].features;
        double y = view.class_of[i] == c ? 1.0 : -1.0;
        double dot = 0.0;
        for (const auto& [index, value] : x.values) dot += w_raw[index] * value;
        double margin = y * (scale * dot + bias);
        scale *= 1.0 - eta * lambda;  // == 1 - 1/t; zero at t == 1
        if (scale < 1e-9) {
          for (double& w : w_raw) w *= scale;
          scale = 1.0;
        }
        if (margin < 1.0) {
          double step = eta * y / scale;
          for (const auto& [index, value] : x.values) w_raw[index] += step * value;
          bias += eta * y;
        }
      }
    }
    for (double& w : w_raw) w *= scale;
    model.svm_b[c] = bias;
  }
}

struct ForestGrower {
  const LabeledDataset& ds;
  const TrainView& view;
  std::size_t classes;
  unsigned max_depth;
  std::size_t mtry;
  Rng& rng;
  std::vector<RFNode>& nodes;

  static double gini(const std::vector<std::uint64_t>& counts, std::uint64_t total) {
    double g = 1.0;
    for (std::uint64_t c : counts) {
      double p = static_cast<double>(c) / static_cast<double>(total);
      g -= p * p;
    }
    return g;
  }

  std::uint32_t leaf_class(const std::vector<std::uint64_t>& counts) const {
    std::size_t best = 0;
    for (std::size_t c = 1; c < counts.size(); ++c) {
      if (counts[c] > counts[best]) best = c;
    }
    return static_cast<std::uint32_t>(best);
  }

  std::vector<std::uint32_t> sample_features() {
    std::size_t vocab = ds.vocab_size();
    std::vector<std::uint32_t> chosen;
    if (mtry >= vocab) {
      chosen.resize(vocab);
      for (std::size_t f = 0; f < vocab; ++f) chosen[f] = static_cast<std::uint32_t>(f);
      return chosen;
    }
    std::unordered_set<std::uint32_t> seen;
    chosen.reserve(mtry);
    while (chosen.size() < mtry) {
      auto f = static_cast<std::uint32_t>(rng.below(vocab));
      if (seen.insert(f).second) chosen.push_back(f);
    }
    return chosen;
  }

  // `members` indexes into view.rows/view.class_of.
  std::int32_t grow(std::vector<std::size_t>& members, unsigned depth) {
    std::vector<std::uint64_t> counts(classes, 0);
    for (std::size_t m : members) counts[view.class_of[m]] += 1;
    std::uint64_t total = members.size();

    bool pure = false;
    for (std::uint64_t c : counts) {
      if (c == total) pure = true;
    }
    auto make_leaf = [&]() {
      RFNode node;
      node.leaf_class = leaf_class(counts);
      nodes.push_back(node);
      return static_cast<std::int32_t>(nodes.size() - 1);
    };
    if (pure || total < 2 || (max_depth != 0 && depth >= max_depth)) return make_leaf();

    double node_gini = gini(counts, total);
    double best_gain = 0.0;
    std::uint32_t best_feature = 0;
    double best_threshold = 0.0;
    bool found = false;

    std::vector<std::pair<double, std::uint32_t>> values;  // (value, class)
    for (std::uint32_t feature : sample_features()) {
      values.clear();
      values.reserve(members.size());
      for (std::size_t m : members) {
        values.emplace_back(ds.rows[view.rows[m]].features.get(feature), view.class_of[m]);
      }
      std::sort(values.begin(), values.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      std::vector<std::uint64_t> left(classes, 0);
      for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        left[values[i].second] += 1;
        if (values[i].first == values[i + 1].first) continue;
        std::uint64_t nl = i + 1;
        std::uint64_t nr = total - nl;
        std::vector<std::uint64_t> right(classes, 0);
        for (std::size_t c = 0; c < classes; ++c) right[c] = counts[c] - left[c];
        double weighted = (static_cast<double>(nl) / static_cast<double>(total)) * gini(left, nl) +
                          (static_cast<double>(nr) / static_cast<double>(total)) * gini(right, nr);
        double gain = node_gini - weighted;
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best_feature = feature;
          best_threshold = (values[i].first + values[i + 1].first) / 2.0;
          found = true;
        }
      }
    }
    if (!found) return make_leaf();

    std::vector<std::size_t> left_members, right_members;
    for (std::size_t m : members) {
      double value = ds.rows[view.rows[m]].features.get(best_feature);
      (value < best_threshold ? left_members : right_members).push_back(m);
    }
    if (left_members.empty() || right_members.empty()) return make_leaf();

    RFNode node;
    node.feature = static_cast<std::int32_t>(best_feature);
    node.threshold = best_threshold;
    nodes.push_back(node);
    auto index = static_cast<std::int32_t>(nodes.size() - 1);
    members.clear();
    members.shrink_to_fit();
    std::int32_t left_index = grow(left_members, depth + 1);
    std::int32_t right_index = grow(right_members, depth + 1);
    nodes[index].left = left_index;
    nodes[index].right = right_index;
    return index;
  }
};

void train_forest(const LabeledDataset& ds, const TrainView& view, Model& model) {
  if (model.spec.rf_trees == 0) throw InputError("random forest needs at least one tree");
  std::size_t classes = view.label_set.size();
  auto mtry = static_cast<std::size_t>(
      std::max(1.0, std::floor(std::sqrt(static_cast<double>(ds.vocab_size())))));
  model.rf_forest.clear();
  model.rf_forest.reserve(model.spec.rf_trees);
  for (unsigned tree = 0; tree < model.spec.rf_trees; ++tree) {
    Rng rng(mix64(model.spec.seed, tree + 1));
    std::vector<std::size_t> members;
    members.reserve(view.rows.size());
    if (model.spec.rf_bootstrap) {
      for (std::size_t i = 0; i < view.rows.size(); ++i) members.push_back(rng.below(view.rows.size()));
    } else {
      for (std::size_t i = 0; i < view.rows.size(); ++i) members.push_back(i);
    }
    std::vector<RFNode> nodes;
    ForestGrower grower{ds, view, classes, model.spec.rf_max_depth, mtry, rng, nodes};
    std::int32_t root = grower.grow(members, 0);
    if (root != 0) throw Error("internal: forest root is not node 0");
    model.rf_forest.push_back(std::move(nodes));
  }
}

}  // namespace

Model train(const LabeledDataset& ds, const ClassifierSpec& spec,
            const std::vector<std::size_t>* rows) {
  TrainView view = make_view(ds, rows);
  Model model;
  model.spec = spec;
  model.label_set = view.label_set;
  model.vocab_size = ds.vocab_size();
  model.trained_mode = ds.mode;
  switch (spec.kind) {
    case ClassifierKind::naive_bayes: train_naive_bayes(ds, view, model); break;
    case ClassifierKind::svm: train_svm(ds, view, model); break;
    case ClassifierKind::random_forest: train_forest(ds, view, model); break;
  }
  return model;
}

Prediction predict(const Model& model, const SparseVector& features) {
  for (const auto& [index, value] : features.values) {
    (void)value;
    if (index >= model.vocab_size) throw DimensionMismatchError(index, model.vocab_size);
  }
  std::size_t classes = model.label_set.size();
  std::vector<double> scores(classes, 0.0);

  switch (model.spec.kind) {
    case ClassifierKind::naive_bayes: {
      std::vector<double> log_joint(classes, 0.0);
      if (model.nb_used == NBVariant::bernoulli) {
        for (std::size_t c = 0; c < classes; ++c) {
          double score = model.nb_log_prior[c] + model.nb_base[c];
          for (const auto& [index, value] : features.values) {
            if (value > 0.0) score += model.nb_log_p1[c][index] - model.nb_log_p0[c][index];
          }
          log_joint[c] = score;
        }
      } else {
        for (std::size_t c = 0; c < classes; ++c) {
          double score = model.nb_log_prior[c];
          for (const auto& [index, value] : features.values) {
            score += value * model.nb_log_p[c][index];
          }
          log_joint[c] = score;
        }
      }
      double peak = *std::max_element(log_joint.begin(), log_joint.end());
      double norm = 0.0;
      for (std::size_t c = 0; c < classes; ++c) {
        scores[c] = std::exp(log_joint[c] - peak);
        norm += scores[c];
      }
      for (double& s : scores) s /= norm;
      break;
    }
    case ClassifierKind::svm: {
      for (std::size_t c = 0; c < classes; ++c) {
        double dot = model.svm_b[c];
        for (const auto& [index, value] : features.values) {
          dot += model.svm_w[c][index] * value;
        }
        scores[c] = dot;
      }
      break;
    }
    case ClassifierKind::random_forest: {
      for (const auto& nodes : model.rf_forest) {
        std::int32_t at = 0;
        while (nodes[at].feature >= 0) {
          double value = features.get(static_cast<std::uint32_t>(nodes[at].feature));
          at = value < nodes[at].threshold ? nodes[at].left : nodes[at].right;
        }
        scores[nodes[at].leaf_class] += 1.0;
      }
      for (double& s : scores) s /= static_cast<double>(model.rf_forest.size());
      break;
    }
  }

  std::size_t best = 0;
  for (std::size_t c = 1; c < classes; ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  return {model.label_set[best], std::move(scores)};
}

}  // namespace nopcode
