#include "nopcode/info_gain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <queue>
#include <sstream>
#include <unordered_set>

#include "nopcode/errors.hpp"
#include "nopcode/ngram.hpp"
#include "nopcode/util.hpp"

namespace nopcode {
namespace {

constexpr double kNegativeIgFloor = -1e-12;

double entropy_of_counts(const std::vector<std::uint64_t>& counts, std::uint64_t total) {
  double h = 0.0;
  for (std::uint64_t c : counts) {
    if (c == 0) continue;
    double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

// Total order used everywhere a ranking is sorted or merged.
bool rank_less(const IGScore& a, const IGScore& b) {
  if (a.ig != b.ig) return a.ig > b.ig;
  return a.gram < b.gram;
}

void check_sorted(const RankedFeatures& ranked) {
  for (std::size_t i = 1; i < ranked.scores.size(); ++i) {
    if (rank_less(ranked.scores[i], ranked.scores[i - 1])) {
      throw Error("ranking is not sorted by (ig desc, gram asc)");
    }
  }
}

}  // namespace

unsigned bucket_of_nonzero(double value, double lo, double hi, unsigned bins) {
  if (hi <= lo) return 0;
  double t = (value - lo) / (hi - lo);
  auto bucket = static_cast<long>(t * static_cast<double>(bins));
  if (bucket < 0) bucket = 0;
  if (bucket >= static_cast<long>(bins)) bucket = static_cast<long>(bins) - 1;
  return static_cast<unsigned>(bucket);
}

std::uint64_t ContingencyTable::total() const {
  std::uint64_t sum = 0;
  for (const auto& row : counts) {
    for (std::uint64_t c : row) sum += c;
  }
  return sum;
}

double entropy(const std::vector<double>& probabilities) {
  if (probabilities.empty()) throw InvalidDistributionError("distribution is empty");
  double sum = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0)) {  // also rejects NaN
      throw InvalidDistributionError("probability " + std::to_string(p) + " is negative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw InvalidDistributionError("probabilities sum to " + std::to_string(sum) + ", not 1");
  }
  double h = 0.0;
  for (double p : probabilities) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

double conditional_entropy(const ContingencyTable& table) {
  std::uint64_t total = table.total();
  if (total == 0) throw EmptyTableError();
  std::size_t classes = table.classes();
  double h = 0.0;
  for (const auto& bucket : table.counts) {
    if (bucket.size() != classes) throw Error("ragged contingency table");
    std::uint64_t bucket_total = 0;
    for (std::uint64_t c : bucket) bucket_total += c;
    if (bucket_total == 0) continue;
    double weight = static_cast<double>(bucket_total) / static_cast<double>(total);
    h += weight * entropy_of_counts(bucket, bucket_total);
  }
  return h;
}

double info_gain(const ContingencyTable& table) {
  std::uint64_t total = table.total();
  if (total == 0) throw EmptyTableError();
  std::vector<std::uint64_t> marginal(table.classes(), 0);
  for (const auto& bucket : table.counts) {
    for (std::size_t c = 0; c < bucket.size(); ++c) marginal[c] += bucket[c];
  }
  double ig = entropy_of_counts(marginal, total) - conditional_entropy(table);
  if (ig < 0.0) {
    if (ig < kNegativeIgFloor) {
      throw Error("information gain came out " + std::to_string(ig) +
                  ", beyond rounding tolerance");
    }
    ig = 0.0;
  }
  return ig;
}

Discretizer Discretizer::equal_width(unsigned bins) {
  if (bins < 2) throw InputError("equal-width discretizer needs at least 2 bins");
  return {Kind::equal_width, bins};
}

ContingencyTable contingency_of(const LabeledDataset& ds, std::uint32_t feature,
                                const Discretizer& discretizer,
                                const std::vector<std::size_t>* rows) {
  if (feature >= ds.vocab_size()) throw DimensionMismatchError(feature, ds.vocab_size());
  std::vector<std::size_t> all;
  if (!rows) {
    all.resize(ds.rows.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    rows = &all;
  }
  std::size_t classes = ds.label_set.size();
  unsigned buckets = discretizer.kind == Discretizer::Kind::presence ? 2 : discretizer.bins;
  ContingencyTable table;
  table.counts.assign(buckets, std::vector<std::uint64_t>(classes, 0));

  if (discretizer.kind == Discretizer::Kind::presence) {
    for (std::size_t r : *rows) {
      double value = ds.rows[r].features.get(feature);
      table.counts[value > 0.0 ? 1 : 0][ds.label_index(ds.row_labels[r])] += 1;
    }
    return table;
  }

  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (std::size_t r : *rows) {
    double value = ds.rows[r].features.get(feature);
    if (value == 0.0) continue;
    lo = any ? std::min(lo, value) : value;
    hi = any ? std::max(hi, value) : value;
    any = true;
  }
  for (std::size_t r : *rows) {
    double value = ds.rows[r].features.get(feature);
    unsigned bucket =
        value == 0.0 ? 0 : bucket_of_nonzero(value, lo, hi, discretizer.bins);
    table.counts[bucket][ds.label_index(ds.row_labels[r])] += 1;
  }
  return table;
}

std::vector<IGScore> score_range(const LabeledDataset& ds, const Discretizer& discretizer,
                                 std::uint32_t lo, std::uint32_t hi, std::uint32_t index_offset,
                                 const std::vector<std::size_t>* rows) {
  if (hi > ds.vocab_size() || lo > hi) {
    throw InputError("feature range [" + std::to_string(lo) + ", " + std::to_string(hi) +
                     ") is invalid for vocabulary of size " + std::to_string(ds.vocab_size()));
  }
  std::vector<std::size_t> all;
  if (!rows) {
    all.resize(ds.rows.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    rows = &all;
  }
  if (rows->empty()) throw EmptyDatasetError();

  std::size_t classes = ds.label_set.size();
  std::vector<std::uint32_t> class_of(ds.rows.size());
  for (std::size_t r : *rows) {
    class_of[r] = static_cast<std::uint32_t>(ds.label_index(ds.row_labels[r]));
  }
  std::vector<std::uint64_t> class_totals(classes, 0);
  for (std::size_t r : *rows) class_totals[class_of[r]] += 1;

  std::size_t width = hi - lo;
  std::vector<IGScore> scores;
  scores.reserve(width);

  if (discretizer.kind == Discretizer::Kind::presence) {
    std::vector<std::uint64_t> present(width * classes, 0);
    for (std::size_t r : *rows) {
      for (const auto& [index, value] : ds.rows[r].features.values) {
        if (index < lo || index >= hi) continue;
        (void)value;  // sparse values are nonzero by invariant
        present[std::size_t(index - lo) * classes + class_of[r]] += 1;
      }
    }
    ContingencyTable table;
    table.counts.assign(2, std::vector<std::uint64_t>(classes, 0));
    for (std::size_t f = 0; f < width; ++f) {
      for (std::size_t c = 0; c < classes; ++c) {
        std::uint64_t on = present[f * classes + c];
        table.counts[1][c] = on;
        table.counts[0][c] = class_totals[c] - on;
      }
      scores.push_back({static_cast<std::uint32_t>(index_offset + f),
                        gram_from_hex(ds.feature_names[lo + f]), info_gain(table)});
    }
    return scores;
  }

  // equal_width: buffer each feature's nonzero (value, class) pairs so the
  // observed range is known before bucketing. Memory is the shard's nnz.
  std::vector<std::vector<std::pair<double, std::uint32_t>>> nonzero(width);
  for (std::size_t r : *rows) {
    for (const auto& [index, value] : ds.rows[r].features.values) {
      if (index < lo || index >= hi) continue;
      nonzero[index - lo].emplace_back(value, class_of[r]);
    }
  }
  for (std::size_t f = 0; f < width; ++f) {
    ContingencyTable table;
    table.counts.assign(discretizer.bins, std::vector<std::uint64_t>(classes, 0));
    double vmin = 0.0, vmax = 0.0;
    bool any = false;
    for (const auto& [value, klass] : nonzero[f]) {
      (void)klass;
      vmin = any ? std::min(vmin, value) : value;
      vmax = any ? std::max(vmax, value) : value;
      any = true;
    }
    std::vector<std::uint64_t> nonzero_per_class(classes, 0);
    for (const auto& [value, klass] : nonzero[f]) {
      table.counts[bucket_of_nonzero(value, vmin, vmax, discretizer.bins)][klass] += 1;
      nonzero_per_class[klass] += 1;
    }
    for (std::size_t c = 0; c < classes; ++c) {
      table.counts[0][c] += class_totals[c] - nonzero_per_class[c];
    }
    scores.push_back({static_cast<std::uint32_t>(index_offset + f),
                      gram_from_hex(ds.feature_names[lo + f]), info_gain(table)});
  }
  return scores;
}

RankedFeatures rank_shard(const LabeledDataset& ds, const Discretizer& discretizer,
                          std::uint32_t lo, std::uint32_t hi, std::uint32_t index_offset,
                          const std::vector<std::size_t>* rows) {
  RankedFeatures ranked;
  ranked.scores = score_range(ds, discretizer, lo, hi, index_offset, rows);
  std::sort(ranked.scores.begin(), ranked.scores.end(), rank_less);
  return ranked;
}

RankedFeatures rank_all(const LabeledDataset& ds, const Discretizer& discretizer,
                        const std::vector<std::size_t>* rows) {
  return rank_shard(ds, discretizer, 0, static_cast<std::uint32_t>(ds.vocab_size()), 0, rows);
}

RankedFeatures merge_rankings(const std::vector<RankedFeatures>& shards) {
  RankedFeatures merged;
  std::size_t total = 0;
  for (const auto& shard : shards) total += shard.scores.size();
  merged.scores.reserve(total);
  std::unordered_set<std::uint32_t> seen;
  seen.reserve(total);
  for (const auto& shard : shards) {
    check_sorted(shard);
    for (const auto& score : shard.scores) {
      if (!seen.insert(score.feature_index).second) {
        throw DuplicateFeatureError(score.feature_index);
      }
      merged.scores.push_back(score);
    }
  }
  std::sort(merged.scores.begin(), merged.scores.end(), rank_less);
  return merged;
}

RankedFeatures select(const RankedFeatures& ranked, double threshold, std::size_t top_k) {
  check_sorted(ranked);
  RankedFeatures out;
  for (const auto& score : ranked.scores) {
    if (!(score.ig > threshold)) break;  // sorted descending: nothing later passes
    out.scores.push_back(score);
    if (top_k != 0 && out.scores.size() == top_k) break;
  }
  return out;
}

std::vector<std::uint32_t> selected_indices(const RankedFeatures& ranked) {
  std::vector<std::uint32_t> indices;
  indices.reserve(ranked.scores.size());
  for (const auto& score : ranked.scores) indices.push_back(score.feature_index);
  std::sort(indices.begin(), indices.end());
  return indices;
}

std::vector<TopFeature> top_table(const LabeledDataset& ds, const RankedFeatures& ranked,
                                  std::size_t limit) {
  check_sorted(ranked);
  std::size_t count = ranked.scores.size();
  if (limit != 0) count = std::min(count, limit);
  std::vector<TopFeature> table;
  table.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const IGScore& score = ranked.scores[i];
    if (score.feature_index >= ds.vocab_size()) {
      throw DimensionMismatchError(score.feature_index, ds.vocab_size());
    }
    TopFeature row;
    row.rank = i + 1;
    row.gram_hex = gram_hex(score.gram);
    row.ig = score.ig;
    row.class_doc_freq.assign(ds.label_set.size(), 0);
    for (std::size_t r = 0; r < ds.rows.size(); ++r) {
      if (ds.rows[r].features.get(score.feature_index) > 0.0) {
        row.class_doc_freq[ds.label_index(ds.row_labels[r])] += 1;
      }
    }
    std::size_t owners = 0;
    std::size_t owner = 0;
    for (std::size_t c = 0; c < row.class_doc_freq.size(); ++c) {
      if (row.class_doc_freq[c] > 0) {
        ++owners;
        owner = c;
      }
    }
    row.exclusive = owners == 1 ? ds.label_set[owner] : "-";
    table.push_back(std::move(row));
  }
  return table;
}

void write_shard_ranking(const RankedFeatures& ranked, const std::filesystem::path& path,
                         const std::vector<std::string>& headers) {
  check_sorted(ranked);
  std::ostringstream out;
  out << std::setprecision(17);
  for (const auto& header : headers) out << "# " << header << '\n';
  for (const auto& score : ranked.scores) {
    out << gram_hex(score.gram) << '\t' << score.ig << '\n';
  }
  atomic_write_file(path, out.str());
}

namespace {

struct RankingCursor {
  std::ifstream stream;
  std::string path;
  Gram gram;
  double ig = 0.0;
  std::size_t line_no = 0;
  bool has_previous = false;
  IGScore previous;

  bool advance() {
    std::string line;
    while (std::getline(stream, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      auto fields = split(line, '\t');
      if (fields.size() != 2) {
        throw FormatError(line_no, path + ": expected gram<TAB>ig");
      }
      try {
        gram = gram_from_hex(fields[0]);
      } catch (const std::invalid_argument& e) {
        throw FormatError(line_no, path + ": bad gram: " + e.what());
      }
      try {
        std::size_t used = 0;
        ig = std::stod(fields[1], &used);
        if (used != fields[1].size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw FormatError(line_no, path + ": bad ig value '" + fields[1] + "'");
      }
      IGScore current{0, gram, ig};
      if (has_previous && rank_less(current, previous)) {
        throw FormatError(line_no, path + ": shard ranking is not sorted");
      }
      previous = current;
      has_previous = true;
      return true;
    }
    return false;
  }
};

}  // namespace

std::uint64_t external_merge_rankings(const std::vector<std::filesystem::path>& shard_files,
                                      const std::filesystem::path& out, double threshold,
                                      std::size_t top_k, const std::vector<std::string>& headers) {
  std::vector<std::unique_ptr<RankingCursor>> cursors;
  for (const auto& file : shard_files) {
    auto cursor = std::make_unique<RankingCursor>();
    cursor->path = file.string();
    cursor->stream.open(file, std::ios::binary);
    if (!cursor->stream) throw IoError(file.string(), "cannot open shard ranking");
    if (cursor->advance()) cursors.push_back(std::move(cursor));
  }
  auto heap_cmp = [](const RankingCursor* a, const RankingCursor* b) {
    IGScore sa{0, a->gram, a->ig};
    IGScore sb{0, b->gram, b->ig};
    return rank_less(sb, sa);  // min-heap in ranking order
  };
  std::priority_queue<RankingCursor*, std::vector<RankingCursor*>, decltype(heap_cmp)> heap(
      heap_cmp);
  for (auto& cursor : cursors) heap.push(cursor.get());

  auto tmp = out;
  tmp += ".tmp";
  std::uint64_t written = 0;
  {
    std::ofstream sink(tmp, std::ios::binary | std::ios::trunc);
    if (!sink) throw IoError(tmp.string(), "cannot open for writing");
    sink << std::setprecision(17);
    for (const auto& header : headers) sink << "# " << header << '\n';
    Gram previous_gram;
    bool any = false;
    while (!heap.empty()) {
      RankingCursor* top = heap.top();
      heap.pop();
      if (!(top->ig > threshold)) break;  // globally sorted: nothing later passes
      if (any && top->gram == previous_gram) {
        throw InputError("duplicate gram across shard rankings: " + gram_hex(top->gram));
      }
      previous_gram = top->gram;
      any = true;
      ++written;
      sink << written << '\t' << gram_hex(top->gram) << '\t' << top->ig << '\n';
      if (top_k != 0 && written == top_k) break;
      if (top->advance()) heap.push(top);
    }
    sink.flush();
    if (!sink) throw IoError(tmp.string(), "write failed");
  }
  std::filesystem::rename(tmp, out);
  return written;
}

}  // namespace nopcode
