#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "nopcode/dataset.hpp"
#include "nopcode/evaluate.hpp"
#include "nopcode/info_gain.hpp"
#include "nopcode/smali.hpp"

namespace nopcode {

inline constexpr std::string_view kVersion = "0.1.0";

// 16-hex-digit FNV-1a over the effective configuration, so artifacts can be
// traced back to the exact settings that produced them. Entries are hashed
// as sorted "key=value" lines; insertion order does not matter.
std::string config_hash(std::vector<std::pair<std::string, std::string>> entries);

// Standard artifact header lines: version, config hash, and the config
// itself, ready to pass to the writers that take `headers`.
std::vector<std::string> artifact_headers(
    const std::vector<std::pair<std::string, std::string>>& config);

// Loads a corpus laid out as <root>/<app_id>/**.smali (one subdirectory per
// app). Apps come back sorted by app_id.
std::vector<AppRecord> extract_corpus_tree(const std::filesystem::path& root, unsigned jobs = 1);

struct NgramStat {
  int n = 0;
  std::uint64_t windows = 0;
  std::uint64_t unique_grams = 0;
};

struct CorpusStats {
  std::uint64_t apps = 0;
  std::uint64_t methods = 0;
  std::uint64_t opcodes = 0;
  std::vector<NgramStat> per_n;  // ascending n
};

// Window and unique-gram counts per n; unique counting honors `mem_budget`
// through the spilling vocabulary builder.
CorpusStats corpus_stats(const std::vector<AppRecord>& corpus, const std::vector<int>& ns,
                         std::size_t mem_budget = 1'000'000);

// Builds vocab.tsv for the corpus at the given n within the memory budget.
// Returns the number of unique grams.
std::uint64_t build_vocab_file(const std::vector<AppRecord>& corpus, int n,
                               const std::filesystem::path& out, std::size_t mem_budget,
                               const std::vector<std::string>& headers = {});

struct ShardedSelection {
  std::uint64_t vocab_size = 0;
  std::uint64_t shards = 0;
  std::uint64_t selected = 0;  // grams written to the ranking file
};

// Memory-bounded IG selection: the vocabulary file is processed in slices of
// `shard_size` grams; each slice is featurized and ranked on its own, and
// the per-shard rankings are stream-merged into `ranking_out` under the
// usual (threshold, top_k) rule. At no point is the full feature matrix in
// memory. Equivalent to in-memory rank + select over the whole vocabulary.
ShardedSelection sharded_select_to_file(
    const std::vector<AppRecord>& corpus,
    const std::unordered_map<std::string, std::string>& labels,
    const std::filesystem::path& vocab_file, FeatureMode mode, const Discretizer& discretizer,
    double threshold, std::size_t top_k, std::uint64_t shard_size,
    const std::filesystem::path& ranking_out, const std::vector<std::string>& headers = {});

// rank <TAB> gram <TAB> ig <TAB> doc freq per class <TAB> exclusive-owner
// column, with a commented column-header line. ig is printed with %.12g.
void write_selection_report(const LabeledDataset& ds, const RankedFeatures& ranked,
                            const std::filesystem::path& path, std::size_t limit = 0,
                            const std::vector<std::string>& headers = {});

// Evaluation report. Everything outside the "timing" key is a deterministic
// function of the inputs, so two runs with the same config and seed can be
// compared byte for byte after dropping "timing".
std::string evaluation_report_json(const CVResult& result,
                                   const std::vector<std::pair<std::string, std::string>>& config);

struct BenchRow {
  int n = 0;
  std::uint64_t vocab_size = 0;
  std::uint64_t selected = 0;
  std::string classifier;
  double seconds = 0.0;  // featurize + select + cross-validate
  double weighted_f1 = 0.0;
};

struct BenchReport {
  std::string machine;
  std::vector<BenchRow> rows;  // n ascending, classifier order as given
};

// Times the full pipeline per (n, classifier) on an in-memory corpus using
// whole-dataset selection followed by k-fold cross-validation.
BenchReport run_bench(const std::vector<AppRecord>& corpus,
                      const std::unordered_map<std::string, std::string>& labels,
                      const std::vector<int>& ns, FeatureMode mode,
                      const Discretizer& discretizer, double threshold, std::size_t top_k,
                      const std::vector<ClassifierSpec>& specs, unsigned k_folds,
                      std::uint64_t seed);

std::string bench_table_text(const BenchReport& report);

}  // namespace nopcode
