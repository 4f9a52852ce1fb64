#include "nopcode/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "nopcode/errors.hpp"
#include "nopcode/ngram.hpp"
#include "nopcode/opcodes.hpp"
#include "nopcode/util.hpp"

namespace nopcode {
namespace {

std::string format_g(double value, int precision) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*g", precision, value);
  return buffer;
}

std::filesystem::path make_work_dir(const std::filesystem::path& near) {
  auto base = near.parent_path().empty() ? std::filesystem::path(".") : near.parent_path();
  std::random_device rd;
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::uint64_t tag = (std::uint64_t(rd()) << 32) ^ rd();
    auto dir = base / ("shards-" + to_hex(std::string(reinterpret_cast<char*>(&tag), 8)));
    std::error_code ec;
    if (std::filesystem::create_directories(dir, ec) && !ec) return dir;
  }
  throw IoError(base.string(), "could not create a shard work directory");
}

}  // namespace

std::string config_hash(std::vector<std::pair<std::string, std::string>> entries) {
  std::sort(entries.begin(), entries.end());
  std::string canonical;
  for (const auto& [key, value] : entries) {
    canonical += key;
    canonical += '=';
    canonical += value;
    canonical += '\n';
  }
  std::uint64_t hash = fnv1a64(canonical);
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

std::vector<std::string> artifact_headers(
    const std::vector<std::pair<std::string, std::string>>& config) {
  std::vector<std::string> headers;
  headers.push_back("version " + std::string(kVersion));
  headers.push_back("config_hash " + config_hash(config));
  auto sorted = config;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& [key, value] : sorted) headers.push_back(key + "=" + value);
  return headers;
}

std::vector<AppRecord> extract_corpus_tree(const std::filesystem::path& root, unsigned jobs) {
  if (!std::filesystem::is_directory(root)) {
    throw IoError(root.string(), "corpus root is not a directory");
  }
  std::vector<std::filesystem::path> app_dirs;
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (entry.is_directory()) app_dirs.push_back(entry.path());
  }
  std::sort(app_dirs.begin(), app_dirs.end(),
            [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
  const OpcodeTable& table = load_opcode_table();
  std::vector<AppRecord> corpus(app_dirs.size());
  parallel_for(app_dirs.size(), jobs, [&](std::size_t i) {
    corpus[i] = parse_smali_tree(app_dirs[i], app_dirs[i].filename().string(), table);
  });
  for (std::size_t i = 1; i < corpus.size(); ++i) {
    if (corpus[i - 1].app_id == corpus[i].app_id) throw DuplicateAppIdError(corpus[i].app_id);
  }
  return corpus;
}

CorpusStats corpus_stats(const std::vector<AppRecord>& corpus, const std::vector<int>& ns,
                         std::size_t mem_budget) {
  CorpusStats stats;
  stats.apps = corpus.size();
  for (const auto& app : corpus) {
    stats.methods += app.methods.size();
    for (const auto& method : app.methods) stats.opcodes += method.opcodes.size();
  }
  std::vector<int> sorted_ns = ns;
  std::sort(sorted_ns.begin(), sorted_ns.end());
  sorted_ns.erase(std::unique(sorted_ns.begin(), sorted_ns.end()), sorted_ns.end());
  for (int n : sorted_ns) {
    if (n < 1) throw InputError("n must be >= 1");
    NgramStat stat;
    stat.n = n;
    VocabBuildOptions options;
    options.mem_budget = mem_budget;
    VocabularyBuilder builder(n, options);
    for (const auto& app : corpus) {
      GramCounts counts = app_gram_counts(app, n);
      stat.windows += total_multiplicity(counts);
      builder.add_app_counts(counts);
    }
    stat.unique_grams = builder.finish_stream([](const VocabEntry&) {});
    stats.per_n.push_back(stat);
  }
  return stats;
}

std::uint64_t build_vocab_file(const std::vector<AppRecord>& corpus, int n,
                               const std::filesystem::path& out, std::size_t mem_budget,
                               const std::vector<std::string>& headers) {
  VocabBuildOptions options;
  options.mem_budget = mem_budget;
  VocabularyBuilder builder(n, options);
  for (const auto& app : corpus) builder.add_app(app);
  return builder.finish_to_file(out, headers);
}

ShardedSelection sharded_select_to_file(
    const std::vector<AppRecord>& corpus,
    const std::unordered_map<std::string, std::string>& labels,
    const std::filesystem::path& vocab_file, FeatureMode mode, const Discretizer& discretizer,
    double threshold, std::size_t top_k, std::uint64_t shard_size,
    const std::filesystem::path& ranking_out, const std::vector<std::string>& headers) {
  ShardedSelection result;
  result.vocab_size = count_vocab_entries(vocab_file);
  if (shard_size == 0) shard_size = result.vocab_size == 0 ? 1 : result.vocab_size;
  result.shards = (result.vocab_size + shard_size - 1) / shard_size;

  if (result.vocab_size == 0) {
    external_merge_rankings({}, ranking_out, threshold, top_k, headers);
    return result;
  }

  // One sorted pass over the apps; their gram counts are computed once and
  // reused by every shard.
  std::vector<const AppRecord*> apps;
  apps.reserve(corpus.size());
  for (const auto& app : corpus) apps.push_back(&app);
  std::stable_sort(apps.begin(), apps.end(),
                   [](const AppRecord* a, const AppRecord* b) { return a->app_id < b->app_id; });

  int n = read_vocab_slice(vocab_file, 0, 1).vocab.n;
  std::vector<GramCounts> app_counts(apps.size());
  for (std::size_t i = 0; i < apps.size(); ++i) app_counts[i] = app_gram_counts(*apps[i], n);

  auto work_dir = make_work_dir(ranking_out);
  std::vector<std::filesystem::path> shard_files;
  try {
    for (std::uint64_t shard = 0; shard < result.shards; ++shard) {
      VocabSlice slice = read_vocab_slice(vocab_file, shard * shard_size, shard_size);

      LabeledDataset ds;
      ds.mode = mode;
      ds.n = slice.vocab.n;
      ds.feature_names.reserve(slice.vocab.size());
      for (const auto& entry : slice.vocab.entries) {
        ds.feature_names.push_back(gram_hex(entry.gram));
      }
      std::set<std::string> label_set;
      for (std::size_t i = 0; i < apps.size(); ++i) {
        auto it = labels.find(apps[i]->app_id);
        if (it == labels.end()) throw InputError("no label for app '" + apps[i]->app_id + "'");
        DatasetRow row;
        row.app_id = apps[i]->app_id;
        row.features = featurize_counts(app_counts[i], slice.vocab, mode);
        ds.rows.push_back(std::move(row));
        ds.row_labels.push_back(it->second);
        label_set.insert(it->second);
      }
      ds.label_set.assign(label_set.begin(), label_set.end());

      RankedFeatures ranked =
          rank_shard(ds, discretizer, 0, static_cast<std::uint32_t>(ds.vocab_size()),
                     static_cast<std::uint32_t>(slice.first_global_index));
      auto shard_path = work_dir / ("rank_" + std::to_string(shard) + ".tsv");
      write_shard_ranking(ranked, shard_path);
      shard_files.push_back(shard_path);
    }
    result.selected = external_merge_rankings(shard_files, ranking_out, threshold, top_k, headers);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove_all(work_dir, ec);
    throw;
  }
  std::error_code ec;
  std::filesystem::remove_all(work_dir, ec);
  return result;
}

void write_selection_report(const LabeledDataset& ds, const RankedFeatures& ranked,
                            const std::filesystem::path& path, std::size_t limit,
                            const std::vector<std::string>& headers) {
  auto table = top_table(ds, ranked, limit);
  std::ostringstream out;
  for (const auto& header : headers) out << "# " << header << '\n';
  out << "# rank\tgram\tig";
  for (const auto& label : ds.label_set) out << "\tapps:" << label;
  out << "\texclusive\n";
  for (const auto& row : table) {
    out << row.rank << '\t' << row.gram_hex << '\t' << format_g(row.ig, 12);
    for (std::uint64_t freq : row.class_doc_freq) out << '\t' << freq;
    out << '\t' << row.exclusive << '\n';
  }
  atomic_write_file(path, out.str());
}

std::string evaluation_report_json(
    const CVResult& result, const std::vector<std::pair<std::string, std::string>>& config) {
  nlohmann::json root;
  root["version"] = std::string(kVersion);
  root["config_hash"] = config_hash(config);

  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [key, value] : config) cfg[key] = value;
  root["config"] = cfg;

  root["k"] = result.k;
  root["seed"] = result.seed;
  root["labels"] = result.confusion.labels;
  root["confusion"] = result.confusion.counts;  // [actual][predicted]

  auto metrics_json = [](const Metrics& metrics) {
    nlohmann::json m;
    m["accuracy"] = metrics.accuracy;
    m["weighted_precision"] = metrics.weighted_precision;
    m["weighted_recall"] = metrics.weighted_recall;
    m["weighted_f1"] = metrics.weighted_f1;
    nlohmann::json per_class = nlohmann::json::array();
    for (const auto& c : metrics.per_class) {
      nlohmann::json row;
      row["label"] = c.label;
      row["support"] = c.support;
      row["tp"] = c.tp;
      row["fp"] = c.fp;
      row["fn"] = c.fn;
      row["precision"] = c.precision;
      row["recall"] = c.recall;
      row["f1"] = c.f1;
      row["precision_undefined"] = c.precision_undefined;
      row["recall_undefined"] = c.recall_undefined;
      per_class.push_back(row);
    }
    m["per_class"] = per_class;
    return m;
  };
  root["metrics"] = metrics_json(result.metrics);

  nlohmann::json folds = nlohmann::json::array();
  nlohmann::json fold_seconds = nlohmann::json::array();
  for (std::size_t f = 0; f < result.folds.size(); ++f) {
    const FoldResult& fr = result.folds[f];
    nlohmann::json row;
    row["fold"] = f;
    row["selected_features"] = fr.selected_features;
    row["confusion"] = fr.confusion.counts;
    row["metrics"] = metrics_json(fr.metrics);
    folds.push_back(row);
    fold_seconds.push_back(fr.seconds);
  }
  root["folds"] = folds;

  // The only wall-clock-dependent values, under one key, so consumers can
  // drop it and compare reports exactly.
  root["timing"] = {{"total_seconds", result.total_seconds}, {"fold_seconds", fold_seconds}};

  return root.dump(2) + "\n";
}

BenchReport run_bench(const std::vector<AppRecord>& corpus,
                      const std::unordered_map<std::string, std::string>& labels,
                      const std::vector<int>& ns, FeatureMode mode,
                      const Discretizer& discretizer, double threshold, std::size_t top_k,
                      const std::vector<ClassifierSpec>& specs, unsigned k_folds,
                      std::uint64_t seed) {
  BenchReport report;
  report.machine = std::to_string(std::thread::hardware_concurrency()) + " hardware threads, " +
                   std::to_string(sizeof(void*) * 8) + "-bit";

  std::vector<int> sorted_ns = ns;
  std::sort(sorted_ns.begin(), sorted_ns.end());
  sorted_ns.erase(std::unique(sorted_ns.begin(), sorted_ns.end()), sorted_ns.end());

  for (int n : sorted_ns) {
    auto n_started = std::chrono::steady_clock::now();
    Vocabulary vocab = build_vocabulary(corpus, n);
    LabeledDataset full = featurize_corpus(corpus, vocab, mode, labels);
    RankedFeatures kept = select(rank_all(full, discretizer), threshold, top_k);
    LabeledDataset ds = project(full, selected_indices(kept));
    double shared_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - n_started).count();

    for (const ClassifierSpec& spec : specs) {
      auto started = std::chrono::steady_clock::now();
      CVResult cv = cross_validate(ds, spec, k_folds, seed);
      double cv_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      BenchRow row;
      row.n = n;
      row.vocab_size = vocab.size();
      row.selected = ds.vocab_size();
      row.classifier = std::string(classifier_name(spec.kind));
      row.seconds = shared_seconds + cv_seconds;
      row.weighted_f1 = cv.metrics.weighted_f1;
      report.rows.push_back(row);
    }
  }
  return report;
}

std::string bench_table_text(const BenchReport& report) {
  std::ostringstream out;
  out << "# machine: " << report.machine << '\n';
  out << "# n\tvocab\tselected\tclassifier\tseconds\tweighted_f1\n";
  for (const auto& row : report.rows) {
    out << row.n << '\t' << row.vocab_size << '\t' << row.selected << '\t' << row.classifier
        << '\t' << format_g(row.seconds, 6) << '\t' << format_g(row.weighted_f1, 6) << '\n';
  }
  return out.str();
}

}  // namespace nopcode
