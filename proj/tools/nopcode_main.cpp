// nopcode: n-opcode feature pipeline for Dalvik disassembly.
//
// Subcommands cover the pipeline stages: extract smali sources to an opcode
// sequence file, inspect corpus stats, build a vocabulary, featurize into a
// dataset, select features by information gain, export, and evaluate
// classifiers with cross-validation.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nopcode/dataset_io.hpp"
#include "nopcode/errors.hpp"
#include "nopcode/opseq_io.hpp"
#include "nopcode/pipeline.hpp"
#include "nopcode/synth.hpp"
#include "nopcode/util.hpp"

namespace {

using namespace nopcode;

std::string format_g17(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

// "3", "1..4", and comma lists of those; values must stay within 1..10.
std::vector<int> parse_n_list(const std::string& text) {
  std::vector<int> ns;
  auto parse_int = [&text](const std::string& piece) {
    try {
      std::size_t used = 0;
      int value = std::stoi(piece, &used);
      if (used != piece.size()) throw std::invalid_argument("trailing characters");
      return value;
    } catch (const std::exception&) {
      throw InputError("bad n value '" + piece + "' in '" + text + "'");
    }
  };
  for (const auto& piece : split(text, ',')) {
    auto dots = piece.find("..");
    if (dots == std::string::npos) {
      ns.push_back(parse_int(piece));
    } else {
      int lo = parse_int(piece.substr(0, dots));
      int hi = parse_int(piece.substr(dots + 2));
      if (lo > hi) throw InputError("empty n range '" + piece + "'");
      for (int n = lo; n <= hi; ++n) ns.push_back(n);
    }
  }
  if (ns.empty()) throw InputError("no n values in '" + text + "'");
  for (int n : ns) {
    if (n < 1 || n > 10) throw InputError("n must be within 1..10, got " + std::to_string(n));
  }
  return ns;
}

int parse_single_n(const std::string& text) {
  auto ns = parse_n_list(text);
  if (ns.size() != 1) throw InputError("expected a single n, got '" + text + "'");
  return ns.front();
}

std::vector<AppRecord> read_corpus(const std::string& path) {
  return read_opseq_file(path, load_opcode_table());
}

Discretizer make_discretizer(unsigned bins) {
  return bins == 0 ? Discretizer::presence() : Discretizer::equal_width(bins);
}

struct ExtractArgs {
  std::string in, out, labels;
  unsigned jobs = 1;
};

struct StatsArgs {
  std::string in, n_text = "1..5";
  std::size_t mem_budget = 1'000'000;
};

struct VocabArgs {
  std::string in, out, n_text = "3";
  std::size_t mem_budget = 1'000'000;
};

struct FeaturizeArgs {
  std::string in, vocab, labels, out, mode = "binary", n_text;
  unsigned jobs = 1;
};

struct SelectArgs {
  std::string in, out, apply;
  std::string corpus, vocab, labels, mode = "binary";
  double threshold = 0.1;
  std::size_t top_k = 0;
  unsigned bins = 0;
  std::uint64_t shard_size = 500'000;
  std::size_t report_limit = 0;
};

struct ExportArgs {
  std::string in, out, format = "arff", relation = "nopcode";
};

struct EvaluateArgs {
  std::string in, out, classifier = "nb";
  unsigned k_folds = 10;
  std::uint64_t seed = 0;
  double threshold = 0.1;
  std::size_t top_k = 0;
  unsigned bins = 0;
  bool paper_protocol = false;
  bool no_select = false;
  std::string nb_variant = "auto";
  double nb_alpha = 1.0;
  double svm_lambda = 1e-4;
  unsigned svm_epochs = 10;
  unsigned rf_trees = 100;
  unsigned rf_max_depth = 0;
  bool rf_no_bootstrap = false;
};

struct BenchArgs {
  std::string in, labels, out, mode = "binary", n_text = "1..3", classifiers = "nb,svm,rf";
  double threshold = 0.1;
  std::size_t top_k = 0;
  unsigned bins = 0;
  unsigned k_folds = 10;
  std::uint64_t seed = 0;
};

struct SynthArgs {
  std::string smali_out, opseq_out, labels_out, classes = "malware,benign";
  unsigned apps_per_class = 100;
  unsigned methods_per_app = 20;
  unsigned method_len = 50;
  unsigned motif_len = 3;
  std::uint64_t seed = 0;
};

ClassifierSpec make_spec(const EvaluateArgs& args) {
  ClassifierSpec spec;
  spec.kind = classifier_from_name(args.classifier);
  spec.seed = args.seed;
  if (args.nb_variant == "auto") {
    spec.nb_variant = NBVariant::automatic;
  } else if (args.nb_variant == "bernoulli") {
    spec.nb_variant = NBVariant::bernoulli;
  } else if (args.nb_variant == "multinomial") {
    spec.nb_variant = NBVariant::multinomial;
  } else {
    throw InputError("unknown nb variant '" + args.nb_variant + "'");
  }
  spec.nb_alpha = args.nb_alpha;
  spec.svm_lambda = args.svm_lambda;
  spec.svm_epochs = args.svm_epochs;
  spec.rf_trees = args.rf_trees;
  spec.rf_max_depth = args.rf_max_depth;
  spec.rf_bootstrap = !args.rf_no_bootstrap;
  return spec;
}

void run_extract(const ExtractArgs& args) {
  auto corpus = extract_corpus_tree(args.in, args.jobs);
  if (!args.labels.empty()) {
    auto labels = read_labels_csv(args.labels);
    for (auto& app : corpus) {
      auto it = labels.find(app.app_id);
      if (it != labels.end()) app.label = it->second;
    }
  }
  std::vector<std::pair<std::string, std::string>> config = {{"command", "extract"},
                                                             {"input", args.in}};
  write_opseq_file(corpus, args.out, artifact_headers(config));
  std::uint64_t methods = 0;
  for (const auto& app : corpus) methods += app.methods.size();
  std::cout << "apps\t" << corpus.size() << "\nmethods\t" << methods << '\n';
}

void run_stats(const StatsArgs& args) {
  auto corpus = read_corpus(args.in);
  CorpusStats stats = corpus_stats(corpus, parse_n_list(args.n_text), args.mem_budget);
  std::cout << "apps\t" << stats.apps << '\n';
  std::cout << "methods\t" << stats.methods << '\n';
  std::cout << "opcodes\t" << stats.opcodes << '\n';
  std::cout << "n\twindows\tunique_grams\n";
  for (const auto& stat : stats.per_n) {
    std::cout << stat.n << '\t' << stat.windows << '\t' << stat.unique_grams << '\n';
  }
}

void run_vocab(const VocabArgs& args) {
  auto corpus = read_corpus(args.in);
  int n = parse_single_n(args.n_text);
  std::vector<std::pair<std::string, std::string>> config = {
      {"command", "vocab"},
      {"input", args.in},
      {"n", std::to_string(n)},
      {"mem_budget", std::to_string(args.mem_budget)}};
  std::uint64_t unique =
      build_vocab_file(corpus, n, args.out, args.mem_budget, artifact_headers(config));
  std::cout << "unique_grams\t" << unique << '\n';
}

void run_featurize(const FeaturizeArgs& args) {
  auto corpus = read_corpus(args.in);
  Vocabulary vocab = read_vocab_file(args.vocab);
  if (!args.n_text.empty() && parse_single_n(args.n_text) != vocab.n) {
    throw InputError("--n disagrees with the vocabulary's gram length " +
                     std::to_string(vocab.n));
  }
  auto labels = read_labels_csv(args.labels);
  FeatureMode mode = mode_from_name(args.mode);
  LabeledDataset ds = featurize_corpus(corpus, vocab, mode, labels, args.jobs);
  std::vector<std::pair<std::string, std::string>> config = {
      {"command", "featurize"},
      {"input", args.in},
      {"vocab", args.vocab},
      {"mode", std::string(mode_name(mode))},
      {"n", std::to_string(vocab.n)}};
  save_dataset(ds, args.out, artifact_headers(config), &vocab);
  std::cout << "rows\t" << ds.rows.size() << "\nfeatures\t" << ds.vocab_size() << '\n';
}

void run_select(const SelectArgs& args) {
  bool sharded = !args.corpus.empty();
  Discretizer discretizer = make_discretizer(args.bins);
  if (sharded) {
    if (args.vocab.empty() || args.labels.empty()) {
      throw InputError("sharded select needs --corpus, --vocab, and --labels");
    }
    auto corpus = read_corpus(args.corpus);
    auto labels = read_labels_csv(args.labels);
    FeatureMode mode = mode_from_name(args.mode);
    std::vector<std::pair<std::string, std::string>> config = {
        {"command", "select"},
        {"input", args.corpus},
        {"vocab", args.vocab},
        {"mode", std::string(mode_name(mode))},
        {"ig_threshold", format_g17(args.threshold)},
        {"top_k", std::to_string(args.top_k)},
        {"shard_size", std::to_string(args.shard_size)}};
    ShardedSelection result = sharded_select_to_file(
        corpus, labels, args.vocab, mode, discretizer, args.threshold, args.top_k,
        args.shard_size, args.out, artifact_headers(config));
    std::cout << "vocab\t" << result.vocab_size << "\nshards\t" << result.shards << "\nselected\t"
              << result.selected << '\n';
    return;
  }
  LabeledDataset ds = load_dataset(args.in);
  RankedFeatures ranked = rank_all(ds, discretizer);
  RankedFeatures kept = select(ranked, args.threshold, args.top_k);
  std::vector<std::pair<std::string, std::string>> config = {
      {"command", "select"},
      {"input", args.in},
      {"mode", std::string(mode_name(ds.mode))},
      {"n", std::to_string(ds.n)},
      {"ig_threshold", format_g17(args.threshold)},
      {"top_k", std::to_string(args.top_k)}};
  write_selection_report(ds, kept, args.out, args.report_limit, artifact_headers(config));
  if (!args.apply.empty()) {
    LabeledDataset projected = project(ds, selected_indices(kept));
    save_dataset(projected, args.apply, artifact_headers(config));
  }
  std::cout << "features\t" << ds.vocab_size() << "\nselected\t" << kept.scores.size() << '\n';
}

void run_export(const ExportArgs& args) {
  LabeledDataset ds = load_dataset(args.in);
  if (args.format == "arff") {
    export_arff(ds, args.out, args.relation);
  } else if (args.format == "csv") {
    export_csv(ds, args.out);
  } else {
    throw InputError("unknown export format '" + args.format + "' (expected arff or csv)");
  }
  std::cout << "rows\t" << ds.rows.size() << '\n';
}

void run_evaluate(const EvaluateArgs& args) {
  LabeledDataset ds = load_dataset(args.in);
  ClassifierSpec spec = make_spec(args);
  Discretizer discretizer = make_discretizer(args.bins);

  std::vector<std::pair<std::string, std::string>> config = {
      {"command", "evaluate"},
      {"input", args.in},
      {"classifier", args.classifier},
      {"mode", std::string(mode_name(ds.mode))},
      {"n", std::to_string(ds.n)},
      {"k_folds", std::to_string(args.k_folds)},
      {"seed", std::to_string(args.seed)},
      {"ig_threshold", format_g17(args.threshold)},
      {"top_k", std::to_string(args.top_k)},
      {"bins", std::to_string(args.bins)},
      {"protocol", args.no_select ? "none" : (args.paper_protocol ? "whole-dataset" : "in-fold")},
      {"nb_alpha", format_g17(args.nb_alpha)},
      {"nb_variant", args.nb_variant},
      {"svm_lambda", format_g17(args.svm_lambda)},
      {"svm_epochs", std::to_string(args.svm_epochs)},
      {"rf_trees", std::to_string(args.rf_trees)},
      {"rf_max_depth", std::to_string(args.rf_max_depth)},
      {"rf_bootstrap", args.rf_no_bootstrap ? "false" : "true"}};

  CVResult result;
  if (args.no_select) {
    result = cross_validate(ds, spec, args.k_folds, args.seed);
  } else if (args.paper_protocol) {
    // Selection over the full dataset before splitting, as in the original
    // protocol. The default applies selection inside each training fold.
    RankedFeatures kept = select(rank_all(ds, discretizer), args.threshold, args.top_k);
    LabeledDataset projected = project(ds, selected_indices(kept));
    result = cross_validate(projected, spec, args.k_folds, args.seed);
  } else {
    SelectionRule rule;
    rule.enabled = true;
    rule.discretizer = discretizer;
    rule.threshold = args.threshold;
    rule.top_k = args.top_k;
    result = cross_validate(ds, spec, args.k_folds, args.seed, rule);
  }

  std::string report = evaluation_report_json(result, config);
  if (args.out.empty()) {
    std::cout << report;
  } else {
    atomic_write_file(args.out, report);
    std::cout << "weighted_f1\t" << format_g17(result.metrics.weighted_f1) << '\n';
  }
}

void run_bench(const BenchArgs& args) {
  auto corpus = read_corpus(args.in);
  auto labels = read_labels_csv(args.labels);
  FeatureMode mode = mode_from_name(args.mode);
  std::vector<ClassifierSpec> specs;
  for (const auto& name : split(args.classifiers, ',')) {
    ClassifierSpec spec;
    spec.kind = classifier_from_name(name);
    spec.seed = args.seed;
    specs.push_back(spec);
  }
  if (specs.empty()) throw InputError("no classifiers given");
  BenchReport report = nopcode::run_bench(corpus, labels, parse_n_list(args.n_text), mode,
                                          make_discretizer(args.bins), args.threshold,
                                          args.top_k, specs, args.k_folds, args.seed);
  std::string text = bench_table_text(report);
  if (args.out.empty()) {
    std::cout << text;
  } else {
    atomic_write_file(args.out, text);
    std::cout << "rows\t" << report.rows.size() << '\n';
  }
}

void run_synth(const SynthArgs& args) {
  if (args.smali_out.empty() && args.opseq_out.empty()) {
    throw InputError("synth needs --smali-out and/or --opseq-out");
  }
  SynthSpec spec;
  spec.class_names = split(args.classes, ',');
  spec.apps_per_class = args.apps_per_class;
  spec.methods_per_app = args.methods_per_app;
  spec.method_len = args.method_len;
  spec.motif_len = args.motif_len;
  spec.seed = args.seed;
  SynthCorpus corpus = make_synth_corpus(spec);
  if (!args.smali_out.empty()) write_synth_smali_tree(corpus, args.smali_out);
  if (!args.opseq_out.empty()) {
    std::vector<std::pair<std::string, std::string>> config = {
        {"command", "synth"},
        {"classes", args.classes},
        {"apps_per_class", std::to_string(args.apps_per_class)},
        {"methods_per_app", std::to_string(args.methods_per_app)},
        {"method_len", std::to_string(args.method_len)},
        {"motif_len", std::to_string(args.motif_len)},
        {"seed", std::to_string(args.seed)}};
    write_opseq_file(corpus.apps, args.opseq_out, artifact_headers(config));
  }
  if (!args.labels_out.empty()) write_labels_csv(corpus.labels, args.labels_out);
  std::cout << "apps\t" << corpus.apps.size() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"n-opcode feature extraction, selection, and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "Read options from an INI/TOML file (flags override it)");

  ExtractArgs extract_args;
  auto* extract = app.add_subcommand("extract", "Parse smali trees into an opcode sequence file");
  extract->add_option("--in", extract_args.in, "Corpus root: one subdirectory per app")
      ->required();
  extract->add_option("--out", extract_args.out, "Output opcode sequence file")->required();
  extract->add_option("--labels", extract_args.labels, "labels.csv to attach to the output");
  extract->add_option("--jobs", extract_args.jobs, "Parallel parse jobs (0 = all cores)");
  extract->callback([&] { run_extract(extract_args); });

  StatsArgs stats_args;
  auto* stats = app.add_subcommand("stats", "Window and unique-gram counts per n");
  stats->add_option("--in", stats_args.in, "Opcode sequence file")->required();
  stats->add_option("--n", stats_args.n_text, "n values: '3', '1..5', or comma list");
  stats->add_option("--mem-budget", stats_args.mem_budget, "Max in-memory vocabulary entries");
  stats->callback([&] { run_stats(stats_args); });

  VocabArgs vocab_args;
  auto* vocab = app.add_subcommand("vocab", "Build the n-gram vocabulary for a corpus");
  vocab->add_option("--in", vocab_args.in, "Opcode sequence file")->required();
  vocab->add_option("--out", vocab_args.out, "Output vocab.tsv")->required();
  vocab->add_option("--n", vocab_args.n_text, "Window length");
  vocab->add_option("--mem-budget", vocab_args.mem_budget, "Max in-memory vocabulary entries");
  vocab->callback([&] { run_vocab(vocab_args); });

  FeaturizeArgs featurize_args;
  auto* featurize = app.add_subcommand("featurize", "Build a labeled dataset from a corpus");
  featurize->add_option("--in", featurize_args.in, "Opcode sequence file")->required();
  featurize->add_option("--vocab", featurize_args.vocab, "vocab.tsv from the vocab stage")
      ->required();
  featurize->add_option("--labels", featurize_args.labels, "labels.csv")->required();
  featurize->add_option("--out", featurize_args.out, "Output dataset directory")->required();
  featurize->add_option("--mode", featurize_args.mode, "binary or frequency");
  featurize->add_option("--n", featurize_args.n_text, "Cross-check against the vocabulary");
  featurize->add_option("--jobs", featurize_args.jobs, "Parallel featurize jobs (0 = all cores)");
  featurize->callback([&] { run_featurize(featurize_args); });

  SelectArgs select_args;
  auto* sel = app.add_subcommand("select", "Rank features by information gain and select");
  sel->add_option("--in", select_args.in, "Dataset directory (in-memory selection)");
  sel->add_option("--out", select_args.out, "Output ranking TSV")->required();
  sel->add_option("--apply", select_args.apply, "Write the projected dataset here");
  sel->add_option("--corpus", select_args.corpus,
                  "Opcode sequence file (memory-bounded sharded selection)");
  sel->add_option("--vocab", select_args.vocab, "vocab.tsv (sharded selection)");
  sel->add_option("--labels", select_args.labels, "labels.csv (sharded selection)");
  sel->add_option("--mode", select_args.mode, "binary or frequency (sharded selection)");
  sel->add_option("--ig-threshold", select_args.threshold, "Keep features with ig > threshold");
  sel->add_option("--top-k", select_args.top_k, "Keep at most k features (0 = all)");
  sel->add_option("--bins", select_args.bins,
                  "Equal-width bins for frequency values (0 = presence/absence)");
  sel->add_option("--shard-size", select_args.shard_size, "Vocabulary slice size per shard");
  sel->add_option("--report-limit", select_args.report_limit,
                  "Max rows in the ranking report (0 = all)");
  sel->callback([&] {
    if (select_args.in.empty() == select_args.corpus.empty()) {
      throw InputError("select needs exactly one of --in or --corpus");
    }
    run_select(select_args);
  });

  ExportArgs export_args;
  auto* exp = app.add_subcommand("export", "Export a dataset as sparse ARFF or dense CSV");
  exp->add_option("--in", export_args.in, "Dataset directory")->required();
  exp->add_option("--out", export_args.out, "Output file")->required();
  exp->add_option("--format", export_args.format, "arff or csv");
  exp->add_option("--relation", export_args.relation, "ARFF relation name");
  exp->callback([&] { run_export(export_args); });

  EvaluateArgs evaluate_args;
  auto* evaluate = app.add_subcommand("evaluate", "Cross-validate a classifier on a dataset");
  evaluate->add_option("--in", evaluate_args.in, "Dataset directory")->required();
  evaluate->add_option("--out", evaluate_args.out, "Report JSON path (default: stdout)");
  evaluate->add_option("--classifier", evaluate_args.classifier, "nb, svm, or rf");
  evaluate->add_option("--k-folds", evaluate_args.k_folds, "Stratified fold count");
  evaluate->add_option("--seed", evaluate_args.seed, "Base RNG seed");
  evaluate->add_option("--ig-threshold", evaluate_args.threshold, "Selection threshold");
  evaluate->add_option("--top-k", evaluate_args.top_k, "Selection cap (0 = all)");
  evaluate->add_option("--bins", evaluate_args.bins,
                       "Equal-width bins for frequency values (0 = presence/absence)");
  evaluate->add_flag("--paper-protocol", evaluate_args.paper_protocol,
                     "Select on the whole dataset before splitting (leaks test data)");
  evaluate->add_flag("--no-select", evaluate_args.no_select, "Skip feature selection");
  evaluate->add_option("--nb-variant", evaluate_args.nb_variant, "auto, bernoulli, multinomial");
  evaluate->add_option("--nb-alpha", evaluate_args.nb_alpha, "Laplace smoothing");
  evaluate->add_option("--svm-lambda", evaluate_args.svm_lambda, "SVM regularization");
  evaluate->add_option("--svm-epochs", evaluate_args.svm_epochs, "SVM training epochs");
  evaluate->add_option("--rf-trees", evaluate_args.rf_trees, "Forest size");
  evaluate->add_option("--rf-max-depth", evaluate_args.rf_max_depth, "Tree depth cap (0 = none)");
  evaluate->add_flag("--rf-no-bootstrap", evaluate_args.rf_no_bootstrap,
                     "Train every tree on the full sample");
  evaluate->callback([&] { run_evaluate(evaluate_args); });

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Time the pipeline across n and classifiers");
  bench->add_option("--in", bench_args.in, "Opcode sequence file")->required();
  bench->add_option("--labels", bench_args.labels, "labels.csv")->required();
  bench->add_option("--out", bench_args.out, "Output table (default: stdout)");
  bench->add_option("--n", bench_args.n_text, "n values");
  bench->add_option("--mode", bench_args.mode, "binary or frequency");
  bench->add_option("--classifiers", bench_args.classifiers, "Comma list of nb, svm, rf");
  bench->add_option("--ig-threshold", bench_args.threshold, "Selection threshold");
  bench->add_option("--top-k", bench_args.top_k, "Selection cap (0 = all)");
  bench->add_option("--bins", bench_args.bins, "Equal-width bins (0 = presence)");
  bench->add_option("--k-folds", bench_args.k_folds, "Stratified fold count");
  bench->add_option("--seed", bench_args.seed, "Base RNG seed");
  bench->callback([&] { run_bench(bench_args); });

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic motif corpus");
  synth->group("");  // internal: used by the test suite
  synth->add_option("--smali-out", synth_args.smali_out, "Write a smali tree here");
  synth->add_option("--opseq-out", synth_args.opseq_out, "Write an opcode sequence file here");
  synth->add_option("--labels-out", synth_args.labels_out, "Write labels.csv here");
  synth->add_option("--classes", synth_args.classes, "Comma list of class names");
  synth->add_option("--apps-per-class", synth_args.apps_per_class, "Apps per class");
  synth->add_option("--methods-per-app", synth_args.methods_per_app, "Methods per app");
  synth->add_option("--method-len", synth_args.method_len, "Opcodes per method");
  synth->add_option("--motif-len", synth_args.motif_len, "Planted motif length");
  synth->add_option("--seed", synth_args.seed, "Generator seed");
  synth->callback([&] { run_synth(synth_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message
    return 2;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
