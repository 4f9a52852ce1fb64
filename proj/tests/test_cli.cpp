#include <sys/wait.h>

#include <cstdlib>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "nopcode/dataset_io.hpp"
#include "nopcode/opcodes.hpp"
#include "nopcode/opseq_io.hpp"
#include "nopcode/util.hpp"
#include "nopcode/vocab.hpp"
#include "test_helpers.hpp"

namespace {

// Runs the real binary; stdout and stderr land in `out_path`.
int run_cli(const std::string& args, const std::filesystem::path& out_path) {
  std::string command =
      shq(NOPCODE_CLI_PATH) + " " + args + " > " + shq(out_path.string()) + " 2>&1";
  int status = std::system(command.c_str());
  if (status == -1) return -1;
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return -2;
}

}  // namespace

TEST_CASE("cli end to end: synth, extract, vocab, featurize, select, evaluate") {
  TempDir dir;
  auto out = dir / "out.txt";
  auto smali_root = dir / "smali";
  auto opseq = (dir / "corpus.opseq").string();
  auto labels = (dir / "labels.csv").string();

  // --version exits 0 and prints the version.
  REQUIRE(run_cli("--version", out) == 0);
  CHECK(read_text_file(out).find("0.1.0") != std::string::npos);

  // Generate a small motif corpus in both smali and opseq form.
  REQUIRE(run_cli("synth --classes m,g --apps-per-class 6 --methods-per-app 3"
                  " --method-len 20 --motif-len 3 --seed 5"
                  " --smali-out " + shq(smali_root.string()) +
                  " --opseq-out " + shq(opseq) +
                  " --labels-out " + shq(labels), out) == 0);
  CHECK(read_text_file(out).find("apps\t12") != std::string::npos);

  // Extracting the smali tree reproduces the synth opseq records.
  auto extracted = (dir / "extracted.opseq").string();
  REQUIRE(run_cli("extract --in " + shq(smali_root.string()) + " --labels " + shq(labels) +
                  " --out " + shq(extracted) + " --jobs 2", out) == 0);
  const auto& table = nopcode::load_opcode_table();
  auto from_synth = nopcode::read_opseq_file(dir / "corpus.opseq", table);
  auto from_smali = nopcode::read_opseq_file(dir / "extracted.opseq", table);
  CHECK(from_synth == from_smali);

  // stats prints a per-n table.
  REQUIRE(run_cli("stats --in " + shq(opseq) + " --n 1..3", out) == 0);
  std::string stats_text = read_text_file(out);
  CHECK(stats_text.find("apps\t12") != std::string::npos);
  CHECK(stats_text.find("opcodes\t720") != std::string::npos);  // 12*3*20
  CHECK(stats_text.find("n\twindows\tunique_grams") != std::string::npos);

  // vocab at n = 3.
  auto vocab_path = (dir / "vocab.tsv").string();
  REQUIRE(run_cli("vocab --in " + shq(opseq) + " --out " + shq(vocab_path) + " --n 3",
                  out) == 0);
  nopcode::Vocabulary vocab = nopcode::read_vocab_file(vocab_path);
  CHECK(vocab.n == 3);
  CHECK(vocab.size() > 0);

  // featurize to a binary dataset.
  auto ds_dir = (dir / "dataset").string();
  REQUIRE(run_cli("featurize --in " + shq(opseq) + " --vocab " + shq(vocab_path) +
                  " --labels " + shq(labels) + " --out " + shq(ds_dir) +
                  " --mode binary", out) == 0);
  nopcode::LabeledDataset ds = nopcode::load_dataset(ds_dir);
  CHECK(ds.rows.size() == 12);
  CHECK(ds.vocab_size() == vocab.size());

  // A mismatched --n cross-check is an input error (exit 2).
  CHECK(run_cli("featurize --in " + shq(opseq) + " --vocab " + shq(vocab_path) +
                " --labels " + shq(labels) + " --out " + shq((dir / "ds2").string()) +
                " --n 2", out) == 2);

  // In-memory selection with a projected dataset.
  auto ranking = (dir / "ranking.tsv").string();
  auto selected_dir = (dir / "selected").string();
  REQUIRE(run_cli("select --in " + shq(ds_dir) + " --out " + shq(ranking) +
                  " --ig-threshold 0.2 --apply " + shq(selected_dir), out) == 0);
  nopcode::LabeledDataset selected = nopcode::load_dataset(selected_dir);
  CHECK(selected.vocab_size() > 0);
  CHECK(selected.vocab_size() < ds.vocab_size());
  CHECK(selected.rows.size() == 12);

  // Sharded selection from the raw corpus picks the same grams.
  auto ranking2 = (dir / "ranking2.tsv").string();
  REQUIRE(run_cli("select --corpus " + shq(opseq) + " --vocab " + shq(vocab_path) +
                  " --labels " + shq(labels) + " --out " + shq(ranking2) +
                  " --ig-threshold 0.2 --shard-size 32", out) == 0);
  auto grams_of = [](const std::string& text, std::size_t column) {
    std::vector<std::string> grams;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      auto fields = nopcode::split(line, '\t');
      grams.push_back(fields.at(column));
    }
    return grams;
  };
  auto in_memory = grams_of(read_text_file(ranking), 1);
  auto sharded = grams_of(read_text_file(ranking2), 1);
  CHECK(in_memory == sharded);

  // Exports from the selected dataset.
  auto arff = (dir / "ds.arff").string();
  REQUIRE(run_cli("export --in " + shq(selected_dir) + " --out " + shq(arff) +
                  " --format arff --relation demo", out) == 0);
  CHECK(read_text_file(arff).rfind("@relation demo", 0) == 0);
  auto csv = (dir / "ds.csv").string();
  REQUIRE(run_cli("export --in " + shq(selected_dir) + " --out " + shq(csv) +
                  " --format csv", out) == 0);
  nopcode::LabeledDataset reimported = nopcode::import_csv(csv);
  CHECK(reimported.rows == selected.rows);
  CHECK(reimported.feature_names == selected.feature_names);

  // evaluate twice: identical bytes after dropping the timing key.
  auto report1 = (dir / "report1.json").string();
  auto report2 = (dir / "report2.json").string();
  std::string eval_args = "evaluate --in " + shq(ds_dir) +
                          " --classifier nb --k-folds 3 --seed 1 --ig-threshold 0.2";
  REQUIRE(run_cli(eval_args + " --out " + shq(report1), out) == 0);
  CHECK(read_text_file(out).find("weighted_f1\t") != std::string::npos);
  REQUIRE(run_cli(eval_args + " --out " + shq(report2), out) == 0);
  auto strip_timing = [](const std::string& path) {
    nlohmann::json j = nlohmann::json::parse(read_text_file(path));
    j.erase("timing");
    return j.dump(2);
  };
  CHECK(strip_timing(report1) == strip_timing(report2));
  nlohmann::json report = nlohmann::json::parse(read_text_file(report1));
  CHECK(report["k"] == 3);
  CHECK(report["metrics"]["weighted_f1"].is_number());
  CHECK(report.contains("timing"));

  // evaluate to stdout works too.
  REQUIRE(run_cli("evaluate --in " + shq(ds_dir) + " --classifier svm --k-folds 3"
                  " --no-select", out) == 0);
  CHECK(nlohmann::json::parse(read_text_file(out))["config"]["classifier"] == "svm");

  // bench smoke test.
  REQUIRE(run_cli("bench --in " + shq(opseq) + " --labels " + shq(labels) +
                  " --n 1 --classifiers nb --k-folds 3", out) == 0);
  CHECK(read_text_file(out).find("# machine:") != std::string::npos);
}

TEST_CASE("cli error handling and exit codes") {
  TempDir dir;
  auto out = dir / "out.txt";

  // No subcommand, unknown flag, malformed value: parse errors exit 2.
  CHECK(run_cli("", out) == 2);
  CHECK(run_cli("vocab --bogus-flag 1", out) == 2);
  CHECK(run_cli("evaluate --in x --k-folds notanumber", out) == 2);

  // Missing input file: input error, exit 2 with a message.
  CHECK(run_cli("stats --in " + shq((dir / "absent.opseq").string()), out) == 2);
  CHECK(read_text_file(out).find("error:") != std::string::npos);

  // select requires exactly one of --in / --corpus.
  CHECK(run_cli("select --out " + shq((dir / "r.tsv").string()), out) == 2);

  // synth without any output is an input error.
  CHECK(run_cli("synth --classes a,b", out) == 2);

  // help exits 0.
  CHECK(run_cli("--help", out) == 0);
  CHECK(run_cli("evaluate --help", out) == 0);
}
