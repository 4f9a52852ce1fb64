#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "nopcode/smali.hpp"

namespace nopcode {

// Synthetic labeled corpus: every method of an app carries its class's motif
// (a fixed opcode sequence, distinct per class) at a random position inside
// uniform noise drawn from the full defined-opcode alphabet. Motif grams
// therefore separate the classes almost perfectly, which gives the pipeline
// a ground truth with known best features and a known achievable score.
struct SynthSpec {
  std::vector<std::string> class_names;  // distinct, non-empty
  unsigned apps_per_class = 100;
  unsigned methods_per_app = 20;
  unsigned method_len = 50;  // opcodes per method, >= motif_len
  unsigned motif_len = 3;
  std::uint64_t seed = 0;
};

struct SynthCorpus {
  std::vector<AppRecord> apps;  // sorted by app_id; label set on each record
  std::unordered_map<std::string, std::string> labels;
  std::vector<std::vector<std::uint8_t>> motifs;  // class_names order
};

SynthCorpus make_synth_corpus(const SynthSpec& spec);

// Materializes the corpus as <root>/<app_id>/<class>.smali sources, one
// method per class, so the smali front end can be driven end to end.
void write_synth_smali_tree(const SynthCorpus& corpus, const std::filesystem::path& root);

}  // namespace nopcode
