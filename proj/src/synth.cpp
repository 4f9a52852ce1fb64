#include "nopcode/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "nopcode/errors.hpp"
#include "nopcode/opcodes.hpp"
#include "nopcode/util.hpp"

namespace nopcode {
namespace {

std::string pad4(unsigned value) {
  char buffer[16];
  std::snprintf(buffer, sizeof buffer, "%04u", value);
  return buffer;
}

}  // namespace

SynthCorpus make_synth_corpus(const SynthSpec& spec) {
  if (spec.class_names.size() < 2) throw InputError("synthetic corpus needs at least 2 classes");
  {
    std::set<std::string> distinct(spec.class_names.begin(), spec.class_names.end());
    if (distinct.size() != spec.class_names.size()) {
      throw InputError("synthetic class names must be distinct");
    }
    for (const auto& name : spec.class_names) {
      if (name.empty()) throw InputError("synthetic class names must be non-empty");
    }
  }
  if (spec.apps_per_class == 0 || spec.methods_per_app == 0) {
    throw InputError("synthetic corpus needs apps and methods");
  }
  if (spec.motif_len == 0 || spec.method_len < spec.motif_len) {
    throw InputError("method_len must be at least motif_len");
  }

  const OpcodeTable& table = load_opcode_table();
  const std::vector<std::uint8_t>& alphabet = table.defined_bytes();
  Rng rng(mix64(spec.seed, 0));

  SynthCorpus corpus;
  corpus.motifs.reserve(spec.class_names.size());
  std::set<std::vector<std::uint8_t>> taken;
  for (std::size_t c = 0; c < spec.class_names.size(); ++c) {
    std::vector<std::uint8_t> motif(spec.motif_len);
    do {
      for (auto& op : motif) op = alphabet[rng.below(alphabet.size())];
    } while (!taken.insert(motif).second);
    corpus.motifs.push_back(std::move(motif));
  }

  for (std::size_t c = 0; c < spec.class_names.size(); ++c) {
    const auto& label = spec.class_names[c];
    const auto& motif = corpus.motifs[c];
    for (unsigned a = 0; a < spec.apps_per_class; ++a) {
      AppRecord app;
      app.app_id = label + "_" + pad4(a);
      app.label = label;
      app.methods.reserve(spec.methods_per_app);
      for (unsigned m = 0; m < spec.methods_per_app; ++m) {
        OpcodeSeq method;
        method.class_name = "Lsynth/" + app.app_id + "/C" + pad4(m) + ";";
        method.method_sig = "run()V";
        method.opcodes.resize(spec.method_len);
        for (auto& op : method.opcodes) op = alphabet[rng.below(alphabet.size())];
        std::uint64_t at = rng.below(spec.method_len - spec.motif_len + 1);
        std::copy(motif.begin(), motif.end(), method.opcodes.begin() + long(at));
        app.methods.push_back(std::move(method));
      }
      corpus.labels.emplace(app.app_id, label);
      corpus.apps.push_back(std::move(app));
    }
  }
  std::sort(corpus.apps.begin(), corpus.apps.end(),
            [](const AppRecord& x, const AppRecord& y) { return x.app_id < y.app_id; });
  for (const auto& app : corpus.apps) validate_app_record(app, table);
  return corpus;
}

void write_synth_smali_tree(const SynthCorpus& corpus, const std::filesystem::path& root) {
  const OpcodeTable& table = load_opcode_table();
  for (const auto& app : corpus.apps) {
    auto dir = root / app.app_id;
    std::filesystem::create_directories(dir);
    for (const auto& method : app.methods) {
      // method.class_name is "L<path>;"; the file takes the last segment.
      std::string inner = method.class_name.substr(1, method.class_name.size() - 2);
      auto slash = inner.rfind('/');
      std::string base = slash == std::string::npos ? inner : inner.substr(slash + 1);

      std::ostringstream out;
      out << ".class public " << method.class_name << '\n';
      out << ".super Ljava/lang/Object;\n\n";
      out << ".method public " << method.method_sig << '\n';
      out << "    .registers 4\n";
      for (std::uint8_t op : method.opcodes) {
        auto mnemonic = table.mnemonic(op);
        if (!mnemonic) throw Error("synthetic corpus produced an undefined opcode");
        out << "    " << *mnemonic << '\n';
      }
      out << ".end method\n";
      atomic_write_file(dir / (base + ".smali"), out.str());
    }
  }
}

}  // namespace nopcode
