#include "nopcode/ngram.hpp"

#include <stdexcept>

#include "doctest.h"
#include "nopcode/util.hpp"

using namespace nopcode;

namespace {

OpcodeSeq seq_of(std::vector<std::uint8_t> opcodes) {
  OpcodeSeq seq;
  seq.class_name = "La;";
  seq.method_sig = "m()V";
  seq.opcodes = std::move(opcodes);
  return seq;
}

}  // namespace

TEST_CASE("a 7-instruction method yields 6 2-grams, 5 3-grams, 4 4-grams") {
  OpcodeSeq method = seq_of({0x08, 0x54, 0x6e, 0x0a, 0x39, 0x54, 0x0e});
  CHECK(total_multiplicity(extract_ngrams(method, 2)) == 6);
  CHECK(total_multiplicity(extract_ngrams(method, 3)) == 5);
  CHECK(total_multiplicity(extract_ngrams(method, 4)) == 4);
  CHECK(total_multiplicity(extract_ngrams(method, 7)) == 1);
  CHECK(total_multiplicity(extract_ngrams(method, 8)) == 0);
}

TEST_CASE("window totals equal max(0, m - n + 1)") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto m = static_cast<std::size_t>(rng.below(60));
    std::vector<std::uint8_t> ops(m);
    for (auto& op : ops) op = static_cast<std::uint8_t>(rng.below(256));
    OpcodeSeq method = seq_of(std::move(ops));
    for (int n = 1; n <= 10; ++n) {
      std::uint64_t expected = m >= static_cast<std::size_t>(n) ? m - std::size_t(n) + 1 : 0;
      CHECK(total_multiplicity(extract_ngrams(method, n)) == expected);
    }
  }
}

TEST_CASE("gram identity and multiplicity") {
  OpcodeSeq method = seq_of({0x6e, 0x0e, 0x6e, 0x0e});
  GramCounts counts = extract_ngrams(method, 2);
  REQUIRE(counts.size() == 2);
  CHECK(counts.at(gram_from_hex("6e0e")) == 2);
  CHECK(counts.at(gram_from_hex("0e6e")) == 1);
  // 1-grams
  GramCounts ones = extract_ngrams(method, 1);
  CHECK(ones.at(gram_from_hex("6e")) == 2);
  CHECK(ones.at(gram_from_hex("0e")) == 2);
}

TEST_CASE("grams never cross method boundaries") {
  AppRecord app;
  app.app_id = "a";
  app.methods.push_back(seq_of({0x01, 0x02}));
  app.methods.back().class_name = "La;";
  app.methods.push_back(seq_of({0x03, 0x04}));
  app.methods.back().class_name = "Lb;";

  GramCounts counts = app_gram_counts(app, 2);
  CHECK(counts.size() == 2);
  CHECK(counts.count(gram_from_hex("0102")) == 1);
  CHECK(counts.count(gram_from_hex("0304")) == 1);
  CHECK(counts.count(gram_from_hex("0203")) == 0);  // would span the boundary
  CHECK(total_multiplicity(counts) == 2);
}

TEST_CASE("app counts are the sum of method counts") {
  AppRecord app;
  app.app_id = "a";
  app.methods.push_back(seq_of({0x01, 0x02, 0x03}));
  app.methods.back().class_name = "La;";
  app.methods.push_back(seq_of({0x02, 0x03, 0x04}));
  app.methods.back().class_name = "Lb;";
  GramCounts counts = app_gram_counts(app, 2);
  CHECK(counts.at(gram_from_hex("0203")) == 2);  // once from each method
  CHECK(total_multiplicity(counts) == 4);
}

TEST_CASE("gram hex round trip uses lowercase pairs") {
  Gram gram = gram_from_hex("0a6eff");
  CHECK(gram.size() == 3);
  CHECK(gram_hex(gram) == "0a6eff");
}

TEST_CASE("n must be positive") {
  OpcodeSeq method = seq_of({0x01});
  CHECK_THROWS_AS(extract_ngrams(method, 0), std::invalid_argument);
  CHECK_THROWS_AS(extract_ngrams(method, -3), std::invalid_argument);
}
