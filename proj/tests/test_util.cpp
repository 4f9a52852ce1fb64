#include "nopcode/util.hpp"

#include <algorithm>
#include <atomic>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "test_helpers.hpp"

using namespace nopcode;

TEST_CASE("hex round trip") {
  std::string bytes;
  for (int b = 0; b < 256; ++b) bytes.push_back(static_cast<char>(b));
  std::string hex = to_hex(bytes);
  CHECK(hex.size() == 512);
  CHECK(hex.substr(0, 8) == "00010203");
  CHECK(from_hex(hex) == bytes);
  CHECK(to_hex(std::string("\x6e\x0e", 2)) == "6e0e");
}

TEST_CASE("from_hex rejects bad input") {
  CHECK_THROWS_AS(from_hex("abc"), std::invalid_argument);   // odd length
  CHECK_THROWS_AS(from_hex("zz"), std::invalid_argument);    // bad digit
  CHECK_THROWS_AS(from_hex("0G"), std::invalid_argument);
  CHECK(from_hex("") == "");
  CHECK(from_hex("FF") == "\xff");  // upper case accepted on input
}

TEST_CASE("trim and split") {
  CHECK(trim("  a b \t") == "a b");
  CHECK(trim("") == "");
  CHECK(trim(" \t ") == "");
  CHECK(split("a,b,,c", ',') == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(split("", ',') == std::vector<std::string>{""});
  CHECK(split("abc", ',') == std::vector<std::string>{"abc"});
}

TEST_CASE("fnv1a64 known values") {
  // Published FNV-1a test vectors.
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("rng determinism and bounds") {
  Rng a(42), b(42), c(43);
  std::vector<std::uint64_t> va, vb;
  for (int i = 0; i < 100; ++i) {
    va.push_back(a.next());
    vb.push_back(b.next());
  }
  CHECK(va == vb);
  bool differs = false;
  for (int i = 0; i < 100; ++i) differs |= c.next() != va[std::size_t(i)];
  CHECK(differs);

  Rng r(7);
  for (int i = 0; i < 1000; ++i) CHECK(r.below(13) < 13);
  for (int i = 0; i < 1000; ++i) {
    double u = r.unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(r.below(1) == 0);
}

TEST_CASE("rng shuffle is a seeded permutation") {
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[std::size_t(i)] = i;
  auto w = v;
  Rng r1(5), r2(5);
  r1.shuffle(v);
  r2.shuffle(w);
  CHECK(v == w);
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) CHECK(sorted[std::size_t(i)] == i);
}

TEST_CASE("parallel_for covers every index once") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i].fetch_add(1); });
  for (const auto& h : hits) CHECK(h.load() == 1);
}

TEST_CASE("parallel_for propagates exceptions") {
  CHECK_THROWS_AS(parallel_for(100, 3,
                               [](std::size_t i) {
                                 if (i == 57) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}

TEST_CASE("atomic_write_file leaves no temp file") {
  TempDir dir;
  auto target = dir / "out.txt";
  atomic_write_file(target, "hello\n");
  CHECK(read_text_file(target) == "hello\n");
  atomic_write_file(target, "replaced\n");
  CHECK(read_text_file(target) == "replaced\n");
  std::size_t entries = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir.path)) {
    (void)entry;
    ++entries;
  }
  CHECK(entries == 1);
}

TEST_CASE("format_value trims integral doubles") {
  CHECK(format_value(3.0) == "3");
  CHECK(format_value(0.0) == "0");
  CHECK(format_value(1234567.0) == "1234567");
  std::string half = format_value(0.5);
  CHECK(std::stod(half) == 0.5);
}
