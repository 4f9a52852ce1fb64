#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace nopcode {

// Lowercase hex, two chars per byte.
std::string to_hex(std::string_view bytes);
// Inverse of to_hex; throws std::invalid_argument on odd length or bad digits.
std::string from_hex(std::string_view hex);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// FNV-1a, used for config hashes and spill partitioning.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::uint64_t mix64(std::uint64_t a, std::uint64_t b);

// Deterministic RNG (SplitMix64 core). std::shuffle and the std distributions
// are implementation-defined, so every shuffle/draw in the project goes
// through this.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  // Uniform in [0, bound). bound > 0.
  std::uint64_t below(std::uint64_t bound);
  double unit();  // [0, 1)

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// Runs fn(0..count-1) on up to `jobs` threads (0 = hardware concurrency).
// Rethrows the first exception after all workers stop.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn);

// Write-then-rename so readers never observe a partial file.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

std::string format_double(double v, int precision);
// Integral values print without a decimal point ("2" not "2.0").
std::string format_value(double v);

}  // namespace nopcode
