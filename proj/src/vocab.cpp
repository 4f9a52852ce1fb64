#include "nopcode/vocab.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <memory>
#include <queue>
#include <random>
#include <sstream>
#include <system_error>

#include "nopcode/errors.hpp"
#include "nopcode/util.hpp"

namespace nopcode {
namespace {

std::uint64_t parse_u64(std::string_view text, std::size_t line_no) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError(line_no, "expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return value;
}

// gram <TAB> doc_freq <TAB> total_freq
VocabEntry parse_vocab_line(std::string_view line, std::size_t line_no) {
  auto fields = split(line, '\t');
  if (fields.size() != 3) {
    throw FormatError(line_no, "expected 3 tab-separated fields, got " +
                                   std::to_string(fields.size()));
  }
  VocabEntry entry;
  try {
    entry.gram = gram_from_hex(fields[0]);
  } catch (const std::invalid_argument& e) {
    throw FormatError(line_no, std::string("bad gram: ") + e.what());
  }
  if (entry.gram.empty()) throw FormatError(line_no, "empty gram");
  entry.doc_freq = parse_u64(fields[1], line_no);
  entry.total_freq = parse_u64(fields[2], line_no);
  return entry;
}

std::filesystem::path make_private_temp_dir() {
  auto base = std::filesystem::temp_directory_path();
  std::random_device rd;
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::uint64_t tag = (std::uint64_t(rd()) << 32) ^ rd();
    auto dir = base / ("nopcode-spill-" + to_hex(std::string(reinterpret_cast<char*>(&tag), 8)));
    std::error_code ec;
    if (std::filesystem::create_directories(dir, ec) && !ec) return dir;
  }
  throw IoError(base.string(), "could not create a spill directory");
}

struct MergeCursor {
  std::ifstream stream;
  VocabEntry current;
  std::size_t line_no = 0;

  bool advance() {
    std::string line;
    while (std::getline(stream, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      current = parse_vocab_line(line, line_no);
      return true;
    }
    return false;
  }
};

}  // namespace

std::optional<std::uint32_t> Vocabulary::find(const Gram& gram) const {
  auto it = index.find(gram);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

Vocabulary Vocabulary::from_entries(int n, std::vector<VocabEntry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const VocabEntry& a, const VocabEntry& b) { return a.gram < b.gram; });
  Vocabulary vocab;
  vocab.n = n;
  vocab.entries = std::move(entries);
  vocab.index.reserve(vocab.entries.size());
  for (std::uint32_t i = 0; i < vocab.entries.size(); ++i) {
    const auto& entry = vocab.entries[i];
    if (static_cast<int>(entry.gram.size()) != n) {
      throw Error("vocabulary gram '" + gram_hex(entry.gram) + "' has length " +
                  std::to_string(entry.gram.size()) + ", expected " + std::to_string(n));
    }
    if (i > 0 && entry.gram == vocab.entries[i - 1].gram) {
      throw Error("duplicate gram in vocabulary: " + gram_hex(entry.gram));
    }
    vocab.index.emplace(entry.gram, i);
  }
  return vocab;
}

Vocabulary build_vocabulary(const std::vector<AppRecord>& corpus, int n) {
  VocabularyBuilder builder(n);
  for (const auto& app : corpus) builder.add_app(app);
  return builder.finish();
}

Vocabulary merge_vocab(const Vocabulary& a, const Vocabulary& b) {
  if (a.n != b.n && !a.entries.empty() && !b.entries.empty()) throw MixedNError(a.n, b.n);
  std::vector<VocabEntry> merged;
  merged.reserve(a.entries.size() + b.entries.size());
  std::size_t i = 0, j = 0;
  while (i < a.entries.size() && j < b.entries.size()) {
    const auto& ea = a.entries[i];
    const auto& eb = b.entries[j];
    if (ea.gram < eb.gram) {
      merged.push_back(ea);
      ++i;
    } else if (eb.gram < ea.gram) {
      merged.push_back(eb);
      ++j;
    } else {
      merged.push_back({ea.gram, ea.doc_freq + eb.doc_freq, ea.total_freq + eb.total_freq});
      ++i;
      ++j;
    }
  }
  for (; i < a.entries.size(); ++i) merged.push_back(a.entries[i]);
  for (; j < b.entries.size(); ++j) merged.push_back(b.entries[j]);
  return Vocabulary::from_entries(a.entries.empty() ? b.n : a.n, std::move(merged));
}

VocabularyBuilder::VocabularyBuilder(int n, VocabBuildOptions options)
    : n_(n), options_(std::move(options)) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (options_.mem_budget == 0) options_.mem_budget = 1;
  if (options_.spill_fanout == 0) options_.spill_fanout = 1;
}

VocabularyBuilder::~VocabularyBuilder() {
  if (owns_spill_dir_) {
    std::error_code ec;
    std::filesystem::remove_all(options_.spill_dir, ec);
  }
}

void VocabularyBuilder::add_app(const AppRecord& app) { add_app_counts(app_gram_counts(app, n_)); }

void VocabularyBuilder::add_app_counts(const GramCounts& counts) {
  for (const auto& [gram, multiplicity] : counts) {
    auto& slot = counts_[gram];
    slot.first += 1;  // one app
    slot.second += multiplicity;
  }
  if (counts_.size() >= options_.mem_budget) spill();
}

void VocabularyBuilder::spill() {
  if (counts_.empty()) return;
  if (options_.spill_dir.empty()) {
    options_.spill_dir = make_private_temp_dir();
    owns_spill_dir_ = true;
  } else {
    std::filesystem::create_directories(options_.spill_dir);
  }
  std::vector<std::ofstream> parts(options_.spill_fanout);
  for (unsigned p = 0; p < options_.spill_fanout; ++p) {
    auto path = options_.spill_dir / ("part_" + std::to_string(p) + ".tsv");
    parts[p].open(path, std::ios::app | std::ios::binary);
    if (!parts[p]) throw IoError(path.string(), "cannot open spill partition for append");
  }
  for (const auto& [gram, freqs] : counts_) {
    unsigned p = static_cast<unsigned>(fnv1a64(gram) % options_.spill_fanout);
    parts[p] << gram_hex(gram) << '\t' << freqs.first << '\t' << freqs.second << '\n';
  }
  for (unsigned p = 0; p < options_.spill_fanout; ++p) {
    parts[p].flush();
    if (!parts[p]) throw IoError(options_.spill_dir.string(), "spill write failed");
  }
  counts_.clear();
  spilled_ = true;
}

std::uint64_t VocabularyBuilder::finish_stream(
    const std::function<void(const VocabEntry&)>& fn) {
  if (finished_) throw Error("VocabularyBuilder already finished");
  finished_ = true;

  if (!spilled_) {
    std::vector<VocabEntry> entries;
    entries.reserve(counts_.size());
    for (auto& [gram, freqs] : counts_) entries.push_back({gram, freqs.first, freqs.second});
    counts_.clear();
    std::sort(entries.begin(), entries.end(),
              [](const VocabEntry& a, const VocabEntry& b) { return a.gram < b.gram; });
    for (const auto& entry : entries) fn(entry);
    return entries.size();
  }

  spill();  // flush the tail

  // Pass 1: aggregate each hash partition independently (a gram lives in
  // exactly one partition) and rewrite it as a gram-sorted run.
  std::vector<std::filesystem::path> runs;
  for (unsigned p = 0; p < options_.spill_fanout; ++p) {
    auto part_path = options_.spill_dir / ("part_" + std::to_string(p) + ".tsv");
    if (!std::filesystem::exists(part_path)) continue;
    std::unordered_map<Gram, std::pair<std::uint64_t, std::uint64_t>> agg;
    {
      std::ifstream in(part_path, std::ios::binary);
      if (!in) throw IoError(part_path.string(), "cannot reopen spill partition");
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        VocabEntry entry = parse_vocab_line(line, line_no);
        auto& slot = agg[entry.gram];
        slot.first += entry.doc_freq;
        slot.second += entry.total_freq;
      }
    }
    std::vector<VocabEntry> entries;
    entries.reserve(agg.size());
    for (auto& [gram, freqs] : agg) entries.push_back({gram, freqs.first, freqs.second});
    std::sort(entries.begin(), entries.end(),
              [](const VocabEntry& a, const VocabEntry& b) { return a.gram < b.gram; });
    auto run_path = options_.spill_dir / ("run_" + std::to_string(p) + ".tsv");
    {
      std::ofstream out(run_path, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError(run_path.string(), "cannot write merge run");
      for (const auto& entry : entries) {
        out << gram_hex(entry.gram) << '\t' << entry.doc_freq << '\t' << entry.total_freq << '\n';
      }
      out.flush();
      if (!out) throw IoError(run_path.string(), "merge run write failed");
    }
    std::filesystem::remove(part_path);
    runs.push_back(run_path);
  }

  // Pass 2: k-way merge of the sorted runs.
  std::vector<std::unique_ptr<MergeCursor>> cursors;
  for (const auto& run : runs) {
    auto cursor = std::make_unique<MergeCursor>();
    cursor->stream.open(run, std::ios::binary);
    if (!cursor->stream) throw IoError(run.string(), "cannot open merge run");
    if (cursor->advance()) cursors.push_back(std::move(cursor));
  }
  auto heap_cmp = [](const MergeCursor* a, const MergeCursor* b) {
    return a->current.gram > b->current.gram;  // min-heap on gram
  };
  std::priority_queue<MergeCursor*, std::vector<MergeCursor*>, decltype(heap_cmp)> heap(heap_cmp);
  for (auto& cursor : cursors) heap.push(cursor.get());
  std::uint64_t produced = 0;
  Gram previous;
  while (!heap.empty()) {
    MergeCursor* top = heap.top();
    heap.pop();
    if (produced > 0 && top->current.gram <= previous) {
      throw Error("spill merge produced out-of-order gram " + gram_hex(top->current.gram));
    }
    previous = top->current.gram;
    fn(top->current);
    ++produced;
    if (top->advance()) heap.push(top);
  }
  for (const auto& run : runs) {
    std::error_code ec;
    std::filesystem::remove(run, ec);
  }
  return produced;
}

Vocabulary VocabularyBuilder::finish() {
  std::vector<VocabEntry> entries;
  finish_stream([&entries](const VocabEntry& entry) { entries.push_back(entry); });
  return Vocabulary::from_entries(n_, std::move(entries));
}

std::uint64_t VocabularyBuilder::finish_to_file(const std::filesystem::path& path,
                                                const std::vector<std::string>& headers) {
  auto tmp = path;
  tmp += ".tmp";
  std::uint64_t count = 0;
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(tmp.string(), "cannot open for writing");
    for (const auto& header : headers) out << "# " << header << '\n';
    count = finish_stream([&out](const VocabEntry& entry) {
      out << gram_hex(entry.gram) << '\t' << entry.doc_freq << '\t' << entry.total_freq << '\n';
    });
    out.flush();
    if (!out) throw IoError(tmp.string(), "write failed");
  }
  std::filesystem::rename(tmp, path);
  return count;
}

void write_vocab_file(const Vocabulary& vocab, const std::filesystem::path& path,
                      const std::vector<std::string>& headers) {
  std::ostringstream out;
  for (const auto& header : headers) out << "# " << header << '\n';
  for (const auto& entry : vocab.entries) {
    out << gram_hex(entry.gram) << '\t' << entry.doc_freq << '\t' << entry.total_freq << '\n';
  }
  atomic_write_file(path, out.str());
}

Vocabulary read_vocab_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  std::vector<VocabEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    entries.push_back(parse_vocab_line(line, line_no));
    if (entries.size() > 1 && entries[entries.size() - 2].gram >= entries.back().gram) {
      throw FormatError(line_no, "vocabulary entries are not sorted by gram");
    }
  }
  int n = entries.empty() ? 0 : static_cast<int>(entries.front().gram.size());
  return Vocabulary::from_entries(n, std::move(entries));
}

VocabSlice read_vocab_slice(const std::filesystem::path& path, std::uint64_t offset,
                            std::uint64_t limit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  VocabSlice slice;
  slice.first_global_index = offset;
  std::vector<VocabEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  std::uint64_t data_index = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (data_index >= offset + limit) break;
    if (data_index >= offset) {
      entries.push_back(parse_vocab_line(line, line_no));
      if (entries.size() > 1 && entries[entries.size() - 2].gram >= entries.back().gram) {
        throw FormatError(line_no, "vocabulary entries are not sorted by gram");
      }
    }
    ++data_index;
  }
  int n = entries.empty() ? 0 : static_cast<int>(entries.front().gram.size());
  slice.vocab = Vocabulary::from_entries(n, std::move(entries));
  return slice;
}

std::uint64_t count_vocab_entries(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  std::uint64_t count = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    ++count;
  }
  return count;
}

}  // namespace nopcode
