#include "nopcode/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "nopcode/errors.hpp"
#include "nopcode/ngram.hpp"
#include "nopcode/util.hpp"

namespace nopcode {
namespace {

// Both CSV files and ARFF stay quoting-free; reject the characters that
// would force an escaping scheme.
void check_csv_token(const std::string& token, const char* what) {
  if (token.empty()) throw InputError(std::string(what) + " is empty");
  if (token.find_first_of(",\"\r\n\t{}") != std::string::npos) {
    throw InputError(std::string(what) + " '" + token + "' contains a reserved character");
  }
}

double parse_value(std::string_view text, std::size_t line_no) {
  try {
    std::size_t used = 0;
    double value = std::stod(std::string(text), &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw FormatError(line_no, "bad numeric value '" + std::string(text) + "'");
  }
}

std::uint32_t parse_index(std::string_view text, std::size_t line_no) {
  std::uint32_t index = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), index);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError(line_no, "bad feature index '" + std::string(text) + "'");
  }
  return index;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

void save_dataset(const LabeledDataset& ds, const std::filesystem::path& dir,
                  const std::vector<std::string>& headers, const Vocabulary* vocab) {
  ds.validate();
  if (vocab && vocab->size() != ds.vocab_size()) {
    throw InputError("vocabulary size " + std::to_string(vocab->size()) +
                     " does not match dataset width " + std::to_string(ds.vocab_size()));
  }
  std::filesystem::create_directories(dir);

  {
    std::ostringstream out;
    for (const auto& header : headers) out << "# " << header << '\n';
    if (vocab) {
      for (const auto& entry : vocab->entries) {
        out << gram_hex(entry.gram) << '\t' << entry.doc_freq << '\t' << entry.total_freq << '\n';
      }
    } else {
      std::vector<std::uint64_t> doc(ds.vocab_size(), 0);
      std::vector<double> total(ds.vocab_size(), 0.0);
      for (const auto& row : ds.rows) {
        for (const auto& [index, value] : row.features.values) {
          doc[index] += 1;
          total[index] += value;
        }
      }
      for (std::size_t i = 0; i < ds.vocab_size(); ++i) {
        out << ds.feature_names[i] << '\t' << doc[i] << '\t'
            << static_cast<std::uint64_t>(total[i]) << '\n';
      }
    }
    atomic_write_file(dir / "vocab.tsv", out.str());
  }

  {
    std::ostringstream out;
    for (const auto& header : headers) out << "# " << header << '\n';
    out << "#mode\t" << mode_name(ds.mode) << '\n';
    for (const auto& row : ds.rows) {
      out << row.app_id;
      for (const auto& [index, value] : row.features.values) {
        out << '\t' << index << ':' << format_value(value);
      }
      out << '\n';
    }
    atomic_write_file(dir / "rows.tsv", out.str());
  }

  {
    std::unordered_map<std::string, std::string> labels;
    for (std::size_t r = 0; r < ds.rows.size(); ++r) labels[ds.rows[r].app_id] = ds.row_labels[r];
    write_labels_csv(labels, dir / "labels.csv");
  }
}

LabeledDataset load_dataset(const std::filesystem::path& dir) {
  Vocabulary vocab = read_vocab_file(dir / "vocab.tsv");
  auto labels = read_labels_csv(dir / "labels.csv");

  LabeledDataset ds;
  ds.n = vocab.n;
  ds.feature_names.reserve(vocab.size());
  for (const auto& entry : vocab.entries) ds.feature_names.push_back(gram_hex(entry.gram));

  std::optional<FeatureMode> mode;
  auto rows_path = dir / "rows.tsv";
  auto lines = read_lines(rows_path);
  bool all_ones = true;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    std::size_t line_no = i + 1;
    if (line.empty()) continue;
    if (line.front() == '#') {
      auto fields = split(line, '\t');
      if (fields.size() == 2 && fields[0] == "#mode") mode = mode_from_name(fields[1]);
      continue;
    }
    auto fields = split(line, '\t');
    DatasetRow row;
    row.app_id = fields[0];
    if (row.app_id.empty()) throw FormatError(line_no, "empty app id");
    for (std::size_t f = 1; f < fields.size(); ++f) {
      auto colon = fields[f].find(':');
      if (colon == std::string::npos) {
        throw FormatError(line_no, "expected index:value, got '" + fields[f] + "'");
      }
      std::uint32_t index = parse_index(std::string_view(fields[f]).substr(0, colon), line_no);
      double value = parse_value(std::string_view(fields[f]).substr(colon + 1), line_no);
      if (index >= vocab.size()) {
        throw FormatError(line_no, "feature index " + std::to_string(index) +
                                       " out of range for vocabulary of size " +
                                       std::to_string(vocab.size()));
      }
      if (!row.features.values.empty() && row.features.values.back().first >= index) {
        throw FormatError(line_no, "feature indices are not strictly ascending");
      }
      if (value == 0.0) throw FormatError(line_no, "explicit zero value");
      if (value != 1.0) all_ones = false;
      row.features.values.emplace_back(index, value);
    }
    auto it = labels.find(row.app_id);
    if (it == labels.end()) {
      throw FormatError(line_no, "app '" + row.app_id + "' has no entry in labels.csv");
    }
    ds.row_labels.push_back(it->second);
    ds.rows.push_back(std::move(row));
  }

  ds.mode = mode.value_or(all_ones ? FeatureMode::binary : FeatureMode::frequency);
  std::set<std::string> label_set(ds.row_labels.begin(), ds.row_labels.end());
  ds.label_set.assign(label_set.begin(), label_set.end());

  // rows.tsv is written sorted; accept any order on disk but restore it.
  std::vector<std::size_t> order(ds.rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&ds](std::size_t a, std::size_t b) {
    return ds.rows[a].app_id < ds.rows[b].app_id;
  });
  LabeledDataset sorted = ds;
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted.rows[i] = std::move(ds.rows[order[i]]);
    sorted.row_labels[i] = std::move(ds.row_labels[order[i]]);
  }
  sorted.validate();
  return sorted;
}

void write_labels_csv(const std::unordered_map<std::string, std::string>& labels,
                      const std::filesystem::path& path) {
  std::vector<std::pair<std::string, std::string>> sorted(labels.begin(), labels.end());
  std::sort(sorted.begin(), sorted.end());
  std::ostringstream out;
  out << "app_id,label\n";
  for (const auto& [app_id, label] : sorted) {
    check_csv_token(app_id, "app id");
    check_csv_token(label, "label");
    out << app_id << ',' << label << '\n';
  }
  atomic_write_file(path, out.str());
}

std::unordered_map<std::string, std::string> read_labels_csv(const std::filesystem::path& path) {
  auto lines = read_lines(path);
  std::unordered_map<std::string, std::string> labels;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    std::size_t line_no = i + 1;
    if (line.empty() || line.front() == '#') continue;
    if (line_no == 1 && line == "app_id,label") continue;
    auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw FormatError(line_no, "expected app_id,label");
    }
    std::string app_id = line.substr(0, comma);
    std::string label = line.substr(comma + 1);
    if (app_id.empty() || label.empty()) throw FormatError(line_no, "empty app id or label");
    if (!labels.emplace(app_id, label).second) throw DuplicateAppIdError(app_id);
  }
  return labels;
}

void export_arff(const LabeledDataset& ds, const std::filesystem::path& path,
                 const std::string& relation) {
  ds.validate();
  if (ds.label_set.empty()) throw EmptyDatasetError();
  std::ostringstream out;
  out << "@relation " << relation << '\n' << '\n';
  for (const auto& name : ds.feature_names) out << "@attribute " << name << " numeric\n";
  out << "@attribute class {";
  for (std::size_t i = 0; i < ds.label_set.size(); ++i) {
    check_csv_token(ds.label_set[i], "label");
    out << (i ? "," : "") << ds.label_set[i];
  }
  out << "}\n\n@data\n";
  std::size_t class_index = ds.vocab_size();
  for (std::size_t r = 0; r < ds.rows.size(); ++r) {
    out << '{';
    for (const auto& [index, value] : ds.rows[r].features.values) {
      out << index << ' ' << format_value(value) << ", ";
    }
    out << class_index << ' ' << ds.row_labels[r] << "}\n";
  }
  atomic_write_file(path, out.str());
}

void export_csv(const LabeledDataset& ds, const std::filesystem::path& path) {
  ds.validate();
  std::ostringstream out;
  out << "app_id";
  for (const auto& name : ds.feature_names) out << ',' << name;
  out << ",class\n";
  for (std::size_t r = 0; r < ds.rows.size(); ++r) {
    check_csv_token(ds.rows[r].app_id, "app id");
    check_csv_token(ds.row_labels[r], "label");
    out << ds.rows[r].app_id;
    const auto& values = ds.rows[r].features.values;
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < ds.vocab_size(); ++i) {
      if (cursor < values.size() && values[cursor].first == i) {
        out << ',' << format_value(values[cursor].second);
        ++cursor;
      } else {
        out << ",0";
      }
    }
    out << ',' << ds.row_labels[r] << '\n';
  }
  atomic_write_file(path, out.str());
}

LabeledDataset import_csv(const std::filesystem::path& path, std::optional<FeatureMode> mode) {
  auto lines = read_lines(path);
  std::size_t first = 0;
  while (first < lines.size() && (lines[first].empty() || lines[first].front() == '#')) ++first;
  if (first >= lines.size()) throw FormatError(1, "missing csv header");

  auto header = split(lines[first], ',');
  if (header.size() < 2 || header.front() != "app_id" || header.back() != "class") {
    throw FormatError(first + 1, "expected header app_id,<features...>,class");
  }
  LabeledDataset ds;
  ds.feature_names.assign(header.begin() + 1, header.end() - 1);
  for (const auto& name : ds.feature_names) {
    try {
      Gram gram = gram_from_hex(name);
      if (ds.n == 0) ds.n = static_cast<int>(gram.size());
      if (static_cast<int>(gram.size()) != ds.n) throw MixedNError(ds.n, int(gram.size()));
    } catch (const std::invalid_argument& e) {
      throw FormatError(first + 1, "feature name '" + name + "' is not a gram: " + e.what());
    }
  }
  // Column identity is positional everywhere else, so imported columns must
  // already be in canonical gram order.
  for (std::size_t i = 1; i < ds.feature_names.size(); ++i) {
    if (ds.feature_names[i - 1] >= ds.feature_names[i]) {
      throw FormatError(first + 1, "feature columns are not in sorted gram order");
    }
  }

  bool all_ones = true;
  for (std::size_t i = first + 1; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    std::size_t line_no = i + 1;
    if (line.empty() || line.front() == '#') continue;
    auto fields = split(line, ',');
    if (fields.size() != header.size()) {
      throw FormatError(line_no, "expected " + std::to_string(header.size()) +
                                     " fields, got " + std::to_string(fields.size()));
    }
    DatasetRow row;
    row.app_id = fields.front();
    if (row.app_id.empty()) throw FormatError(line_no, "empty app id");
    for (std::size_t f = 1; f + 1 < fields.size(); ++f) {
      double value = parse_value(fields[f], line_no);
      if (value == 0.0) continue;
      if (value != 1.0) all_ones = false;
      row.features.values.emplace_back(static_cast<std::uint32_t>(f - 1), value);
    }
    if (fields.back().empty()) throw FormatError(line_no, "empty label");
    ds.row_labels.push_back(fields.back());
    ds.rows.push_back(std::move(row));
  }

  ds.mode = mode.value_or(all_ones ? FeatureMode::binary : FeatureMode::frequency);
  std::set<std::string> label_set(ds.row_labels.begin(), ds.row_labels.end());
  ds.label_set.assign(label_set.begin(), label_set.end());

  std::vector<std::size_t> order(ds.rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&ds](std::size_t a, std::size_t b) {
    return ds.rows[a].app_id < ds.rows[b].app_id;
  });
  LabeledDataset sorted = ds;
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted.rows[i] = std::move(ds.rows[order[i]]);
    sorted.row_labels[i] = std::move(ds.row_labels[order[i]]);
  }
  sorted.validate();
  return sorted;
}

}  // namespace nopcode
