#include "nopcode/smali.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "nopcode/errors.hpp"
#include "nopcode/util.hpp"

namespace nopcode {

namespace {

struct Line {
  std::string_view text;
  std::size_t number;  // 1-based within the parsed unit
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t start = 0;
  std::size_t number = 1;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '\n') {
      lines.push_back({text.substr(start, i - start), number++});
      start = i + 1;
    }
  }
  return lines;
}

std::string_view first_token(std::string_view line) {
  std::size_t end = 0;
  while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
  return line.substr(0, end);
}

std::string_view last_token(std::string_view line) {
  auto t = trim(line);
  std::size_t pos = t.find_last_of(" \t");
  return pos == std::string_view::npos ? t : t.substr(pos + 1);
}

// Directives whose bodies are data or metadata, not instructions.
bool opens_block(std::string_view directive) {
  return directive == ".annotation" || directive == ".subannotation" ||
         directive == ".array-data" || directive == ".packed-switch" ||
         directive == ".sparse-switch";
}

// Appends the opcodes of one method span. Line numbers are absolute within
// the parsed unit, so errors carry file positions as-is.
void parse_method_lines(const std::vector<Line>& lines, std::size_t begin, std::size_t end,
                        const OpcodeTable& table, const std::string& file,
                        std::vector<std::uint8_t>& out) {
  std::vector<std::string_view> blocks;  // open block-directive stack
  for (std::size_t i = begin; i < end; ++i) {
    std::string_view line = trim(lines[i].text);
    if (line.empty() || line.front() == '#' || line.front() == ':') continue;
    if (line.front() == '.') {
      std::string_view directive = first_token(line);
      if (directive == ".end") {
        if (!blocks.empty() && blocks.back() == last_token(line)) blocks.pop_back();
      } else if (opens_block(directive)) {
        blocks.push_back(directive.substr(1));
      }
      continue;
    }
    if (!blocks.empty()) continue;  // switch targets, array payload, annotation values
    std::string_view token = first_token(line);
    auto byte = table.lookup(token);
    if (!byte) {
      throw UnknownMnemonicError(file, lines[i].number, std::string(token));
    }
    out.push_back(*byte);
  }
}

}  // namespace

OpcodeSeq parse_smali_method(const std::string& method_text, const OpcodeTable& table) {
  OpcodeSeq seq;
  auto lines = split_lines(method_text);
  for (const auto& line : lines) {
    std::string_view t = trim(line.text);
    if (first_token(t) == ".method") {
      seq.method_sig = std::string(last_token(t));
      break;
    }
  }
  parse_method_lines(lines, 0, lines.size(), table, "", seq.opcodes);
  return seq;
}

std::vector<OpcodeSeq> parse_smali_class(const std::string& text, const std::string& file,
                                         const OpcodeTable& table) {
  std::vector<OpcodeSeq> methods;
  auto lines = split_lines(text);
  std::string class_name;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = trim(lines[i].text);
    std::string_view token = first_token(line);
    if (token == ".class") {
      class_name = std::string(last_token(line));
    } else if (token == ".method") {
      auto is_end_method = [](std::string_view t) {
        return first_token(t) == ".end" && last_token(t) == "method";
      };
      std::size_t body_end = i + 1;
      while (body_end < lines.size() && !is_end_method(trim(lines[body_end].text))) {
        ++body_end;
      }
      if (body_end == lines.size()) {
        throw FormatError(lines[i].number, "unterminated .method in " + file);
      }
      OpcodeSeq seq;
      seq.class_name = class_name;
      seq.method_sig = std::string(last_token(line));
      parse_method_lines(lines, i + 1, body_end, table, file, seq.opcodes);
      methods.push_back(std::move(seq));
      i = body_end;
    }
  }
  return methods;
}

AppRecord parse_smali_files(std::vector<std::filesystem::path> files, const std::string& app_id,
                            const OpcodeTable& table) {
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.generic_string() < b.generic_string(); });

  std::vector<std::vector<OpcodeSeq>> per_file(files.size());
  parallel_for(files.size(), 0, [&](std::size_t i) {
    std::ifstream in(files[i], std::ios::binary);
    if (!in) throw IoError(files[i].string(), "cannot open");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    per_file[i] = parse_smali_class(buffer.str(), files[i].string(), table);
  });

  AppRecord app;
  app.app_id = app_id;
  for (auto& methods : per_file) {
    for (auto& m : methods) app.methods.push_back(std::move(m));
  }
  // Stable: within a class, in-file order survives.
  std::stable_sort(app.methods.begin(), app.methods.end(),
                   [](const OpcodeSeq& a, const OpcodeSeq& b) { return a.class_name < b.class_name; });
  validate_app_record(app, table);
  return app;
}

AppRecord parse_smali_tree(const std::filesystem::path& root_dir, const std::string& app_id,
                           const OpcodeTable& table) {
  if (!std::filesystem::exists(root_dir)) {
    throw IoError(root_dir.string(), "no such directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".smali") {
      files.push_back(entry.path());
    }
  }
  return parse_smali_files(std::move(files), app_id, table);
}

void validate_app_record(const AppRecord& app, const OpcodeTable& table) {
  if (app.app_id.empty()) throw InputError("empty app id");
  if (app.app_id.find('\t') != std::string::npos || app.app_id.find('\n') != std::string::npos) {
    throw InputError("app id contains tab or newline: " + app.app_id);
  }
  for (std::size_t i = 0; i + 1 < app.methods.size(); ++i) {
    if (app.methods[i].class_name > app.methods[i + 1].class_name) {
      throw InputError("methods of app " + app.app_id + " not sorted by class");
    }
  }
  for (const auto& m : app.methods) {
    for (std::uint8_t b : m.opcodes) {
      if (!table.is_defined(b)) {
        throw InputError("undefined opcode byte in app " + app.app_id);
      }
    }
  }
}

}  // namespace nopcode
