#include "nopcode/opseq_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "nopcode/errors.hpp"
#include "nopcode/util.hpp"

namespace nopcode {

void write_opseq(const std::vector<AppRecord>& apps, std::ostream& sink,
                 const std::vector<std::string>& extra_headers) {
  std::vector<const AppRecord*> order;
  order.reserve(apps.size());
  for (const auto& app : apps) order.push_back(&app);
  std::stable_sort(order.begin(), order.end(),
                   [](const AppRecord* a, const AppRecord* b) { return a->app_id < b->app_id; });

  std::set<std::string> seen;
  for (const AppRecord* app : order) {
    if (app->app_id.empty()) throw InputError("empty app id");
    if (app->app_id.find('\t') != std::string::npos ||
        app->app_id.find('\n') != std::string::npos) {
      throw InputError("app id contains tab or newline: " + app->app_id);
    }
    if (!seen.insert(app->app_id).second) throw DuplicateAppIdError(app->app_id);
  }

  for (const auto& header : extra_headers) {
    sink << "# " << header << '\n';
  }
  for (const AppRecord* app : order) {
    if (app->label) {
      sink << "#label\t" << app->app_id << '\t' << *app->label << '\n';
    }
  }
  for (const AppRecord* app : order) {
    // Method-less apps would otherwise vanish on round trip.
    if (app->methods.empty()) {
      sink << "#app\t" << app->app_id << '\n';
    }
  }
  for (const AppRecord* app : order) {
    for (const auto& method : app->methods) {
      std::string bytes(method.opcodes.begin(), method.opcodes.end());
      sink << app->app_id << '\t' << method.class_name << "->" << method.method_sig << '\t'
           << to_hex(bytes) << '\n';
    }
  }
}

std::vector<AppRecord> read_opseq(std::istream& source, const OpcodeTable& table) {
  std::vector<AppRecord> apps;
  std::map<std::string, std::size_t> app_index;
  std::vector<std::tuple<std::size_t, std::string, std::string>> pending_labels;
  std::vector<std::pair<std::size_t, std::string>> pending_apps;

  std::string line;
  std::size_t line_no = 0;
  std::string current_app;
  while (std::getline(source, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line.rfind("#label\t", 0) == 0) {
        auto fields = split(line, '\t');
        if (fields.size() != 3) throw FormatError(line_no, "#label header needs 3 fields");
        pending_labels.emplace_back(line_no, fields[1], fields[2]);
      } else if (line.rfind("#app\t", 0) == 0) {
        auto fields = split(line, '\t');
        if (fields.size() != 2) throw FormatError(line_no, "#app header needs 2 fields");
        pending_apps.emplace_back(line_no, fields[1]);
      }
      continue;
    }
    auto fields = split(line, '\t');
    if (fields.size() != 3) {
      throw FormatError(line_no, "expected 3 tab-separated fields, got " +
                                     std::to_string(fields.size()));
    }
    const std::string& app_id = fields[0];
    if (app_id.empty()) throw FormatError(line_no, "empty app id");

    if (app_id != current_app) {
      if (app_index.count(app_id)) throw DuplicateAppIdError(app_id);
      app_index.emplace(app_id, apps.size());
      apps.push_back(AppRecord{app_id, {}, std::nullopt});
      current_app = app_id;
    }
    AppRecord& app = apps[app_index[app_id]];

    if (fields[1].empty() && fields[2].empty()) continue;  // empty-app marker

    auto arrow = fields[1].find("->");
    if (arrow == std::string::npos) {
      throw FormatError(line_no, "method field missing '->': " + fields[1]);
    }
    OpcodeSeq seq;
    seq.class_name = fields[1].substr(0, arrow);
    seq.method_sig = fields[1].substr(arrow + 2);

    std::string bytes;
    try {
      bytes = from_hex(fields[2]);
    } catch (const std::invalid_argument& e) {
      throw FormatError(line_no, std::string(e.what()) + ": " + fields[2]);
    }
    seq.opcodes.assign(bytes.begin(), bytes.end());
    for (std::uint8_t b : seq.opcodes) {
      if (!table.is_defined(b)) {
        throw FormatError(line_no, "undefined opcode byte " + to_hex(std::string(1, b)));
      }
    }
    app.methods.push_back(std::move(seq));
  }

  for (auto& [app_line, app_id] : pending_apps) {
    if (app_index.count(app_id)) continue;  // methods appeared after all
    app_index.emplace(app_id, apps.size());
    apps.push_back(AppRecord{app_id, {}, std::nullopt});
  }
  for (auto& [label_line, app_id, label] : pending_labels) {
    auto it = app_index.find(app_id);
    if (it == app_index.end()) {
      throw FormatError(label_line, "#label for unknown app: " + app_id);
    }
    apps[it->second].label = label;
  }

  // Canonical order: apps by id, methods by class (stable within a class).
  std::stable_sort(apps.begin(), apps.end(),
                   [](const AppRecord& a, const AppRecord& b) { return a.app_id < b.app_id; });
  for (auto& app : apps) {
    std::stable_sort(app.methods.begin(), app.methods.end(),
                     [](const OpcodeSeq& a, const OpcodeSeq& b) {
                       return a.class_name < b.class_name;
                     });
  }
  return apps;
}

void write_opseq_file(const std::vector<AppRecord>& apps, const std::filesystem::path& path,
                      const std::vector<std::string>& extra_headers) {
  std::ostringstream out;
  write_opseq(apps, out, extra_headers);
  atomic_write_file(path, out.str());
}

std::vector<AppRecord> read_opseq_file(const std::filesystem::path& path,
                                       const OpcodeTable& table) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open");
  return read_opseq(in, table);
}

}  // namespace nopcode
