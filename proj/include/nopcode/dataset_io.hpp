#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "nopcode/dataset.hpp"

namespace nopcode {

// On-disk dataset directory:
//   vocab.tsv   gram_hex <TAB> doc_freq <TAB> total_freq, gram-sorted
//   rows.tsv    #mode header, then app_id <TAB> index:value..., index-sorted
//   labels.csv  app_id,label with a header line
// `headers` become leading `# ` comment lines in the TSV files. When `vocab`
// is given its frequencies are written verbatim (sizes must match); otherwise
// frequencies are recomputed from the matrix, which under-reports total_freq
// for binary data but preserves everything load_dataset reads back.
void save_dataset(const LabeledDataset& ds, const std::filesystem::path& dir,
                  const std::vector<std::string>& headers = {},
                  const Vocabulary* vocab = nullptr);
LabeledDataset load_dataset(const std::filesystem::path& dir);

void write_labels_csv(const std::unordered_map<std::string, std::string>& labels,
                      const std::filesystem::path& path);
std::unordered_map<std::string, std::string> read_labels_csv(const std::filesystem::path& path);

// Sparse ARFF: numeric attribute per feature (named by gram hex), nominal
// class attribute last, one `{index value, ...}` record per row. Rows with no
// nonzero features still carry their class entry.
void export_arff(const LabeledDataset& ds, const std::filesystem::path& path,
                 const std::string& relation = "nopcode");

// Dense CSV: header app_id,<gram...>,class; one row per app.
void export_csv(const LabeledDataset& ds, const std::filesystem::path& path);
// Inverse of export_csv. Mode is taken from `mode` when given, otherwise
// inferred (all nonzero values equal to 1 reads as binary).
LabeledDataset import_csv(const std::filesystem::path& path,
                          std::optional<FeatureMode> mode = std::nullopt);

}  // namespace nopcode
