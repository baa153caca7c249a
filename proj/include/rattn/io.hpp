#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rattn/classifier.hpp"
#include "rattn/data.hpp"
#include "rattn/types.hpp"

namespace rattn {

// Shortest decimal form that round-trips a double exactly.
std::string format_double(double value);

// Writes content to a sibling temp file and renames it into place, so a
// crash never leaves a half-written file at `path`.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_text(const std::filesystem::path& path);

// Comma-separated table with a header row. Cells are written verbatim;
// numeric callers format via format_double.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
void write_csv(const std::filesystem::path& path, const CsvTable& table);

// Line-delimited dataset: `label<TAB>space-separated token ids`, with a
// vocabulary sidecar (vocab.tsv) mapping each id to its role. Directory
// layout: train.tsv, val.tsv, test.tsv, vocab.tsv.
void write_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset(const std::filesystem::path& path, Index vocab, Index classes);

void write_vocab_sidecar(const std::filesystem::path& path, Index vocab,
                         Index aspects, Index tokens_per_aspect);
// Returns the vocabulary size recorded in the sidecar (its line count).
Index read_vocab_sidecar(const std::filesystem::path& path);

// Writes a split directory in the layout above.
void write_splits(const std::filesystem::path& dir, const DataSplits& splits,
                  Index aspects, Index tokens_per_aspect);
// Reads it back; classes is inferred from the union of labels.
DataSplits read_splits(const std::filesystem::path& dir);

// JSON checkpoint with a shape manifest; doubles round-trip exactly.
void save_checkpoint(const std::filesystem::path& path, const SentenceClassifier& model);
SentenceClassifier load_checkpoint(const std::filesystem::path& path);

// One CSV per attention matrix: m rows (heads) by sequence-length columns.
void write_attention_csv(const std::filesystem::path& path, const Matrix& attention);

}  // namespace rattn
