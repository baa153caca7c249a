#include "rattn/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include <json.hpp>

namespace fs = std::filesystem;

namespace rattn {

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, Index rows, Index cols, const std::string& name) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows) {
    throw std::runtime_error("checkpoint: field '" + name + "' expected " +
                             std::to_string(rows) + " rows");
  }
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw std::runtime_error("checkpoint: field '" + name + "' row " +
                               std::to_string(i) + " expected " +
                               std::to_string(cols) + " columns");
    }
    for (Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<size_t>(c)].get<double>();
  }
  return m;
}

std::string role_of(Index id, Index aspects, Index tokens_per_aspect) {
  if (tokens_per_aspect > 0 && id < aspects * tokens_per_aspect) {
    return "aspect-" + std::to_string(id / tokens_per_aspect);
  }
  return "noise";
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  if (res.ec != std::errc()) {
    throw std::runtime_error("format_double: conversion failed");
  }
  return std::string(buf, res.ptr);
}

void write_text_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("write_text_atomic: cannot open " + tmp.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      throw std::runtime_error("write_text_atomic: short write to " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("read_text: cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_csv(const fs::path& path, const CsvTable& table) {
  std::string out;
  for (size_t c = 0; c < table.header.size(); ++c) {
    if (c) out += ',';
    out += table.header[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) {
      throw std::invalid_argument("write_csv: row width " + std::to_string(row.size()) +
                                  " does not match header width " +
                                  std::to_string(table.header.size()));
    }
    for (size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += row[c];
    }
    out += '\n';
  }
  write_text_atomic(path, out);
}

void write_dataset(const fs::path& path, const Dataset& data) {
  std::string out;
  for (const Example& ex : data.examples) {
    out += std::to_string(ex.label);
    out += '\t';
    for (size_t t = 0; t < ex.tokens.size(); ++t) {
      if (t) out += ' ';
      out += std::to_string(ex.tokens[t]);
    }
    out += '\n';
  }
  write_text_atomic(path, out);
}

Dataset read_dataset(const fs::path& path, Index vocab, Index classes) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("read_dataset: cannot open " + path.string());
  }
  Dataset data;
  data.vocab = vocab;
  data.classes = classes;
  std::string line;
  Index line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    Example ex;
    if (!(fields >> ex.label)) {
      throw std::runtime_error("read_dataset: " + path.string() + ":" +
                               std::to_string(line_no) + ": missing label");
    }
    if (ex.label < 0 || (classes > 0 && ex.label >= classes)) {
      throw std::runtime_error("read_dataset: " + path.string() + ":" +
                               std::to_string(line_no) + ": label " +
                               std::to_string(ex.label) + " out of range");
    }
    int tok = 0;
    while (fields >> tok) {
      if (tok < 0 || tok >= vocab) {
        throw std::runtime_error("read_dataset: " + path.string() + ":" +
                                 std::to_string(line_no) + ": token " +
                                 std::to_string(tok) + " outside vocab of " +
                                 std::to_string(vocab));
      }
      ex.tokens.push_back(tok);
    }
    if (ex.tokens.empty()) {
      throw std::runtime_error("read_dataset: " + path.string() + ":" +
                               std::to_string(line_no) + ": empty token list");
    }
    data.examples.push_back(std::move(ex));
  }
  return data;
}

void write_vocab_sidecar(const fs::path& path, Index vocab, Index aspects,
                         Index tokens_per_aspect) {
  std::string out;
  for (Index id = 0; id < vocab; ++id) {
    out += std::to_string(id);
    out += '\t';
    out += role_of(id, aspects, tokens_per_aspect);
    out += '\n';
  }
  write_text_atomic(path, out);
}

Index read_vocab_sidecar(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("read_vocab_sidecar: cannot open " + path.string());
  }
  Index count = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') ++count;
  }
  if (count < 1) {
    throw std::runtime_error("read_vocab_sidecar: " + path.string() + " lists no tokens");
  }
  return count;
}

void write_splits(const fs::path& dir, const DataSplits& splits, Index aspects,
                  Index tokens_per_aspect) {
  fs::create_directories(dir);
  write_dataset(dir / "train.tsv", splits.train);
  write_dataset(dir / "val.tsv", splits.val);
  write_dataset(dir / "test.tsv", splits.test);
  write_vocab_sidecar(dir / "vocab.tsv", splits.train.vocab, aspects,
                      tokens_per_aspect);
}

DataSplits read_splits(const fs::path& dir) {
  const Index vocab = read_vocab_sidecar(dir / "vocab.tsv");
  DataSplits splits;
  splits.train = read_dataset(dir / "train.tsv", vocab, 0);
  splits.val = read_dataset(dir / "val.tsv", vocab, 0);
  splits.test = read_dataset(dir / "test.tsv", vocab, 0);
  Index classes = 0;
  for (const Dataset* d : {&splits.train, &splits.val, &splits.test}) {
    for (const Example& ex : d->examples) {
      classes = std::max(classes, static_cast<Index>(ex.label) + 1);
    }
  }
  if (classes < 2) {
    throw std::runtime_error("read_splits: " + dir.string() +
                             " holds fewer than two classes");
  }
  for (Dataset* d : {&splits.train, &splits.val, &splits.test}) {
    d->classes = classes;
  }
  return splits;
}

void save_checkpoint(const fs::path& path, const SentenceClassifier& model) {
  json j;
  j["format"] = "rattn-checkpoint-v1";
  j["shape"] = {{"vocab", model.vocab()}, {"d", model.d()},   {"d_a", model.attn.d_a()},
                {"m", model.m()},         {"classes", model.classes()}};
  j["embedding"] = matrix_to_json(model.embedding);
  j["enc_w"] = matrix_to_json(model.enc_w);
  j["enc_b"] = matrix_to_json(Matrix(model.enc_b));
  j["attn_w"] = matrix_to_json(model.attn.w);
  j["attn_v"] = matrix_to_json(model.attn.v);
  j["out_w"] = matrix_to_json(model.out_w);
  j["out_b"] = matrix_to_json(Matrix(model.out_b));
  j["head_masked"] = model.head_masked;
  write_text_atomic(path, j.dump(2) + "\n");
}

SentenceClassifier load_checkpoint(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& err) {
    throw std::runtime_error("load_checkpoint: " + path.string() + ": " + err.what());
  }
  if (!j.contains("format") || j["format"] != "rattn-checkpoint-v1") {
    throw std::runtime_error("load_checkpoint: " + path.string() +
                             " is not a recognised checkpoint");
  }
  const json& shape = j.at("shape");
  const Index vocab = shape.at("vocab").get<Index>();
  const Index d = shape.at("d").get<Index>();
  const Index d_a = shape.at("d_a").get<Index>();
  const Index m = shape.at("m").get<Index>();
  const Index classes = shape.at("classes").get<Index>();

  SentenceClassifier model;
  model.embedding = matrix_from_json(j.at("embedding"), vocab, d, "embedding");
  model.enc_w = matrix_from_json(j.at("enc_w"), d, d, "enc_w");
  model.enc_b = matrix_from_json(j.at("enc_b"), 1, d, "enc_b").row(0);
  model.attn.w = matrix_from_json(j.at("attn_w"), d_a, d, "attn_w");
  model.attn.v = matrix_from_json(j.at("attn_v"), d_a, m, "attn_v");
  model.out_w = matrix_from_json(j.at("out_w"), m * d, classes, "out_w");
  model.out_b = matrix_from_json(j.at("out_b"), 1, classes, "out_b").row(0);
  model.head_masked = j.at("head_masked").get<std::vector<bool>>();
  if (static_cast<Index>(model.head_masked.size()) != m) {
    throw std::runtime_error("load_checkpoint: head_masked length mismatch");
  }
  return model;
}

void write_attention_csv(const fs::path& path, const Matrix& attention) {
  std::string out;
  for (Index i = 0; i < attention.rows(); ++i) {
    for (Index j = 0; j < attention.cols(); ++j) {
      if (j) out += ',';
      out += format_double(attention(i, j));
    }
    out += '\n';
  }
  write_text_atomic(path, out);
}

}  // namespace rattn
