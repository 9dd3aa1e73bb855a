// Copyright 2026 The FinTeam Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "finteam/knowledge.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "finteam/error.hpp"
#include "finteam/text_util.hpp"

namespace finteam {

using nlohmann::json;
namespace fs = std::filesystem;

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw Error("dimension-mismatch", "cosine over vectors of different dimension");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw Error("zero-vector", "cosine of a zero vector");
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

// Sentence segmentation that preserves every byte: each sentence keeps its
// terminator and any following quotes/whitespace.
std::vector<std::string> split_sentences(const std::string& body) {
  std::vector<std::string> sentences;
  std::string current;
  size_t pos = 0;
  while (pos < body.size()) {
    size_t start = pos;
    char32_t cp = utf8_next(body, pos);
    current.append(body, start, pos - start);
    bool boundary = cp == 0x3002 || cp == 0xFF01 || cp == 0xFF1F ||  // 。！？
                    cp == '!' || cp == '?' || cp == '\n';
    if (cp == '.') {
      // a period only ends a sentence when not inside a number/abbreviation
      boundary = pos >= body.size() || body[pos] == ' ' || body[pos] == '\n';
    }
    if (boundary) {
      // swallow trailing closing quotes and spaces into this sentence
      while (pos < body.size()) {
        size_t peek = pos;
        char32_t next = utf8_next(body, peek);
        if (next == ' ' || next == 0x201D || next == 0x2019 || next == 0x300D) {
          current.append(body, pos, peek - pos);
          pos = peek;
        } else {
          break;
        }
      }
      sentences.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) sentences.push_back(std::move(current));
  return sentences;
}

}  // namespace

std::vector<std::string> chunk_text(const std::string& body, int target_tokens,
                                    int overlap_tokens) {
  if (body.empty()) {
    throw Error("empty-text", "cannot chunk empty body");
  }
  if (approx_token_count(body) <= target_tokens) {
    return {body};
  }
  std::vector<std::string> sentences = split_sentences(body);
  std::vector<int> tokens(sentences.size());
  for (size_t i = 0; i < sentences.size(); ++i) tokens[i] = approx_token_count(sentences[i]);

  std::vector<std::string> chunks;
  size_t i = 0;
  while (i < sentences.size()) {
    size_t j = i;
    int total = 0;
    while (j < sentences.size() && (total == 0 || total + tokens[j] <= target_tokens)) {
      total += tokens[j];
      ++j;
    }
    std::string chunk;
    for (size_t s = i; s < j; ++s) chunk += sentences[s];
    chunks.push_back(std::move(chunk));
    if (j >= sentences.size()) break;
    // next chunk re-reads trailing sentences worth about overlap_tokens
    size_t back = j;
    int overlap = 0;
    while (back > i + 1 && overlap + tokens[back - 1] <= overlap_tokens) {
      overlap += tokens[back - 1];
      --back;
    }
    i = back;
  }
  return chunks;
}

std::vector<double> FallbackEmbedder::embed(const std::string& text) {
  if (text.empty()) {
    throw Error("empty-text", "cannot embed empty text");
  }
  std::vector<std::string> tokens = tokenize_cjk_aware(text);
  if (tokens.empty()) tokens.push_back(text);

  std::vector<double> v(256, 0.0);
  for (const auto& token : tokens) {
    uint64_t h = fnv1a64(token);
    size_t bucket = h % 256;
    double sign = ((h >> 32) & 1) ? 1.0 : -1.0;
    v[bucket] += sign;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm == 0.0) {
    v[fnv1a64(text) % 256] = 1.0;
    norm = 1.0;
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

RemoteEmbedder::RemoteEmbedder(std::string base_url, int dimension)
    : base_url_(std::move(base_url)), dimension_(dimension) {}

std::vector<double> RemoteEmbedder::embed(const std::string& text) {
  if (text.empty()) {
    throw Error("empty-text", "cannot embed empty text");
  }
  std::string host = base_url_, prefix;
  size_t scheme = host.find("://");
  size_t slash = scheme == std::string::npos ? host.find('/') : host.find('/', scheme + 3);
  if (slash != std::string::npos) {
    prefix = host.substr(slash);
    host = host.substr(0, slash);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  }
  httplib::Client client(host);
  client.set_read_timeout(60);
  json payload = {{"input", {text}}};
  auto res = client.Post(prefix + "/embeddings", payload.dump(), "application/json");
  if (!res) {
    throw Error("transport", "embedding endpoint unreachable: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error("transport", "embedding endpoint status " + std::to_string(res->status));
  }
  json body = json::parse(res->body, nullptr, false);
  if (body.is_discarded() || !body.contains("data") || body["data"].empty() ||
      !body["data"][0].contains("embedding")) {
    throw Error("wire-format", "malformed embedding response");
  }
  std::vector<double> v = body["data"][0]["embedding"].get<std::vector<double>>();
  if (dimension_ > 0 && static_cast<int>(v.size()) != dimension_) {
    throw Error("dimension-mismatch", "embedding dimension " + std::to_string(v.size()) +
                                          " != configured " + std::to_string(dimension_));
  }
  return v;
}

KnowledgeStore::KnowledgeStore(fs::path data_dir, std::shared_ptr<Embedder> embedder)
    : data_dir_(std::move(data_dir)), embedder_(std::move(embedder)) {
  fs::create_directories(data_dir_);
  load_all();
}

void KnowledgeStore::load_all() {
  for (const auto& entry : fs::directory_iterator(data_dir_)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".jsonl") continue;
    std::string kb_name = entry.path().stem().string();
    auto kb = std::make_unique<Kb>();
    std::ifstream in(entry.path());
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json record = json::parse(line, nullptr, false);
      if (record.is_discarded()) continue;
      Chunk chunk;
      chunk.doc_id = record.value("doc_id", "");
      chunk.ordinal = record.value("ordinal", 0);
      chunk.text = record.value("text", "");
      chunk.title = record.value("title", "");
      if (record.contains("vector")) chunk.vector = record["vector"].get<std::vector<double>>();
      if (record.contains("metadata") && record["metadata"].is_object()) {
        for (auto& [k, v] : record["metadata"].items()) {
          if (v.is_string()) chunk.metadata[k] = v.get<std::string>();
        }
      }
      kb->chunks.push_back(std::move(chunk));
    }
    kbs_[kb_name] = std::move(kb);
  }
}

void KnowledgeStore::save_kb_locked(const std::string& kb_name, const Kb& kb) {
  fs::path path = data_dir_ / (kb_name + ".jsonl");
  fs::path tmp = data_dir_ / (kb_name + ".jsonl.tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    for (const auto& chunk : kb.chunks) {
      json record = {{"doc_id", chunk.doc_id}, {"ordinal", chunk.ordinal},
                     {"text", chunk.text},    {"title", chunk.title},
                     {"vector", chunk.vector}, {"metadata", chunk.metadata}};
      out << record.dump() << '\n';
    }
  }
  fs::rename(tmp, path);
}

KnowledgeStore::Kb& KnowledgeStore::kb_for_write(const std::string& kb_name) {
  std::unique_lock lock(registry_mutex_);
  auto it = kbs_.find(kb_name);
  if (it == kbs_.end()) {
    it = kbs_.emplace(kb_name, std::make_unique<Kb>()).first;
  }
  return *it->second;
}

void KnowledgeStore::ingest_document(const Document& doc) {
  ingest_documents({doc});
}

void KnowledgeStore::ingest_documents(const std::vector<Document>& docs) {
  // chunk and embed outside any lock
  struct Prepared {
    std::string kb_name;
    std::string doc_id;
    std::vector<Chunk> chunks;
  };
  std::vector<Prepared> prepared;
  for (const auto& doc : docs) {
    if (doc.body.empty()) {
      throw Error("empty-text", "document body must be non-empty");
    }
    Prepared p;
    p.kb_name = doc.kb_name;
    p.doc_id = doc.id;
    std::vector<std::string> pieces = chunk_text(doc.body);
    for (size_t i = 0; i < pieces.size(); ++i) {
      Chunk chunk;
      chunk.doc_id = doc.id;
      chunk.ordinal = static_cast<int>(i);
      chunk.text = pieces[i];
      chunk.title = doc.title;
      chunk.metadata = doc.metadata;
      chunk.vector = embedder_->embed(pieces[i]);
      p.chunks.push_back(std::move(chunk));
    }
    prepared.push_back(std::move(p));
  }

  // group by kb so each file is rewritten once
  std::map<std::string, std::vector<Prepared*>> by_kb;
  for (auto& p : prepared) by_kb[p.kb_name].push_back(&p);
  for (auto& [kb_name, batch] : by_kb) {
    Kb& kb = kb_for_write(kb_name);
    std::unique_lock lock(kb.mutex);
    for (Prepared* p : batch) {
      // replace, never duplicate: idempotent re-ingestion
      kb.chunks.erase(std::remove_if(kb.chunks.begin(), kb.chunks.end(),
                                     [&](const Chunk& c) { return c.doc_id == p->doc_id; }),
                      kb.chunks.end());
      for (auto& chunk : p->chunks) kb.chunks.push_back(std::move(chunk));
    }
    save_kb_locked(kb_name, kb);
  }
}

size_t KnowledgeStore::ingest_path(const std::string& kb_name, const fs::path& path) {
  if (fs::is_directory(path)) {
    size_t total = 0;
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(path)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) total += ingest_path(kb_name, file);
    return total;
  }
  std::string ext = path.extension().string();
  if (ext == ".txt" || ext == ".md") {
    std::ifstream in(path);
    if (!in) throw Error("io-error", "cannot read " + path.string());
    std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (body.empty()) return 0;
    Document doc;
    doc.id = path.filename().string();
    doc.kb_name = kb_name;
    doc.title = path.stem().string();
    doc.body = body;
    doc.metadata["source"] = path.string();
    ingest_document(doc);
    return 1;
  }
  if (ext == ".jsonl") {
    std::ifstream in(path);
    if (!in) throw Error("io-error", "cannot read " + path.string());
    std::string line;
    size_t count = 0, line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json record = json::parse(line, nullptr, false);
      if (record.is_discarded()) {
        throw ParseError("parse-error", "bad JSON in " + path.string(), line_no);
      }
      Document doc;
      doc.id = record.value("id", path.filename().string() + ":" + std::to_string(line_no));
      doc.kb_name = kb_name;
      doc.title = record.value("title", "");
      doc.body = record.value("body", "");
      if (record.contains("metadata") && record["metadata"].is_object()) {
        for (auto& [k, v] : record["metadata"].items()) {
          if (v.is_string()) doc.metadata[k] = v.get<std::string>();
        }
      }
      if (doc.body.empty()) continue;
      ingest_document(doc);
      ++count;
    }
    return count;
  }
  return 0;  // unsupported extension, skip
}

std::vector<RetrievalHit> KnowledgeStore::retrieve(const std::string& kb_name,
                                                   const std::string& query, int k) const {
  if (k < 1) {
    throw Error("invalid-request", "k must be >= 1");
  }
  const Kb* kb = nullptr;
  {
    std::shared_lock lock(registry_mutex_);
    auto it = kbs_.find(kb_name);
    if (it == kbs_.end()) {
      throw Error("unknown-kb", "knowledge base '" + kb_name + "' does not exist");
    }
    kb = it->second.get();
  }
  std::vector<double> query_vec = embedder_->embed(query);

  std::shared_lock lock(kb->mutex);
  std::vector<RetrievalHit> hits;
  hits.reserve(kb->chunks.size());
  for (const auto& chunk : kb->chunks) {
    if (chunk.vector.size() != query_vec.size()) continue;
    RetrievalHit hit;
    hit.kb_name = kb_name;
    hit.chunk = chunk;
    hit.score = cosine(query_vec, chunk.vector);
    hits.push_back(std::move(hit));
  }
  std::sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.chunk.doc_id != b.chunk.doc_id) return a.chunk.doc_id < b.chunk.doc_id;
    return a.chunk.ordinal < b.chunk.ordinal;
  });
  if (static_cast<int>(hits.size()) > k) hits.resize(k);
  return hits;
}

bool KnowledgeStore::has_kb(const std::string& kb_name) const {
  std::shared_lock lock(registry_mutex_);
  return kbs_.count(kb_name) > 0;
}

std::vector<std::string> KnowledgeStore::kb_names() const {
  std::shared_lock lock(registry_mutex_);
  std::vector<std::string> names;
  for (const auto& [name, kb] : kbs_) names.push_back(name);
  return names;
}

size_t KnowledgeStore::chunk_count(const std::string& kb_name) const {
  std::shared_lock lock(registry_mutex_);
  auto it = kbs_.find(kb_name);
  if (it == kbs_.end()) return 0;
  std::shared_lock kb_lock(it->second->mutex);
  return it->second->chunks.size();
}

}  // namespace finteam
