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

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <vector>

namespace finteam {

struct Document {
  std::string id;
  std::string kb_name;
  std::string title;
  std::string body;
  std::map<std::string, std::string> metadata;  // source, date, ...
};

struct Chunk {
  std::string doc_id;
  int ordinal = 0;
  std::string text;
  std::vector<double> vector;
  std::string title;
  std::map<std::string, std::string> metadata;
};

struct RetrievalHit {
  std::string kb_name;
  Chunk chunk;
  double score = 0.0;
};

double cosine(const std::vector<double>& a, const std::vector<double>& b);

// Splits a body into chunks of roughly target_tokens, overlapping by roughly
// overlap_tokens, snapping to sentence boundaries when possible. Chunks cover
// the body: concatenating them with the overlapping prefixes removed yields
// the body byte for byte.
std::vector<std::string> chunk_text(const std::string& body, int target_tokens = 500,
                                    int overlap_tokens = 50);

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<double> embed(const std::string& text) = 0;
  virtual int dimension() const = 0;
};

// Deterministic hashed bag-of-tokens embedding, dimension 256. Tokenizes on
// word boundaries and CJK codepoints, signed-hashes each token into a bucket,
// then L2-normalizes. The test/CI default; no model required.
class FallbackEmbedder : public Embedder {
 public:
  std::vector<double> embed(const std::string& text) override;
  int dimension() const override { return 256; }
};

// POST {base}/embeddings with {"input":[text]}; reads data[0].embedding.
class RemoteEmbedder : public Embedder {
 public:
  RemoteEmbedder(std::string base_url, int dimension);
  std::vector<double> embed(const std::string& text) override;
  int dimension() const override { return dimension_; }

 private:
  std::string base_url_;
  int dimension_;
};

// Named knowledge bases of embedded chunks with flat exact-scan retrieval.
// Persists one JSON-lines file per kb (one chunk per line) under data_dir.
class KnowledgeStore {
 public:
  KnowledgeStore(std::filesystem::path data_dir, std::shared_ptr<Embedder> embedder);

  // Chunks, embeds, and stores the document, replacing any previous chunks
  // with the same doc id. Persists the kb file.
  void ingest_document(const Document& doc);

  // Batch variant: one persistence pass per kb instead of one per document.
  void ingest_documents(const std::vector<Document>& docs);

  // Ingests .txt/.md files (whole file is the body) or .jsonl files with
  // {id,title,body,metadata} records. Directories recurse. Returns the
  // number of documents ingested.
  size_t ingest_path(const std::string& kb_name, const std::filesystem::path& path);

  std::vector<RetrievalHit> retrieve(const std::string& kb_name, const std::string& query,
                                     int k) const;

  bool has_kb(const std::string& kb_name) const;
  std::vector<std::string> kb_names() const;
  size_t chunk_count(const std::string& kb_name) const;

  Embedder& embedder() { return *embedder_; }

 private:
  struct Kb {
    std::vector<Chunk> chunks;
    mutable std::shared_mutex mutex;
  };

  void load_all();
  void save_kb_locked(const std::string& kb_name, const Kb& kb);
  Kb& kb_for_write(const std::string& kb_name);

  std::filesystem::path data_dir_;
  std::shared_ptr<Embedder> embedder_;
  std::map<std::string, std::unique_ptr<Kb>> kbs_;
  mutable std::shared_mutex registry_mutex_;
};

}  // namespace finteam
