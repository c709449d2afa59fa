#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "helix/errors.hpp"

namespace helix {

// Newline and blank-line normalization so trivial formatting differences do
// not register as novelty: CRLF to LF, trailing whitespace stripped per
// line, blank-line runs collapsed to one, leading/trailing blanks dropped.
// Idempotent.
std::string canonicalize(const std::string& text);

enum class EmbeddingKind { kHashedNgram, kHttp };

struct EmbeddingProviderSpec {
  EmbeddingKind kind = EmbeddingKind::kHashedNgram;
  int dimension = 256;
  // http only; empty endpoint falls back to the HELIX_EMBED_URL env var.
  std::string endpoint;
  std::string model_name;
  int retries = 2;
  double backoff_initial_ms = 250.0;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual Eigen::VectorXd embed_raw(const std::string& text) = 0;
  virtual int dimension() const = 0;
};

// Deterministic offline provider: character trigrams hashed into
// `dimension` buckets, raw counts.
std::unique_ptr<EmbeddingProvider> make_hashed_ngram_provider(int dimension = 256);

// Wraps a provider call with the output contract: dimension check, L2
// renormalization, and the all-zero vector mapped to the first basis vector.
Eigen::VectorXd embed(EmbeddingProvider& provider, const std::string& content);

// Minimal HTTP transport seam so network behavior is injectable in tests.
struct HttpResponse {
  int status = 0;
  std::string body;
};

class HttpPoster {
 public:
  virtual ~HttpPoster() = default;
  // Returns status 0 on transport failure (connection refused etc).
  virtual HttpResponse post(const std::string& url, const std::string& body,
                            const std::vector<std::pair<std::string, std::string>>& headers) = 0;
};

std::shared_ptr<HttpPoster> make_httplib_poster(double timeout_seconds = 30.0);

// POST {model, input: [text]} -> {data: [{embedding: [...]}]}. Retries with
// exponential backoff, then ProviderUnavailableError.
std::unique_ptr<EmbeddingProvider> make_http_embedding_provider(
    EmbeddingProviderSpec spec, std::shared_ptr<HttpPoster> poster);

std::unique_ptr<EmbeddingProvider> make_provider(const EmbeddingProviderSpec& spec);

// kNN novelty of one embedding against the rest: 1 minus the mean cosine
// similarity of the min(k, n-1) nearest neighbors, clamped to [0, 1].
// A singleton scores 1. Embeddings must be unit vectors.
double knn_diversity(std::size_t target_index, const std::vector<Eigen::VectorXd>& embeddings,
                     int k);

// Scores every embedding; equivalent to calling knn_diversity per index but
// batched through matrix products.
std::vector<double> score_all(const std::vector<Eigen::VectorXd>& embeddings, int k);

}  // namespace helix
