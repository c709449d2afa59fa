#include "helix/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "helix/core_model.hpp"

namespace helix {

std::string canonicalize(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') continue;
    if (c == '\n') {
      lines.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  lines.push_back(std::move(cur));

  for (auto& line : lines) {
    std::size_t end = line.size();
    while (end > 0 && (line[end - 1] == ' ' || line[end - 1] == '\t' || line[end - 1] == '\r')) {
      --end;
    }
    line.resize(end);
  }

  std::vector<std::string> kept;
  bool prev_blank = false;
  for (auto& line : lines) {
    const bool blank = line.empty();
    if (blank && prev_blank) continue;
    kept.push_back(std::move(line));
    prev_blank = blank;
  }
  while (!kept.empty() && kept.front().empty()) kept.erase(kept.begin());
  while (!kept.empty() && kept.back().empty()) kept.pop_back();

  std::string out;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (i) out.push_back('\n');
    out += kept[i];
  }
  return out;
}

namespace {

class HashedNgramProvider final : public EmbeddingProvider {
 public:
  explicit HashedNgramProvider(int dimension) : dimension_(dimension) {}

  Eigen::VectorXd embed_raw(const std::string& text) override {
    // Hash the canonical form so formatting-only edits do not read as novelty.
    const std::string canon = canonicalize(text);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dimension_);
    if (canon.size() >= 3) {
      for (std::size_t i = 0; i + 3 <= canon.size(); ++i) {
        std::uint64_t h = 14695981039346656037ull;
        for (std::size_t j = i; j < i + 3; ++j) {
          h ^= static_cast<unsigned char>(canon[j]);
          h *= 1099511628211ull;
        }
        v[static_cast<int>(h % static_cast<std::uint64_t>(dimension_))] += 1.0;
      }
    }
    return v;
  }

  int dimension() const override { return dimension_; }

 private:
  int dimension_;
};

}  // namespace

std::unique_ptr<EmbeddingProvider> make_hashed_ngram_provider(int dimension) {
  if (dimension < 1) throw ConfigError("embedding dimension must be >= 1");
  return std::make_unique<HashedNgramProvider>(dimension);
}

Eigen::VectorXd embed(EmbeddingProvider& provider, const std::string& content) {
  Eigen::VectorXd v = provider.embed_raw(content);
  if (v.size() != provider.dimension()) {
    throw EmbeddingDimensionError("provider returned " + std::to_string(v.size()) +
                                  " dims, expected " + std::to_string(provider.dimension()));
  }
  const double norm = v.norm();
  if (norm == 0.0 || !std::isfinite(norm)) {
    v.setZero();
    v[0] = 1.0;
    return v;
  }
  return v / norm;
}

namespace {

// Mean of the m largest similarities, shared by both scoring paths.
double top_mean(std::vector<double>& sims, int m) {
  std::nth_element(sims.begin(), sims.begin() + (m - 1), sims.end(), std::greater<double>());
  double sum = 0.0;
  for (int i = 0; i < m; ++i) sum += sims[static_cast<std::size_t>(i)];
  return sum / static_cast<double>(m);
}

double diversity_from(std::vector<double>& sims, int k) {
  const int m = std::min<std::int64_t>(k, static_cast<std::int64_t>(sims.size()));
  if (m <= 0) return 1.0;
  const double d = 1.0 - top_mean(sims, m);
  return std::clamp(d, 0.0, 1.0);
}

}  // namespace

double knn_diversity(std::size_t target_index, const std::vector<Eigen::VectorXd>& embeddings,
                     int k) {
  if (target_index >= embeddings.size()) {
    throw UnknownIdError("embedding index " + std::to_string(target_index) + " out of range");
  }
  if (k < 1) throw ConfigError("k must be >= 1");
  std::vector<double> sims;
  sims.reserve(embeddings.size() - 1);
  const Eigen::VectorXd& target = embeddings[target_index];
  for (std::size_t j = 0; j < embeddings.size(); ++j) {
    if (j == target_index) continue;
    sims.push_back(target.dot(embeddings[j]));
  }
  return diversity_from(sims, k);
}

std::vector<double> score_all(const std::vector<Eigen::VectorXd>& embeddings, int k) {
  if (k < 1) throw ConfigError("k must be >= 1");
  const std::size_t n = embeddings.size();
  std::vector<double> out(n, 1.0);
  if (n <= 1) return out;

  const Eigen::Index dim = embeddings[0].size();
  Eigen::MatrixXd all(static_cast<Eigen::Index>(n), dim);
  for (std::size_t i = 0; i < n; ++i) all.row(static_cast<Eigen::Index>(i)) = embeddings[i];

  // Row blocks keep the similarity buffer bounded for large datasets.
  const std::size_t block = 512;
  std::vector<double> sims;
  for (std::size_t start = 0; start < n; start += block) {
    const std::size_t rows = std::min(block, n - start);
    Eigen::MatrixXd s = all.middleRows(static_cast<Eigen::Index>(start),
                                       static_cast<Eigen::Index>(rows)) *
                        all.transpose();
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t i = start + r;
      sims.clear();
      sims.reserve(n - 1);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        sims.push_back(s(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)));
      }
      out[i] = diversity_from(sims, k);
    }
  }
  return out;
}

std::unique_ptr<EmbeddingProvider> make_provider(const EmbeddingProviderSpec& spec) {
  if (spec.kind == EmbeddingKind::kHashedNgram) {
    return make_hashed_ngram_provider(spec.dimension);
  }
  return make_http_embedding_provider(spec, make_httplib_poster());
}

}  // namespace helix
