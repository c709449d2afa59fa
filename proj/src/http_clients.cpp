#include <chrono>
#include <cstdlib>
#include <nlohmann/json.hpp>
#include <thread>

#include "helix/diversity.hpp"
#include "helix/mutators.hpp"

// Last: it drags in <resolv.h>, whose `_res` macro mangles Eigen headers.
#include <httplib.h>

namespace helix {

namespace {

struct SplitUrl {
  std::string base;  // scheme://host[:port]
  std::string path;  // /path or /
};

SplitUrl split_url(const std::string& url) {
  const std::size_t scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw ConfigError("endpoint '" + url + "' has no scheme");
  }
  const std::size_t slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

class HttplibPoster final : public HttpPoster {
 public:
  explicit HttplibPoster(double timeout_seconds) : timeout_seconds_(timeout_seconds) {}

  HttpResponse post(const std::string& url, const std::string& body,
                    const std::vector<std::pair<std::string, std::string>>& headers) override {
    const SplitUrl split = split_url(url);
    httplib::Client client(split.base);
    client.set_connection_timeout(std::chrono::milliseconds(
        static_cast<int>(timeout_seconds_ * 1000)));
    client.set_read_timeout(std::chrono::milliseconds(static_cast<int>(timeout_seconds_ * 1000)));
    httplib::Headers hs;
    for (const auto& [k, v] : headers) hs.emplace(k, v);
    httplib::Result res = client.Post(split.path, hs, body, "application/json");
    if (!res) return {0, httplib::to_string(res.error())};
    return {res->status, res->body};
  }

 private:
  double timeout_seconds_;
};

std::string env_or(const std::string& explicit_value, const char* var) {
  if (!explicit_value.empty()) return explicit_value;
  const char* env = std::getenv(var);
  return env ? env : "";
}

// Shared retry loop: transport failures and non-2xx responses both retry
// with exponential backoff; whatever the caller does with the body is its
// own business.
HttpResponse post_with_retries(HttpPoster& poster, const std::string& url,
                               const std::string& body,
                               const std::vector<std::pair<std::string, std::string>>& headers,
                               int retries, double backoff_initial_ms,
                               std::string& last_error) {
  HttpResponse res;
  for (int attempt = 0; attempt <= retries; ++attempt) {
    if (attempt > 0 && backoff_initial_ms > 0.0) {
      const double ms = backoff_initial_ms * static_cast<double>(1 << (attempt - 1));
      std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(ms));
    }
    res = poster.post(url, body, headers);
    if (res.status >= 200 && res.status < 300) return res;
    last_error = res.status == 0 ? ("transport error: " + res.body)
                                 : ("HTTP " + std::to_string(res.status));
  }
  res.status = -1;
  return res;
}

class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  HttpEmbeddingProvider(EmbeddingProviderSpec spec, std::shared_ptr<HttpPoster> poster)
      : spec_(std::move(spec)), poster_(std::move(poster)) {
    spec_.endpoint = env_or(spec_.endpoint, "HELIX_EMBED_URL");
    if (spec_.endpoint.empty()) {
      throw ConfigError("http embedding provider needs an endpoint (or HELIX_EMBED_URL)");
    }
  }

  Eigen::VectorXd embed_raw(const std::string& text) override {
    const nlohmann::json request = {{"model", spec_.model_name},
                                    {"input", nlohmann::json::array({text})}};
    std::string last_error;
    const HttpResponse res = post_with_retries(*poster_, spec_.endpoint, request.dump(), {},
                                               spec_.retries, spec_.backoff_initial_ms,
                                               last_error);
    if (res.status < 0) {
      throw ProviderUnavailableError("embedding endpoint " + spec_.endpoint + " unavailable after " +
                                     std::to_string(spec_.retries) + " retries (" + last_error +
                                     ")");
    }
    try {
      const nlohmann::json body = nlohmann::json::parse(res.body);
      const auto& vec = body.at("data").at(0).at("embedding");
      Eigen::VectorXd out(static_cast<Eigen::Index>(vec.size()));
      Eigen::Index i = 0;
      for (const auto& v : vec) out[i++] = v.get<double>();
      return out;
    } catch (const nlohmann::json::exception& e) {
      throw ProviderUnavailableError(std::string("embedding response unparseable: ") + e.what());
    }
  }

  int dimension() const override { return spec_.dimension; }

 private:
  EmbeddingProviderSpec spec_;
  std::shared_ptr<HttpPoster> poster_;
};

class HttpChatTransport final : public ChatTransport {
 public:
  HttpChatTransport(const LlmEndpointConfig& config, std::shared_ptr<HttpPoster> poster)
      : poster_(std::move(poster)) {
    endpoint_ = env_or(config.endpoint, "HELIX_LLM_URL");
    if (endpoint_.empty()) {
      throw ConfigError("llm mutator needs an endpoint (or HELIX_LLM_URL)");
    }
    api_key_ = env_or(config.api_key, "HELIX_LLM_KEY");
    retries_ = config.retries;
    backoff_initial_ms_ = config.backoff_initial_ms;
  }

  std::string complete(const std::string& request_body) override {
    std::vector<std::pair<std::string, std::string>> headers;
    if (!api_key_.empty()) headers.emplace_back("Authorization", "Bearer " + api_key_);
    std::string last_error;
    const HttpResponse res = post_with_retries(*poster_, endpoint_, request_body, headers,
                                               retries_, backoff_initial_ms_, last_error);
    if (res.status < 0) {
      throw EndpointUnavailableError("chat endpoint " + endpoint_ + " unavailable after " +
                                     std::to_string(retries_) + " retries (" + last_error + ")");
    }
    return res.body;
  }

 private:
  std::string endpoint_;
  std::string api_key_;
  int retries_ = 2;
  double backoff_initial_ms_ = 250.0;
  std::shared_ptr<HttpPoster> poster_;
};

}  // namespace

std::shared_ptr<HttpPoster> make_httplib_poster(double timeout_seconds) {
  return std::make_shared<HttplibPoster>(timeout_seconds);
}

std::unique_ptr<EmbeddingProvider> make_http_embedding_provider(
    EmbeddingProviderSpec spec, std::shared_ptr<HttpPoster> poster) {
  return std::make_unique<HttpEmbeddingProvider>(std::move(spec), std::move(poster));
}

std::unique_ptr<ChatTransport> make_http_chat_transport(const LlmEndpointConfig& config,
                                                        std::shared_ptr<HttpPoster> poster) {
  return std::make_unique<HttpChatTransport>(config, std::move(poster));
}

}  // namespace helix
