#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "evolve/error.hpp"
#include "evolve/gateway.hpp"

namespace evolve {
namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing slash
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::TransportError, "base URL needs a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out{url.substr(0, path_start), path_start == std::string::npos ? "" : url.substr(path_start)};
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

}  // namespace

HttpChatProvider::HttpChatProvider(HttpProviderConfig config) : config_(std::move(config)) {}

std::string HttpChatProvider::request_body(const std::string& model, const std::string& prompt) {
  nlohmann::ordered_json body;
  body["model"] = model;
  body["messages"] = nlohmann::ordered_json::array({{{"role", "user"}, {"content", prompt}}});
  return body.dump();
}

ProviderReply HttpChatProvider::parse_response_body(const std::string& body) {
  try {
    const auto doc = nlohmann::json::parse(body);
    const auto& message = doc.at("choices").at(0).at("message");
    ProviderReply reply;
    if (message.contains("content") && message["content"].is_string()) {
      reply.text = message["content"].get<std::string>();
    }
    if (doc.contains("usage") && doc["usage"].is_object()) {
      const auto& u = doc["usage"];
      reply.usage = TokenUsage{u.value("prompt_tokens", 0), u.value("completion_tokens", 0)};
    }
    return reply;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::TransportError, std::string("unexpected completion body: ") + e.what());
  }
}

ProviderReply HttpChatProvider::send(const std::string& model, const std::string& prompt) {
  const auto url = split_url(config_.base_url);
  httplib::Client client(url.origin);
  if (!client.is_valid()) throw Error(ErrorCode::TransportError, "unsupported base URL " + config_.base_url);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);

  const httplib::Headers headers{{"Authorization", "Bearer " + config_.api_key}};
  const auto body = request_body(model, prompt);
  const auto path = url.prefix + "/chat/completions";

  std::string last_failure;
  for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
    if (attempt > 1) std::this_thread::sleep_for(config_.retry.delay_before(attempt));
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_failure = "network error: " + httplib::to_string(res.error());
      continue;
    }
    const int status = res->status;
    if (status == 401 || status == 403) {
      throw Error(ErrorCode::AuthError, "HTTP " + std::to_string(status));
    }
    if (status >= 200 && status < 300) return parse_response_body(res->body);
    last_failure = "HTTP " + std::to_string(status) + ": " + res->body.substr(0, 200);
    if (status != 429 && status < 500) throw Error(ErrorCode::TransportError, last_failure);
  }
  throw Error(ErrorCode::TransportError, "gave up after " + std::to_string(config_.retry.max_attempts) +
                                             " attempts; last: " + last_failure);
}

}  // namespace evolve
