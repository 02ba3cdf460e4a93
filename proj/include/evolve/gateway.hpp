#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evolve/prompts.hpp"

namespace evolve {

inline constexpr std::string_view kDefaultModel = "gpt-4-0613";
inline constexpr std::string_view kApiKeyEnv = "EVOLVE_API_KEY";

struct TokenUsage {
  int prompt_tokens = 0;
  int completion_tokens = 0;

  bool operator==(const TokenUsage&) const = default;
};

struct ChatExchange {
  std::string session_id;
  int sequence = 0;
  std::string model;
  std::string prompt_text;
  std::string response_text;
  std::int64_t latency_ms = 0;
  std::optional<TokenUsage> token_usage;
};

struct ProviderReply {
  std::string text;
  std::optional<TokenUsage> usage;
};

/// One single-turn chat request. Implementations throw Error{TransportError}
/// or Error{AuthError}.
class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual ProviderReply send(const std::string& model, const std::string& prompt) = 0;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{8000};

  std::chrono::milliseconds delay_before(int attempt) const;  // attempt is 1-based, >= 2
};

struct HttpProviderConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  std::chrono::seconds timeout{120};
  RetryPolicy retry;
};

/// Chat-completion over HTTP(S). The request carries only `model` and one
/// user message; temperature is left to the provider default. Network
/// failures, 429 and 5xx are retried with exponential backoff; 401/403 fail
/// immediately with AuthError.
class HttpChatProvider : public ChatProvider {
 public:
  explicit HttpChatProvider(HttpProviderConfig config);
  ProviderReply send(const std::string& model, const std::string& prompt) override;

  static std::string request_body(const std::string& model, const std::string& prompt);
  static ProviderReply parse_response_body(const std::string& body);

 private:
  HttpProviderConfig config_;
};

// ---------------------------------------------------------------------------
// Transcripts

/// Line-delimited transcript: each exchange is a `request` line immediately
/// followed by its `response` line with the same `seq`.
class Transcript {
 public:
  /// Throws SchemaError on malformed or out-of-order lines.
  static Transcript parse(std::istream& in);
  static Transcript load(const std::filesystem::path& path);

  const std::vector<ChatExchange>& exchanges(std::string_view session_id) const;
  std::vector<std::string> sessions() const;
  std::size_t size() const noexcept;

 private:
  std::map<std::string, std::vector<ChatExchange>, std::less<>> by_session_;
};

std::string transcript_line(const ChatExchange& ex, bool request);

/// Appends exchanges to a transcript file. Each request/response pair is
/// written under one lock so pairs from concurrent sessions never split.
class TranscriptWriter {
 public:
  explicit TranscriptWriter(const std::filesystem::path& path, bool truncate = true);
  void append(const ChatExchange& ex);

 private:
  std::mutex mu_;
  std::ofstream out_;
};

// ---------------------------------------------------------------------------
// Gateway

/// Sequence numbers are per session and contiguous from 0. Safe for
/// concurrent use by distinct sessions.
class Gateway {
 public:
  virtual ~Gateway() = default;
  virtual ChatExchange complete(std::string_view session_id, const RenderedPrompt& prompt) = 0;
};

class LiveGateway : public Gateway {
 public:
  /// `recorder` may be null (plain live mode).
  LiveGateway(std::shared_ptr<ChatProvider> provider, std::string model = std::string(kDefaultModel),
              std::shared_ptr<TranscriptWriter> recorder = nullptr);

  ChatExchange complete(std::string_view session_id, const RenderedPrompt& prompt) override;

 private:
  std::shared_ptr<ChatProvider> provider_;
  std::string model_;
  std::shared_ptr<TranscriptWriter> recorder_;
  std::mutex mu_;
  std::map<std::string, int, std::less<>> next_seq_;
};

enum class ReplayMatch {
  Strict,      // recorded prompt must equal the rendered prompt
  SequenceOnly,
};

class ReplayGateway : public Gateway {
 public:
  explicit ReplayGateway(Transcript transcript, ReplayMatch match = ReplayMatch::Strict);

  /// Throws Error{ReplayExhausted} or Error{ReplayDivergence}.
  ChatExchange complete(std::string_view session_id, const RenderedPrompt& prompt) override;

 private:
  Transcript transcript_;
  ReplayMatch match_;
  std::mutex mu_;
  std::map<std::string, std::size_t, std::less<>> cursor_;
};

// ---------------------------------------------------------------------------
// Response parsing

struct ExtractedCode {
  enum class Origin { FencedBlock, WholeResponse };
  std::string text;
  std::optional<std::string> fence_language_tag;
  Origin origin = Origin::FencedBlock;
};

/// First non-blank fenced block, else the whole trimmed response when it
/// contains `{`. Throws Error{NoCodeFound}.
ExtractedCode extract_code(std::string_view response_text);

}  // namespace evolve
