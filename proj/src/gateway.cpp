#include "evolve/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <istream>

#include <nlohmann/json.hpp>

#include "evolve/error.hpp"
#include "text_util.hpp"

namespace evolve {

using nlohmann::ordered_json;

std::chrono::milliseconds RetryPolicy::delay_before(int attempt) const {
  const double factor = std::pow(multiplier, std::max(0, attempt - 2));
  const auto ms = static_cast<double>(initial_backoff.count()) * factor;
  return std::min(max_backoff, std::chrono::milliseconds(static_cast<std::int64_t>(ms)));
}

// ---------------------------------------------------------------------------
// Transcript

std::string transcript_line(const ChatExchange& ex, bool request) {
  ordered_json doc;
  doc["session"] = ex.session_id;
  doc["seq"] = ex.sequence;
  doc["kind"] = request ? "request" : "response";
  doc["model"] = ex.model;
  doc["text"] = request ? ex.prompt_text : ex.response_text;
  return doc.dump();
}

Transcript Transcript::parse(std::istream& in) {
  Transcript t;
  std::optional<ChatExchange> pending;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    ordered_json doc;
    try {
      doc = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || doc.size() != 5 || !doc.contains("session") || !doc["session"].is_string() ||
        !doc.contains("seq") || !doc["seq"].is_number_unsigned() || !doc.contains("kind") ||
        !doc["kind"].is_string() || !doc.contains("model") || !doc["model"].is_string() ||
        !doc.contains("text") || !doc["text"].is_string()) {
      throw SchemaError(line_no, "expected {session, seq, kind, model, text}");
    }
    const auto session = doc["session"].get<std::string>();
    const auto seq = doc["seq"].get<int>();
    const auto kind = doc["kind"].get<std::string>();

    if (kind == "request") {
      if (pending) throw SchemaError(line_no, "request without a response before it");
      const auto expected = static_cast<int>(t.by_session_[session].size());
      if (seq != expected) {
        throw SchemaError(line_no, "session " + session + " expected seq " + std::to_string(expected));
      }
      ChatExchange ex;
      ex.session_id = session;
      ex.sequence = seq;
      ex.model = doc["model"].get<std::string>();
      ex.prompt_text = doc["text"].get<std::string>();
      if (ex.prompt_text.empty()) throw SchemaError(line_no, "empty prompt text");
      pending = std::move(ex);
    } else if (kind == "response") {
      if (!pending || pending->session_id != session || pending->sequence != seq) {
        throw SchemaError(line_no, "response does not follow its request");
      }
      pending->response_text = doc["text"].get<std::string>();
      t.by_session_[session].push_back(std::move(*pending));
      pending.reset();
    } else {
      throw SchemaError(line_no, "kind must be request or response");
    }
  }
  if (pending) throw SchemaError(line_no + 1, "transcript ends with an unanswered request");
  return t;
}

Transcript Transcript::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileMissing, "cannot read transcript " + path.string());
  return parse(in);
}

const std::vector<ChatExchange>& Transcript::exchanges(std::string_view session_id) const {
  static const std::vector<ChatExchange> kEmpty;
  auto it = by_session_.find(session_id);
  return it == by_session_.end() ? kEmpty : it->second;
}

std::vector<std::string> Transcript::sessions() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : by_session_) out.push_back(id);
  return out;
}

std::size_t Transcript::size() const noexcept {
  std::size_t n = 0;
  for (const auto& [_, v] : by_session_) n += v.size();
  return n;
}

TranscriptWriter::TranscriptWriter(const std::filesystem::path& path, bool truncate)
    : out_(path, truncate ? std::ios::trunc : std::ios::app) {
  if (!out_) throw Error(ErrorCode::WriteFailure, "cannot open transcript " + path.string());
}

void TranscriptWriter::append(const ChatExchange& ex) {
  std::lock_guard lock(mu_);
  out_ << transcript_line(ex, true) << '\n' << transcript_line(ex, false) << '\n';
  out_.flush();
  if (!out_) throw Error(ErrorCode::WriteFailure, "transcript write failed");
}

// ---------------------------------------------------------------------------
// Gateways

LiveGateway::LiveGateway(std::shared_ptr<ChatProvider> provider, std::string model,
                         std::shared_ptr<TranscriptWriter> recorder)
    : provider_(std::move(provider)), model_(std::move(model)), recorder_(std::move(recorder)) {}

ChatExchange LiveGateway::complete(std::string_view session_id, const RenderedPrompt& prompt) {
  int seq = 0;
  {
    std::lock_guard lock(mu_);
    auto it = next_seq_.find(session_id);
    if (it != next_seq_.end()) seq = it->second;
  }

  const auto start = std::chrono::steady_clock::now();
  auto reply = provider_->send(model_, prompt.text);
  const auto elapsed = std::chrono::steady_clock::now() - start;

  ChatExchange ex;
  ex.session_id = std::string(session_id);
  ex.sequence = seq;
  ex.model = model_;
  ex.prompt_text = prompt.text;
  ex.response_text = std::move(reply.text);
  ex.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
  ex.token_usage = reply.usage;
  {
    std::lock_guard lock(mu_);
    next_seq_[ex.session_id] = seq + 1;
  }
  if (recorder_) recorder_->append(ex);
  return ex;
}

ReplayGateway::ReplayGateway(Transcript transcript, ReplayMatch match)
    : transcript_(std::move(transcript)), match_(match) {}

ChatExchange ReplayGateway::complete(std::string_view session_id, const RenderedPrompt& prompt) {
  std::lock_guard lock(mu_);
  const auto& recorded = transcript_.exchanges(session_id);
  auto& cursor = cursor_[std::string(session_id)];
  if (cursor >= recorded.size()) {
    throw Error(ErrorCode::ReplayExhausted, "session " + std::string(session_id) + " has " +
                                                std::to_string(recorded.size()) + " recorded exchanges");
  }
  const auto& ex = recorded[cursor];
  if (match_ == ReplayMatch::Strict && ex.prompt_text != prompt.text) {
    throw Error(ErrorCode::ReplayDivergence,
                "session " + std::string(session_id) + " seq " + std::to_string(cursor) + " prompt differs");
  }
  ++cursor;
  return ex;
}

// ---------------------------------------------------------------------------
// Code extraction

ExtractedCode extract_code(std::string_view response) {
  constexpr std::string_view kFence = "```";
  auto pos = response.find(kFence);
  if (pos == std::string_view::npos) {
    const auto trimmed = detail::trim(response);
    if (trimmed.find('{') != std::string_view::npos) {
      return {std::string(trimmed), std::nullopt, ExtractedCode::Origin::WholeResponse};
    }
    throw Error(ErrorCode::NoCodeFound, "response contains no code");
  }

  while (pos != std::string_view::npos) {
    const auto line_end = response.find('\n', pos + kFence.size());
    if (line_end == std::string_view::npos) break;
    auto info = detail::trim(response.substr(pos + kFence.size(), line_end - pos - kFence.size()));
    if (auto space = info.find_first_of(" \t"); space != std::string_view::npos) info = info.substr(0, space);

    const auto close = response.find(kFence, line_end + 1);
    auto body = response.substr(line_end + 1,
                                close == std::string_view::npos ? std::string_view::npos : close - line_end - 1);
    if (close != std::string_view::npos) {
      // Drop the indentation and newline that precede the closing fence.
      auto last_nl = body.find_last_of('\n');
      if (last_nl != std::string_view::npos && detail::trim(body.substr(last_nl)).empty()) {
        body = body.substr(0, last_nl);
        if (!body.empty() && body.back() == '\r') body.remove_suffix(1);
      } else if (detail::trim(body).empty()) {
        body = {};
      }
    }
    if (!detail::trim(body).empty()) {
      ExtractedCode code{std::string(body), std::nullopt, ExtractedCode::Origin::FencedBlock};
      if (!info.empty()) code.fence_language_tag = std::string(info);
      return code;
    }
    if (close == std::string_view::npos) break;
    pos = response.find(kFence, close + kFence.size());
  }
  throw Error(ErrorCode::NoCodeFound, "fenced blocks are empty");
}

}  // namespace evolve
