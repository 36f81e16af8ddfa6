// Copyright 2026 The PerkwE Authors.
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

#include "perkwe/gateway.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <thread>

#include "httplib.h"
#include "perkwe/errors.hpp"
#include "perkwe/text.hpp"

namespace perkwe {

using nlohmann::json;

std::string_view to_string(GatewayErrorKind kind) {
  switch (kind) {
    case GatewayErrorKind::kNetwork:
      return "network";
    case GatewayErrorKind::kAuthentication:
      return "authentication";
    case GatewayErrorKind::kRateLimit:
      return "rate_limit";
    case GatewayErrorKind::kMalformedResponse:
      return "malformed_response";
    case GatewayErrorKind::kTimeout:
      return "timeout";
  }
  return "unknown";
}

GenerationResult Backend::generate(const GenerationRequest& request, const GenerationParams& params) {
  const auto start = std::chrono::steady_clock::now();
  std::string text = complete(request, params);
  GenerationResult result;
  result.backend = name();
  if (codepoint_length(text) > params.max_output_chars) {
    text = utf8_prefix(text, params.max_output_chars);
    result.truncated = true;
  }
  result.text = std::move(text);
  result.latency = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::steady_clock::now() - start);
  return result;
}

std::unique_ptr<EchoGoldBackend> EchoGoldBackend::from_dataset(const Dataset& dataset) {
  std::map<TurnKey, std::string> fixture;
  for (const auto& conv : dataset.conversations) {
    for (const auto& turn : conv.turns) fixture[{conv.id, turn.index}] = turn.gold_answers.front();
  }
  return std::make_unique<EchoGoldBackend>(std::move(fixture));
}

std::string EchoGoldBackend::complete(const GenerationRequest& request, const GenerationParams&) {
  if (!request.turn) throw FixtureError("echo_gold backend needs a dataset turn");
  auto it = fixture_.find(*request.turn);
  if (it == fixture_.end()) {
    throw FixtureError("echo_gold backend has no gold answer for " + request.turn->conversation_id +
                       " turn " + std::to_string(request.turn->turn_index));
  }
  return it->second;
}

std::string prompt_hash(std::string_view rendered) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : rendered) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void CannedBackend::add_by_hash(std::string hash, std::string reply) {
  by_hash_[std::move(hash)] = std::move(reply);
}

void CannedBackend::add_by_question(std::string_view question, std::string reply) {
  by_question_[normalize_text(question).str()] = std::move(reply);
}

std::unique_ptr<CannedBackend> CannedBackend::from_json(const json& script) {
  if (!script.is_object()) throw ConfigError("canned script must be a JSON object");
  auto backend = std::make_unique<CannedBackend>();
  for (const auto& [key, value] : script.items()) {
    if (key == "by_hash" || key == "by_question") {
      if (!value.is_object()) throw ConfigError("canned script: \"" + key + "\" must be an object");
      for (const auto& [k, reply] : value.items()) {
        if (!reply.is_string()) throw ConfigError("canned script: replies must be strings");
        if (key == "by_hash") {
          backend->add_by_hash(k, reply.get<std::string>());
        } else {
          backend->add_by_question(k, reply.get<std::string>());
        }
      }
    } else if (key == "default") {
      if (!value.is_string()) throw ConfigError("canned script: \"default\" must be a string");
      backend->set_default(value.get<std::string>());
    } else {
      throw ConfigError("canned script: unknown key \"" + key + "\"");
    }
  }
  return backend;
}

std::unique_ptr<CannedBackend> CannedBackend::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open canned script: " + path);
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError("canned script " + path + ": " + e.what());
  }
}

std::unique_ptr<CannedBackend> CannedBackend::fixed(std::string reply) {
  auto backend = std::make_unique<CannedBackend>();
  backend->set_default(std::move(reply));
  return backend;
}

std::string CannedBackend::complete(const GenerationRequest& request, const GenerationParams&) {
  if (auto it = by_hash_.find(prompt_hash(request.prompt.rendered)); it != by_hash_.end()) {
    return it->second;
  }
  auto q = request.prompt.sections.find(Slot::kQuestion);
  if (q != request.prompt.sections.end()) {
    if (auto it = by_question_.find(normalize_text(q->second).str()); it != by_question_.end()) {
      return it->second;
    }
  }
  if (default_reply_) return *default_reply_;
  throw FixtureError("canned backend has no reply for prompt " + prompt_hash(request.prompt.rendered));
}

RemoteBackend::RemoteBackend(RemoteConfig config)
    : config_(std::move(config)), in_flight_(std::max(1, config_.max_concurrency)) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(config_.base_url, m, kUrl)) {
    throw ConfigError("backend.base_url must look like http(s)://host[:port][/prefix], got \"" +
                      config_.base_url + "\"");
  }
  scheme_host_port_ = m[1].str();
  path_prefix_ = m[2].str();
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

json RemoteBackend::build_request(const Prompt& prompt, const GenerationParams& params) {
  // max_tokens is an upper bound; output is cut to max_output_chars afterwards.
  return {{"model", params.model_id},
          {"messages", json::array({{{"role", "user"}, {"content", prompt.rendered}}})},
          {"temperature", params.temperature},
          {"max_tokens", params.max_output_chars}};
}

std::string RemoteBackend::parse_response(std::string_view body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw GatewayError(GatewayErrorKind::kMalformedResponse, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
    throw GatewayError(GatewayErrorKind::kMalformedResponse, "response has no choices");
  }
  const json& choice = j["choices"][0];
  if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object() ||
      !choice["message"].contains("content") || !choice["message"]["content"].is_string()) {
    throw GatewayError(GatewayErrorKind::kMalformedResponse, "first choice has no message content");
  }
  std::string content = choice["message"]["content"].get<std::string>();
  if (normalize_text(content).empty()) {
    throw GatewayError(GatewayErrorKind::kMalformedResponse, "empty message content");
  }
  return content;
}

GatewayErrorKind RemoteBackend::classify_status(int status) {
  if (status == 401 || status == 403) return GatewayErrorKind::kAuthentication;
  if (status == 429) return GatewayErrorKind::kRateLimit;
  if (status == 408 || status == 504) return GatewayErrorKind::kTimeout;
  if (status >= 500) return GatewayErrorKind::kNetwork;
  return GatewayErrorKind::kMalformedResponse;
}

std::string RemoteBackend::attempt(const GenerationRequest& request, const GenerationParams& params) {
  httplib::Client client(scheme_host_port_);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(params.timeout);
  const auto sec = static_cast<time_t>(timeout.count() / 1000000);
  const auto usec = static_cast<time_t>(timeout.count() % 1000000);
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);

  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const std::string body = build_request(request.prompt, params).dump();

  const auto start = std::chrono::steady_clock::now();
  auto res = client.Post(path_prefix_ + "/v1/chat/completions", headers, body, "application/json");
  if (!res) {
    const auto err = res.error();
    const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                           std::chrono::steady_clock::now() - start >= params.timeout;
    throw GatewayError(timed_out ? GatewayErrorKind::kTimeout : GatewayErrorKind::kNetwork,
                       httplib::to_string(err) + " (" + scheme_host_port_ + ")");
  }
  if (res->status < 200 || res->status >= 300) {
    throw GatewayError(classify_status(res->status),
                       "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
  }
  return parse_response(res->body);
}

std::string RemoteBackend::complete(const GenerationRequest& request, const GenerationParams& params) {
  const int attempts = 1 + std::max(0, params.retries);
  for (int i = 0;; ++i) {
    try {
      in_flight_.acquire();
      struct Release {
        std::counting_semaphore<>& sem;
        ~Release() { sem.release(); }
      } release{in_flight_};
      return attempt(request, params);
    } catch (const GatewayError& e) {
      if (!e.retryable() || i + 1 >= attempts) throw;
    }
    std::this_thread::sleep_for(params.backoff * (1 << i));
  }
}

std::string canonicalize_answer(std::string_view raw) {
  static const std::u32string kStrip = U" \t\r\n\"\'`\u201C\u201D\u2018\u2019\u00AB\u00BB\u00A0";
  static const std::string sentinel = normalize_text(kUnanswerable).str();
  std::u32string cps = decode_utf8(raw);
  std::size_t begin = 0;
  std::size_t end = cps.size();
  while (begin < end && kStrip.find(cps[begin]) != std::u32string::npos) ++begin;
  while (end > begin && kStrip.find(cps[end - 1]) != std::u32string::npos) --end;
  std::string out = encode_utf8(std::u32string_view(cps).substr(begin, end - begin));
  if (normalize_text(out).str().find(sentinel) != std::string::npos) return std::string(kUnanswerable);
  return out;
}

}  // namespace perkwe
