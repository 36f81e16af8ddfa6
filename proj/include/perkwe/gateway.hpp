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

#ifndef PERKWE_GATEWAY_HPP_
#define PERKWE_GATEWAY_HPP_

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "json.hpp"
#include "perkwe/prompt.hpp"

namespace perkwe {

struct GenerationParams {
  double temperature = 0.0;
  std::size_t max_output_chars = 512;
  std::chrono::milliseconds timeout{60000};
  int retries = 2;
  std::string model_id;
  // First retry delay; doubles on every further attempt.
  std::chrono::milliseconds backoff{250};
};

struct GenerationResult {
  std::string text;
  std::string backend;
  std::chrono::microseconds latency{0};
  bool truncated = false;
};

enum class GatewayErrorKind { kNetwork, kAuthentication, kRateLimit, kMalformedResponse, kTimeout };

std::string_view to_string(GatewayErrorKind kind);

class GatewayError : public std::runtime_error {
 public:
  GatewayError(GatewayErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  GatewayErrorKind kind() const noexcept { return kind_; }
  // Network, rate-limit and timeout failures are worth another attempt.
  bool retryable() const noexcept {
    return kind_ == GatewayErrorKind::kNetwork || kind_ == GatewayErrorKind::kRateLimit ||
           kind_ == GatewayErrorKind::kTimeout;
  }

 private:
  GatewayErrorKind kind_;
};

// A local mock was asked about something it has no script for.
class FixtureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Identifies the dataset turn a request belongs to. Live chat has none.
struct TurnKey {
  std::string conversation_id;
  std::size_t turn_index = 0;

  auto operator<=>(const TurnKey&) const = default;
};

struct GenerationRequest {
  const Prompt& prompt;
  std::optional<TurnKey> turn;
};

// Backends are shared between threads; generate() must be safe to call
// concurrently.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  GenerationResult generate(const GenerationRequest& request, const GenerationParams& params);

 protected:
  virtual std::string complete(const GenerationRequest& request, const GenerationParams& params) = 0;
};

// Returns the first gold answer of the active turn.
class EchoGoldBackend : public Backend {
 public:
  explicit EchoGoldBackend(std::map<TurnKey, std::string> fixture) : fixture_(std::move(fixture)) {}
  static std::unique_ptr<EchoGoldBackend> from_dataset(const Dataset& dataset);

  std::string name() const override { return "echo_gold"; }

 protected:
  std::string complete(const GenerationRequest& request, const GenerationParams& params) override;

 private:
  std::map<TurnKey, std::string> fixture_;
};

// 64-bit FNV-1a over the UTF-8 bytes, printed as 16 lowercase hex digits.
std::string prompt_hash(std::string_view rendered);

// Scripted replies. Lookup order: hash of the rendered prompt, then the
// normalized question, then the default reply.
class CannedBackend : public Backend {
 public:
  CannedBackend() = default;

  void add_by_hash(std::string hash, std::string reply);
  void add_by_question(std::string_view question, std::string reply);
  void set_default(std::string reply) { default_reply_ = std::move(reply); }

  // {"by_hash": {hex: reply}, "by_question": {question: reply}, "default": reply}
  static std::unique_ptr<CannedBackend> from_json(const nlohmann::json& script);
  static std::unique_ptr<CannedBackend> from_file(const std::string& path);
  // Always answers `reply`.
  static std::unique_ptr<CannedBackend> fixed(std::string reply);

  std::string name() const override { return "canned"; }

 protected:
  std::string complete(const GenerationRequest& request, const GenerationParams& params) override;

 private:
  std::map<std::string, std::string> by_hash_;
  std::map<std::string, std::string> by_question_;
  std::optional<std::string> default_reply_;
};

struct RemoteConfig {
  std::string base_url = "http://localhost:8000";
  std::string api_key_env = "PERKWE_API_KEY";
  int max_concurrency = 4;
};

// Chat-completions JSON over HTTP(S):
//   POST {base_url}/v1/chat/completions
//   {"model", "messages": [{"role": "user", "content": rendered}],
//    "temperature", "max_tokens"}
// The reply is choices[0].message.content.
class RemoteBackend : public Backend {
 public:
  explicit RemoteBackend(RemoteConfig config);

  std::string name() const override { return "remote"; }
  const RemoteConfig& config() const noexcept { return config_; }

  static nlohmann::json build_request(const Prompt& prompt, const GenerationParams& params);
  // Throws GatewayError(kMalformedResponse) on anything unexpected.
  static std::string parse_response(std::string_view body);
  // Maps an HTTP status outside 2xx onto an error category.
  static GatewayErrorKind classify_status(int status);

 protected:
  std::string complete(const GenerationRequest& request, const GenerationParams& params) override;

 private:
  std::string attempt(const GenerationRequest& request, const GenerationParams& params);

  RemoteConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::counting_semaphore<> in_flight_;
};

// Strips surrounding whitespace and quote marks; any reply whose normalized
// form contains the unanswerable sentinel becomes exactly the sentinel.
std::string canonicalize_answer(std::string_view raw);

}  // namespace perkwe

#endif  // PERKWE_GATEWAY_HPP_
