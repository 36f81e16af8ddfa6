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

#ifndef PERKWE_SERVICE_HPP_
#define PERKWE_SERVICE_HPP_

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "perkwe/conversation.hpp"
#include "perkwe/pipeline.hpp"

namespace httplib {
class Server;
}

namespace perkwe {

// A service-level failure with the HTTP status it maps to.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, const std::string& message) : std::runtime_error(message), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

// In-memory chat sessions over one pipeline. Answers feed the history of
// later turns (self-predicted history). Each session is guarded by its own
// mutex, so one session handles one question at a time while different
// sessions proceed in parallel.
class ChatService {
 public:
  struct Options {
    std::filesystem::path transcript_dir;  // empty: no JSONL transcript dump
  };

  ChatService(std::shared_ptr<const Pipeline> pipeline, const Dataset* documents = nullptr,
              Options options = {});

  // {"document_text": ...} or {"document_id": ...} -> {"session_id": ...}
  nlohmann::json create_session(const nlohmann::json& body);
  // {"question": ...} -> {"answer", "keywords": [{term, score}], "unanswerable", "turn_index"}
  nlohmann::json ask(const std::string& session_id, const nlohmann::json& body);
  // Full transcript with traces.
  nlohmann::json transcript(const std::string& session_id) const;

  std::size_t session_count() const;

 private:
  struct Session {
    std::string id;
    std::string document_id;
    std::string document_text;
    std::vector<TurnTrace> turns;
    mutable std::mutex mu;
  };

  std::shared_ptr<Session> find(const std::string& id) const;
  std::string new_session_id();

  std::shared_ptr<const Pipeline> pipeline_;
  const Dataset* documents_;
  Options options_;
  mutable std::shared_mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::mutex id_mu_;
  std::uint64_t id_state_;
};

// Registers the REST routes (plus CORS headers) on `server`:
//   GET  /api/health
//   POST /api/sessions
//   POST /api/sessions/{id}/ask
//   GET  /api/sessions/{id}
void register_routes(httplib::Server& server, ChatService& service);

}  // namespace perkwe

#endif  // PERKWE_SERVICE_HPP_
