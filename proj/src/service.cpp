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

#include "perkwe/service.hpp"

#include <cstdio>
#include <fstream>
#include <random>

#include "httplib.h"
#include "perkwe/errors.hpp"
#include "perkwe/text.hpp"

namespace perkwe {

using nlohmann::json;

ChatService::ChatService(std::shared_ptr<const Pipeline> pipeline, const Dataset* documents,
                         Options options)
    : pipeline_(std::move(pipeline)), documents_(documents), options_(std::move(options)) {
  if (!pipeline_) throw ConfigError("chat service needs a pipeline");
  std::random_device rd;
  id_state_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  if (!options_.transcript_dir.empty()) std::filesystem::create_directories(options_.transcript_dir);
}

std::string ChatService::new_session_id() {
  std::lock_guard lock(id_mu_);
  // splitmix64
  std::uint64_t z = (id_state_ += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  z ^= z >> 31;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(z));
  return buf;
}

std::shared_ptr<ChatService::Session> ChatService::find(const std::string& id) const {
  std::shared_lock lock(sessions_mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(404, "unknown session " + id);
  return it->second;
}

std::size_t ChatService::session_count() const {
  std::shared_lock lock(sessions_mu_);
  return sessions_.size();
}

json ChatService::create_session(const json& body) {
  if (!body.is_object()) throw ServiceError(400, "request body must be a JSON object");
  auto session = std::make_shared<Session>();
  if (auto it = body.find("document_text"); it != body.end()) {
    if (!it->is_string() || normalize_text(it->get<std::string>()).empty()) {
      throw ServiceError(400, "document_text must be a non-empty string");
    }
    session->document_text = it->get<std::string>();
  } else if (auto id = body.find("document_id"); id != body.end()) {
    if (!id->is_string()) throw ServiceError(400, "document_id must be a string");
    const std::string wanted = id->get<std::string>();
    if (documents_) {
      for (const auto& conv : documents_->conversations) {
        if (conv.document.id == wanted) {
          session->document_id = wanted;
          session->document_text = conv.document.text;
          break;
        }
      }
    }
    if (session->document_text.empty()) throw ServiceError(404, "unknown document " + wanted);
  } else {
    throw ServiceError(400, "provide document_text or document_id");
  }
  session->id = new_session_id();
  {
    std::unique_lock lock(sessions_mu_);
    sessions_[session->id] = session;
  }
  return {{"session_id", session->id}};
}

json ChatService::ask(const std::string& session_id, const json& body) {
  auto session = find(session_id);
  if (!body.is_object() || !body.contains("question") || !body["question"].is_string() ||
      normalize_text(body["question"].get<std::string>()).empty()) {
    throw ServiceError(400, "question must be a non-empty string");
  }
  const std::string question = body["question"].get<std::string>();

  std::lock_guard lock(session->mu);
  const std::size_t turn_index = session->turns.size();
  const std::size_t max_history = pipeline_->config().max_history;
  HistoryView history;
  for (std::size_t t = turn_index - std::min(turn_index, max_history); t < turn_index; ++t) {
    history.entries.push_back({session->turns[t].question, session->turns[t].final_answer});
  }

  TurnTrace trace;
  try {
    trace = pipeline_->answer(session->document_text, history, question);
  } catch (const GatewayError& e) {
    throw ServiceError(502, e.what());
  } catch (const BudgetError& e) {
    throw ServiceError(422, e.what());
  } catch (const FixtureError& e) {
    throw ServiceError(502, e.what());
  }
  trace.conversation_id = session->id;
  trace.turn_index = turn_index;
  session->turns.push_back(trace);

  if (!options_.transcript_dir.empty()) {
    std::ofstream out(options_.transcript_dir / (session->id + ".jsonl"), std::ios::app);
    json line = trace.to_json();
    line["latency_ms"] = static_cast<double>(trace.latency.count()) / 1000.0;
    out << line.dump() << '\n';
  }

  json keywords = json::array();
  for (const auto& k : trace.extracted_keywords) keywords.push_back({{"term", k.term}, {"score", k.score}});
  return {{"answer", trace.final_answer},
          {"keywords", std::move(keywords)},
          {"unanswerable", is_unanswerable(trace.final_answer)},
          {"turn_index", turn_index}};
}

json ChatService::transcript(const std::string& session_id) const {
  auto session = find(session_id);
  std::lock_guard lock(session->mu);
  json turns = json::array();
  for (const auto& trace : session->turns) {
    json t = trace.to_json();
    t["unanswerable"] = is_unanswerable(trace.final_answer);
    t["latency_ms"] = static_cast<double>(trace.latency.count()) / 1000.0;
    turns.push_back(std::move(t));
  }
  return {{"session_id", session->id},
          {"document_id", session->document_id},
          {"document_text", session->document_text},
          {"turns", std::move(turns)}};
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    send_json(res, 200, fn());
  } catch (const ServiceError& e) {
    send_json(res, e.status(), {{"error", e.what()}});
  } catch (const json::exception& e) {
    send_json(res, 400, {{"error", std::string("invalid JSON: ") + e.what()}});
  } catch (const std::exception& e) {
    send_json(res, 500, {{"error", e.what()}});
  }
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  return json::parse(req.body);
}

}  // namespace

void register_routes(httplib::Server& server, ChatService& service) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}});
  });
  server.Post("/api/sessions", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return service.create_session(parse_body(req)); });
  });
  server.Post(R"(/api/sessions/([0-9a-f]+)/ask)",
              [&service](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] { return service.ask(req.matches[1], parse_body(req)); });
              });
  server.Get(R"(/api/sessions/([0-9a-f]+))", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return service.transcript(req.matches[1]); });
  });
}

}  // namespace perkwe
