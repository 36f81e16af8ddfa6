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

#include <filesystem>
#include <fstream>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "perkwe/pipeline.hpp"
#include "perkwe/service.hpp"

using namespace perkwe;
using nlohmann::json;

namespace {

const std::filesystem::path kMini = std::filesystem::path(PERKWE_DATA_DIR) / "mini_dataset.json";

const Dataset& mini() {
  static const Dataset d = load_dataset(kMini);
  return d;
}

std::shared_ptr<const Pipeline> canned_pipeline() {
  auto canned = std::make_shared<CannedBackend>();
  canned->add_by_question("اصفهان مرکز کدام استان است؟", "«استان اصفهان»");
  canned->add_by_question("جمعیت آن چقدر است؟", "غیرقابل پاسخ.");
  return std::make_shared<Pipeline>(PipelineConfig{}, canned);
}

class LiveServer {
 public:
  explicit LiveServer(ChatService& service) {
    register_routes(server_, service);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LiveServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_CASE("service sessions, answers and transcripts") {
  ChatService service(canned_pipeline(), &mini());
  const std::string id = service.create_session({{"document_id", "doc-isfahan"}})["session_id"];
  CHECK(id.size() == 16);
  CHECK(service.session_count() == 1);

  const json first = service.ask(id, {{"question", "اصفهان مرکز کدام استان است؟"}});
  CHECK(first["answer"] == "استان اصفهان");
  CHECK(first["unanswerable"] == false);
  CHECK(first["turn_index"] == 0);
  REQUIRE(first["keywords"].is_array());
  CHECK(!first["keywords"].empty());
  CHECK(first["keywords"][0].contains("term"));
  CHECK(first["keywords"][0].contains("score"));

  const json second = service.ask(id, {{"question", "جمعیت آن چقدر است؟"}});
  CHECK(second["answer"] == std::string(kUnanswerable));
  CHECK(second["unanswerable"] == true);
  CHECK(second["turn_index"] == 1);

  const json t = service.transcript(id);
  CHECK(t["document_id"] == "doc-isfahan");
  REQUIRE(t["turns"].size() == 2);
  CHECK(t["turns"][1]["keyword_source"] == "history");
  CHECK(t["turns"][1]["prompt"]["rendered"].get<std::string>().find("استان اصفهان") != std::string::npos);
}

TEST_CASE("service input errors") {
  ChatService service(canned_pipeline(), &mini());
  auto status = [](auto&& fn) {
    try {
      fn();
    } catch (const ServiceError& e) {
      return e.status();
    }
    return 200;
  };
  CHECK(status([&] { service.create_session(json::object()); }) == 400);
  CHECK(status([&] { service.create_session({{"document_text", "  "}}); }) == 400);
  CHECK(status([&] { service.create_session({{"document_id", "doc-none"}}); }) == 404);
  CHECK(status([&] { service.ask("deadbeefdeadbeef", {{"question", "x"}}); }) == 404);
  const std::string id = service.create_session({{"document_text", "متن کوتاه"}})["session_id"];
  CHECK(status([&] { service.ask(id, json::object()); }) == 400);
  CHECK(status([&] { service.ask(id, {{"question", 5}}); }) == 400);
  CHECK(status([&] { service.ask(id, {{"question", "پرسش بی‌پاسخ"}}); }) == 502);
}

TEST_CASE("service writes JSONL transcripts") {
  const auto dir = std::filesystem::temp_directory_path() / "perkwe_service_test";
  std::filesystem::remove_all(dir);
  ChatService service(canned_pipeline(), &mini(), {dir});
  const std::string id = service.create_session({{"document_id", "doc-isfahan"}})["session_id"];
  service.ask(id, {{"question", "اصفهان مرکز کدام استان است؟"}});
  service.ask(id, {{"question", "جمعیت آن چقدر است؟"}});
  std::ifstream in(dir / (id + ".jsonl"));
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    CHECK(json::parse(line)["turn_index"] == n);
    ++n;
  }
  CHECK(n == 2);
  std::filesystem::remove_all(dir);
}

TEST_CASE("REST endpoints over HTTP") {
  ChatService service(canned_pipeline(), &mini());
  LiveServer server(service);
  auto client = server.client();

  auto health = client.Get("/api/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(json::parse(health->body)["status"] == "ok");
  CHECK(health->get_header_value("Access-Control-Allow-Origin") == "*");

  auto created = client.Post("/api/sessions", json{{"document_text", mini().conversations[0].document.text}}.dump(),
                             "application/json");
  REQUIRE(created);
  CHECK(created->status == 200);
  const std::string id = json::parse(created->body)["session_id"];

  auto asked = client.Post("/api/sessions/" + id + "/ask",
                           json{{"question", "اصفهان مرکز کدام استان است؟"}}.dump(), "application/json");
  REQUIRE(asked);
  CHECK(asked->status == 200);
  const json a = json::parse(asked->body);
  CHECK(a["answer"] == "استان اصفهان");
  CHECK(a.contains("keywords"));
  CHECK(a.contains("unanswerable"));
  CHECK(a["turn_index"] == 0);

  auto transcript = client.Get("/api/sessions/" + id);
  REQUIRE(transcript);
  CHECK(transcript->status == 200);
  CHECK(json::parse(transcript->body)["turns"].size() == 1);

  auto bad_json = client.Post("/api/sessions", "{oops", "application/json");
  REQUIRE(bad_json);
  CHECK(bad_json->status == 400);

  auto unknown = client.Get("/api/sessions/0000000000000000");
  REQUIRE(unknown);
  CHECK(unknown->status == 404);
  CHECK(json::parse(unknown->body).contains("error"));

  auto preflight = client.Options("/api/sessions");
  REQUIRE(preflight);
  CHECK(preflight->status == 204);
  CHECK(preflight->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);
}

TEST_CASE("concurrent sessions are independent") {
  ChatService service(canned_pipeline(), &mini());
  std::vector<std::string> ids;
  for (int i = 0; i < 4; ++i) ids.push_back(service.create_session({{"document_id", "doc-isfahan"}})["session_id"]);
  std::vector<std::thread> threads;
  for (const auto& id : ids) {
    threads.emplace_back([&service, id] {
      for (int k = 0; k < 3; ++k) service.ask(id, {{"question", "اصفهان مرکز کدام استان است؟"}});
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& id : ids) {
    const json t = service.transcript(id);
    REQUIRE(t["turns"].size() == 3);
    for (int k = 0; k < 3; ++k) CHECK(t["turns"][k]["turn_index"] == k);
  }
}
