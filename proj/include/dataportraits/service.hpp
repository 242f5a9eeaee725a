#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "dataportraits/corpus.hpp"
#include "dataportraits/experiment.hpp"
#include "dataportraits/lda.hpp"
#include "dataportraits/portrait.hpp"
#include "dataportraits/recommender.hpp"
#include "dataportraits/topic_graph.hpp"

namespace dataportraits {

struct ServiceConfig {
  std::uint64_t seed = 1;
  // conditions.ndjson and events.ndjson live here; empty keeps state in memory.
  std::filesystem::path state_dir;
  double gamma = 1.0;
  std::size_t top_n = 20;
  int candidate_window_hours = 48;
  std::function<TimestampMs()> clock = now_ms;
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// Transport-independent API. Every handler is safe to call concurrently.
class Service {
 public:
  Service(Corpus corpus, TopicModel model, GraphBundle graph, PoliticalKeywords political, ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  Response post_user(std::string_view body);
  Response get_portrait(std::string_view user_id);
  Response get_recommendations(std::string_view user_id);
  Response post_events(std::string_view body);
  Response get_metrics(std::string_view user_id);
  Response export_metrics();

  // Blocks until queued portrait builds have finished.
  void drain();

  const Corpus& corpus() const { return corpus_; }
  const ConditionStore& conditions() const { return conditions_; }
  const EventLog& events() const { return events_; }

 private:
  std::shared_ptr<const std::string> portrait_for(const UserDocument& doc);
  void worker_loop();

  Corpus corpus_;
  TopicModel model_;
  GraphBundle graph_;
  PoliticalKeywords political_;
  ServiceConfig config_;
  Recommender recommender_;
  ConditionStore conditions_;
  EventLog events_;

  std::shared_mutex cache_mutex_;
  std::unordered_map<std::string, std::shared_ptr<const std::string>> portraits_;
  std::map<std::pair<std::string, Algorithm>, std::shared_ptr<const nlohmann::json>> recommendations_;

  std::mutex queue_mutex_;
  std::condition_variable queue_cv_;
  std::condition_variable idle_cv_;
  std::deque<std::string> queue_;
  bool busy_ = false;
  bool stopping_ = false;
  std::thread worker_;
};

Response error_response(int status, std::string_view code, std::string_view message);

// cpp-httplib front end for a Service.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port, or -1 on failure.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dataportraits
