#include "dataportraits/service.hpp"

#include <httplib.h>

#include <atomic>

namespace dataportraits {
namespace {

using nlohmann::json;

Response json_response(int status, const json& body) { return {status, body.dump(), "application/json"}; }

json profile_json(const Corpus& corpus, const std::string& user_id) {
  json j = {{"user_id", user_id}, {"display_name", user_id}, {"avatar_url", ""}, {"bio", ""}};
  if (const UserProfile* p = corpus.profile(user_id)) {
    if (!p->display_name.empty()) j["display_name"] = p->display_name;
    j["avatar_url"] = p->avatar_url;
    j["bio"] = p->bio;
  }
  return j;
}

std::filesystem::path state_file(const std::filesystem::path& dir, const char* name) {
  if (dir.empty()) return {};
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

Response error_response(int status, std::string_view code, std::string_view message) {
  return json_response(status, {{"code", std::string(code)}, {"message", std::string(message)}});
}

Service::Service(Corpus corpus, TopicModel model, GraphBundle graph, PoliticalKeywords political,
                 ServiceConfig config)
    : corpus_(std::move(corpus)),
      model_(std::move(model)),
      graph_(std::move(graph)),
      political_(std::move(political)),
      config_(std::move(config)),
      recommender_(corpus_, model_, graph_.intermediary),
      conditions_(state_file(config_.state_dir, "conditions.ndjson"), config_.seed),
      events_(state_file(config_.state_dir, "events.ndjson")) {
  worker_ = std::thread([this] { worker_loop(); });
}

Service::~Service() {
  {
    std::lock_guard lock(queue_mutex_);
    stopping_ = true;
  }
  queue_cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

void Service::worker_loop() {
  std::unique_lock lock(queue_mutex_);
  while (true) {
    queue_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
    if (stopping_) return;
    std::string user = std::move(queue_.front());
    queue_.pop_front();
    busy_ = true;
    lock.unlock();
    if (const UserDocument* doc = corpus_.document(user)) portrait_for(*doc);
    lock.lock();
    busy_ = false;
    if (queue_.empty()) idle_cv_.notify_all();
  }
}

void Service::drain() {
  std::unique_lock lock(queue_mutex_);
  idle_cv_.wait(lock, [&] { return queue_.empty() && !busy_; });
}

std::shared_ptr<const std::string> Service::portrait_for(const UserDocument& doc) {
  {
    std::shared_lock lock(cache_mutex_);
    if (const auto it = portraits_.find(doc.user_id); it != portraits_.end()) return it->second;
  }
  const Portrait p = build_portrait(doc, corpus_, political_, config_.clock());
  auto body = std::make_shared<const std::string>(portrait_to_json(p).dump());
  std::unique_lock lock(cache_mutex_);
  // A concurrent build may have won; keep the first so readers see one value.
  return portraits_.emplace(doc.user_id, std::move(body)).first->second;
}

Response Service::post_user(std::string_view body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    return error_response(400, "bad_request", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("user_id") || !j["user_id"].is_string())
    return error_response(400, "bad_request", "body must be {\"user_id\": string}");
  const auto user = j["user_id"].get<std::string>();
  if (corpus_.document(user) == nullptr) return error_response(404, "not_found", "unknown user " + user);

  ExperimentCondition cond;
  try {
    cond = conditions_.get_or_assign(user, config_.clock());
  } catch (const StorageError& e) {
    return error_response(503, "storage_unavailable", e.what());
  }
  bool ready;
  {
    std::shared_lock lock(cache_mutex_);
    ready = portraits_.count(user) != 0;
  }
  if (!ready) {
    std::lock_guard lock(queue_mutex_);
    queue_.push_back(user);
    queue_cv_.notify_one();
  }
  return json_response(202, {{"user_id", user},
                             {"condition", condition_to_json(cond)},
                             {"portrait", ready ? "ready" : "queued"}});
}

Response Service::get_portrait(std::string_view user_id) {
  const UserDocument* doc = corpus_.document(user_id);
  if (doc == nullptr) return error_response(404, "not_found", "unknown user " + std::string(user_id));
  return {200, *portrait_for(*doc), "application/json"};
}

Response Service::get_recommendations(std::string_view user_id) {
  if (corpus_.document(user_id) == nullptr)
    return error_response(404, "not_found", "unknown user " + std::string(user_id));
  ExperimentCondition cond;
  try {
    cond = conditions_.get_or_assign(user_id, config_.clock());
  } catch (const StorageError& e) {
    return error_response(503, "storage_unavailable", e.what());
  }

  const auto key = std::make_pair(std::string(user_id), cond.rec);
  std::shared_ptr<const json> cached;
  {
    std::shared_lock lock(cache_mutex_);
    if (const auto it = recommendations_.find(key); it != recommendations_.end()) cached = it->second;
  }
  if (!cached) {
    RecConfig cfg;
    cfg.gamma = config_.gamma;
    cfg.top_n = config_.top_n;
    cfg.candidate_window_hours = config_.candidate_window_hours;
    cfg.algorithm = cond.rec;
    const auto recs = recommender_.recommend(user_id, cfg);
    const auto clusters = cluster(recs, model_);
    json j = recommendations_to_json(user_id, cond.rec, cfg, recs, clusters);
    json profiles = json::object();
    for (const auto& r : recs) profiles[r.candidate_id] = profile_json(corpus_, r.candidate_id);
    j["profiles"] = std::move(profiles);
    auto value = std::make_shared<const json>(std::move(j));
    std::unique_lock lock(cache_mutex_);
    cached = recommendations_.emplace(key, std::move(value)).first->second;
  }
  json out = *cached;
  out["user_id"] = std::string(user_id);
  out["condition"] = condition_to_json(cond);
  return json_response(200, out);
}

Response Service::post_events(std::string_view body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    return error_response(400, "bad_request", std::string("invalid JSON: ") + e.what());
  }
  std::vector<json> items;
  if (j.is_array()) {
    items.assign(j.begin(), j.end());
  } else {
    items.push_back(std::move(j));
  }
  if (items.empty()) return error_response(400, "bad_request", "no events in request");

  std::vector<InteractionEvent> events;
  for (std::size_t i = 0; i < items.size(); ++i) {
    try {
      InteractionEvent e = parse_event(items[i]);
      if (corpus_.document(e.user_id) == nullptr)
        return error_response(404, "not_found", "event " + std::to_string(i) + ": unknown user " + e.user_id);
      events.push_back(std::move(e));
    } catch (const EventValidationError& e) {
      return error_response(400, "invalid_event", "event " + std::to_string(i) + ": " + e.what());
    }
  }
  try {
    const auto stored = events_.append(std::move(events), config_.clock());
    return json_response(201, {{"accepted", stored.size()}});
  } catch (const StorageError& e) {
    return error_response(503, "storage_unavailable", e.what());
  }
}

Response Service::get_metrics(std::string_view user_id) {
  if (corpus_.document(user_id) == nullptr)
    return error_response(404, "not_found", "unknown user " + std::string(user_id));
  const auto events = events_.events_for(user_id);
  const auto summary = engagement(user_id, events, compute_covariates(corpus_, user_id));
  json j = engagement_to_json(summary);
  const auto cond = conditions_.find(user_id);
  j["condition"] = cond ? condition_to_json(*cond) : json(nullptr);
  return json_response(200, j);
}

Response Service::export_metrics() {
  const auto conditions = conditions_.all();
  const auto events = events_.snapshot();
  return {200, dataportraits::export_metrics(conditions, events, &corpus_), "application/x-ndjson"};
}

struct HttpServer::Impl {
  explicit Impl(Service& s) : service(s) {}
  Service& service;
  httplib::Server server;
};

namespace {

void reply(httplib::Response& res, const Response& r) {
  res.status = r.status;
  res.set_content(r.body, r.content_type);
}

}  // namespace

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {
  auto& svr = impl_->server;
  Service& s = impl_->service;
  svr.Post("/users", [&s](const httplib::Request& req, httplib::Response& res) { reply(res, s.post_user(req.body)); });
  svr.Get(R"(/portrait/([^/]+))", [&s](const httplib::Request& req, httplib::Response& res) {
    reply(res, s.get_portrait(req.matches[1].str()));
  });
  svr.Get(R"(/recommendations/([^/]+))", [&s](const httplib::Request& req, httplib::Response& res) {
    reply(res, s.get_recommendations(req.matches[1].str()));
  });
  svr.Post("/events", [&s](const httplib::Request& req, httplib::Response& res) { reply(res, s.post_events(req.body)); });
  // Registered before the per-user route so "export" is not taken as a user id.
  svr.Get("/metrics/export", [&s](const httplib::Request&, httplib::Response& res) { reply(res, s.export_metrics()); });
  svr.Get(R"(/metrics/([^/]+))", [&s](const httplib::Request& req, httplib::Response& res) {
    reply(res, s.get_metrics(req.matches[1].str()));
  });
  svr.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      const auto code = res.status == 404 ? "not_found" : "http_error";
      reply(res, error_response(res.status, code, "no route for request"));
    }
  });
  svr.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    reply(res, error_response(500, "internal", message));
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace dataportraits
