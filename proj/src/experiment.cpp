#include "dataportraits/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "dataportraits/rng.hpp"

namespace dataportraits {
namespace {

using nlohmann::json;

constexpr double kShortDwellSeconds = 5.0;
constexpr double kTopDecileQuantile = 0.9;

TimestampMs parse_ts_field(const json& j, const char* field) {
  const auto it = j.find(field);
  if (it == j.end() || it->is_null()) throw EventValidationError(std::string("missing '") + field + "'");
  if (it->is_string()) {
    try {
      return parse_timestamp_ms(it->get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw EventValidationError(std::string("bad '") + field + "': " + e.what());
    }
  }
  if (it->is_number_integer()) return TimestampMs{std::chrono::milliseconds{it->get<std::int64_t>()}};
  throw EventValidationError(std::string("'") + field + "' must be an ISO-8601 string or epoch milliseconds");
}

std::string non_empty_string(const json& j, const char* field) {
  const auto it = j.find(field);
  if (it == j.end() || !it->is_string() || it->get<std::string>().empty())
    throw EventValidationError(std::string("'") + field + "' must be a non-empty string");
  return it->get<std::string>();
}

void append_to_file(const std::filesystem::path& path, const std::string& data) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw StorageError("cannot open " + path.string() + " for append");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.flush();
  if (!out) throw StorageError("append to " + path.string() + " failed");
}

template <typename F>
void read_lines(const std::filesystem::path& path, F&& f) {
  if (path.empty() || !std::filesystem::exists(path)) return;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      f(json::parse(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string_view to_string(UiCondition ui) { return ui == UiCondition::circle_pack ? "circle_pack" : "baseline"; }

UiCondition parse_ui_condition(std::string_view name) {
  if (name == "baseline") return UiCondition::baseline;
  if (name == "circle_pack") return UiCondition::circle_pack;
  throw std::invalid_argument("unknown UI condition: " + std::string(name));
}

ExperimentCondition assign_condition(std::string_view user_id, std::uint64_t seed) {
  const std::uint64_t h = splitmix64(stable_hash(user_id) ^ splitmix64(seed));
  const auto cell = static_cast<unsigned>(h >> 62);
  ExperimentCondition c;
  c.user_id = std::string(user_id);
  c.ui = (cell & 1U) != 0 ? UiCondition::circle_pack : UiCondition::baseline;
  c.rec = (cell & 2U) != 0 ? Algorithm::IT : Algorithm::KLD;
  return c;
}

json condition_to_json(const ExperimentCondition& c) {
  return {{"user_id", c.user_id},
          {"ui", std::string(to_string(c.ui))},
          {"rec", std::string(to_string(c.rec))},
          {"assigned_at", format_timestamp(c.assigned_at)}};
}

ConditionStore::ConditionStore(std::filesystem::path path, std::uint64_t seed) : path_(std::move(path)), seed_(seed) {
  read_lines(path_, [&](const json& j) {
    ExperimentCondition c;
    c.user_id = j.at("user_id").get<std::string>();
    c.ui = parse_ui_condition(j.at("ui").get<std::string>());
    c.rec = parse_algorithm(j.at("rec").get<std::string>());
    c.assigned_at = parse_timestamp_ms(j.at("assigned_at").get<std::string>());
    // First assignment wins.
    if (index_.emplace(c.user_id, conditions_.size()).second) conditions_.push_back(std::move(c));
  });
}

ExperimentCondition ConditionStore::get_or_assign(std::string_view user_id, TimestampMs now) {
  std::lock_guard lock(mutex_);
  if (const auto it = index_.find(std::string(user_id)); it != index_.end()) return conditions_[it->second];
  ExperimentCondition c = assign_condition(user_id, seed_);
  c.assigned_at = now;
  append_to_file(path_, condition_to_json(c).dump() + "\n");
  index_.emplace(c.user_id, conditions_.size());
  conditions_.push_back(c);
  return c;
}

std::optional<ExperimentCondition> ConditionStore::find(std::string_view user_id) const {
  std::lock_guard lock(mutex_);
  const auto it = index_.find(std::string(user_id));
  if (it == index_.end()) return std::nullopt;
  return conditions_[it->second];
}

std::vector<ExperimentCondition> ConditionStore::all() const {
  std::lock_guard lock(mutex_);
  return conditions_;
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::rec_explore_click: return "rec_explore_click";
    case EventKind::rec_accept: return "rec_accept";
    case EventKind::portrait_word_click: return "portrait_word_click";
    case EventKind::portrait_bin_click: return "portrait_bin_click";
    case EventKind::portrait_reset: return "portrait_reset";
    case EventKind::page_view: return "page_view";
    case EventKind::heartbeat: return "heartbeat";
  }
  return "page_view";
}

std::optional<EventKind> parse_event_kind(std::string_view name) {
  for (EventKind k : {EventKind::rec_explore_click, EventKind::rec_accept, EventKind::portrait_word_click,
                      EventKind::portrait_bin_click, EventKind::portrait_reset, EventKind::page_view,
                      EventKind::heartbeat}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

InteractionEvent parse_event(const json& j) {
  if (!j.is_object()) throw EventValidationError("event must be a JSON object");
  InteractionEvent e;
  e.user_id = non_empty_string(j, "user_id");
  e.session_id = non_empty_string(j, "session_id");
  const auto kind = parse_event_kind(non_empty_string(j, "kind"));
  if (!kind) throw EventValidationError("unknown event kind '" + j.at("kind").get<std::string>() + "'");
  e.kind = *kind;
  if (const auto it = j.find("target"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw EventValidationError("'target' must be a string");
    e.target = it->get<std::string>();
  }
  if (e.kind == EventKind::rec_accept && (!e.target || e.target->empty()))
    throw EventValidationError("rec_accept requires the candidate id in 'target'");
  e.client_ts = parse_ts_field(j, "client_ts");
  if (const auto it = j.find("server_ts"); it != j.end() && !it->is_null()) e.server_ts = parse_ts_field(j, "server_ts");
  return e;
}

json event_to_json(const InteractionEvent& e) {
  return {{"user_id", e.user_id},
          {"session_id", e.session_id},
          {"kind", std::string(to_string(e.kind))},
          {"target", e.target ? json(*e.target) : json(nullptr)},
          {"client_ts", format_timestamp(e.client_ts)},
          {"server_ts", format_timestamp(e.server_ts)}};
}

EventLog::EventLog(std::filesystem::path path) : path_(std::move(path)) {
  read_lines(path_, [&](const json& j) {
    InteractionEvent e = parse_event(j);
    last_server_ts_ = std::max(last_server_ts_, e.server_ts);
    events_.push_back(std::move(e));
  });
}

std::vector<InteractionEvent> EventLog::append(std::vector<InteractionEvent> events, TimestampMs now) {
  // Whatever is written must replay, so the batch passes the same checks
  // as a client event before anything is stamped.
  for (const auto& e : events) parse_event(event_to_json(e));
  std::lock_guard lock(mutex_);
  TimestampMs ts = std::max(now, last_server_ts_);
  std::string lines;
  for (auto& e : events) {
    e.server_ts = ts;
    lines += event_to_json(e).dump();
    lines += '\n';
  }
  append_to_file(path_, lines);
  last_server_ts_ = ts;
  events_.insert(events_.end(), events.begin(), events.end());
  return events;
}

std::vector<InteractionEvent> EventLog::events_for(std::string_view user_id) const {
  std::lock_guard lock(mutex_);
  std::vector<InteractionEvent> out;
  for (const auto& e : events_) {
    if (e.user_id == user_id) out.push_back(e);
  }
  return out;
}

std::vector<InteractionEvent> EventLog::snapshot() const {
  std::lock_guard lock(mutex_);
  return events_;
}

std::size_t EventLog::size() const {
  std::lock_guard lock(mutex_);
  return events_.size();
}

BehavioralCovariates compute_covariates(const Corpus& corpus, std::string_view user_id) {
  const UserDocument* doc = corpus.document(user_id);
  if (doc == nullptr) throw std::out_of_range("unknown user " + std::string(user_id));
  const auto tweets = corpus.tweets_of(user_id);
  BehavioralCovariates c;
  const auto total = static_cast<double>(tweets.size());
  c.tweet_ratio = doc->account_age_days > 0 ? total / doc->account_age_days : total;
  if (doc->follower_count > 0) c.hub_ratio = doc->following_count / doc->follower_count;
  std::size_t retweets = 0, original = 0, with_url = 0, with_mention = 0;
  for (const TweetRecord* t : tweets) {
    if (t->is_retweet) {
      ++retweets;
      continue;
    }
    ++original;
    if (!t->urls.empty()) ++with_url;
    if (!t->mentions.empty()) ++with_mention;
  }
  c.rt_fraction = total > 0 ? static_cast<double>(retweets) / total : 0.0;
  if (original > 0) {
    c.url_fraction = static_cast<double>(with_url) / static_cast<double>(original);
    c.mention_fraction = static_cast<double>(with_mention) / static_cast<double>(original);
  }
  return c;
}

EngagementSummary engagement(std::string_view user_id, std::span<const InteractionEvent> events,
                             std::optional<BehavioralCovariates> covariates) {
  EngagementSummary s;
  s.user_id = std::string(user_id);
  s.covariates = std::move(covariates);
  std::vector<TimestampMs> times;
  std::set<std::int64_t> days;
  for (const auto& e : events) {
    if (e.user_id != user_id) continue;
    ++s.event_count;
    if (e.kind == EventKind::rec_explore_click) ++s.exploration_count;
    if (e.kind == EventKind::rec_accept) s.accepted_any = true;
    times.push_back(e.client_ts);
    days.insert(utc_day(e.client_ts));
  }
  s.n_days = days.size();
  if (times.empty()) return s;
  std::sort(times.begin(), times.end());
  TimestampMs session_start = times.front();
  TimestampMs previous = times.front();
  s.sessions = 1;
  std::int64_t dwell_ms = 0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (times[i] - previous > kSessionTimeout) {
      dwell_ms += (previous - session_start).count();
      session_start = times[i];
      ++s.sessions;
    }
    previous = times[i];
  }
  dwell_ms += (previous - session_start).count();
  s.dwell_seconds = static_cast<double>(dwell_ms) / 1000.0;
  return s;
}

json engagement_to_json(const EngagementSummary& s) {
  json j = {{"user_id", s.user_id},
            {"exploration_count", s.exploration_count},
            {"accepted_any", s.accepted_any},
            {"n_days", s.n_days},
            {"dwell_seconds", s.dwell_seconds},
            {"sessions", s.sessions},
            {"event_count", s.event_count}};
  if (s.covariates) {
    const auto& c = *s.covariates;
    j["covariates"] = {{"tweet_ratio", c.tweet_ratio},
                       {"hub_ratio", optional_number(c.hub_ratio)},
                       {"hub_ratio_undefined", !c.hub_ratio.has_value()},
                       {"rt_fraction", c.rt_fraction},
                       {"url_fraction", optional_number(c.url_fraction)},
                       {"mention_fraction", optional_number(c.mention_fraction)}};
  } else {
    j["covariates"] = nullptr;
  }
  return j;
}

std::string export_metrics(std::span<const ExperimentCondition> conditions, std::span<const InteractionEvent> events,
                           const Corpus* corpus) {
  std::map<std::string, const ExperimentCondition*> users;
  for (const auto& c : conditions) users.emplace(c.user_id, &c);
  std::map<std::string, std::vector<InteractionEvent>> by_user;
  for (const auto& e : events) {
    by_user[e.user_id].push_back(e);
    users.emplace(e.user_id, nullptr);
  }

  std::vector<EngagementSummary> rows;
  for (const auto& [user, cond] : users) {
    std::optional<BehavioralCovariates> cov;
    if (corpus != nullptr && corpus->document(user) != nullptr) cov = compute_covariates(*corpus, user);
    const auto it = by_user.find(user);
    const std::span<const InteractionEvent> evs =
        it == by_user.end() ? std::span<const InteractionEvent>{} : std::span<const InteractionEvent>(it->second);
    rows.push_back(engagement(user, evs, cov));
  }

  double decile_cut = std::numeric_limits<double>::infinity();
  if (!rows.empty()) {
    std::vector<double> dwell;
    for (const auto& r : rows) dwell.push_back(r.dwell_seconds);
    std::sort(dwell.begin(), dwell.end());
    // Nearest-rank 90th percentile.
    const auto rank = static_cast<std::size_t>(std::ceil(kTopDecileQuantile * static_cast<double>(dwell.size())));
    decile_cut = dwell[std::max<std::size_t>(rank, 1) - 1];
  }

  std::string out;
  for (const auto& r : rows) {
    json j = engagement_to_json(r);
    const ExperimentCondition* cond = users.at(r.user_id);
    j["condition"] = cond ? condition_to_json(*cond) : json(nullptr);
    j["flags"] = {{"dwell_top_decile", r.dwell_seconds > decile_cut},
                  {"dwell_under_5s", r.dwell_seconds < kShortDwellSeconds},
                  {"tweet_ratio_under_1", r.covariates ? json(r.covariates->tweet_ratio < 1.0) : json(nullptr)}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace dataportraits
