#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "dataportraits/corpus.hpp"
#include "dataportraits/recommender.hpp"
#include "dataportraits/time.hpp"

namespace dataportraits {

enum class UiCondition { baseline, circle_pack };

std::string_view to_string(UiCondition ui);
UiCondition parse_ui_condition(std::string_view name);

struct ExperimentCondition {
  std::string user_id;
  UiCondition ui = UiCondition::baseline;
  Algorithm rec = Algorithm::KLD;
  TimestampMs assigned_at{};

  bool operator==(const ExperimentCondition&) const = default;
};

// One of the four <UI, RecSys> pairs, uniform over users and fixed by
// (user_id, seed). assigned_at is left at the epoch.
ExperimentCondition assign_condition(std::string_view user_id, std::uint64_t seed);

// A failed write that the caller may retry.
class StorageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Append-only NDJSON file of assignments; a user's first assignment is final.
class ConditionStore {
 public:
  ConditionStore(std::filesystem::path path, std::uint64_t seed);

  ExperimentCondition get_or_assign(std::string_view user_id, TimestampMs now);
  std::optional<ExperimentCondition> find(std::string_view user_id) const;
  std::vector<ExperimentCondition> all() const;

 private:
  std::filesystem::path path_;
  std::uint64_t seed_;
  mutable std::mutex mutex_;
  std::vector<ExperimentCondition> conditions_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class EventKind {
  rec_explore_click,
  rec_accept,
  portrait_word_click,
  portrait_bin_click,
  portrait_reset,
  page_view,
  heartbeat,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view name);

struct InteractionEvent {
  std::string user_id;
  std::string session_id;
  EventKind kind = EventKind::page_view;
  std::optional<std::string> target;
  TimestampMs client_ts{};
  TimestampMs server_ts{};

  bool operator==(const InteractionEvent&) const = default;
};

class EventValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Validates a client event; server_ts, when present, is kept (log replay).
InteractionEvent parse_event(const nlohmann::json& j);
nlohmann::json event_to_json(const InteractionEvent& e);

// Append-only event log. Appends are serialized and stamped with a server
// time that never decreases in append order.
class EventLog {
 public:
  // Replays an existing file; an empty path keeps the log in memory only.
  explicit EventLog(std::filesystem::path path = {});

  // All-or-nothing for a batch; an invalid event throws EventValidationError
  // before anything is written. Returns the stamped events.
  std::vector<InteractionEvent> append(std::vector<InteractionEvent> events, TimestampMs now);

  std::vector<InteractionEvent> events_for(std::string_view user_id) const;
  std::vector<InteractionEvent> snapshot() const;
  std::size_t size() const;

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::vector<InteractionEvent> events_;
  TimestampMs last_server_ts_{};
};

struct BehavioralCovariates {
  double tweet_ratio = 0;             // tweets per day of account age
  std::optional<double> hub_ratio;    // following / followers; unset when followers == 0
  double rt_fraction = 0;
  std::optional<double> url_fraction;      // over non-retweets; unset without any
  std::optional<double> mention_fraction;  // over non-retweets; unset without any

  bool operator==(const BehavioralCovariates&) const = default;
};

BehavioralCovariates compute_covariates(const Corpus& corpus, std::string_view user_id);

inline constexpr std::chrono::minutes kSessionTimeout{30};

struct EngagementSummary {
  std::string user_id;
  std::uint64_t exploration_count = 0;
  bool accepted_any = false;
  std::uint64_t n_days = 0;
  double dwell_seconds = 0;
  std::uint64_t sessions = 0;
  std::uint64_t event_count = 0;
  std::optional<BehavioralCovariates> covariates;

  bool operator==(const EngagementSummary&) const = default;
};

// Dwell sums, per session, the span from first to last event by client time;
// a session ends after 30 minutes without events. Events of other users are
// ignored.
EngagementSummary engagement(std::string_view user_id, std::span<const InteractionEvent> events,
                             std::optional<BehavioralCovariates> covariates = std::nullopt);

nlohmann::json engagement_to_json(const EngagementSummary& s);
nlohmann::json condition_to_json(const ExperimentCondition& c);

// One NDJSON line per user with a condition or events: the summary, the
// condition, and analysis flags (top-decile dwell, dwell under 5 s, tweet
// ratio under 1). Flags mark rows; nothing is dropped.
std::string export_metrics(std::span<const ExperimentCondition> conditions, std::span<const InteractionEvent> events,
                           const Corpus* corpus);

}  // namespace dataportraits
