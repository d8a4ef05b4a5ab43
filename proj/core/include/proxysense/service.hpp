#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "proxysense/error.hpp"
#include "proxysense/adjudication.hpp"
#include "proxysense/corpus.hpp"
#include "proxysense/records.hpp"
#include "proxysense/reports.hpp"
#include "proxysense/retrieval.hpp"
#include "proxysense/substitution.hpp"
#include "proxysense/vectors.hpp"

namespace proxysense {

enum class TaskKind { generation, selection, neighbor };

std::string_view to_string(TaskKind kind);
TaskKind parse_task_kind(std::string_view text);

struct ServiceConfig {
  // Responses per task before aggregation fires (pilot values 7, 7, 5).
  std::size_t generation_quorum = 7;
  std::size_t selection_quorum = 7;
  std::size_t neighbor_quorum = 5;
  std::size_t max_requeues = kDefaultMaxRequeues;
  bool requeue_on_none_tie = true;
  bool count_none_ties = true;
  std::size_t selection_options = kDefaultSelectionOptions;

  std::size_t quorum(TaskKind kind) const;
  bool operator==(const ServiceConfig&) const = default;
};

Json config_to_json(const ServiceConfig& config);
ServiceConfig config_from_json(const Json& record);

struct Event {
  std::uint64_t seq = 0;
  std::int64_t timestamp = 0;  // milliseconds since the epoch; informational only
  std::string type;
  Json payload;

  bool operator==(const Event&) const = default;
};

// Append-only event sequence with contiguous sequence numbers from 1.
class EventLog {
 public:
  // Throws CorruptionError unless event.seq == size() + 1.
  void append(Event event);

  const std::vector<Event>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  EventLog truncated(std::size_t n) const;

  static EventLog read(std::istream& in);
  static EventLog read(const std::filesystem::path& path);
  void write(std::ostream& out) const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<Event> events_;
};

enum class AssignmentStatus { open, submitted, expired };

struct TaskAssignment {
  std::string assignment_id;
  std::string task_id;
  TaskKind kind = TaskKind::generation;
  Json payload;  // annotator-facing prompt; never carries gold labels or scores
  std::string worker_id;
  std::int64_t issued_at = 0;
  AssignmentStatus status = AssignmentStatus::open;
};

struct Task {
  std::string task_id;
  TaskKind kind = TaskKind::generation;
  std::string instance_id;
  std::size_t batch_index = 0;
  std::vector<std::string> options;           // selection
  std::optional<NeighborBatch> batch;         // neighbor
  std::optional<SupersenseLabel> tagger_label;  // neighbor
  std::vector<std::string> strategies;        // neighbor: provenance names in report order
  std::vector<std::pair<std::string, Json>> responses;  // (worker, normalized body)
  std::size_t open_assignments = 0;
  std::set<std::string> workers;              // every worker ever assigned
  bool completed = false;
};

struct SubmitResult {
  bool accepted = false;
  std::string reason;
  bool completed_task = false;
};

enum class CorpusRole { labeled, targets };

// Event-sourced annotation service. Every mutation is recorded as an event
// and applied through a single path, so replaying the log reproduces the
// state exactly. Not thread-safe: callers serialize access (the HTTP front
// end holds one lock per request).
class Service {
 public:
  using Clock = std::function<std::int64_t()>;

  explicit Service(Clock clock = {});

  // Replaces the event timestamp source; an empty clock selects wall time.
  void set_clock(Clock clock);

  // --- administration ---
  void configure(const ServiceConfig& config);
  void load_inventory(const LabelInventory& inventory);
  void ingest(CorpusRole role, const Corpus& corpus);
  void register_worker(const std::string& worker_id, const std::string& token);

  // Live-only capability used to build neighbor batches and requeues; the
  // store must outlive the service. The same-supersense constraint compares
  // against the target's gold label.
  void attach_retrieval(const VectorStore* store, std::vector<RetrievalStrategy> strategies);

  std::vector<std::string> create_generation_tasks(const std::vector<std::string>& lemmas = {});
  // Options per lemma are the top substitutes of its generation responses,
  // unless given explicitly.
  std::vector<std::string> create_selection_tasks(
      const std::vector<std::string>& lemmas = {},
      const std::map<std::string, std::vector<std::string>>& explicit_options = {});
  std::vector<std::string> create_neighbor_tasks(const std::vector<std::string>& target_ids = {});
  std::size_t expire_assignments(std::int64_t issued_before);

  // --- workers ---
  std::string authenticate(std::string_view token) const;  // AuthError
  // Open assignment of the kind if the worker already holds one; otherwise a
  // new one on the open task with the fewest responses (submitted plus in
  // flight, ties by task id) that the worker has not seen.
  std::optional<TaskAssignment> assign_next_task(const std::string& worker_id, TaskKind kind);
  SubmitResult submit_response(const std::string& task_id, const std::string& worker_id, const Json& body);

  // --- reads ---
  const EventLog& log() const { return log_; }
  const ServiceConfig& config() const { return config_; }
  const LabelInventory* inventory() const { return inventory_ ? &*inventory_ : nullptr; }
  const Corpus* labeled() const { return labeled_ ? &*labeled_ : nullptr; }
  const Corpus* targets() const { return targets_ ? &*targets_ : nullptr; }
  const std::map<std::string, Task>& tasks() const { return tasks_; }
  const Task* task(std::string_view task_id) const;
  const std::map<std::string, TaskAssignment>& assignments() const { return assignments_; }
  const std::map<std::string, std::string>& workers() const { return workers_; }
  const GenerationLog& generation_log() const { return generation_; }
  const std::set<std::string>& expert_review() const { return expert_review_; }
  const Instance* find_instance(std::string_view instance_id) const;

  Json prompt_payload(const Task& task) const;

  std::map<std::string, SubstituteDistribution> instance_distributions() const;
  std::vector<RadarRow> radar(std::int64_t min_count = kDefaultRadarMinCount) const;
  StrategyTally strategy_tally() const;
  std::map<std::string, std::string> strategy_descriptions() const;
  // Latest completed batch per target.
  std::vector<AdjudicatedInstance> adjudications() const;
  CaseReport cases() const;
  std::vector<ProgressRow> progress() const;

  // Canonical JSON of all derived state and its SHA-256.
  Json state_json() const;
  std::string digest() const;

  // Throws CorruptionError on sequence gaps, unknown event types or events
  // that do not apply.
  static Service replay(const EventLog& log);

 private:
  void emit(std::string type, Json payload);
  void apply(const Event& event);
  void apply_tasks_created(const Json& payload);
  void apply_response(const Json& payload);
  void after_completion(const Task& task);
  std::string validate_body(const Task& task, const Json& body, Json& normalized) const;
  std::string next_task_id();
  Json corpus_json(const Corpus& corpus) const;

  Clock clock_;
  EventLog log_;
  ServiceConfig config_;
  std::optional<LabelInventory> inventory_;
  std::optional<Corpus> labeled_;
  std::optional<Corpus> targets_;
  std::map<std::string, std::string> workers_;  // worker -> token
  std::map<std::string, Task> tasks_;
  std::map<std::string, TaskAssignment> assignments_;
  GenerationLog generation_;
  std::set<std::string> expert_review_;
  std::map<std::string, std::string> strategy_descriptions_;
  std::size_t task_counter_ = 0;
  std::size_t assignment_counter_ = 0;

  const VectorStore* store_ = nullptr;
  std::vector<RetrievalStrategy> strategies_;
};

}  // namespace proxysense
