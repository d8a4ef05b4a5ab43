#include "proxysense/service.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "proxysense/digest.hpp"
#include "proxysense/error.hpp"

namespace proxysense {

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::generation: return "generation";
    case TaskKind::selection: return "selection";
    case TaskKind::neighbor: return "neighbor";
  }
  return "generation";
}

TaskKind parse_task_kind(std::string_view text) {
  if (text == "generation") return TaskKind::generation;
  if (text == "selection") return TaskKind::selection;
  if (text == "neighbor") return TaskKind::neighbor;
  throw ValidationError("unknown task kind '" + std::string(text) + "'");
}

std::size_t ServiceConfig::quorum(TaskKind kind) const {
  switch (kind) {
    case TaskKind::generation: return generation_quorum;
    case TaskKind::selection: return selection_quorum;
    case TaskKind::neighbor: return neighbor_quorum;
  }
  return 0;
}

Json config_to_json(const ServiceConfig& c) {
  return {{"quorum", {{"generation", c.generation_quorum}, {"selection", c.selection_quorum}, {"neighbor", c.neighbor_quorum}}},
          {"max_requeues", c.max_requeues},
          {"requeue_on_none_tie", c.requeue_on_none_tie},
          {"count_none_ties", c.count_none_ties},
          {"selection_options", c.selection_options}};
}

ServiceConfig config_from_json(const Json& record) {
  ServiceConfig c;
  if (auto q = record.find("quorum"); q != record.end()) {
    c.generation_quorum = q->value("generation", c.generation_quorum);
    c.selection_quorum = q->value("selection", c.selection_quorum);
    c.neighbor_quorum = q->value("neighbor", c.neighbor_quorum);
  }
  c.max_requeues = record.value("max_requeues", c.max_requeues);
  c.requeue_on_none_tie = record.value("requeue_on_none_tie", c.requeue_on_none_tie);
  c.count_none_ties = record.value("count_none_ties", c.count_none_ties);
  c.selection_options = record.value("selection_options", c.selection_options);
  if (c.generation_quorum == 0 || c.selection_quorum == 0 || c.neighbor_quorum == 0)
    throw ConfigError("quorum values must be positive");
  if (c.selection_options == 0) throw ConfigError("selection_options must be positive");
  return c;
}

// --- EventLog ---

void EventLog::append(Event event) {
  if (event.seq != events_.size() + 1)
    throw CorruptionError("event sequence gap: expected " + std::to_string(events_.size() + 1) + ", got " +
                          std::to_string(event.seq));
  events_.push_back(std::move(event));
}

EventLog EventLog::truncated(std::size_t n) const {
  EventLog out;
  out.events_.assign(events_.begin(), events_.begin() + static_cast<std::ptrdiff_t>(std::min(n, events_.size())));
  return out;
}

EventLog EventLog::read(std::istream& in) {
  EventLog log;
  std::size_t line = 0;
  for (const auto& record : read_jsonl(in)) {
    ++line;
    Event e;
    try {
      e.seq = record.at("seq").get<std::uint64_t>();
      e.timestamp = record.at("ts").get<std::int64_t>();
      e.type = record.at("type").get<std::string>();
      e.payload = record.at("payload");
    } catch (const Json::exception& ex) {
      throw CorruptionError(std::string("malformed event: ") + ex.what(), line);
    }
    log.append(std::move(e));
  }
  return log;
}

EventLog EventLog::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open event log " + path.string());
  return read(in);
}

void EventLog::write(std::ostream& out) const {
  for (const auto& e : events_)
    out << Json{{"seq", e.seq}, {"ts", e.timestamp}, {"type", e.type}, {"payload", e.payload}}.dump() << '\n';
}

void EventLog::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write event log " + path.string());
  write(out);
}

// --- Service ---

namespace {

std::int64_t system_now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string padded(std::string_view prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", n);
  return std::string(prefix) + buf;
}

std::size_t id_number(const std::string& id) {
  auto dash = id.rfind('-');
  return dash == std::string::npos ? 0 : std::stoul(id.substr(dash + 1));
}

std::string_view to_string(AssignmentStatus s) {
  switch (s) {
    case AssignmentStatus::open: return "open";
    case AssignmentStatus::submitted: return "submitted";
    case AssignmentStatus::expired: return "expired";
  }
  return "open";
}

std::vector<VoteRecord> votes_of(const Task& task) {
  std::vector<VoteRecord> votes;
  for (const auto& [worker, body] : task.responses)
    votes.push_back({task.instance_id, task.batch_index, worker, body.at("chosen").get<std::set<std::string>>()});
  return votes;
}

std::vector<SelectionResponse> selections_of(const Task& task) {
  std::vector<SelectionResponse> out;
  for (const auto& [worker, body] : task.responses) {
    SelectionResponse r;
    r.instance_id = task.instance_id;
    r.worker_id = worker;
    r.chosen = body.at("chosen").get<std::set<std::string>>();
    if (!body.at("write_in").is_null()) r.write_in = body.at("write_in").get<std::string>();
    r.omit = body.at("omit").get<bool>();
    out.push_back(std::move(r));
  }
  return out;
}

PluralityOutcome outcome_of(const Task& task) {
  return plurality_outcome(task.instance_id, tally_votes(votes_of(task), *task.batch));
}

}  // namespace

Service::Service(Clock clock) : clock_(clock ? std::move(clock) : Clock(system_now_ms)) {}

void Service::set_clock(Clock clock) { clock_ = clock ? std::move(clock) : Clock(system_now_ms); }

void Service::emit(std::string type, Json payload) {
  Event e{log_.size() + 1, clock_(), std::move(type), std::move(payload)};
  apply(e);
  log_.append(std::move(e));
}

std::string Service::next_task_id() { return padded("task-", task_counter_ + 1); }

void Service::configure(const ServiceConfig& config) {
  config_from_json(config_to_json(config));  // validates
  emit("configured", config_to_json(config));
}

void Service::load_inventory(const LabelInventory& inventory) {
  if (inventory.empty()) throw ConfigError("label inventory is empty");
  emit("inventory_loaded", {{"version", inventory.version()}, {"names", inventory.names()}});
}

Json Service::corpus_json(const Corpus& corpus) const {
  Json instances = Json::array();
  for (const auto& inst : corpus.instances()) instances.push_back(instance_to_json(inst));
  return {{"kind", to_string(corpus.kind())}, {"documents", corpus.documents()}, {"instances", std::move(instances)}};
}

void Service::ingest(CorpusRole role, const Corpus& corpus) {
  if (!inventory_) throw ConfigError("load a label inventory before ingesting corpora");
  if (role == CorpusRole::labeled && corpus.kind() != CorpusKind::labeled)
    throw ValidationError("the neighbor pool must be a labeled corpus");
  Json payload = corpus_json(corpus);
  payload["role"] = role == CorpusRole::labeled ? "labeled" : "targets";
  emit("corpus_ingested", std::move(payload));
}

void Service::register_worker(const std::string& worker_id, const std::string& token) {
  if (worker_id.empty() || token.empty()) throw ValidationError("worker id and token must be nonempty");
  for (const auto& [w, t] : workers_)
    if (t == token && w != worker_id) throw ValidationError("token already issued to another worker");
  emit("worker_registered", {{"worker_id", worker_id}, {"token", token}});
}

void Service::attach_retrieval(const VectorStore* store, std::vector<RetrievalStrategy> strategies) {
  store_ = store;
  strategies_ = std::move(strategies);
}

std::vector<std::string> Service::create_generation_tasks(const std::vector<std::string>& lemmas) {
  if (!targets_) throw ConfigError("no target corpus ingested");
  std::set<std::string> have;
  for (const auto& [id, t] : tasks_)
    if (t.kind == TaskKind::generation) have.insert(t.instance_id);
  Json tasks = Json::array();
  std::vector<std::string> ids;
  std::size_t counter = task_counter_;
  for (const auto& inst : targets_->instances()) {
    if (!lemmas.empty() && std::find(lemmas.begin(), lemmas.end(), inst.lemma) == lemmas.end()) continue;
    if (have.contains(inst.instance_id)) continue;
    ids.push_back(padded("task-", ++counter));
    tasks.push_back({{"task_id", ids.back()}, {"instance_id", inst.instance_id}, {"batch_index", 0}});
  }
  if (!ids.empty()) emit("tasks_created", {{"kind", "generation"}, {"tasks", std::move(tasks)}});
  return ids;
}

std::vector<std::string> Service::create_selection_tasks(
    const std::vector<std::string>& lemmas, const std::map<std::string, std::vector<std::string>>& explicit_options) {
  if (!targets_) throw ConfigError("no target corpus ingested");
  std::set<std::string> wanted(lemmas.begin(), lemmas.end());
  if (wanted.empty())
    for (const auto& inst : targets_->instances()) wanted.insert(inst.lemma);
  std::set<std::string> have;
  for (const auto& [id, t] : tasks_)
    if (t.kind == TaskKind::selection) have.insert(t.instance_id);

  Json tasks = Json::array();
  std::vector<std::string> ids;
  std::size_t counter = task_counter_;
  for (const auto& lemma : wanted) {
    std::vector<std::string> options;
    if (auto it = explicit_options.find(lemma); it != explicit_options.end()) {
      for (const auto& o : it->second) options.push_back(normalize_substitute(o));
    } else {
      options = top_n_substitutes(generation_.responses_for(*targets_, lemma), config_.selection_options);
    }
    if (options.empty()) continue;
    for (const auto& inst : targets_->instances()) {
      if (inst.lemma != lemma || have.contains(inst.instance_id)) continue;
      build_selection_prompt(inst, options);  // validates
      ids.push_back(padded("task-", ++counter));
      tasks.push_back(
          {{"task_id", ids.back()}, {"instance_id", inst.instance_id}, {"batch_index", 0}, {"options", options}});
    }
  }
  if (!ids.empty()) emit("tasks_created", {{"kind", "selection"}, {"tasks", std::move(tasks)}});
  return ids;
}

std::vector<std::string> Service::create_neighbor_tasks(const std::vector<std::string>& target_ids) {
  if (!targets_ || !labeled_ || !inventory_) throw ConfigError("neighbor tasks need targets, a labeled pool and an inventory");
  if (!store_ || strategies_.empty()) throw ConfigError("neighbor tasks need vectors and a retrieval strategy");
  std::set<std::string> have;
  for (const auto& [id, t] : tasks_)
    if (t.kind == TaskKind::neighbor) have.insert(t.instance_id);

  std::vector<const Instance*> chosen;
  if (target_ids.empty()) {
    for (const auto& inst : targets_->instances()) chosen.push_back(&inst);
  } else {
    for (const auto& id : target_ids) chosen.push_back(&targets_->at(id));
  }

  std::vector<std::string> names;
  Json descriptions = Json::object();
  for (const auto& s : strategies_) {
    names.push_back(s.name());
    descriptions[s.name()] = s.description();
  }

  Json tasks = Json::array();
  std::vector<std::string> ids;
  std::vector<std::string> empty_targets;
  std::size_t counter = task_counter_;
  for (const Instance* target : chosen) {
    if (have.contains(target->instance_id)) continue;
    std::optional<NeighborBatch> batch;
    if (strategies_.size() == 1)
      batch = retrieve_batch(*target, *labeled_, *store_, strategies_.front(), target->gold, {}, 0, *inventory_);
    else
      batch = retrieve_merged(*target, *labeled_, *store_, strategies_, target->gold, {}, 0, *inventory_);
    if (!batch) {
      empty_targets.push_back(target->instance_id);
      continue;
    }
    ids.push_back(padded("task-", ++counter));
    Json task{{"task_id", ids.back()},
              {"instance_id", target->instance_id},
              {"batch_index", 0},
              {"batch", batch_to_json(*batch)},
              {"strategies", names}};
    if (const auto* v = store_->find(target->instance_id))
      task["tagger_label"] = render_label(tagger_label(*v, *inventory_));
    tasks.push_back(std::move(task));
  }
  if (!ids.empty())
    emit("tasks_created", {{"kind", "neighbor"}, {"tasks", std::move(tasks)}, {"strategy_descriptions", descriptions}});
  for (const auto& id : empty_targets)
    emit("target_exhausted", {{"target_id", id}, {"batches", 0}, {"reason", "no neighbors retrieved"}});
  return ids;
}

std::size_t Service::expire_assignments(std::int64_t issued_before) {
  std::vector<std::string> stale;
  for (const auto& [id, a] : assignments_)
    if (a.status == AssignmentStatus::open && a.issued_at < issued_before) stale.push_back(id);
  for (const auto& id : stale) emit("assignment_expired", {{"assignment_id", id}});
  return stale.size();
}

std::string Service::authenticate(std::string_view token) const {
  for (const auto& [worker, t] : workers_)
    if (t == token) return worker;
  throw AuthError("unknown worker token");
}

const Task* Service::task(std::string_view task_id) const {
  auto it = tasks_.find(std::string(task_id));
  return it == tasks_.end() ? nullptr : &it->second;
}

const Instance* Service::find_instance(std::string_view instance_id) const {
  if (targets_)
    if (const auto* inst = targets_->find(instance_id)) return inst;
  if (labeled_)
    if (const auto* inst = labeled_->find(instance_id)) return inst;
  return nullptr;
}

Json Service::prompt_payload(const Task& task) const {
  Json payload{{"task_id", task.task_id}, {"kind", to_string(task.kind)}};
  if (const auto* inst = find_instance(task.instance_id)) payload["target"] = instance_public_json(*inst);
  switch (task.kind) {
    case TaskKind::generation:
      break;
    case TaskKind::selection:
      payload["options"] = task.options;
      payload["allows_omit"] = true;
      payload["allows_write_in"] = true;
      break;
    case TaskKind::neighbor: {
      Json options = Json::array();
      for (const auto& n : task.batch->options) options.push_back(instance_public_json(n.instance));
      payload["options"] = std::move(options);
      payload["batch_index"] = task.batch_index;
      payload["none_option"] = kNoneOption;
      break;
    }
  }
  return payload;
}

std::optional<TaskAssignment> Service::assign_next_task(const std::string& worker_id, TaskKind kind) {
  if (!workers_.contains(worker_id)) throw AuthError("unknown worker " + worker_id);
  for (const auto& [id, a] : assignments_)
    if (a.worker_id == worker_id && a.kind == kind && a.status == AssignmentStatus::open) return a;

  const Task* best = nullptr;
  std::size_t best_load = 0;
  const std::size_t quorum = config_.quorum(kind);
  for (const auto& [id, t] : tasks_) {
    if (t.kind != kind || t.completed || t.workers.contains(worker_id)) continue;
    const std::size_t load = t.responses.size() + t.open_assignments;
    if (load >= quorum) continue;
    if (!best || load < best_load) {
      best = &t;
      best_load = load;
    }
  }
  if (!best) return std::nullopt;
  const std::string assignment_id = padded("assignment-", assignment_counter_ + 1);
  emit("task_assigned", {{"assignment_id", assignment_id}, {"task_id", best->task_id}, {"worker_id", worker_id}});
  return assignments_.at(assignment_id);
}

std::string Service::validate_body(const Task& task, const Json& body, Json& normalized) const {
  if (!body.is_object()) return "response body must be an object";
  try {
    switch (task.kind) {
      case TaskKind::generation: {
        auto it = body.find("substitute");
        if (it == body.end() || !it->is_string()) return "missing substitute";
        const auto& inst = *find_instance(task.instance_id);
        const std::string sub = normalize_substitute(it->get<std::string>());
        if (contains_word(sub, inst.lemma)) throw ContainmentError(sub, inst.lemma);
        normalized = {{"substitute", sub}};
        return {};
      }
      case TaskKind::selection: {
        SelectionResponse r;
        r.instance_id = task.instance_id;
        r.chosen = body.value("chosen", Json::array()).get<std::set<std::string>>();
        if (auto it = body.find("write_in"); it != body.end() && !it->is_null()) r.write_in = it->get<std::string>();
        r.omit = body.value("omit", false);
        SelectionPrompt prompt;
        prompt.instance_id = task.instance_id;
        prompt.options = task.options;
        r = validate_selection(std::move(r), prompt);
        normalized = {{"chosen", r.chosen}, {"omit", r.omit}};
        normalized["write_in"] = r.write_in ? Json(*r.write_in) : Json(nullptr);
        return {};
      }
      case TaskKind::neighbor: {
        VoteRecord vote{task.instance_id, task.batch_index, {}, {}};
        if (body.value("none", false)) vote.chosen.insert(std::string(kNoneOption));
        for (const auto& c : body.value("chosen", Json::array())) vote.chosen.insert(c.get<std::string>());
        validate_vote(vote, *task.batch);
        normalized = {{"chosen", vote.chosen}};
        return {};
      }
    }
  } catch (const ContainmentError& e) {
    return std::string("containment: ") + e.what();
  } catch (const Error& e) {
    return std::string("validation: ") + e.what();
  } catch (const Json::exception& e) {
    return std::string("malformed body: ") + e.what();
  }
  return "unsupported task kind";
}

SubmitResult Service::submit_response(const std::string& task_id, const std::string& worker_id, const Json& body) {
  if (!workers_.contains(worker_id)) throw AuthError("unknown worker " + worker_id);
  const Task* t = task(task_id);
  if (!t) return {false, "unknown task " + task_id, false};
  const TaskAssignment* open = nullptr;
  bool had_any = false;
  for (const auto& [id, a] : assignments_) {
    if (a.task_id != task_id || a.worker_id != worker_id) continue;
    had_any = true;
    if (a.status == AssignmentStatus::open) open = &a;
  }
  if (!open) return {false, had_any ? "stale: assignment is closed" : "no open assignment for this task", false};

  Json normalized;
  if (auto reason = validate_body(*t, body, normalized); !reason.empty()) return {false, reason, false};
  emit("response_submitted", {{"assignment_id", open->assignment_id},
                              {"task_id", task_id},
                              {"worker_id", worker_id},
                              {"body", std::move(normalized)}});

  const Task& updated = tasks_.at(task_id);
  if (updated.responses.size() < config_.quorum(updated.kind)) return {true, {}, false};

  Json summary{{"task_id", task_id}, {"kind", to_string(updated.kind)}, {"responses", updated.responses.size()}};
  if (updated.kind == TaskKind::selection) {
    summary["distribution"] = distribution_to_json(aggregate_instance_distribution(selections_of(updated)));
  } else if (updated.kind == TaskKind::neighbor) {
    const auto outcome = outcome_of(updated);
    const auto predicted = predict_tag(outcome, *updated.batch);
    summary["tallies"] = tally_to_json(outcome.tallies);
    summary["result"] = to_string(outcome.result);
    summary["predicted_label"] = predicted ? Json(render_label(*predicted)) : Json(nullptr);
  }
  emit("task_completed", std::move(summary));
  after_completion(tasks_.at(task_id));
  return {true, {}, true};
}

void Service::after_completion(const Task& task) {
  if (task.kind != TaskKind::neighbor) return;
  const auto outcome = outcome_of(task);
  if (!needs_requeue(outcome, config_.requeue_on_none_tie)) return;
  const std::string target_id = task.instance_id;

  std::vector<NeighborBatch> prior;
  for (const auto& [id, t] : tasks_)
    if (t.kind == TaskKind::neighbor && t.instance_id == target_id) prior.push_back(*t.batch);

  const Instance* target = targets_ ? targets_->find(target_id) : nullptr;
  if (!store_ || strategies_.empty() || !target || !labeled_ || !inventory_) {
    emit("target_exhausted", {{"target_id", target_id}, {"batches", prior.size()}, {"reason", "no retrieval context"}});
    return;
  }
  RetrievalContext context{&*labeled_, store_, &*inventory_, strategies_, target->gold, config_.max_requeues};
  auto result = requeue_none(*target, prior, context);
  if (auto* exhausted = std::get_if<Exhausted>(&result)) {
    emit("target_exhausted", {{"target_id", target_id}, {"batches", exhausted->batches_shown}, {"reason", "requeue limit or empty retrieval"}});
    return;
  }
  const auto& batch = std::get<NeighborBatch>(result);
  Json t{{"task_id", next_task_id()},
         {"instance_id", target_id},
         {"batch_index", batch.batch_index},
         {"batch", batch_to_json(batch)},
         {"strategies", task.strategies}};
  if (task.tagger_label) t["tagger_label"] = render_label(*task.tagger_label);
  emit("tasks_created", {{"kind", "neighbor"}, {"tasks", Json::array({std::move(t)})}});
}

void Service::apply_tasks_created(const Json& payload) {
  const TaskKind kind = parse_task_kind(payload.at("kind").get<std::string>());
  for (const auto& record : payload.at("tasks")) {
    Task t;
    t.task_id = record.at("task_id").get<std::string>();
    t.kind = kind;
    t.instance_id = record.at("instance_id").get<std::string>();
    t.batch_index = record.at("batch_index").get<std::size_t>();
    if (tasks_.contains(t.task_id)) throw CorruptionError("task " + t.task_id + " created twice");
    if (!find_instance(t.instance_id)) throw CorruptionError("task for unknown instance " + t.instance_id);
    if (kind == TaskKind::selection) t.options = record.at("options").get<std::vector<std::string>>();
    if (kind == TaskKind::neighbor) {
      if (!labeled_) throw CorruptionError("neighbor task before the labeled corpus");
      t.batch = batch_from_json(record.at("batch"), *labeled_);
      t.strategies = record.at("strategies").get<std::vector<std::string>>();
      if (auto it = record.find("tagger_label"); it != record.end() && !it->is_null())
        t.tagger_label = parse_label(it->get<std::string>(), *inventory_);
    }
    task_counter_ = std::max(task_counter_, id_number(t.task_id));
    tasks_.emplace(t.task_id, std::move(t));
  }
  if (auto it = payload.find("strategy_descriptions"); it != payload.end())
    for (const auto& [name, desc] : it->items()) strategy_descriptions_[name] = desc.get<std::string>();
}

void Service::apply_response(const Json& payload) {
  auto& a = assignments_.at(payload.at("assignment_id").get<std::string>());
  auto& t = tasks_.at(payload.at("task_id").get<std::string>());
  if (a.status != AssignmentStatus::open || a.task_id != t.task_id)
    throw CorruptionError("response to a closed or mismatched assignment " + a.assignment_id);
  const auto worker = payload.at("worker_id").get<std::string>();
  const Json& body = payload.at("body");
  if (t.kind == TaskKind::generation)
    generation_.record({t.instance_id, worker, body.at("substitute").get<std::string>()}, *find_instance(t.instance_id));
  a.status = AssignmentStatus::submitted;
  --t.open_assignments;
  t.responses.emplace_back(worker, body);
}

void Service::apply(const Event& event) {
  const Json& p = event.payload;
  const std::string& type = event.type;
  if (type == "configured") {
    config_ = config_from_json(p);
  } else if (type == "inventory_loaded") {
    inventory_ = LabelInventory(p.at("names").get<std::vector<std::string>>(), p.at("version").get<std::string>());
  } else if (type == "corpus_ingested") {
    if (!inventory_) throw CorruptionError("corpus ingested before the inventory");
    std::vector<Instance> instances;
    for (const auto& r : p.at("instances")) instances.push_back(instance_from_json(r, *inventory_));
    Corpus corpus(parse_corpus_kind(p.at("kind").get<std::string>()), std::move(instances),
                  p.at("documents").get<std::map<std::string, std::size_t>>());
    (p.at("role") == "labeled" ? labeled_ : targets_) = std::move(corpus);
  } else if (type == "worker_registered") {
    workers_[p.at("worker_id").get<std::string>()] = p.at("token").get<std::string>();
  } else if (type == "tasks_created") {
    apply_tasks_created(p);
  } else if (type == "task_assigned") {
    TaskAssignment a;
    a.assignment_id = p.at("assignment_id").get<std::string>();
    a.task_id = p.at("task_id").get<std::string>();
    a.worker_id = p.at("worker_id").get<std::string>();
    auto& t = tasks_.at(a.task_id);
    if (!workers_.contains(a.worker_id)) throw CorruptionError("assignment to unknown worker " + a.worker_id);
    a.kind = t.kind;
    a.issued_at = event.timestamp;
    a.payload = prompt_payload(t);
    ++t.open_assignments;
    t.workers.insert(a.worker_id);
    assignment_counter_ = std::max(assignment_counter_, id_number(a.assignment_id));
    assignments_.emplace(a.assignment_id, std::move(a));
  } else if (type == "response_submitted") {
    apply_response(p);
  } else if (type == "task_completed") {
    tasks_.at(p.at("task_id").get<std::string>()).completed = true;
  } else if (type == "target_exhausted") {
    expert_review_.insert(p.at("target_id").get<std::string>());
  } else if (type == "assignment_expired") {
    auto& a = assignments_.at(p.at("assignment_id").get<std::string>());
    if (a.status == AssignmentStatus::open) {
      a.status = AssignmentStatus::expired;
      --tasks_.at(a.task_id).open_assignments;
    }
  } else {
    throw CorruptionError("unknown event type '" + type + "'");
  }
}

Service Service::replay(const EventLog& log) {
  Service s([] { return std::int64_t{0}; });
  std::uint64_t expected = 1;
  for (const auto& e : log.events()) {
    if (e.seq != expected) throw CorruptionError("event sequence gap at " + std::to_string(expected));
    try {
      s.apply(e);
    } catch (const CorruptionError&) {
      throw;
    } catch (const std::exception& ex) {
      throw CorruptionError("event " + std::to_string(e.seq) + " (" + e.type + ") does not apply: " + ex.what());
    }
    s.log_.append(e);
    ++expected;
  }
  return s;
}

std::map<std::string, SubstituteDistribution> Service::instance_distributions() const {
  std::map<std::string, SubstituteDistribution> out;
  for (const auto& [id, t] : tasks_)
    if (t.kind == TaskKind::selection && t.completed)
      out[t.instance_id] = aggregate_instance_distribution(selections_of(t));
  return out;
}

std::vector<RadarRow> Service::radar(std::int64_t min_count) const {
  if (!targets_) return {};
  std::map<std::string, SubstituteDistribution> labeled_only;
  for (auto& [id, dist] : instance_distributions()) {
    const auto* inst = targets_->find(id);
    if (inst && inst->gold) labeled_only.emplace(id, dist);
  }
  return radar_report(aggregate_by_label(labeled_only, *targets_), min_count);
}

StrategyTally Service::strategy_tally() const {
  std::vector<VoteRecord> votes;
  std::map<std::string, NeighborBatch> batches;
  std::vector<std::string> names;
  for (const auto& [id, t] : tasks_) {
    if (t.kind != TaskKind::neighbor || t.batch_index != 0 || !t.completed) continue;
    if (names.empty()) names = t.strategies;
    batches.emplace(t.instance_id, *t.batch);
    for (auto& v : votes_of(t)) votes.push_back(std::move(v));
  }
  return proxysense::strategy_tally(votes, batches, names, config_.neighbor_quorum, batches.size());
}

std::map<std::string, std::string> Service::strategy_descriptions() const { return strategy_descriptions_; }

std::vector<AdjudicatedInstance> Service::adjudications() const {
  std::map<std::string, const Task*> latest;
  for (const auto& [id, t] : tasks_) {
    if (t.kind != TaskKind::neighbor || !t.completed) continue;
    auto& slot = latest[t.instance_id];
    if (!slot || t.batch_index > slot->batch_index) slot = &t;
  }
  std::vector<AdjudicatedInstance> out;
  for (const auto& [target, t] : latest) {
    const auto* inst = find_instance(target);
    if (!inst || !inst->gold || !t->tagger_label) continue;
    out.push_back({target, *inst->gold, *t->tagger_label, *t->batch, outcome_of(*t)});
  }
  return out;
}

CaseReport Service::cases() const { return accuracy_report(adjudications(), config_.count_none_ties); }

std::vector<ProgressRow> Service::progress() const {
  std::vector<ProgressRow> rows;
  for (TaskKind kind : {TaskKind::generation, TaskKind::selection, TaskKind::neighbor}) {
    ProgressRow row;
    row.kind = std::string(to_string(kind));
    for (const auto& [id, t] : tasks_) {
      if (t.kind != kind) continue;
      ++row.tasks;
      row.completed += t.completed ? 1 : 0;
      row.responses += t.responses.size();
      row.open_assignments += t.open_assignments;
    }
    if (kind == TaskKind::neighbor) row.exhausted = expert_review_.size();
    rows.push_back(std::move(row));
  }
  return rows;
}

Json Service::state_json() const {
  Json state;
  state["config"] = config_to_json(config_);
  state["inventory"] = inventory_ ? Json{{"version", inventory_->version()}, {"names", inventory_->names()}} : Json(nullptr);
  state["labeled"] = labeled_ ? corpus_json(*labeled_) : Json(nullptr);
  state["targets"] = targets_ ? corpus_json(*targets_) : Json(nullptr);
  state["workers"] = workers_;
  Json tasks = Json::object();
  for (const auto& [id, t] : tasks_) {
    Json responses = Json::array();
    for (const auto& [w, b] : t.responses) responses.push_back({{"worker_id", w}, {"body", b}});
    Json j{{"kind", to_string(t.kind)},
           {"instance_id", t.instance_id},
           {"batch_index", t.batch_index},
           {"options", t.options},
           {"strategies", t.strategies},
           {"responses", std::move(responses)},
           {"open_assignments", t.open_assignments},
           {"workers", t.workers},
           {"completed", t.completed}};
    j["batch"] = t.batch ? batch_to_json(*t.batch) : Json(nullptr);
    j["tagger_label"] = t.tagger_label ? Json(render_label(*t.tagger_label)) : Json(nullptr);
    tasks[id] = std::move(j);
  }
  state["tasks"] = std::move(tasks);
  Json assignments = Json::object();
  for (const auto& [id, a] : assignments_)
    assignments[id] = {{"task_id", a.task_id},     {"kind", to_string(a.kind)}, {"worker_id", a.worker_id},
                       {"issued_at", a.issued_at}, {"status", to_string(a.status)}, {"payload", a.payload}};
  state["assignments"] = std::move(assignments);
  Json generation = Json::array();
  for (const auto& r : generation_.responses())
    generation.push_back({{"instance_id", r.instance_id}, {"worker_id", r.worker_id}, {"substitute", r.substitute}});
  state["generation"] = std::move(generation);
  state["expert_review"] = expert_review_;
  state["strategy_descriptions"] = strategy_descriptions_;
  state["counters"] = {{"task", task_counter_}, {"assignment", assignment_counter_}, {"events", log_.size()}};
  return state;
}

std::string Service::digest() const { return sha256_hex(state_json().dump()); }

}  // namespace proxysense
