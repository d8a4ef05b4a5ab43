#include "proxysense/simulation.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <ostream>

#include "proxysense/error.hpp"
#include "proxysense/rng.hpp"
#include "proxysense/substitution.hpp"
#include "text.hpp"

namespace proxysense {

void validate_profile(const SimWorkerProfile& profile) {
  if (profile.worker_id.empty()) throw ConfigError("simulated worker needs an id");
  if (profile.p < 0.0 || profile.p > 1.0) throw ConfigError("worker " + profile.worker_id + ": p must lie in [0, 1]");
  if (profile.none_bias < 0.0 || profile.none_bias > 1.0)
    throw ConfigError("worker " + profile.worker_id + ": none_bias must lie in [0, 1]");
}

std::string simulate_choice(const SimWorkerProfile& profile, const SimTask& task, std::vector<std::string>* warnings) {
  Rng rng(mix_seed(profile.seed, task.task_id));
  std::vector<std::string> correct(task.correct.begin(), task.correct.end());
  std::vector<std::string> incorrect;
  for (const auto& o : task.options)
    if (!task.correct.contains(o)) incorrect.push_back(o);

  if (correct.empty() && profile.none_bias == 0.0) {
    if (warnings)
      warnings->push_back("task " + task.task_id + ": no known correct option and none_bias 0 for worker " +
                          profile.worker_id + "; choosing uniformly");
    if (task.options.empty()) return task.abstain;
    return task.options[rng.below(task.options.size())];
  }
  if (!correct.empty() && rng.bernoulli(profile.p)) return correct[rng.below(correct.size())];
  if (!task.abstain.empty() && rng.bernoulli(profile.none_bias)) return task.abstain;
  if (!incorrect.empty()) return incorrect[rng.below(incorrect.size())];
  if (!task.abstain.empty()) return task.abstain;
  return task.options.empty() ? std::string() : task.options[rng.below(task.options.size())];
}

SimulationLog simulate_workers(const std::vector<SimWorkerProfile>& profiles, const std::vector<SimTask>& tasks) {
  for (const auto& p : profiles) validate_profile(p);
  SimulationLog log;
  for (const auto& task : tasks)
    for (const auto& profile : profiles)
      log.responses.push_back({task.task_id, profile.worker_id, simulate_choice(profile, task, &log.warnings)});
  return log;
}

void write_simulation_log(std::ostream& out, const SimulationLog& log) {
  for (const auto& r : log.responses)
    out << Json{{"task_id", r.task_id}, {"worker_id", r.worker_id}, {"choice", r.choice}}.dump() << '\n';
}

SubstituteLexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open substitute lexicon " + path.string());
  try {
    return Json::parse(in).get<SubstituteLexicon>();
  } catch (const Json::exception& e) {
    throw FormatError("malformed substitute lexicon " + path.string() + ": " + e.what());
  }
}

SubstituteLexicon synthetic_lexicon(const Corpus& corpus) {
  SubstituteLexicon lex;
  for (const auto& inst : corpus.instances()) {
    if (!inst.gold) continue;
    const std::string label = detail::to_lower(render_label(*inst.gold));
    auto& subs = lex[inst.lemma][render_label(*inst.gold)];
    if (subs.empty()) subs = {"alt-" + label, "via-" + label};
  }
  return lex;
}

namespace {

std::vector<std::string> lexicon_entries(const SubstituteLexicon& lexicon, const std::string& lemma,
                                         const std::optional<SupersenseLabel>& gold, bool only_gold) {
  std::vector<std::string> out;
  auto it = lexicon.find(lemma);
  if (it == lexicon.end()) return out;
  for (const auto& [label, subs] : it->second) {
    if (only_gold && (!gold || label != render_label(*gold))) continue;
    for (const auto& s : subs) {
      const auto norm = normalize_substitute(s);
      if (!contains_word(norm, lemma) && std::find(out.begin(), out.end(), norm) == out.end()) out.push_back(norm);
    }
  }
  return out;
}

}  // namespace

SimTask truth_for_task(const Service& service, const Task& task, const SubstituteLexicon& lexicon) {
  SimTask sim;
  sim.task_id = task.task_id;
  const Instance* inst = service.find_instance(task.instance_id);
  if (!inst) throw ValidationError("task " + task.task_id + " refers to an unknown instance");
  switch (task.kind) {
    case TaskKind::neighbor: {
      sim.abstain = std::string(kNoneOption);
      for (const auto& n : task.batch->options) {
        sim.options.push_back(n.instance.instance_id);
        if (inst->gold && n.instance.gold == inst->gold) sim.correct.insert(n.instance.instance_id);
      }
      if (inst->gold && sim.correct.empty()) sim.correct.insert(sim.abstain);
      break;
    }
    case TaskKind::selection: {
      sim.abstain = std::string(kOmitKey);
      sim.options = task.options;
      const auto good = lexicon_entries(lexicon, inst->lemma, inst->gold, true);
      for (const auto& o : task.options)
        if (std::find(good.begin(), good.end(), o) != good.end()) sim.correct.insert(o);
      if (inst->gold && sim.correct.empty()) sim.correct.insert(sim.abstain);
      break;
    }
    case TaskKind::generation: {
      sim.options = lexicon_entries(lexicon, inst->lemma, inst->gold, false);
      for (const auto& s : lexicon_entries(lexicon, inst->lemma, inst->gold, true)) sim.correct.insert(s);
      break;
    }
  }
  return sim;
}

DriveResult drive_service(Service& service, const std::vector<SimWorkerProfile>& profiles, TaskKind kind,
                          const SubstituteLexicon& lexicon) {
  for (const auto& p : profiles) validate_profile(p);
  DriveResult result;
  for (bool progress = true; progress;) {
    progress = false;
    for (const auto& profile : profiles) {
      auto assignment = service.assign_next_task(profile.worker_id, kind);
      if (!assignment) continue;
      const Task& task = *service.task(assignment->task_id);
      const SimTask sim = truth_for_task(service, task, lexicon);
      const std::string choice = simulate_choice(profile, sim, &result.warnings);
      Json body;
      switch (kind) {
        case TaskKind::generation:
          if (choice.empty()) throw ValidationError("no substitute available for " + task.instance_id);
          body = {{"substitute", choice}};
          break;
        case TaskKind::selection:
          body = choice == kOmitKey ? Json{{"omit", true}} : Json{{"chosen", {choice}}};
          break;
        case TaskKind::neighbor:
          body = {{"chosen", {choice}}};
          break;
      }
      const auto submitted = service.submit_response(assignment->task_id, profile.worker_id, body);
      if (!submitted.accepted)
        throw ValidationError("simulated response rejected for " + assignment->task_id + ": " + submitted.reason);
      result.log.push_back({assignment->task_id, profile.worker_id, choice});
      ++result.responses;
      progress = true;
    }
  }
  return result;
}

Service::Clock logical_clock(std::int64_t start, std::int64_t step) {
  auto next = std::make_shared<std::int64_t>(start);
  return [next, step] {
    const auto now = *next;
    *next += step;
    return now;
  };
}

}  // namespace proxysense
