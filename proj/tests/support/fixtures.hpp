#pragma once

// Builders shared by the unit tests and the acceptance suite.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "proxysense/adjudication.hpp"
#include "proxysense/corpus.hpp"
#include "proxysense/label.hpp"
#include "proxysense/retrieval.hpp"
#include "proxysense/rng.hpp"
#include "proxysense/service.hpp"
#include "proxysense/simulation.hpp"
#include "proxysense/substitution.hpp"
#include "proxysense/vectors.hpp"

namespace fixture {

using namespace proxysense;

inline LabelInventory snacs() { return LabelInventory::load(PROXYSENSE_DATA_DIR "/snacs-v2.5.txt"); }

// Inventory "L00", "L01", ...
inline LabelInventory letters(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back((i < 10 ? "L0" : "L") + std::to_string(i));
  return LabelInventory(names, "letters");
}

// "A|B" or "A" without an inventory check.
inline SupersenseLabel lbl(const std::string& text) {
  const auto bar = text.find('|');
  if (bar == std::string::npos) return SupersenseLabel::single(text);
  return {text.substr(0, bar), text.substr(bar + 1)};
}

inline std::vector<std::string> words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

inline Instance make_instance(const std::string& doc, const std::string& sent, const std::string& text,
                              std::size_t index, const std::string& lemma,
                              std::optional<std::string> gold = std::nullopt) {
  Instance inst;
  inst.doc_id = doc;
  inst.sent_id = sent;
  inst.tokens = words(text);
  inst.target_index = index;
  inst.lemma = lemma;
  if (gold) inst.gold = lbl(*gold);
  inst.instance_id = make_instance_id(doc, sent, index);
  return inst;
}

// Document token counts are summed once per sentence.
inline Corpus make_corpus(std::vector<Instance> instances, CorpusKind kind = CorpusKind::labeled) {
  std::map<std::string, std::size_t> docs;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& inst : instances)
    if (seen.emplace(inst.doc_id, inst.sent_id).second) docs[inst.doc_id] += inst.tokens.size();
  return Corpus(kind, std::move(instances), std::move(docs));
}

// Smoothed one-hot vector on the given inventory index.
inline std::vector<double> peaked(std::size_t size, std::size_t index, double epsilon = 0.1) {
  std::vector<double> p(size, epsilon / static_cast<double>(size));
  p[index] += 1.0 - epsilon;
  return p;
}

// ---------------------------------------------------------------------------
// Random retrieval pools

struct RandomPool {
  LabelInventory inventory;
  Corpus labeled;
  VectorStore store;
  std::vector<Instance> targets;  // some drawn from the labeled pool, some new
};

inline std::vector<double> random_probs(Rng& rng, std::size_t size) {
  std::vector<double> p(size);
  double sum = 0;
  for (auto& x : p) {
    x = rng.bernoulli(0.3) ? 0.0 : rng.uniform();
    sum += x;
  }
  if (sum == 0) {
    p[rng.below(size)] = 1.0;
    return p;
  }
  for (auto& x : p) x /= sum;
  return p;
}

inline RandomPool random_pool(Rng& rng, std::size_t max_instances = 200, std::size_t max_labels = 50) {
  static const char* lemmas[] = {"at", "in", "on", "by"};
  RandomPool pool;
  const std::size_t n_labels = 2 + rng.below(max_labels - 1);
  pool.inventory = letters(n_labels);
  const std::size_t n_lemmas = 1 + rng.below(4);
  // A small label subset makes diversity and same-supersense bite.
  const std::size_t used_labels = 1 + rng.below(std::min<std::size_t>(n_labels, 8));
  const std::size_t n = rng.below(max_instances + 1);
  const std::size_t n_docs = 1 + rng.below(10);

  auto random_label = [&] {
    const auto a = pool.inventory.name(rng.below(used_labels));
    if (rng.bernoulli(0.8)) return SupersenseLabel::single(a);
    return SupersenseLabel{a, pool.inventory.name(rng.below(used_labels))};
  };

  std::vector<Instance> instances;
  std::vector<std::vector<double>> vectors;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string lemma = lemmas[rng.below(n_lemmas)];
    auto inst = make_instance("d" + std::to_string(rng.below(n_docs)), "s" + std::to_string(i), "w " + lemma + " w",
                              1, lemma);
    inst.gold = random_label();
    instances.push_back(inst);
    // Duplicated vectors force exact score ties.
    if (!vectors.empty() && rng.bernoulli(0.1)) vectors.push_back(vectors[rng.below(vectors.size())]);
    else vectors.push_back(random_probs(rng, n_labels));
  }
  for (std::size_t i = 0; i < n; ++i) pool.store.insert({instances[i].instance_id, vectors[i], std::nullopt}, 0);
  pool.labeled = make_corpus(instances);

  for (const auto& inst : pool.labeled.instances())
    if (rng.bernoulli(0.05)) pool.targets.push_back(inst);
  const std::size_t fresh = 1 + rng.below(4);
  for (std::size_t i = 0; i < fresh; ++i) {
    const std::string lemma = lemmas[rng.below(n_lemmas)];
    auto inst = make_instance("target", "t" + std::to_string(i), "w " + lemma + " w", 1, lemma);
    inst.gold = random_label();
    pool.store.insert({inst.instance_id, random_probs(rng, n_labels), std::nullopt}, std::nullopt);
    pool.targets.push_back(inst);
  }
  return pool;
}

// ---------------------------------------------------------------------------
// Strategy-comparison fixture: 3 workers x 40 targets. Every target shows four
// deduplicated neighbors A..D whose provenance covers the six pilot strategies:
// A = {cos, cos/word}, B = {cos/ss, cos/word/ss}, C = {rand/word/ss},
// D = {rand/word}. Vote patterns are listed per target as three worker
// choices; "N" is None and letters are neighbor picks.

struct StrategyFixture {
  std::vector<std::string> names;
  std::map<std::string, NeighborBatch> batches;
  std::vector<VoteRecord> votes;
  std::size_t workers = 3;
  std::size_t instances = 0;
};

inline StrategyFixture strategy_fixture() {
  const std::vector<std::pair<int, std::vector<std::string>>> patterns = {
      {3, {"N", "N", "AB"}},   {1, {"N", "A", "C"}},     {12, {"N", "AB", "AB"}}, {2, {"N", "AB", "CD"}},
      {3, {"A", "A", "AB"}},   {1, {"A", "AB", "CD"}},   {4, {"B", "AB", "AB"}},  {8, {"AB", "AB", "AC"}},
      {5, {"AB", "BC", "CD"}}, {1, {"AB", "BD", "BD"}},
  };
  const std::map<char, std::set<std::string>> provenance = {
      {'A', {"cos", "cos/word"}}, {'B', {"cos/ss", "cos/word/ss"}}, {'C', {"rand/word/ss"}}, {'D', {"rand/word"}}};

  StrategyFixture f;
  for (const auto& s : pilot_strategies(0)) f.names.push_back(s.name());
  std::size_t t = 0;
  for (const auto& [count, choices] : patterns) {
    for (int c = 0; c < count; ++c, ++t) {
      const std::string target = "target:" + std::to_string(t) + ":1";
      NeighborBatch batch;
      batch.target_id = target;
      for (const auto& [letter, prov] : provenance) {
        auto inst = make_instance("pool", std::string(1, letter) + std::to_string(t), "sat at home", 1, "at", "Locus");
        batch.options.push_back({inst, 0.5, prov});
      }
      f.batches[target] = batch;
      for (std::size_t w = 0; w < choices.size(); ++w) {
        VoteRecord v{target, 0, "w" + std::to_string(w + 1), {}};
        if (choices[w] == "N") {
          v.chosen = {std::string(kNoneOption)};
        } else {
          for (char letter : choices[w]) v.chosen.insert(make_instance_id("pool", std::string(1, letter) + std::to_string(t), 1));
        }
        f.votes.push_back(v);
      }
    }
  }
  f.instances = t;
  return f;
}

// ---------------------------------------------------------------------------
// Neighbor-design pilot with scripted votes: 40 targets, five workers, one
// batch each (no requeues). Each target's vector spreads its mass over five
// of seven pool labels, so the five diverse cosine neighbors carry exactly
// those labels. Gold is among them or not; the tagger label is set directly.

enum class Vote { gold, none, wrong };

struct ScriptedTarget {
  std::string gold;
  std::string tagger;
  std::vector<std::string> shown;  // the five labels weighted in the target vector
  Vote vote = Vote::gold;
};

struct ScriptedPilot {
  LabelInventory inventory;
  Corpus labeled;
  Corpus targets;
  VectorStore store;
  std::map<std::string, ScriptedTarget> script;
};

inline ScriptedPilot scripted_pilot() {
  ScriptedPilot p;
  p.inventory = snacs();
  const std::vector<std::string> pool_labels = {"Locus", "Goal", "Source", "Time", "Manner", "Purpose", "Instrument"};
  const std::vector<std::string> present = {"Locus", "Goal", "Source", "Time", "Manner"};
  const std::vector<std::string> absent_shown = {"Goal", "Source", "Time", "Manner", "Purpose"};

  std::vector<Instance> pool;
  for (std::size_t l = 0; l < pool_labels.size(); ++l) {
    for (int i = 0; i < 3; ++i) {
      auto inst = make_instance("pool" + std::to_string(i), pool_labels[l], "we met in town", 2, "in", pool_labels[l]);
      p.store.insert({inst.instance_id, peaked(p.inventory.size(), *p.inventory.index_of(pool_labels[l])), std::nullopt},
                     std::nullopt);
      pool.push_back(inst);
    }
  }
  p.labeled = make_corpus(pool);

  struct Row {
    int count;
    bool tagger_correct;
    bool gold_present;
    Vote vote;
  };
  // Case rows: (tagger correct, gold present) x outcomes.
  const std::vector<Row> rows = {
      {17, true, true, Vote::gold},                                      // case 1
      {6, false, true, Vote::gold}, {5, false, true, Vote::none}, {1, false, true, Vote::wrong},  // case 2
      {2, true, false, Vote::none}, {1, true, false, Vote::wrong},       // case 3
      {5, false, false, Vote::none}, {3, false, false, Vote::wrong},     // case 4
  };
  std::vector<Instance> targets;
  int t = 0;
  for (const auto& row : rows) {
    for (int c = 0; c < row.count; ++c, ++t) {
      ScriptedTarget s;
      s.shown = row.gold_present ? present : absent_shown;
      s.gold = "Locus";
      s.tagger = row.tagger_correct ? s.gold : "Goal";
      s.vote = row.vote;
      auto inst = make_instance("eval", "t" + std::to_string(100 + t), "the cat in the hat", 2, "in", s.gold);
      std::vector<double> probs(p.inventory.size(), 0.0);
      const double weights[] = {0.30, 0.25, 0.20, 0.15, 0.10};
      for (std::size_t k = 0; k < s.shown.size(); ++k) probs[*p.inventory.index_of(s.shown[k])] = weights[k];
      p.store.insert({inst.instance_id, probs, lbl(s.tagger)}, std::nullopt);
      p.script[inst.instance_id] = s;
      targets.push_back(inst);
    }
  }
  p.targets = make_corpus(targets);
  return p;
}

// Runs the scripted pilot through a live service and returns it.
inline Service run_scripted_pilot(const ScriptedPilot& p, Service::Clock clock = logical_clock()) {
  Service service(std::move(clock));
  ServiceConfig config;
  config.neighbor_quorum = 5;
  config.max_requeues = 0;
  service.configure(config);
  service.load_inventory(p.inventory);
  service.ingest(CorpusRole::labeled, p.labeled);
  service.ingest(CorpusRole::targets, p.targets);
  for (int w = 1; w <= 5; ++w) service.register_worker("w" + std::to_string(w), "token-" + std::to_string(w));
  StrategyOptions pilot4;
  pilot4.diversity = true;
  pilot4.k = 5;
  service.attach_retrieval(&p.store, {RetrievalStrategy(pilot4)});
  service.create_neighbor_tasks();

  for (bool progress = true; progress;) {
    progress = false;
    for (int w = 1; w <= 5; ++w) {
      const std::string worker = "w" + std::to_string(w);
      const auto a = service.assign_next_task(worker, TaskKind::neighbor);
      if (!a) continue;
      progress = true;
      const Task& task = *service.task(a->task_id);
      const auto& s = p.script.at(task.instance_id);
      Json body;
      if (s.vote == Vote::none) {
        body = {{"none", true}};
      } else {
        for (const auto& opt : task.batch->options) {
          const bool is_gold = render_label(*opt.instance.gold) == s.gold;
          if (is_gold == (s.vote == Vote::gold)) {
            body = {{"chosen", {opt.instance.instance_id}}};
            break;
          }
        }
      }
      const auto r = service.submit_response(a->task_id, worker, body);
      if (!r.accepted) throw Error("scripted vote rejected: " + r.reason);
    }
  }
  return service;
}

}  // namespace fixture
