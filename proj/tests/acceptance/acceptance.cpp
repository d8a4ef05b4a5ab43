// Acceptance suite: one PASS/FAIL line per primary criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "proxysense/pipeline.hpp"
#include "proxysense/reports.hpp"

using namespace proxysense;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

// Records the first failure and keeps the message short.
class Checker {
 public:
  void expect(bool condition, const std::string& what) {
    if (!condition && outcome_.ok) {
      outcome_.ok = false;
      outcome_.detail = what;
    }
  }
  bool failed() const { return !outcome_.ok; }
  Outcome done(std::string summary) {
    if (outcome_.ok) outcome_.detail = std::move(summary);
    return outcome_;
  }

 private:
  Outcome outcome_;
};

Outcome retrieval_oracle() {
  Checker c;
  std::size_t batches = 0;
  const std::size_t corpora = 1200;
  for (std::size_t seed = 0; seed < corpora && !c.failed(); ++seed) {
    Rng rng(seed);
    auto pool = fixture::random_pool(rng);
    for (const auto& target : pool.targets) {
      for (int mask = 0; mask < 8; ++mask) {
        StrategyOptions o;
        o.same_word = mask & 1;
        o.same_supersense = mask & 2;
        o.diversity = mask & 4;
        o.k = 1 + rng.below(10);
        std::set<std::string> exclude;
        for (const auto& inst : pool.labeled.instances())
          if (rng.bernoulli(0.1)) exclude.insert(inst.instance_id);
        const auto got =
            retrieve_batch(target, pool.labeled, pool.store, RetrievalStrategy(o), target.gold, exclude, 0, pool.inventory);
        const auto want = oracle::brute_force_batch(target, pool.labeled, pool.store, o, exclude);
        ++batches;
        const std::string where = "corpus " + std::to_string(seed) + " target " + target.instance_id + " mask " +
                                  std::to_string(mask);
        if (want.empty()) {
          c.expect(!got.has_value(), where + ": expected the empty-batch signal");
          continue;
        }
        c.expect(got.has_value(), where + ": unexpected empty batch");
        if (!got) continue;
        c.expect(got->options.size() == want.size(), where + ": size mismatch");
        for (std::size_t i = 0; i < std::min(want.size(), got->options.size()); ++i) {
          c.expect(got->options[i].instance.instance_id == want[i].first, where + ": order differs at " + std::to_string(i));
          c.expect(std::abs(got->options[i].score - want[i].second) <= 1e-12, where + ": score differs");
        }
      }
    }
  }
  return c.done(std::to_string(corpora) + " corpora, " + std::to_string(batches) + " batches");
}

Outcome partition_properties() {
  Checker c;
  const std::size_t corpora = 1000;
  for (std::size_t seed = 0; seed < corpora && !c.failed(); ++seed) {
    Rng rng(1000 + seed);
    const std::size_t n_docs = 1 + rng.below(50);
    std::map<std::string, std::size_t> docs;
    std::size_t max_doc = 0;
    for (std::size_t d = 0; d < n_docs; ++d) {
      const std::size_t tokens = 1 + rng.below(rng.bernoulli(0.2) ? 500 : 40);
      docs["doc" + std::to_string(d)] = tokens;
      max_doc = std::max(max_doc, tokens);
    }
    const std::size_t n = 1 + rng.below(std::min<std::size_t>(n_docs, 10));
    const Corpus corpus(CorpusKind::labeled, {}, docs);
    const auto split = partition_jackknife(corpus, n);
    std::set<std::string> assigned;
    for (const auto& [doc, s] : split.assignment) {
      c.expect(s < n, "split index out of range");
      assigned.insert(doc);
    }
    c.expect(assigned.size() == docs.size() && split.assignment.size() == docs.size(), "not a partition");
    c.expect(partition_jackknife(corpus, n).assignment == split.assignment, "not deterministic");
    const auto tokens = split.split_tokens(corpus);
    const auto [lo, hi] = std::minmax_element(tokens.begin(), tokens.end());
    c.expect(*hi - *lo <= max_doc, "spread exceeds the largest document");
  }
  // Small corpora against the exhaustive optimum.
  const std::size_t small = 1000;
  for (std::size_t seed = 0; seed < small && !c.failed(); ++seed) {
    Rng rng(50000 + seed);
    const std::size_t n_docs = 1 + rng.below(8);
    const std::size_t n = 1 + rng.below(std::min<std::size_t>(n_docs, 4));
    std::map<std::string, std::size_t> docs;
    std::vector<std::size_t> sizes;
    for (std::size_t d = 0; d < n_docs; ++d) {
      sizes.push_back(1 + rng.below(60));
      docs["doc" + std::to_string(d)] = sizes.back();
    }
    const Corpus corpus(CorpusKind::labeled, {}, docs);
    const auto tokens = partition_jackknife(corpus, n).split_tokens(corpus);
    const auto [lo, hi] = std::minmax_element(tokens.begin(), tokens.end());
    const std::size_t best = oracle::optimal_spread(sizes, n);
    c.expect(*hi - *lo <= best + *std::max_element(sizes.begin(), sizes.end()),
             "small corpus " + std::to_string(seed) + ": greedy spread too far from the optimum");
  }
  return c.done(std::to_string(corpora) + " random corpora, " + std::to_string(small) + " exhaustive checks");
}

Outcome strategy_table() {
  Checker c;
  const auto f = fixture::strategy_fixture();
  c.expect(f.votes.size() == 120, "fixture must hold 3 x 40 votes");
  const auto tally = strategy_tally(f.votes, f.batches, f.names, f.workers, f.instances);
  const std::vector<StrategyRow> want = {{"None", 21, 6},         {"rand/word/ss", 22, 8}, {"rand/word", 10, 2},
                                         {"cos/word/ss", 74, 24}, {"cos/word", 79, 27},    {"cos/ss", 74, 24},
                                         {"cos", 79, 27}};
  c.expect(tally.rows == want, "tallies differ from the table");
  c.expect(tally.max_votes == 120 && tally.max_majority == 40, "theoretical maximum differs");
  const auto naive = oracle::recount(f.votes, f.batches);
  for (const auto& row : want) {
    c.expect(naive.votes.count(row.strategy) && naive.votes.at(row.strategy) == row.votes, "recount votes differ for " + row.strategy);
    c.expect(naive.majority.count(row.strategy) && naive.majority.at(row.strategy) == row.majority,
             "recount majority differs for " + row.strategy);
  }
  std::istringstream text(format_strategy_tally(tally));
  std::vector<std::string> lines;
  for (std::string line; std::getline(text, line);) lines.push_back(line);
  c.expect(lines.size() == 9 && lines.back() == "Theoretical Maximum\t120\t40", "report shape differs");
  return c.done("votes 21/22/10/74/79/74/79 of 120, recount agrees");
}

Outcome case_table() {
  Checker c;
  const auto pilot = fixture::scripted_pilot();
  const auto service = fixture::run_scripted_pilot(pilot);
  const auto report = service.cases();
  const std::array<std::array<std::size_t, 4>, 4> want = {{{17, 17, 17, 0}, {12, 0, 6, 5}, {3, 3, 0, 2}, {8, 0, 0, 5}}};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& r = report.rows[i];
    const std::array<std::size_t, 4> got = {r.total, r.tagger_correct, r.crowd_correct, r.none_chosen};
    c.expect(got == want[i], "case " + std::to_string(i + 1) + " row differs");
  }
  // Independent recount from the adjudicated outcomes.
  std::array<std::array<std::size_t, 4>, 4> recount{};
  for (const auto& a : service.adjudications()) {
    const auto& s = pilot.script.at(a.target_id);
    bool present = false;
    for (const auto& n : a.batch.options) present = present || oracle::render(*n.instance.gold) == s.gold;
    const bool tagger = s.tagger == s.gold;
    const std::size_t row = tagger ? (present ? 0 : 2) : (present ? 1 : 3);
    recount[row][0] += 1;
    recount[row][1] += tagger;
    const auto predicted = predict_tag(a.outcome, a.batch);
    recount[row][2] += predicted && oracle::render(*predicted) == s.gold;
    recount[row][3] += a.outcome.none_involved;
  }
  c.expect(recount == want, "independent recount disagrees");
  return c.done("17/17 17/17 0/17, 0/12 6/12 5/12, 3/3 0/3 2/3, 0/8 0/8 5/8");
}

Outcome radar_check() {
  Checker c;
  const auto inventory = fixture::snacs();
  std::vector<Instance> instances = {
      fixture::make_instance("d", "g1", "put it in the box", 2, "in", "Goal|Locus"),
      fixture::make_instance("d", "g2", "threw it in the lake", 3, "in", "Goal|Locus"),
      fixture::make_instance("d", "l1", "sat in the park", 1, "in", "Locus"),
      fixture::make_instance("d", "l2", "slept in the car", 1, "in", "Locus"),
      fixture::make_instance("d", "w1", "ate with a fork", 1, "with", "Instrument"),
  };
  const auto corpus = fixture::make_corpus(instances);
  auto sel = [](const std::string& id, int worker, std::set<std::string> chosen, std::optional<std::string> write_in = {},
                bool omit = false) {
    return SelectionResponse{id, "w" + std::to_string(worker), std::move(chosen), std::move(write_in), omit};
  };
  const std::string g1 = "d:g1:2", g2 = "d:g2:3", l1 = "d:l1:1", l2 = "d:l2:1", w1 = "d:w1:1";
  std::map<std::string, std::vector<SelectionResponse>> responses = {
      {g1, {sel(g1, 1, {"into"}), sel(g1, 2, {"into", "for"}), sel(g1, 3, {"for"}), sel(g1, 4, {}, {}, true)}},
      {g2, {sel(g2, 1, {"into", "for"}), sel(g2, 2, {"for", "with"}), sel(g2, 3, {"inside"})}},
      {l1, {sel(l1, 1, {"within"}), sel(l1, 2, {"with"}), sel(l1, 3, {"within"}, "amid"), sel(l1, 4, {"inside"})}},
      {l2, {sel(l2, 1, {"within", "with"}), sel(l2, 2, {}, "amid"), sel(l2, 3, {}, "amid")}},
      {w1, {sel(w1, 1, {"using"}), sel(w1, 2, {"using"}), sel(w1, 3, {"by means of"})}},
  };
  std::map<std::string, SubstituteDistribution> per_instance;
  for (const auto& [id, rs] : responses) per_instance[id] = aggregate_instance_distribution(rs);
  const auto aggregates = aggregate_by_label(per_instance, corpus);

  const auto& row = aggregates.at({"in", fixture::lbl("Goal|Locus")}).counts;
  auto count = [&](const std::string& k) { return row.count(k) ? row.at(k) : 0; };
  c.expect(count("with") == 1 && count("into") == 3 && count("for") == 4, "Goal|Locus row is not with=1 into=3 for=4");

  // Global counts recomputed directly from the responses.
  std::map<std::string, std::int64_t> global;
  for (const auto& [id, rs] : responses)
    for (const auto& r : rs) {
      for (const auto& s : r.chosen) ++global[s];
      if (r.write_in) ++global[*r.write_in + "*"];
      if (r.omit) ++global[std::string(kOmitKey)];
    }
  const auto rows = radar_report(aggregates, 3);
  for (const auto& r : rows) {
    const std::string key = r.substitute + (r.write_in ? "*" : "");
    c.expect(global[key] >= 3, "radar kept " + key + " with global count " + std::to_string(global[key]));
  }
  std::set<std::string> kept;
  for (const auto& r : rows) kept.insert(r.substitute + (r.write_in ? "*" : ""));
  for (const auto& [key, n] : global)
    if (n >= 3 && key != kOmitKey) c.expect(kept.count(key) == 1, "radar dropped " + key);
  c.expect(!kept.count("inside") && !kept.count("by means of"), "substitutes below the threshold survived");
  bool with_row = false;
  for (const auto& r : rows)
    with_row = with_row || (r.lemma == "in" && render_label(r.label) == "Goal|Locus" && r.substitute == "with" && r.count == 1);
  c.expect(with_row, "with=1 row missing from the radar");
  return c.done("Goal|Locus in: with=1 into=3 for=4; " + std::to_string(rows.size()) + " radar rows, all global >= 3");
}

Outcome diversity_dedup() {
  Checker c;
  std::size_t batches = 0, merges = 0, requeue_chains = 0;
  for (std::uint64_t seed = 0; batches < 10000 && !c.failed(); ++seed) {
    Rng rng(900000 + seed);
    auto pool = fixture::random_pool(rng, 120, 20);
    for (const auto& target : pool.targets) {
      StrategyOptions o;
      o.diversity = true;
      o.k = 1 + rng.below(8);
      o.same_word = rng.bernoulli(0.3);
      const RetrievalStrategy strategy(o);
      std::set<std::string> exclude;
      for (const auto& inst : pool.labeled.instances())
        if (rng.bernoulli(0.05)) exclude.insert(inst.instance_id);
      const auto batch = retrieve_batch(target, pool.labeled, pool.store, strategy, target.gold, exclude, 0, pool.inventory);
      ++batches;
      if (batch) {
        std::set<std::string> labels;
        for (const auto& n : batch->options) {
          c.expect(labels.insert(render_label(*n.instance.gold)).second, "duplicate label under diversity");
          c.expect(n.instance.instance_id != target.instance_id, "target inside its own batch");
          c.expect(!exclude.count(n.instance.instance_id), "excluded id returned");
        }
      }

      // Merge of the six comparison strategies.
      std::vector<std::pair<std::string, Neighbor>> contributions;
      for (const auto& s : pilot_strategies(seed, 1 + rng.below(3))) {
        const auto b = retrieve_batch(target, pool.labeled, pool.store, s, target.gold, {}, 0, pool.inventory);
        if (b)
          for (const auto& n : b->options) contributions.emplace_back(s.name(), n);
      }
      const auto merged = dedup_merge(contributions);
      ++merges;
      std::map<std::string, std::set<std::string>> expected_prov;
      std::map<std::string, double> expected_score;
      for (const auto& [name, n] : contributions) {
        expected_prov[n.instance.instance_id].insert(name);
        auto& s = expected_score.try_emplace(n.instance.instance_id, n.score).first->second;
        s = std::max(s, n.score);
      }
      c.expect(merged.size() == expected_prov.size(), "merge lost or duplicated instances");
      std::vector<std::pair<std::string, Neighbor>> again;
      for (const auto& n : merged) {
        c.expect(n.provenance == expected_prov[n.instance.instance_id], "provenance not conserved");
        c.expect(n.score == expected_score[n.instance.instance_id], "merged score is not the maximum");
        for (const auto& name : n.provenance) again.emplace_back(name, n);
      }
      const auto twice = dedup_merge(again);
      c.expect(twice.size() == merged.size(), "merge not idempotent");
      for (std::size_t i = 0; i < std::min(twice.size(), merged.size()); ++i)
        c.expect(twice[i].instance.instance_id == merged[i].instance.instance_id &&
                     twice[i].provenance == merged[i].provenance && twice[i].score == merged[i].score,
                 "merge not idempotent");

      // Requeue chain.
      if (!batch) continue;
      RetrievalContext ctx{&pool.labeled, &pool.store, &pool.inventory, {strategy}, target.gold, rng.below(4)};
      std::vector<NeighborBatch> prior = {*batch};
      while (true) {
        auto next = requeue_none(target, prior, ctx);
        if (std::holds_alternative<Exhausted>(next)) break;
        prior.push_back(std::get<NeighborBatch>(next));
        c.expect(prior.back().batch_index == prior.size() - 1, "requeue index out of sequence");
        c.expect(prior.size() <= ctx.max_requeues + 1, "requeue limit ignored");
      }
      ++requeue_chains;
      std::set<std::string> seen;
      for (const auto& b : prior)
        for (const auto& id : b.option_ids()) c.expect(seen.insert(id).second, "requeue batches overlap");
    }
  }
  return c.done(std::to_string(batches) + " diverse batches, " + std::to_string(merges) + " merges, " +
                std::to_string(requeue_chains) + " requeue chains");
}

Outcome crowd_simulation() {
  Checker c;
  const std::uint64_t seed = 2019;
  const std::size_t tasks = 1000, options = 5;
  std::vector<SimWorkerProfile> workers;
  for (int w = 1; w <= 5; ++w) workers.push_back({"w" + std::to_string(w), 0.8, 0.0, mix_seed(seed, "w" + std::to_string(w))});

  const char* labels[] = {"Locus", "Goal", "Source", "Time", "Manner"};
  std::vector<SimTask> sim_tasks;
  std::map<std::string, NeighborBatch> batches;
  for (std::size_t t = 0; t < tasks; ++t) {
    const std::string target = "target:" + std::to_string(t) + ":0";
    NeighborBatch batch;
    batch.target_id = target;
    SimTask task{target, {}, {}, ""};
    for (std::size_t o = 0; o < options; ++o) {
      auto inst = fixture::make_instance("pool", std::to_string(t) + "-" + std::to_string(o), "sat in it", 1, "in", labels[o]);
      task.options.push_back(inst.instance_id);
      batch.options.push_back({inst, 0.0, {}});
    }
    task.correct = {task.options[0]};
    sim_tasks.push_back(task);
    batches[target] = batch;
  }
  const auto log = simulate_workers(workers, sim_tasks);
  std::map<std::string, std::vector<VoteRecord>> votes;
  for (const auto& r : log.responses) votes[r.task_id].push_back({r.task_id, 0, r.worker_id, {r.choice}});
  std::vector<AdjudicatedInstance> adjudicated;
  for (const auto& [target, vs] : votes) {
    const auto& batch = batches.at(target);
    adjudicated.push_back({target, fixture::lbl("Locus"), fixture::lbl("Goal"), batch,
                           plurality_outcome(target, tally_votes(vs, batch))});
  }
  const auto report = accuracy_report(adjudicated);
  const auto& row = report.rows[1];
  c.expect(row.total == tasks, "every task should be case 2");
  const double accuracy = static_cast<double>(row.crowd_correct) / static_cast<double>(row.total);
  const double mc = oracle::monte_carlo_plurality(seed, tasks, 5, 0.8, options);
  const double exact = oracle::exact_plurality(5, 0.8, options);
  c.expect(std::abs(accuracy - mc) <= 0.02, "simulation and Monte-Carlo oracle differ by more than 0.02");
  c.expect(accuracy > 0.8, "crowd accuracy does not beat a single worker");
  char buf[160];
  std::snprintf(buf, sizeof buf, "crowd %.3f, Monte-Carlo oracle %.3f, exact %.4f, tagger 0.000", accuracy, mc, exact);
  return c.done(buf);
}

Outcome event_sourcing() {
  Checker c;
  std::string detail;
  for (const char* design : {"neighbor", "substitution"}) {
    const fs::path out = fs::temp_directory_path() / ("proxysense-acceptance-" + std::string(design));
    fs::remove_all(out);
    auto config = load_pipeline_config(fs::path(PROXYSENSE_DATA_DIR) / "example" / (std::string(design) + ".json"));
    Pipeline pipeline(config, out);
    pipeline.run();
    std::ifstream in(out / "state-digest.txt");
    std::string live;
    std::getline(in, live);
    const auto log = EventLog::read(out / "events.jsonl");
    const auto first = Service::replay(log).digest();
    const auto second = Service::replay(log).digest();
    c.expect(first == live, std::string(design) + ": replayed digest differs from the live run");
    c.expect(first == second, std::string(design) + ": replay is not deterministic");
    detail += std::string(design) + " " + std::to_string(log.size()) + " events " + live.substr(0, 12) + "; ";
    fs::remove_all(out);
  }
  // In-memory check on the scripted pilot as well.
  const auto pilot = fixture::scripted_pilot();
  const auto service = fixture::run_scripted_pilot(pilot);
  c.expect(Service::replay(service.log()).digest() == service.digest(), "scripted pilot replay differs");
  detail.resize(detail.size() - 2);
  return c.done(detail);
}

Outcome nearest_centroid() {
  Checker c;
  // Disjoint supports: every instance drawn from one label's substitutes.
  std::size_t disjoint = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(70000 + seed);
    const std::size_t n_labels = 2 + rng.below(5);
    LabelDistributions centroids;
    for (std::size_t l = 0; l < n_labels; ++l) {
      auto& d = centroids[{"at", fixture::lbl("L" + std::to_string(l))}];
      for (int s = 0; s < 3; ++s) d.counts["s" + std::to_string(l) + "-" + std::to_string(s)] = 1 + rng.below(9);
    }
    for (std::size_t l = 0; l < n_labels; ++l) {
      // Either one of the label's substitutes or a scaled copy of its centroid.
      const bool proportional = rng.bernoulli(0.5);
      SubstituteDistribution d;
      if (proportional) {
        d = centroids.at({"at", fixture::lbl("L" + std::to_string(l))});
        for (auto& [k, v] : d.counts) v *= 3;
      } else {
        d.counts["s" + std::to_string(l) + "-" + std::to_string(rng.below(3))] = 1 + rng.below(5);
      }
      if (rng.bernoulli(0.5)) d.counts[std::string(kOmitKey)] = 2;
      const auto r = infer_label_nearest_centroid(d, centroids, "at");
      const auto* p = std::get_if<LabelPrediction>(&r);
      c.expect(p && render_label(p->label) == "L" + std::to_string(l), "disjoint-support instance misclassified");
      c.expect(!proportional || (p && std::abs(p->confidence - 1.0) < 1e-12), "centroid copy should score 1.0");
      ++disjoint;
    }
  }
  // Random small cases against the exact oracle, plus scale invariance.
  const std::size_t cases = 3000;
  std::size_t scaled = 0;
  for (std::uint64_t seed = 0; seed < cases && !c.failed(); ++seed) {
    Rng rng(80000 + seed);
    const std::size_t n_labels = 1 + rng.below(5), n_subs = 1 + rng.below(8);
    auto sub = [&] { return rng.bernoulli(0.1) ? std::string(kOmitKey) : "s" + std::to_string(rng.below(n_subs)); };
    LabelDistributions centroids;
    for (std::size_t l = 0; l < n_labels; ++l) {
      auto& d = centroids[{"at", fixture::lbl("L" + std::to_string(l))}];
      d.counts["s" + std::to_string(rng.below(n_subs))] += 1 + rng.below(4);
      for (std::size_t k = rng.below(6); k > 0; --k) d.counts[sub()] += 1 + rng.below(4);
    }
    centroids[{"on", fixture::lbl("L0")}].counts["s0"] = 5;  // other lemma, never a candidate
    SubstituteDistribution d;
    for (std::size_t k = 1 + rng.below(5); k > 0; --k) d.counts[sub()] += 1 + rng.below(3);
    const auto want = oracle::nearest_centroid(d, centroids, "at");
    const auto got = infer_label_nearest_centroid(d, centroids, "at");
    const auto* p = std::get_if<LabelPrediction>(&got);
    c.expect(want.has_value() == (p != nullptr), "case " + std::to_string(seed) + ": abstention differs");
    if (!want || !p) continue;
    c.expect(p->label == *want, "case " + std::to_string(seed) + ": label differs from the exact oracle");
    for (std::int64_t factor : {2, 3, 7, 1000}) {
      SubstituteDistribution big = d;
      for (auto& [k, v] : big.counts) v *= factor;
      const auto r = infer_label_nearest_centroid(big, centroids, "at");
      const auto* q = std::get_if<LabelPrediction>(&r);
      c.expect(q && q->label == p->label, "case " + std::to_string(seed) + ": not scale invariant");
      ++scaled;
    }
  }
  return c.done(std::to_string(disjoint) + " disjoint-support instances, " + std::to_string(cases) +
                " oracle cases, " + std::to_string(scaled) + " scaled copies");
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double budget_seconds;
  };
  const std::vector<Criterion> criteria = {
      {"retrieval-oracle-equivalence", retrieval_oracle, 60},
      {"partition-properties", partition_properties, 30},
      {"strategy-tally-fixture", strategy_table, 0},
      {"case-table-fixture", case_table, 0},
      {"radar-aggregation", radar_check, 0},
      {"diversity-dedup-requeue", diversity_dedup, 0},
      {"crowd-beats-tagger-simulation", crowd_simulation, 60},
      {"event-sourcing-determinism", event_sourcing, 0},
      {"nearest-centroid-classifier", nearest_centroid, 0},
  };
  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (outcome.ok && criterion.budget_seconds > 0 && seconds > criterion.budget_seconds) {
      outcome = {false, "over the " + std::to_string(static_cast<int>(criterion.budget_seconds)) + " s budget"};
    }
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.2f s", seconds);
    std::cout << (outcome.ok ? "PASS " : "FAIL ") << criterion.name << " (" << timing << "): " << outcome.detail << "\n";
    failures += outcome.ok ? 0 : 1;
  }
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria failing") << "\n";
  return failures == 0 ? 0 : 1;
}
