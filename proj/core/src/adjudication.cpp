#include "proxysense/adjudication.hpp"

#include <algorithm>

#include "proxysense/error.hpp"

namespace proxysense {

void validate_vote(const VoteRecord& vote, const NeighborBatch& batch) {
  if (vote.target_id != batch.target_id || vote.batch_index != batch.batch_index)
    throw ValidationError("vote by " + vote.worker_id + " does not belong to batch " + batch.target_id + "#" +
                          std::to_string(batch.batch_index));
  if (vote.chosen.empty()) throw ValidationError("vote by " + vote.worker_id + " is empty");
  if (vote.chosen.contains(std::string(kNoneOption))) {
    if (vote.chosen.size() != 1) throw ValidationError("None cannot be combined with neighbors");
    return;
  }
  for (const auto& id : vote.chosen)
    if (!batch.find(id)) throw ValidationError("option " + id + " is not in batch " + batch.target_id);
}

Tally tally_votes(const std::vector<VoteRecord>& votes, const NeighborBatch& batch) {
  Tally tally;
  for (const auto& vote : votes) {
    validate_vote(vote, batch);
    for (const auto& id : vote.chosen) ++tally[id];
  }
  return tally;
}

std::string_view to_string(PluralityOutcome::Result result) {
  switch (result) {
    case PluralityOutcome::Result::winner: return "winner";
    case PluralityOutcome::Result::tie: return "tie";
    case PluralityOutcome::Result::none_won: return "none_won";
  }
  return "tie";
}

PluralityOutcome plurality_outcome(std::string target_id, const Tally& tallies) {
  PluralityOutcome out;
  out.target_id = std::move(target_id);
  out.tallies = tallies;
  std::size_t best = 0;
  for (const auto& [option, n] : tallies) best = std::max(best, n);
  std::set<std::string> top;
  for (const auto& [option, n] : tallies)
    if (n == best) top.insert(option);
  out.none_involved = top.contains(std::string(kNoneOption));
  if (top.size() == 1) {
    if (out.none_involved) {
      out.result = PluralityOutcome::Result::none_won;
    } else {
      out.result = PluralityOutcome::Result::winner;
      out.winner = *top.begin();
    }
  } else {
    out.result = PluralityOutcome::Result::tie;
    out.tied = std::move(top);
  }
  return out;
}

std::optional<SupersenseLabel> predict_tag(const PluralityOutcome& outcome, const NeighborBatch& batch) {
  switch (outcome.result) {
    case PluralityOutcome::Result::none_won:
      return std::nullopt;
    case PluralityOutcome::Result::winner: {
      const auto* n = batch.find(outcome.winner);
      if (!n) throw ValidationError("winner " + outcome.winner + " is not in the batch");
      return n->instance.gold;
    }
    case PluralityOutcome::Result::tie: {
      if (outcome.none_involved || outcome.tied.empty()) return std::nullopt;
      std::optional<SupersenseLabel> shared;
      for (const auto& id : outcome.tied) {
        const auto* n = batch.find(id);
        if (!n || !n->instance.gold) return std::nullopt;
        if (shared && *shared != *n->instance.gold) return std::nullopt;
        shared = n->instance.gold;
      }
      return shared;
    }
  }
  return std::nullopt;
}

bool needs_requeue(const PluralityOutcome& outcome, bool requeue_on_none_tie) {
  if (outcome.result == PluralityOutcome::Result::none_won) return true;
  return requeue_on_none_tie && outcome.result == PluralityOutcome::Result::tie && outcome.none_involved;
}

RequeueResult requeue_none(const Instance& target, const std::vector<NeighborBatch>& prior,
                           const RetrievalContext& context) {
  if (!context.labeled || !context.store || !context.inventory || context.strategies.empty())
    throw ConfigError("requeue needs a labeled corpus, vectors, an inventory and a strategy");
  std::set<std::string> shown;
  std::size_t next_index = 0;
  for (const auto& batch : prior) {
    for (const auto& n : batch.options) shown.insert(n.instance.instance_id);
    next_index = std::max(next_index, batch.batch_index + 1);
  }
  if (next_index > context.max_requeues) return Exhausted{target.instance_id, prior.size()};

  std::optional<NeighborBatch> batch;
  if (context.strategies.size() == 1) {
    batch = retrieve_batch(target, *context.labeled, *context.store, context.strategies.front(), context.reference_label,
                           shown, next_index, *context.inventory);
  } else {
    batch = retrieve_merged(target, *context.labeled, *context.store, context.strategies, context.reference_label, shown,
                            next_index, *context.inventory);
  }
  if (!batch) return Exhausted{target.instance_id, prior.size()};
  return *std::move(batch);
}

StrategyTally strategy_tally(const std::vector<VoteRecord>& votes, const std::map<std::string, NeighborBatch>& batches,
                             const std::vector<std::string>& strategy_names, std::size_t workers,
                             std::size_t instances) {
  StrategyTally out;
  out.max_votes = workers * instances;
  out.max_majority = instances;
  std::map<std::string, std::size_t> row_of;
  out.rows.push_back({std::string(kNoneOption), 0, 0});
  row_of[std::string(kNoneOption)] = 0;
  for (const auto& name : strategy_names) {
    row_of.emplace(name, out.rows.size());
    out.rows.push_back({name, 0, 0});
  }

  auto credit = [&](const NeighborBatch& batch, const std::string& option) -> std::set<std::string> {
    if (option == kNoneOption) return {std::string(kNoneOption)};
    const auto* n = batch.find(option);
    if (!n) throw ValidationError("option " + option + " is not in batch " + batch.target_id);
    if (n->provenance.empty()) throw ValidationError("option " + option + " has no provenance");
    return n->provenance;
  };

  std::map<std::string, std::vector<VoteRecord>> by_target;
  for (const auto& vote : votes) {
    auto it = batches.find(vote.target_id);
    if (it == batches.end()) throw ValidationError("vote for unknown target " + vote.target_id);
    validate_vote(vote, it->second);
    by_target[vote.target_id].push_back(vote);
    for (const auto& option : vote.chosen)
      for (const auto& s : credit(it->second, option))
        if (auto r = row_of.find(s); r != row_of.end()) ++out.rows[r->second].votes;
  }

  for (const auto& [target, target_votes] : by_target) {
    const auto& batch = batches.at(target);
    const auto outcome = plurality_outcome(target, tally_votes(target_votes, batch));
    std::set<std::string> top;
    if (outcome.result == PluralityOutcome::Result::winner) top.insert(outcome.winner);
    else if (outcome.result == PluralityOutcome::Result::none_won) top.insert(std::string(kNoneOption));
    else top = outcome.tied;
    std::set<std::string> credited;
    for (const auto& option : top)
      for (const auto& s : credit(batch, option)) credited.insert(s);
    for (const auto& s : credited)
      if (auto r = row_of.find(s); r != row_of.end()) ++out.rows[r->second].majority;
  }
  return out;
}

std::string_view describe(Case c) {
  switch (c) {
    case Case::tagger_correct_gold_present: return "1 (Tagger correct, gold present)";
    case Case::tagger_incorrect_gold_present: return "2 (Tagger incorrect, gold present)";
    case Case::tagger_correct_gold_absent: return "3 (Tagger correct, gold absent)";
    case Case::tagger_incorrect_gold_absent: return "4 (Tagger incorrect, gold absent)";
  }
  return "";
}

Case classify_case(const SupersenseLabel& tagger_label, const SupersenseLabel& gold, const NeighborBatch& batch) {
  const bool correct = tagger_label == gold;
  const bool present = std::any_of(batch.options.begin(), batch.options.end(),
                                   [&](const Neighbor& n) { return n.instance.gold == gold; });
  if (present) return correct ? Case::tagger_correct_gold_present : Case::tagger_incorrect_gold_present;
  return correct ? Case::tagger_correct_gold_absent : Case::tagger_incorrect_gold_absent;
}

std::size_t CaseReport::total() const {
  std::size_t n = 0;
  for (const auto& row : rows) n += row.total;
  return n;
}

CaseReport accuracy_report(const std::vector<AdjudicatedInstance>& instances, bool count_none_ties) {
  CaseReport report;
  for (std::size_t i = 0; i < report.rows.size(); ++i) report.rows[i].id = static_cast<Case>(i + 1);
  for (const auto& inst : instances) {
    const Case c = classify_case(inst.tagger_label, inst.gold, inst.batch);
    auto& row = report.rows[static_cast<std::size_t>(c) - 1];
    ++row.total;
    if (inst.tagger_label == inst.gold) ++row.tagger_correct;
    if (predict_tag(inst.outcome, inst.batch) == inst.gold) ++row.crowd_correct;
    const bool none = inst.outcome.result == PluralityOutcome::Result::none_won ||
                      (count_none_ties && inst.outcome.result == PluralityOutcome::Result::tie &&
                       inst.outcome.none_involved);
    if (none) ++row.none_chosen;
  }
  return report;
}

}  // namespace proxysense
