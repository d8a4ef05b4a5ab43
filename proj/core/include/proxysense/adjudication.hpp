#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "proxysense/error.hpp"
#include "proxysense/label.hpp"
#include "proxysense/retrieval.hpp"

namespace proxysense {

// Option key of the "None" answer. Instance ids always contain ':' so the
// key cannot collide with a neighbor.
inline constexpr std::string_view kNoneOption = "None";
inline constexpr std::size_t kDefaultMaxRequeues = 2;

struct VoteRecord {
  std::string target_id;
  std::size_t batch_index = 0;
  std::string worker_id;
  std::set<std::string> chosen;  // option ids, or exactly {kNoneOption}

  bool is_none() const { return chosen.size() == 1 && *chosen.begin() == kNoneOption; }
};

using Tally = std::map<std::string, std::size_t>;

// Throws ValidationError for an empty vote, None mixed with neighbors, or an
// option outside the batch.
void validate_vote(const VoteRecord& vote, const NeighborBatch& batch);

// +1 per option in each worker's chosen set; None is its own option.
Tally tally_votes(const std::vector<VoteRecord>& votes, const NeighborBatch& batch);

struct PluralityOutcome {
  enum class Result { winner, tie, none_won };

  std::string target_id;
  Tally tallies;
  Result result = Result::tie;
  std::string winner;            // when result == winner
  std::set<std::string> tied;    // when result == tie
  bool none_involved = false;    // None won or shares the maximum
};

std::string_view to_string(PluralityOutcome::Result result);

PluralityOutcome plurality_outcome(std::string target_id, const Tally& tallies);

// Winner's gold label. Ties abstain unless every tied neighbor carries the
// same label; None wins abstain.
std::optional<SupersenseLabel> predict_tag(const PluralityOutcome& outcome, const NeighborBatch& batch);

// Whether an outcome sends the target back for another batch.
bool needs_requeue(const PluralityOutcome& outcome, bool requeue_on_none_tie = true);

struct RetrievalContext {
  const Corpus* labeled = nullptr;
  const VectorStore* store = nullptr;
  const LabelInventory* inventory = nullptr;
  std::vector<RetrievalStrategy> strategies;  // one: plain batch; several: merged
  std::optional<SupersenseLabel> reference_label;
  std::size_t max_requeues = kDefaultMaxRequeues;
};

struct Exhausted {
  std::string target_id;
  std::size_t batches_shown = 0;
};

using RequeueResult = std::variant<NeighborBatch, Exhausted>;

// Next batch for a None-adjudicated target, disjoint from every option shown
// in `prior`. Exhausted once max_requeues batches beyond the first have been
// issued, or when retrieval comes back empty.
RequeueResult requeue_none(const Instance& target, const std::vector<NeighborBatch>& prior,
                           const RetrievalContext& context);

struct StrategyRow {
  std::string strategy;  // provenance name or kNoneOption
  std::size_t votes = 0;
  std::size_t majority = 0;
  bool operator==(const StrategyRow&) const = default;
};

struct StrategyTally {
  std::vector<StrategyRow> rows;  // None first, then strategies in the given order
  std::size_t max_votes = 0;      // workers * instances
  std::size_t max_majority = 0;   // instances
};

// Credits each voted neighbor's vote to every strategy in its provenance.
// Majority counts, per target, the strategies whose neighbor is in the set of
// options sharing the maximum tally. Throws ValidationError for a vote whose
// batch is unknown or whose option has no provenance.
StrategyTally strategy_tally(const std::vector<VoteRecord>& votes, const std::map<std::string, NeighborBatch>& batches,
                             const std::vector<std::string>& strategy_names, std::size_t workers,
                             std::size_t instances);

enum class Case { tagger_correct_gold_present = 1, tagger_incorrect_gold_present = 2,
                  tagger_correct_gold_absent = 3, tagger_incorrect_gold_absent = 4 };

std::string_view describe(Case c);

Case classify_case(const SupersenseLabel& tagger_label, const SupersenseLabel& gold, const NeighborBatch& batch);

struct AdjudicatedInstance {
  std::string target_id;
  SupersenseLabel gold;
  SupersenseLabel tagger_label;
  NeighborBatch batch;
  PluralityOutcome outcome;
};

struct CaseRow {
  Case id = Case::tagger_correct_gold_present;
  std::size_t total = 0;
  std::size_t tagger_correct = 0;
  std::size_t crowd_correct = 0;
  std::size_t none_chosen = 0;
  bool operator==(const CaseRow&) const = default;
};

struct CaseReport {
  std::array<CaseRow, 4> rows;
  std::size_t total() const;
};

// none_chosen counts None wins and, when count_none_ties is set, ties that
// include None.
CaseReport accuracy_report(const std::vector<AdjudicatedInstance>& instances, bool count_none_ties = true);

}  // namespace proxysense
