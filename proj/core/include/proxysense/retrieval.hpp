#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "proxysense/error.hpp"
#include "proxysense/corpus.hpp"
#include "proxysense/label.hpp"
#include "proxysense/vectors.hpp"

namespace proxysense {

enum class Ranking { cosine, random };

std::string_view to_string(Ranking ranking);
Ranking parse_ranking(std::string_view text);

struct StrategyOptions {
  Ranking ranking = Ranking::cosine;
  bool same_word = false;
  bool same_supersense = false;
  bool diversity = false;
  std::size_t k = 5;
  bool require_tagger_prediction = false;
  std::uint64_t seed = 0;
};

// Validated retrieval configuration. Random ranking without the same-word
// constraint cannot be constructed.
class RetrievalStrategy {
 public:
  // Throws ConfigError on k == 0 or random ranking without same_word.
  explicit RetrievalStrategy(StrategyOptions options);

  const StrategyOptions& options() const { return options_; }

  // Short provenance name, e.g. "cos", "cos/word/ss", "rand/word".
  std::string name() const;
  // Long form used in reports, e.g. "Cosine, same-word, same-supersense".
  std::string description() const;

 private:
  StrategyOptions options_;
};

// The six neighbor-retrieval strategies compared in the pilot, one neighbor
// each, in report order.
std::vector<RetrievalStrategy> pilot_strategies(std::uint64_t seed, std::size_t k = 1);

struct Candidate {
  const Instance* instance = nullptr;
  double score = 0.0;
};

struct Neighbor {
  Instance instance;
  double score = 0.0;
  std::set<std::string> provenance;
};

struct NeighborBatch {
  std::string target_id;
  std::vector<Neighbor> options;
  std::size_t batch_index = 0;

  std::vector<std::string> option_ids() const;
  const Neighbor* find(std::string_view instance_id) const;
};

// Every labeled instance except the target itself. Cosine: descending
// similarity, ties by instance_id. Random: seeded shuffle (seed mixed with the
// target id) with score 0. Throws ValidationError naming an instance without
// a vector when ranking is cosine.
std::vector<Candidate> rank_candidates(const Instance& target, const Corpus& labeled, const VectorStore& store,
                                       Ranking ranking, std::uint64_t seed);

// Order-preserving filter. same_supersense compares full gold pairs against
// `reference` (falls back to target.gold); throws ValidationError if neither
// is available.
std::vector<Candidate> apply_constraints(const std::vector<Candidate>& candidates, const Instance& target,
                                         bool same_word, bool same_supersense,
                                         const std::optional<SupersenseLabel>& reference = std::nullopt);

// Greedy scan keeping a candidate iff its gold label differs from every kept
// one; stops after k.
std::vector<Candidate> diversity_filter(const std::vector<Candidate>& candidates, std::size_t k);

// rank -> exclude -> constrain -> diversity -> truncate to k. Returns
// std::nullopt (the empty-batch signal) when nothing survives.
std::optional<NeighborBatch> retrieve_batch(const Instance& target, const Corpus& labeled, const VectorStore& store,
                                            const RetrievalStrategy& strategy,
                                            const std::optional<SupersenseLabel>& reference_label,
                                            const std::set<std::string>& exclude, std::size_t batch_index,
                                            const LabelInventory& inventory);

// Groups contributions by instance_id, unions provenance, keeps the max
// score, orders by descending score then instance_id.
std::vector<Neighbor> dedup_merge(const std::vector<std::pair<std::string, Neighbor>>& contributions);

// One neighbor per strategy, deduplicated into a single batch (the pilot
// comparison layout). std::nullopt when every strategy comes back empty.
std::optional<NeighborBatch> retrieve_merged(const Instance& target, const Corpus& labeled, const VectorStore& store,
                                             const std::vector<RetrievalStrategy>& strategies,
                                             const std::optional<SupersenseLabel>& reference_label,
                                             const std::set<std::string>& exclude, std::size_t batch_index,
                                             const LabelInventory& inventory);

void sort_options(std::vector<Neighbor>& options);

}  // namespace proxysense
