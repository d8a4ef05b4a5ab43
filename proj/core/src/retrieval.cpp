#include "proxysense/retrieval.hpp"

#include <algorithm>
#include <map>

#include "proxysense/error.hpp"
#include "proxysense/rng.hpp"

namespace proxysense {

std::string_view to_string(Ranking ranking) { return ranking == Ranking::cosine ? "cosine" : "random"; }

Ranking parse_ranking(std::string_view text) {
  if (text == "cosine") return Ranking::cosine;
  if (text == "random") return Ranking::random;
  throw ConfigError("unknown ranking '" + std::string(text) + "'");
}

RetrievalStrategy::RetrievalStrategy(StrategyOptions options) : options_(options) {
  if (options_.k == 0) throw ConfigError("retrieval k must be positive");
  if (options_.ranking == Ranking::random && !options_.same_word)
    throw ConfigError("random ranking requires the same-word constraint");
}

std::string RetrievalStrategy::name() const {
  std::string out = options_.ranking == Ranking::cosine ? "cos" : "rand";
  if (options_.same_word) out += "/word";
  if (options_.same_supersense) out += "/ss";
  if (options_.diversity) out += "/div";
  if (options_.require_tagger_prediction) out += "/tag";
  return out;
}

std::string RetrievalStrategy::description() const {
  std::string out = options_.ranking == Ranking::cosine ? "Cosine" : "Random";
  if (options_.same_word) out += ", same-word";
  if (options_.same_supersense) out += ", same-supersense";
  if (options_.diversity) out += ", diversity";
  if (options_.require_tagger_prediction) out += ", tagger-prediction";
  if (!options_.same_word && !options_.same_supersense && !options_.diversity && !options_.require_tagger_prediction)
    out += ", no constraints";
  return out;
}

std::vector<RetrievalStrategy> pilot_strategies(std::uint64_t seed, std::size_t k) {
  auto make = [&](Ranking r, bool word, bool ss) {
    StrategyOptions o;
    o.ranking = r;
    o.same_word = word;
    o.same_supersense = ss;
    o.k = k;
    o.seed = seed;
    return RetrievalStrategy(o);
  };
  return {make(Ranking::random, true, true), make(Ranking::random, true, false),
          make(Ranking::cosine, true, true), make(Ranking::cosine, true, false),
          make(Ranking::cosine, false, true), make(Ranking::cosine, false, false)};
}

std::vector<std::string> NeighborBatch::option_ids() const {
  std::vector<std::string> ids;
  ids.reserve(options.size());
  for (const auto& n : options) ids.push_back(n.instance.instance_id);
  return ids;
}

const Neighbor* NeighborBatch::find(std::string_view instance_id) const {
  for (const auto& n : options)
    if (n.instance.instance_id == instance_id) return &n;
  return nullptr;
}

std::vector<Candidate> rank_candidates(const Instance& target, const Corpus& labeled, const VectorStore& store,
                                       Ranking ranking, std::uint64_t seed) {
  std::vector<Candidate> out;
  out.reserve(labeled.size());
  if (ranking == Ranking::random) {
    for (const auto& inst : labeled.instances())
      if (inst.instance_id != target.instance_id) out.push_back({&inst, 0.0});
    Rng rng(mix_seed(seed, target.instance_id));
    rng.shuffle(out);
    return out;
  }
  if (labeled.empty()) return out;
  const auto& target_vec = store.at(target.instance_id);
  for (const auto& inst : labeled.instances()) {
    if (inst.instance_id == target.instance_id) continue;
    out.push_back({&inst, cosine_similarity(target_vec, store.at(inst.instance_id))});
  }
  // Corpus instances are already in id order, so a stable sort keeps id ties.
  std::stable_sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  return out;
}

std::vector<Candidate> apply_constraints(const std::vector<Candidate>& candidates, const Instance& target,
                                         bool same_word, bool same_supersense,
                                         const std::optional<SupersenseLabel>& reference) {
  std::optional<SupersenseLabel> label = reference ? reference : target.gold;
  if (same_supersense && !label)
    throw ValidationError("same-supersense constraint needs a reference label for " + target.instance_id);
  std::vector<Candidate> out;
  for (const auto& c : candidates) {
    if (same_word && c.instance->lemma != target.lemma) continue;
    if (same_supersense && c.instance->gold != label) continue;
    out.push_back(c);
  }
  return out;
}

std::vector<Candidate> diversity_filter(const std::vector<Candidate>& candidates, std::size_t k) {
  std::vector<Candidate> kept;
  for (const auto& c : candidates) {
    if (kept.size() >= k) break;
    const bool seen = std::any_of(kept.begin(), kept.end(),
                                  [&](const Candidate& other) { return other.instance->gold == c.instance->gold; });
    if (!seen) kept.push_back(c);
  }
  return kept;
}

void sort_options(std::vector<Neighbor>& options) {
  std::sort(options.begin(), options.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.instance.instance_id < b.instance.instance_id;
  });
}

std::optional<NeighborBatch> retrieve_batch(const Instance& target, const Corpus& labeled, const VectorStore& store,
                                            const RetrievalStrategy& strategy,
                                            const std::optional<SupersenseLabel>& reference_label,
                                            const std::set<std::string>& exclude, std::size_t batch_index,
                                            const LabelInventory& inventory) {
  const auto& opt = strategy.options();
  auto ranked = rank_candidates(target, labeled, store, opt.ranking, opt.seed);
  std::erase_if(ranked, [&](const Candidate& c) { return exclude.contains(c.instance->instance_id); });
  auto pool = apply_constraints(ranked, target, opt.same_word, opt.same_supersense, reference_label);
  std::vector<Candidate> chosen;
  if (opt.diversity) {
    chosen = diversity_filter(pool, opt.k);
  } else {
    chosen.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(std::min(opt.k, pool.size())));
  }

  if (opt.require_tagger_prediction && !chosen.empty()) {
    const auto predicted = tagger_label(store.at(target.instance_id), inventory);
    const bool covered = std::any_of(chosen.begin(), chosen.end(),
                                     [&](const Candidate& c) { return c.instance->gold == predicted; });
    if (!covered) {
      auto it = std::find_if(pool.begin(), pool.end(), [&](const Candidate& c) { return c.instance->gold == predicted; });
      if (it != pool.end()) {
        if (chosen.size() < opt.k) {
          chosen.push_back(*it);
        } else {
          // Lowest score, and among equal scores the one presented last.
          auto lowest = std::min_element(chosen.begin(), chosen.end(), [](const Candidate& a, const Candidate& b) {
            if (a.score != b.score) return a.score < b.score;
            return a.instance->instance_id > b.instance->instance_id;
          });
          *lowest = *it;
        }
      }
    }
  }

  if (chosen.empty()) return std::nullopt;
  NeighborBatch batch;
  batch.target_id = target.instance_id;
  batch.batch_index = batch_index;
  for (const auto& c : chosen) batch.options.push_back({*c.instance, c.score, {strategy.name()}});
  sort_options(batch.options);
  return batch;
}

std::vector<Neighbor> dedup_merge(const std::vector<std::pair<std::string, Neighbor>>& contributions) {
  std::map<std::string, Neighbor> merged;
  for (const auto& [strategy, neighbor] : contributions) {
    auto [it, inserted] = merged.try_emplace(neighbor.instance.instance_id, neighbor);
    if (inserted) {
      it->second.provenance.insert(strategy);
      continue;
    }
    it->second.score = std::max(it->second.score, neighbor.score);
    it->second.provenance.insert(neighbor.provenance.begin(), neighbor.provenance.end());
    it->second.provenance.insert(strategy);
  }
  std::vector<Neighbor> out;
  out.reserve(merged.size());
  for (auto& [id, n] : merged) out.push_back(std::move(n));
  sort_options(out);
  return out;
}

std::optional<NeighborBatch> retrieve_merged(const Instance& target, const Corpus& labeled, const VectorStore& store,
                                             const std::vector<RetrievalStrategy>& strategies,
                                             const std::optional<SupersenseLabel>& reference_label,
                                             const std::set<std::string>& exclude, std::size_t batch_index,
                                             const LabelInventory& inventory) {
  std::vector<std::pair<std::string, Neighbor>> contributions;
  for (const auto& strategy : strategies) {
    auto batch = retrieve_batch(target, labeled, store, strategy, reference_label, exclude, batch_index, inventory);
    if (!batch) continue;
    for (auto& n : batch->options) contributions.emplace_back(strategy.name(), std::move(n));
  }
  if (contributions.empty()) return std::nullopt;
  NeighborBatch batch;
  batch.target_id = target.instance_id;
  batch.batch_index = batch_index;
  batch.options = dedup_merge(contributions);
  return batch;
}

}  // namespace proxysense
