#include <benchmark/benchmark.h>

#include <map>
#include <set>
#include <string>
#include <vector>

#include "proxysense/adjudication.hpp"
#include "proxysense/corpus.hpp"
#include "proxysense/retrieval.hpp"
#include "proxysense/rng.hpp"
#include "proxysense/vectors.hpp"

using namespace proxysense;

namespace {

const LabelInventory& inventory() {
  static const LabelInventory inv = LabelInventory::load(PROXYSENSE_DATA_DIR "/snacs-v2.5.txt");
  return inv;
}

Corpus synthetic_corpus(std::size_t n, std::size_t docs, std::uint64_t seed) {
  static const char* lemmas[] = {"in", "on", "at", "for", "with", "to", "from"};
  Rng rng(seed);
  const auto& inv = inventory();
  std::vector<Instance> instances;
  std::map<std::string, std::size_t> tokens;
  for (std::size_t i = 0; i < n; ++i) {
    Instance inst;
    inst.doc_id = "doc" + std::to_string(rng.below(docs));
    inst.sent_id = "s" + std::to_string(i);
    inst.lemma = lemmas[rng.below(7)];
    inst.tokens = {"we", "sat", inst.lemma, "the", "park"};
    inst.target_index = 2;
    inst.instance_id = make_instance_id(inst.doc_id, inst.sent_id, 2);
    inst.gold = SupersenseLabel::single(inv.name(rng.below(12)));
    tokens[inst.doc_id] += inst.tokens.size();
    instances.push_back(std::move(inst));
  }
  return Corpus(CorpusKind::labeled, std::move(instances), std::move(tokens));
}

struct World {
  Corpus corpus;
  VectorStore store;
};

const World& world(std::size_t n) {
  static std::map<std::size_t, World> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    World w{synthetic_corpus(n, std::max<std::size_t>(n / 20, 5), 1), {}};
    const auto splits = partition_jackknife(w.corpus);
    MockVectorProvider provider(inventory(), {0.1, 0.3, 0.05, 2});
    w.store = produce_vectors(w.corpus, splits, provider, inventory().size());
    it = cache.emplace(n, std::move(w)).first;
  }
  return it->second;
}

void BM_RankCandidates(benchmark::State& state) {
  const auto& w = world(static_cast<std::size_t>(state.range(0)));
  const auto& target = w.corpus.instances().front();
  for (auto _ : state)
    benchmark::DoNotOptimize(rank_candidates(target, w.corpus, w.store, Ranking::cosine, 0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RankCandidates)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void BM_RetrievePilotBatch(benchmark::State& state) {
  const auto& w = world(static_cast<std::size_t>(state.range(0)));
  const auto strategies = pilot_strategies(3);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& target = w.corpus.instances()[i++ % w.corpus.size()];
    benchmark::DoNotOptimize(retrieve_merged(target, w.corpus, w.store, strategies, std::nullopt, {}, 0, inventory()));
  }
}
BENCHMARK(BM_RetrievePilotBatch)->Arg(1024)->Arg(8192);

void BM_PartitionJackknife(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto corpus = synthetic_corpus(n * 4, n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(partition_jackknife(corpus, 5));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PartitionJackknife)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_StrategyTally(benchmark::State& state) {
  const auto& w = world(2048);
  const auto strategies = pilot_strategies(3);
  std::vector<std::string> names;
  for (const auto& s : strategies) names.push_back(s.name());
  const auto targets = static_cast<std::size_t>(state.range(0));
  std::map<std::string, NeighborBatch> batches;
  std::vector<VoteRecord> votes;
  Rng rng(5);
  for (std::size_t t = 0; t < targets && t < w.corpus.size(); ++t) {
    const auto& target = w.corpus.instances()[t];
    auto batch = retrieve_merged(target, w.corpus, w.store, strategies, std::nullopt, {}, 0, inventory());
    if (!batch) continue;
    for (int worker = 0; worker < 5; ++worker) {
      std::set<std::string> chosen;
      if (rng.bernoulli(0.2)) chosen.insert(std::string(kNoneOption));
      else chosen.insert(batch->options[rng.below(batch->options.size())].instance.instance_id);
      votes.push_back({target.instance_id, 0, "w" + std::to_string(worker), chosen});
    }
    batches.emplace(target.instance_id, std::move(*batch));
  }
  for (auto _ : state) benchmark::DoNotOptimize(strategy_tally(votes, batches, names, 5, batches.size()));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * votes.size()));
}
BENCHMARK(BM_StrategyTally)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
