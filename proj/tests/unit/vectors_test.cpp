#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"

using namespace proxysense;

TEST_CASE("cosine similarity") {
  const std::vector<double> a = {1, 0, 0}, b = {1, 0}, c = {0, 1};
  CHECK(cosine_similarity(a, a) == doctest::Approx(1.0));
  CHECK(cosine_similarity(b, c) == 0.0);
  const std::vector<double> d = {0.6, 0.4}, e = {0.5, 0.5};
  CHECK(std::abs(cosine_similarity(d, e) - 0.980581) < 1e-6);
  CHECK_THROWS_AS(cosine_similarity(a, b), DomainError);
  const std::vector<double> zero = {0, 0};
  CHECK_THROWS_AS(cosine_similarity(zero, b), DomainError);
}

TEST_CASE("cosine is reflexive and symmetric on random vectors") {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const auto n = 1 + rng.below(50);
    const auto a = fixture::random_probs(rng, n), b = fixture::random_probs(rng, n);
    CHECK(std::abs(cosine_similarity(a, a) - 1.0) <= 1e-9);
    CHECK(cosine_similarity(a, b) == cosine_similarity(b, a));
  }
}

TEST_CASE("vector validation and clamping") {
  ProbabilityVector v{"x", {0.5, 0.3}, std::nullopt};
  CHECK_THROWS_AS(validate_vector(v, 2), ValidationError);  // sums to 0.8
  v.probs = {0.5, 0.5};
  CHECK_NOTHROW(validate_vector(v, 2));
  CHECK_THROWS_AS(validate_vector(v, 3), ValidationError);
  v.probs = {1.5, -0.5};
  CHECK_THROWS_AS(validate_vector(v, 2), ValidationError);

  std::vector<double> p = {0.5, 1e-15, 0.5};
  clamp_and_renormalize(p);
  CHECK(p[1] == 0.0);
  CHECK(p[0] + p[2] == doctest::Approx(1.0));
}

TEST_CASE("tagger label prefers the provider's prediction") {
  const auto inv = fixture::snacs();
  ProbabilityVector v{"x", fixture::peaked(inv.size(), *inv.index_of("Goal")), std::nullopt};
  CHECK(tagger_label(v, inv) == SupersenseLabel::single("Goal"));
  v.predicted = SupersenseLabel{"Beneficiary", "Goal"};
  CHECK(tagger_label(v, inv) == SupersenseLabel{"Beneficiary", "Goal"});
}

TEST_CASE("partition_jackknife examples") {
  SUBCASE("five equal documents, five splits") {
    std::map<std::string, std::size_t> docs;
    for (char d = 'a'; d <= 'e'; ++d) docs[std::string(1, d)] = 10;
    const auto s = partition_jackknife(Corpus(CorpusKind::labeled, {}, docs), 5);
    std::set<std::size_t> used;
    for (const auto& [doc, split] : s.assignment) used.insert(split);
    CHECK(used.size() == 5);
  }
  SUBCASE("heaviest first") {
    const Corpus c(CorpusKind::labeled, {}, {{"a", 30}, {"b", 10}, {"c", 10}, {"d", 10}});
    const auto s = partition_jackknife(c, 2);
    CHECK(s.documents_in(0) == std::vector<std::string>{"a"});
    CHECK(s.documents_in(1) == std::vector<std::string>{"b", "c", "d"});
    CHECK(s.split_tokens(c) == std::vector<std::size_t>{30, 30});
  }
  SUBCASE("fewer documents than splits") {
    CHECK_THROWS_AS(partition_jackknife(Corpus(CorpusKind::labeled, {}, {{"a", 3}}), 2), ValidationError);
  }
}

namespace {

Corpus small_labeled(std::size_t docs, std::size_t per_doc, const LabelInventory& inv) {
  std::vector<Instance> instances;
  for (std::size_t d = 0; d < docs; ++d)
    for (std::size_t s = 0; s < per_doc; ++s)
      instances.push_back(fixture::make_instance("doc" + std::to_string(d), "s" + std::to_string(s), "we sat in it", 2, "in",
                                                 inv.name((d * per_doc + s) % inv.size())));
  return fixture::make_corpus(instances);
}

// Records which documents each call trained on.
class SpyProvider : public VectorProvider {
 public:
  explicit SpyProvider(const LabelInventory& inv) : mock_(inv, {}) {}
  std::vector<ProbabilityVector> predict(const Corpus& train, const Corpus& predict, std::size_t split) override {
    for (const auto& inst : predict.instances()) trained_on[inst.instance_id] = train.documents();
    (void)split;
    return mock_.predict(train, predict, split);
  }
  std::map<std::string, std::map<std::string, std::size_t>> trained_on;

 private:
  MockVectorProvider mock_;
};

class BrokenProvider : public VectorProvider {
 public:
  std::vector<ProbabilityVector> predict(const Corpus&, const Corpus& predict, std::size_t) override {
    std::vector<ProbabilityVector> out;
    for (const auto& inst : predict.instances()) out.push_back({inst.instance_id, {0.5, 0.3}, std::nullopt});
    return out;
  }
};

}  // namespace

TEST_CASE("produce_vectors with the mock provider") {
  const auto inv = fixture::snacs();
  const auto corpus = small_labeled(7, 4, inv);
  const auto splits = partition_jackknife(corpus, 5);
  SpyProvider spy(inv);
  const auto store = produce_vectors(corpus, splits, spy, inv.size());
  CHECK(store.size() == corpus.size());
  for (const auto& inst : corpus.instances()) {
    REQUIRE(store.provenance(inst.instance_id).has_value());
    CHECK(*store.provenance(inst.instance_id) == splits.assignment.at(inst.doc_id));
    // No leakage: the model never saw the instance's own document.
    CHECK_FALSE(spy.trained_on.at(inst.instance_id).contains(inst.doc_id));
  }
}

TEST_CASE("noise-free mock puts the argmax on gold") {
  const auto inv = fixture::snacs();
  const auto corpus = small_labeled(5, 20, inv);
  MockVectorProvider mock(inv, {0.1, 0.0, 0.0, 3});
  const auto store = produce_vectors(corpus, partition_jackknife(corpus, 5), mock, inv.size());
  for (const auto& inst : corpus.instances())
    CHECK(inv.name(argmax(store.at(inst.instance_id).probs)) == inst.gold->function);
}

TEST_CASE("invalid provider output is a validation error") {
  const auto inv = fixture::letters(2);
  const auto corpus = small_labeled(2, 2, inv);
  BrokenProvider broken;
  CHECK_THROWS_AS(produce_vectors(corpus, partition_jackknife(corpus, 2), broken, 2), ValidationError);
}

TEST_CASE("vector files round-trip") {
  const auto inv = fixture::letters(3);
  VectorStore store;
  store.insert({"a:1:0", {0.2, 0.3, 0.5}, std::nullopt}, 0);
  store.insert({"a:2:0", {1.0, 0.0, 0.0}, SupersenseLabel{"L00", "L01"}}, 1);
  CHECK_THROWS_AS(store.insert({"a:2:0", {1.0, 0.0, 0.0}, std::nullopt}, 1), ValidationError);
  std::ostringstream out;
  std::vector<ProbabilityVector> all;
  for (const auto& [id, v] : store.vectors()) all.push_back(v);
  write_vectors(out, all);
  std::istringstream in(out.str());
  const auto back = read_vectors(in, inv);
  REQUIRE(back.size() == 2);
  CHECK(back[0].probs == all[0].probs);
  CHECK(back[1].predicted == SupersenseLabel{"L00", "L01"});
}
