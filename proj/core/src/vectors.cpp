#include "proxysense/vectors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "proxysense/error.hpp"
#include "proxysense/rng.hpp"
#include "text.hpp"

namespace proxysense {

using nlohmann::json;

void validate_vector(const ProbabilityVector& vector, std::size_t inventory_size) {
  if (vector.probs.size() != inventory_size)
    throw ValidationError("vector for " + vector.instance_id + " has " + std::to_string(vector.probs.size()) +
                          " entries, inventory has " + std::to_string(inventory_size));
  double sum = 0.0;
  for (double p : vector.probs) {
    if (!std::isfinite(p) || p < 0.0) throw ValidationError("vector for " + vector.instance_id + " has a negative or non-finite entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTolerance)
    throw ValidationError("vector for " + vector.instance_id + " sums to " + std::to_string(sum));
}

void clamp_and_renormalize(std::vector<double>& probs) {
  double sum = 0.0;
  for (double& p : probs) {
    if (std::abs(p) < kClampBelow) p = 0.0;
    sum += p;
  }
  if (sum > 0.0)
    for (double& p : probs) p /= sum;
}

std::size_t argmax(std::span<const double> probs) {
  return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

SupersenseLabel tagger_label(const ProbabilityVector& vector, const LabelInventory& inventory) {
  if (vector.predicted) return *vector.predicted;
  return SupersenseLabel::single(inventory.name(argmax(vector.probs)));
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("cosine similarity of vectors with different lengths");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw DomainError("cosine similarity of a zero vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<std::string> SplitAssignment::documents_in(std::size_t split) const {
  std::vector<std::string> docs;
  for (const auto& [doc, s] : assignment)
    if (s == split) docs.push_back(doc);
  return docs;
}

std::vector<std::size_t> SplitAssignment::split_tokens(const Corpus& corpus) const {
  std::vector<std::size_t> tokens(n_splits, 0);
  for (const auto& [doc, s] : assignment) tokens.at(s) += corpus.documents().at(doc);
  return tokens;
}

SplitAssignment partition_jackknife(const Corpus& corpus, std::size_t n_splits) {
  if (n_splits == 0) throw ValidationError("number of splits must be positive");
  if (corpus.documents().size() < n_splits)
    throw ValidationError("corpus has " + std::to_string(corpus.documents().size()) + " documents, fewer than " +
                          std::to_string(n_splits) + " splits");
  std::vector<std::pair<std::string, std::size_t>> docs(corpus.documents().begin(), corpus.documents().end());
  std::stable_sort(docs.begin(), docs.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  SplitAssignment out;
  out.n_splits = n_splits;
  std::vector<std::size_t> load(n_splits, 0);
  for (const auto& [doc, tokens] : docs) {
    const auto lightest = static_cast<std::size_t>(std::min_element(load.begin(), load.end()) - load.begin());
    load[lightest] += tokens;
    out.assignment.emplace(doc, lightest);
  }
  return out;
}

void VectorStore::insert(ProbabilityVector vector, std::optional<std::size_t> split) {
  const std::string id = vector.instance_id;
  if (vectors_.contains(id)) throw ValidationError("duplicate vector for " + id);
  vectors_.emplace(id, std::move(vector));
  if (split) provenance_.emplace(id, *split);
}

const ProbabilityVector* VectorStore::find(std::string_view instance_id) const {
  auto it = vectors_.find(instance_id);
  return it == vectors_.end() ? nullptr : &it->second;
}

const ProbabilityVector& VectorStore::at(std::string_view instance_id) const {
  if (const auto* v = find(instance_id)) return *v;
  throw ValidationError("no vector for instance " + std::string(instance_id));
}

std::optional<std::size_t> VectorStore::provenance(std::string_view instance_id) const {
  auto it = provenance_.find(instance_id);
  if (it == provenance_.end()) return std::nullopt;
  return it->second;
}

namespace {

void check_and_insert(VectorStore& store, std::vector<ProbabilityVector> vectors, const Corpus& predict,
                      std::size_t inventory_size, std::optional<std::size_t> split) {
  std::set<std::string> seen;
  for (auto& v : vectors) {
    if (!predict.find(v.instance_id))
      throw ValidationError("provider returned a vector for " + v.instance_id + ", which it was not asked to predict");
    if (!seen.insert(v.instance_id).second) throw ValidationError("provider returned two vectors for " + v.instance_id);
    validate_vector(v, inventory_size);
  }
  for (const auto& inst : predict.instances())
    if (!seen.contains(inst.instance_id)) throw ValidationError("provider returned no vector for " + inst.instance_id);
  for (auto& v : vectors) store.insert(std::move(v), split);
}

std::vector<ProbabilityVector> call_provider(VectorProvider& provider, const Corpus& train, const Corpus& predict,
                                             std::size_t split) {
  try {
    return provider.predict(train, predict, split);
  } catch (const ProviderError&) {
    throw;
  } catch (const std::exception& e) {
    throw ProviderError(split, e.what());
  }
}

}  // namespace

VectorStore produce_vectors(const Corpus& corpus, const SplitAssignment& splits, VectorProvider& provider,
                            std::size_t inventory_size) {
  for (const auto& [doc, tokens] : corpus.documents())
    if (!splits.assignment.contains(doc)) throw ValidationError("document " + doc + " has no split");
  VectorStore store;
  for (std::size_t split = 0; split < splits.n_splits; ++split) {
    std::vector<std::string> held_out, rest;
    for (const auto& [doc, s] : splits.assignment) (s == split ? held_out : rest).push_back(doc);
    Corpus predict = corpus.restrict_to_documents(held_out);
    if (predict.empty()) continue;
    Corpus train = corpus.restrict_to_documents(rest);
    check_and_insert(store, call_provider(provider, train, predict, split), predict, inventory_size, split);
  }
  return store;
}

void add_heldout_vectors(VectorStore& store, const Corpus& labeled, const Corpus& targets, VectorProvider& provider,
                         std::size_t inventory_size) {
  std::vector<Instance> missing;
  std::map<std::string, std::size_t> documents;
  for (const auto& inst : targets.instances()) {
    if (store.find(inst.instance_id)) continue;
    missing.push_back(inst);
    documents[inst.doc_id] = targets.documents().at(inst.doc_id);
  }
  if (missing.empty()) return;
  Corpus predict(targets.kind(), std::move(missing), std::move(documents));
  // Split index past the last jackknife split marks the full-corpus model.
  const std::size_t call_id = SIZE_MAX;
  std::vector<ProbabilityVector> vectors;
  try {
    vectors = provider.predict(labeled, predict, call_id);
  } catch (const std::exception& e) {
    throw Error(std::string("vector provider failed on held-out targets: ") + e.what());
  }
  check_and_insert(store, std::move(vectors), predict, inventory_size, std::nullopt);
}

MockVectorProvider::MockVectorProvider(const LabelInventory& inventory, Options options)
    : inventory_(inventory), options_(options) {
  if (options_.epsilon < 0.0 || options_.epsilon > 1.0) throw ConfigError("mock epsilon must lie in [0, 1]");
  if (options_.flip_probability < 0.0 || options_.flip_probability > 1.0)
    throw ConfigError("mock flip probability must lie in [0, 1]");
  if (options_.jitter < 0.0 || options_.jitter > 1.0) throw ConfigError("mock jitter must lie in [0, 1]");
}

std::vector<ProbabilityVector> MockVectorProvider::predict(const Corpus& train, const Corpus& predict, std::size_t) {
  const std::size_t n = inventory_.size();
  std::set<SupersenseLabel> train_labels;
  for (const auto& inst : train.instances())
    if (inst.gold) train_labels.insert(*inst.gold);

  std::vector<ProbabilityVector> out;
  out.reserve(predict.size());
  for (const auto& inst : predict.instances()) {
    Rng rng(mix_seed(options_.seed, inst.instance_id));
    ProbabilityVector v{inst.instance_id, std::vector<double>(n, 0.0), std::nullopt};
    if (!inst.gold) {
      double sum = 0.0;
      for (double& p : v.probs) sum += (p = rng.uniform() + 1e-3);
      for (double& p : v.probs) p /= sum;
      out.push_back(std::move(v));
      continue;
    }
    SupersenseLabel label = *inst.gold;
    if (rng.bernoulli(options_.flip_probability)) {
      std::vector<SupersenseLabel> pool;
      for (const auto& l : train_labels)
        if (l != label) pool.push_back(l);
      if (pool.empty())
        for (const auto& name : inventory_.names())
          if (SupersenseLabel::single(name) != label) pool.push_back(SupersenseLabel::single(name));
      if (!pool.empty()) label = pool[rng.below(pool.size())];
    }
    const double mass = 1.0 - options_.epsilon;
    for (double& p : v.probs) p = options_.epsilon / static_cast<double>(n);
    const auto scene = *inventory_.index_of(label.scene_role);
    const auto function = *inventory_.index_of(label.function);
    if (label.is_construal()) {
      v.probs[scene] += mass / 3.0;
      v.probs[function] += 2.0 * mass / 3.0;
    } else {
      v.probs[function] += mass;
    }
    if (options_.jitter > 0.0) {
      std::vector<double> noise(n);
      double sum = 0.0;
      for (double& x : noise) sum += (x = rng.uniform());
      for (std::size_t i = 0; i < n; ++i)
        v.probs[i] = (1.0 - options_.jitter) * v.probs[i] + options_.jitter * noise[i] / sum;
    }
    v.predicted = label;
    out.push_back(std::move(v));
  }
  return out;
}

FileVectorProvider::FileVectorProvider(std::filesystem::path path, const LabelInventory& inventory)
    : path_(std::move(path)), inventory_(inventory) {}

std::vector<ProbabilityVector> FileVectorProvider::predict(const Corpus&, const Corpus& predict, std::size_t) {
  std::vector<ProbabilityVector> out;
  for (auto& v : read_vectors(path_, inventory_))
    if (predict.find(v.instance_id)) out.push_back(std::move(v));
  return out;
}

CommandVectorProvider::CommandVectorProvider(std::string command_template, std::filesystem::path work_dir,
                                             const LabelInventory& inventory)
    : command_template_(std::move(command_template)), work_dir_(std::move(work_dir)), inventory_(inventory) {}

namespace {

void replace_all(std::string& text, std::string_view from, const std::string& to) {
  for (auto pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size()))
    text.replace(pos, from.size(), to);
}

}  // namespace

std::vector<ProbabilityVector> CommandVectorProvider::predict(const Corpus& train, const Corpus& predict,
                                                              std::size_t split) {
  const auto dir = work_dir_ / (split == SIZE_MAX ? std::string("full") : "split-" + std::to_string(split));
  std::filesystem::create_directories(dir);
  const auto train_path = dir / "train.jsonl";
  const auto predict_path = dir / "predict.jsonl";
  const auto out_path = dir / "vectors.jsonl";
  write_corpus(train_path, train);
  write_corpus(predict_path, predict);
  std::string command = command_template_;
  replace_all(command, "{train}", train_path.string());
  replace_all(command, "{predict}", predict_path.string());
  replace_all(command, "{out}", out_path.string());
  if (int status = std::system(command.c_str()); status != 0)
    throw Error("command exited with status " + std::to_string(status) + ": " + command);
  return read_vectors(out_path, inventory_);
}

std::vector<ProbabilityVector> read_vectors(std::istream& in, const LabelInventory& inventory) {
  std::vector<ProbabilityVector> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (detail::trim(text).empty()) continue;
    ProbabilityVector v;
    try {
      const json record = json::parse(text);
      v.instance_id = record.at("instance_id").get<std::string>();
      v.probs = record.at("probs").get<std::vector<double>>();
      if (auto it = record.find("predicted"); it != record.end() && !it->is_null())
        v.predicted = parse_label(it->get<std::string>(), inventory);
    } catch (const Error& e) {
      throw FormatError(e.what(), line);
    } catch (const json::exception& e) {
      throw FormatError(std::string("malformed vector record: ") + e.what(), line);
    }
    for (double& p : v.probs)
      if (std::abs(p) < kClampBelow) p = 0.0;
    try {
      validate_vector(v, inventory.size());
    } catch (const ValidationError& e) {
      throw ValidationError(e.what(), line);
    }
    clamp_and_renormalize(v.probs);
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<ProbabilityVector> read_vectors(const std::filesystem::path& path, const LabelInventory& inventory) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open vector file " + path.string());
  return read_vectors(in, inventory);
}

void write_vectors(std::ostream& out, const std::vector<ProbabilityVector>& vectors) {
  for (const auto& v : vectors) {
    json record{{"instance_id", v.instance_id}, {"probs", v.probs}};
    if (v.predicted) record["predicted"] = render_label(*v.predicted);
    out << record.dump() << '\n';
  }
}

void write_vectors(const std::filesystem::path& path, const VectorStore& store) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write vector file " + path.string());
  std::vector<ProbabilityVector> all;
  for (const auto& [id, v] : store.vectors()) all.push_back(v);
  write_vectors(out, all);
}

}  // namespace proxysense
