#include "proxysense/substitution.hpp"

#include <algorithm>
#include <cmath>

#include "proxysense/error.hpp"
#include "text.hpp"

namespace proxysense {

std::int64_t SubstituteDistribution::total() const {
  std::int64_t sum = 0;
  for (const auto& [sub, n] : counts) sum += n;
  return sum;
}

std::int64_t SubstituteDistribution::support() const {
  auto it = counts.find(std::string(kOmitKey));
  return total() - (it == counts.end() ? 0 : it->second);
}

void SubstituteDistribution::add(const SubstituteDistribution& other) {
  for (const auto& [sub, n] : other.counts) counts[sub] += n;
}

std::string normalize_substitute(std::string_view raw) {
  auto words = detail::split_words(detail::to_lower(raw));
  if (words.empty()) throw ValidationError("substitute is empty");
  return detail::join(words, " ");
}

bool contains_word(std::string_view substitute, std::string_view lemma) {
  const auto words = detail::split_words(substitute);
  const auto needle = detail::split_words(lemma);
  if (needle.empty() || needle.size() > words.size()) return false;
  return std::search(words.begin(), words.end(), needle.begin(), needle.end()) != words.end();
}

GenerationPrompt build_generation_prompt(const Instance& instance) {
  return {instance.instance_id, render_marked_sentence(instance)};
}

GenerationLog::Outcome GenerationLog::record(const GenerationResponse& response, const Instance& instance) {
  if (response.instance_id != instance.instance_id)
    throw ValidationError("response for " + response.instance_id + " recorded against " + instance.instance_id);
  if (response.worker_id.empty()) throw ValidationError("response has no worker id");
  std::string substitute = normalize_substitute(response.substitute);
  if (contains_word(substitute, instance.lemma)) throw ContainmentError(substitute, instance.lemma);

  Outcome outcome;
  auto [it, inserted] = by_key_.try_emplace({response.instance_id, response.worker_id}, substitute);
  if (!inserted) {
    outcome.replaced = true;
    outcome.previous = it->second;
    audit_.push_back("worker " + response.worker_id + " replaced '" + it->second + "' with '" + substitute +
                     "' for " + response.instance_id);
    it->second = std::move(substitute);
  }
  return outcome;
}

std::vector<GenerationResponse> GenerationLog::responses() const {
  std::vector<GenerationResponse> out;
  for (const auto& [key, sub] : by_key_) out.push_back({key.first, key.second, sub});
  return out;
}

std::vector<GenerationResponse> GenerationLog::responses_for(const Corpus& corpus, std::string_view lemma) const {
  std::vector<GenerationResponse> out;
  for (const auto& [key, sub] : by_key_) {
    const auto* inst = corpus.find(key.first);
    if (inst && inst->lemma == lemma) out.push_back({key.first, key.second, sub});
  }
  return out;
}

std::vector<std::string> top_n_substitutes(const std::vector<GenerationResponse>& responses, std::size_t n) {
  std::map<std::string, std::int64_t> counts;
  for (const auto& r : responses) ++counts[r.substitute];
  std::vector<std::pair<std::string, std::int64_t>> ranked(counts.begin(), counts.end());
  // counts is keyed lexicographically, so a stable sort keeps that order on ties.
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranked.size() && i < n; ++i) out.push_back(ranked[i].first);
  return out;
}

SelectionPrompt build_selection_prompt(const Instance& instance, const std::vector<std::string>& options) {
  if (options.empty()) throw ValidationError("selection prompt for " + instance.instance_id + " has no options");
  std::set<std::string> seen;
  for (const auto& o : options) {
    if (o.empty()) throw ValidationError("selection prompt option is empty");
    if (!seen.insert(o).second) throw ValidationError("duplicate selection option '" + o + "'");
  }
  SelectionPrompt prompt;
  prompt.instance_id = instance.instance_id;
  prompt.sentence = render_marked_sentence(instance);
  prompt.options = options;
  return prompt;
}

SelectionResponse validate_selection(SelectionResponse response, const SelectionPrompt& prompt) {
  if (response.instance_id != prompt.instance_id)
    throw ValidationError("selection for " + response.instance_id + " submitted against " + prompt.instance_id);
  for (const auto& c : response.chosen)
    if (std::find(prompt.options.begin(), prompt.options.end(), c) == prompt.options.end())
      throw ValidationError("'" + c + "' is not an option of this prompt");
  if (response.write_in) {
    if (!prompt.allows_write_in) throw ValidationError("this prompt does not accept write-ins");
    response.write_in = normalize_substitute(*response.write_in);
    if (std::find(prompt.options.begin(), prompt.options.end(), *response.write_in) != prompt.options.end())
      throw ValidationError("write-in '" + *response.write_in + "' is already an option");
  }
  if (response.omit) {
    if (!prompt.allows_omit) throw ValidationError("this prompt does not offer [Omit]");
    if (!response.chosen.empty() || response.write_in)
      throw ValidationError("[Omit] cannot be combined with other choices");
  } else if (response.chosen.empty() && !response.write_in) {
    throw ValidationError("selection is empty");
  }
  return response;
}

SubstituteDistribution aggregate_instance_distribution(const std::vector<SelectionResponse>& responses) {
  SubstituteDistribution dist;
  if (!responses.empty()) dist.key = responses.front().instance_id;
  for (const auto& r : responses) {
    if (r.instance_id != dist.key) throw ValidationError("responses for different instances in one aggregate");
    if (r.omit) {
      ++dist.counts[std::string(kOmitKey)];
      continue;
    }
    for (const auto& c : r.chosen) ++dist.counts[c];
    if (r.write_in) ++dist.counts[*r.write_in + kWriteInMark];
  }
  return dist;
}

LabelDistributions aggregate_by_label(const std::map<std::string, SubstituteDistribution>& per_instance,
                                      const Corpus& labeled) {
  LabelDistributions out;
  for (const auto& [id, dist] : per_instance) {
    const auto* inst = labeled.find(id);
    if (!inst) throw ValidationError("no instance " + id + " in the labeled corpus");
    if (!inst->gold) throw ValidationError("instance " + id + " has no gold label");
    auto& agg = out[{inst->lemma, *inst->gold}];
    if (agg.key.empty()) agg.key = inst->lemma + "/" + render_label(*inst->gold);
    agg.add(dist);
  }
  return out;
}

std::vector<RadarRow> radar_report(const LabelDistributions& aggregates, std::int64_t min_count) {
  std::map<std::string, std::int64_t> global;
  for (const auto& [key, dist] : aggregates)
    for (const auto& [sub, n] : dist.counts) global[sub] += n;

  std::vector<RadarRow> rows;
  for (const auto& [key, dist] : aggregates) {
    for (const auto& [sub, n] : dist.counts) {
      if (n <= 0 || global[sub] < min_count) continue;
      RadarRow row{key.first, key.second, sub, n, false};
      if (sub != kOmitKey && !sub.empty() && sub.back() == kWriteInMark) {
        row.write_in = true;
        row.substitute.pop_back();
      }
      rows.push_back(std::move(row));
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const RadarRow& a, const RadarRow& b) {
    if (a.lemma != b.lemma) return a.lemma < b.lemma;
    return render_label(a.label) < render_label(b.label);
  });
  return rows;
}

namespace {

// L1-normalized counts without [Omit].
std::map<std::string, double> normalized(const SubstituteDistribution& dist) {
  std::map<std::string, double> out;
  const auto support = dist.support();
  if (support <= 0) return out;
  for (const auto& [sub, n] : dist.counts)
    if (sub != kOmitKey && n > 0) out[sub] = static_cast<double>(n) / static_cast<double>(support);
  return out;
}

double cosine(const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [k, v] : a) {
    na += v * v;
    if (auto it = b.find(k); it != b.end()) dot += v * it->second;
  }
  for (const auto& [k, v] : b) nb += v * v;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

constexpr double kTieTolerance = 1e-12;

}  // namespace

InferenceResult infer_label_nearest_centroid(const SubstituteDistribution& distribution,
                                             const LabelDistributions& centroids, std::string_view lemma) {
  bool covered = false;
  for (const auto& [key, c] : centroids) covered = covered || key.first == lemma;
  if (!covered) throw CoverageError("no centroid for preposition '" + std::string(lemma) + "'");

  const auto query = normalized(distribution);
  if (query.empty()) return Abstain{};

  const SupersenseLabel* best = nullptr;
  double best_sim = -1.0;
  std::int64_t best_support = 0;
  for (const auto& [key, centroid] : centroids) {
    if (key.first != lemma) continue;
    const double sim = cosine(query, normalized(centroid));
    const std::int64_t support = centroid.support();
    bool better = false;
    if (!best || sim > best_sim + kTieTolerance) {
      better = true;
    } else if (std::abs(sim - best_sim) <= kTieTolerance) {
      better = support > best_support ||
               (support == best_support && render_label(key.second) < render_label(*best));
    }
    if (better) {
      best = &key.second;
      best_sim = sim;
      best_support = support;
    }
  }
  return LabelPrediction{*best, best_sim};
}

}  // namespace proxysense
