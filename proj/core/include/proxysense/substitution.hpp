#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "proxysense/error.hpp"
#include "proxysense/corpus.hpp"
#include "proxysense/label.hpp"

namespace proxysense {

inline constexpr std::string_view kOmitKey = "[Omit]";
inline constexpr char kWriteInMark = '*';
inline constexpr std::size_t kDefaultSelectionOptions = 8;
inline constexpr std::int64_t kDefaultRadarMinCount = 3;

struct GenerationPrompt {
  std::string instance_id;
  std::string sentence;  // target in angle brackets
};

struct GenerationResponse {
  std::string instance_id;
  std::string worker_id;
  std::string substitute;
};

struct SelectionPrompt {
  std::string instance_id;
  std::string sentence;
  std::vector<std::string> options;
  bool allows_omit = true;
  bool allows_write_in = true;
};

struct SelectionResponse {
  std::string instance_id;
  std::string worker_id;
  std::set<std::string> chosen;
  std::optional<std::string> write_in;
  bool omit = false;
};

// Counts per substitute. Write-ins are keyed with a trailing '*', [Omit]
// responses under kOmitKey.
struct SubstituteDistribution {
  std::string key;
  std::map<std::string, std::int64_t> counts;

  std::int64_t total() const;
  // Total without the [Omit] entry.
  std::int64_t support() const;
  void add(const SubstituteDistribution& other);
  bool operator==(const SubstituteDistribution&) const = default;
};

// Trim, lowercase, collapse internal whitespace. Throws ValidationError when
// nothing is left.
std::string normalize_substitute(std::string_view raw);

// True iff the (possibly multiword) lemma occurs as a run of
// whitespace-delimited words of the substitute.
bool contains_word(std::string_view substitute, std::string_view lemma);

GenerationPrompt build_generation_prompt(const Instance& instance);

// Accepted generation responses, one per (worker, instance).
class GenerationLog {
 public:
  struct Outcome {
    bool replaced = false;
    std::optional<std::string> previous;
  };

  // Normalizes the substitute and enforces the containment rule (throws
  // ContainmentError). A resubmission by the same worker replaces the earlier
  // substitute and is reported in the outcome and the audit trail.
  Outcome record(const GenerationResponse& response, const Instance& instance);

  std::vector<GenerationResponse> responses() const;
  std::vector<GenerationResponse> responses_for(const Corpus& corpus, std::string_view lemma) const;
  const std::vector<std::string>& audit() const { return audit_; }
  std::size_t size() const { return by_key_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, std::string> by_key_;  // (instance, worker)
  std::vector<std::string> audit_;
};

// Substitutes ranked by count across the responses, ties lexicographic,
// truncated to n.
std::vector<std::string> top_n_substitutes(const std::vector<GenerationResponse>& responses,
                                           std::size_t n = kDefaultSelectionOptions);

// Throws ValidationError on an empty or duplicated option list.
SelectionPrompt build_selection_prompt(const Instance& instance, const std::vector<std::string>& options);

// Normalizes write-ins and checks the response against its prompt: chosen
// options must be listed, [Omit] excludes everything else, a write-in may not
// repeat an option, and the response may not be empty.
SelectionResponse validate_selection(SelectionResponse response, const SelectionPrompt& prompt);

SubstituteDistribution aggregate_instance_distribution(const std::vector<SelectionResponse>& responses);

using LabelKey = std::pair<std::string, SupersenseLabel>;  // (lemma, gold)
using LabelDistributions = std::map<LabelKey, SubstituteDistribution>;

// Element-wise sum grouped by (lemma, gold label). Throws ValidationError
// for instances that are missing or unlabeled.
LabelDistributions aggregate_by_label(const std::map<std::string, SubstituteDistribution>& per_instance,
                                      const Corpus& labeled);

struct RadarRow {
  std::string lemma;
  SupersenseLabel label;
  std::string substitute;  // without the write-in mark
  std::int64_t count = 0;
  bool write_in = false;
  bool operator==(const RadarRow&) const = default;
};

// Rows for substitutes whose count summed over every aggregate is at least
// min_count. Ordered by lemma, rendered label, substitute key.
std::vector<RadarRow> radar_report(const LabelDistributions& aggregates,
                                   std::int64_t min_count = kDefaultRadarMinCount);

struct LabelPrediction {
  SupersenseLabel label;
  double confidence = 0.0;
};

struct Abstain {};

using InferenceResult = std::variant<LabelPrediction, Abstain>;

// Nearest centroid by cosine over L1-normalized counts, [Omit] dropped.
// Ties go to the centroid with more training support, then to the smaller
// rendered label. Throws CoverageError when the lemma has no centroid;
// abstains when the distribution is empty after dropping [Omit].
InferenceResult infer_label_nearest_centroid(const SubstituteDistribution& distribution,
                                             const LabelDistributions& centroids, std::string_view lemma);

}  // namespace proxysense
