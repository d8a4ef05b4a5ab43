#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "proxysense/error.hpp"
#include "proxysense/corpus.hpp"
#include "proxysense/label.hpp"

namespace proxysense {

// Distribution over the label inventory for one instance. `predicted` is the
// tagger's full scene|function prediction when the provider reports one;
// otherwise the prediction is the single label at the argmax.
struct ProbabilityVector {
  std::string instance_id;
  std::vector<double> probs;
  std::optional<SupersenseLabel> predicted;

  bool operator==(const ProbabilityVector&) const = default;
};

inline constexpr double kProbabilitySumTolerance = 1e-6;
inline constexpr double kClampBelow = 1e-12;

// Throws ValidationError unless probs has inventory_size non-negative finite
// entries summing to 1 within kProbabilitySumTolerance.
void validate_vector(const ProbabilityVector& vector, std::size_t inventory_size);

// Zeroes entries below kClampBelow and rescales to unit mass.
void clamp_and_renormalize(std::vector<double>& probs);

std::size_t argmax(std::span<const double> probs);

SupersenseLabel tagger_label(const ProbabilityVector& vector, const LabelInventory& inventory);

// dot(a, b) / (|a| |b|). Throws DomainError on length mismatch or a zero vector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

inline double cosine_similarity(const ProbabilityVector& a, const ProbabilityVector& b) {
  return cosine_similarity(a.probs, b.probs);
}

struct SplitAssignment {
  std::size_t n_splits = 0;
  std::map<std::string, std::size_t> assignment;  // doc_id -> split

  std::vector<std::string> documents_in(std::size_t split) const;
  std::vector<std::size_t> split_tokens(const Corpus& corpus) const;
};

inline constexpr std::size_t kDefaultSplits = 5;

// Token-balanced document partition: documents by descending token count
// (ties by doc_id) each go to the currently lightest split (ties by lowest
// index). Throws ValidationError if the corpus has fewer documents than splits.
SplitAssignment partition_jackknife(const Corpus& corpus, std::size_t n_splits = kDefaultSplits);

// Source of probability vectors: trained on `train`, predicting every
// instance of `predict`. `split` identifies the call for diagnostics.
class VectorProvider {
 public:
  virtual ~VectorProvider() = default;
  virtual std::vector<ProbabilityVector> predict(const Corpus& train, const Corpus& predict,
                                                 std::size_t split) = 0;
};

class VectorStore {
 public:
  // Inserts a validated vector. Throws ValidationError on a duplicate id.
  void insert(ProbabilityVector vector, std::optional<std::size_t> split);

  const ProbabilityVector* find(std::string_view instance_id) const;
  const ProbabilityVector& at(std::string_view instance_id) const;
  // Split whose held-out model produced the vector; empty for vectors
  // predicted by a model trained on the whole labeled corpus.
  std::optional<std::size_t> provenance(std::string_view instance_id) const;

  std::size_t size() const { return vectors_.size(); }
  const std::map<std::string, ProbabilityVector, std::less<>>& vectors() const { return vectors_; }

 private:
  std::map<std::string, ProbabilityVector, std::less<>> vectors_;
  std::map<std::string, std::size_t, std::less<>> provenance_;
};

// For each split i, calls the provider with the complement as training data
// and split i as prediction data. Provider exceptions become ProviderError;
// missing, extra or malformed vectors become ValidationError.
VectorStore produce_vectors(const Corpus& corpus, const SplitAssignment& splits, VectorProvider& provider,
                            std::size_t inventory_size);

// Vectors for instances outside the jackknifed corpus (e.g. targets from an
// unlabeled corpus), predicted by a model trained on all of `labeled`.
void add_heldout_vectors(VectorStore& store, const Corpus& labeled, const Corpus& targets,
                         VectorProvider& provider, std::size_t inventory_size);

// Gold-smoothed stand-in for a trained tagger:
// (1 - epsilon) * onehot(label) + epsilon * uniform. With probability
// flip_probability the label is first replaced by a different one drawn from
// the training corpus labels. Construal labels spread the one-hot mass 1:2
// over scene role and function. Instances without gold get a seeded random
// distribution. Every draw is keyed on (seed, instance_id).
class MockVectorProvider : public VectorProvider {
 public:
  struct Options {
    double epsilon = 0.1;
    double flip_probability = 0.0;
    double jitter = 0.0;  // extra seeded noise mass, spread randomly
    std::uint64_t seed = 0;
  };

  MockVectorProvider(const LabelInventory& inventory, Options options);

  std::vector<ProbabilityVector> predict(const Corpus& train, const Corpus& predict, std::size_t split) override;

 private:
  const LabelInventory& inventory_;
  Options options_;
};

// Serves vectors from a precomputed vector file.
class FileVectorProvider : public VectorProvider {
 public:
  FileVectorProvider(std::filesystem::path path, const LabelInventory& inventory);

  std::vector<ProbabilityVector> predict(const Corpus& train, const Corpus& predict, std::size_t split) override;

 private:
  std::filesystem::path path_;
  const LabelInventory& inventory_;
};

// Runs an external command per call. The command template may reference
// {train}, {predict} and {out}; the first two are written as corpus files and
// the command must write a vector file to {out}.
class CommandVectorProvider : public VectorProvider {
 public:
  CommandVectorProvider(std::string command_template, std::filesystem::path work_dir,
                        const LabelInventory& inventory);

  std::vector<ProbabilityVector> predict(const Corpus& train, const Corpus& predict, std::size_t split) override;

 private:
  std::string command_template_;
  std::filesystem::path work_dir_;
  const LabelInventory& inventory_;
};

// Vector file: {"instance_id": ..., "probs": [...], "predicted": "A|B"?} per line.
// Reading clamps and renormalizes, then validates.
std::vector<ProbabilityVector> read_vectors(std::istream& in, const LabelInventory& inventory);
std::vector<ProbabilityVector> read_vectors(const std::filesystem::path& path, const LabelInventory& inventory);
void write_vectors(std::ostream& out, const std::vector<ProbabilityVector>& vectors);
void write_vectors(const std::filesystem::path& path, const VectorStore& store);

}  // namespace proxysense
