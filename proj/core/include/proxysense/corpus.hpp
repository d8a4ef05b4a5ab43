#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "proxysense/error.hpp"
#include "proxysense/label.hpp"

namespace proxysense {

// One sentence with one target adposition. Multiword targets are indexed by
// their first token; the lemma joins the parts with single spaces.
struct Instance {
  std::string instance_id;
  std::string doc_id;
  std::string sent_id;
  std::vector<std::string> tokens;
  std::size_t target_index = 0;
  std::string lemma;
  std::optional<SupersenseLabel> gold;

  // Number of tokens covered by the target (words in the lemma), clamped to
  // the end of the sentence.
  std::size_t target_width() const;

  bool operator==(const Instance&) const = default;
};

std::string make_instance_id(std::string_view doc_id, std::string_view sent_id, std::size_t index);

// Sentence with the target span wrapped in angle brackets, e.g.
// "The book is <by> the lamp".
std::string render_marked_sentence(const Instance& instance);

enum class CorpusKind { labeled, unlabeled };

std::string_view to_string(CorpusKind kind);
CorpusKind parse_corpus_kind(std::string_view text);

// Immutable collection of instances sorted by instance_id, plus per-document
// token counts.
class Corpus {
 public:
  Corpus() = default;
  // Validates every invariant; throws ValidationError.
  Corpus(CorpusKind kind, std::vector<Instance> instances, std::map<std::string, std::size_t> documents);

  CorpusKind kind() const { return kind_; }
  const std::vector<Instance>& instances() const { return instances_; }
  const std::map<std::string, std::size_t>& documents() const { return documents_; }
  std::size_t size() const { return instances_.size(); }
  bool empty() const { return instances_.empty(); }

  const Instance* find(std::string_view instance_id) const;
  const Instance& at(std::string_view instance_id) const;

  std::size_t total_tokens() const;

  // Sub-corpus restricted to the given documents. Token counts carry over.
  Corpus restrict_to_documents(const std::vector<std::string>& doc_ids) const;

 private:
  CorpusKind kind_ = CorpusKind::unlabeled;
  std::vector<Instance> instances_;
  std::map<std::string, std::size_t> documents_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

// Line-record ingestion: one JSON object per line with doc_id, sent_id,
// tokens and targets [{index, lemma, label?}]. Errors carry the line number.
Corpus parse_corpus(std::istream& in, CorpusKind kind, const LabelInventory& inventory);
Corpus ingest_corpus(const std::filesystem::path& path, CorpusKind kind, const LabelInventory& inventory);

// Writes one record per sentence, sentences in (doc_id, sent_id) order and
// targets in index order. Documents without instances are not representable
// in the line format and are dropped.
void write_corpus(std::ostream& out, const Corpus& corpus);
void write_corpus(const std::filesystem::path& path, const Corpus& corpus);

std::vector<Instance> instances_of_preposition(const Corpus& corpus, std::string_view lemma);

}  // namespace proxysense
