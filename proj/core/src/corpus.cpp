#include "proxysense/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <tuple>

#include <nlohmann/json.hpp>

#include "proxysense/error.hpp"
#include "text.hpp"

namespace proxysense {

using nlohmann::json;

std::size_t Instance::target_width() const {
  std::size_t words = std::max<std::size_t>(1, detail::split_words(lemma).size());
  if (target_index >= tokens.size()) return 0;
  return std::min(words, tokens.size() - target_index);
}

std::string make_instance_id(std::string_view doc_id, std::string_view sent_id, std::size_t index) {
  std::string id(doc_id);
  id += ':';
  id += sent_id;
  id += ':';
  id += std::to_string(index);
  return id;
}

std::string render_marked_sentence(const Instance& instance) {
  std::string out;
  const std::size_t first = instance.target_index;
  const std::size_t last = first + instance.target_width();  // exclusive
  for (std::size_t i = 0; i < instance.tokens.size(); ++i) {
    if (i) out += ' ';
    if (i == first) out += '<';
    out += instance.tokens[i];
    if (i + 1 == last) out += '>';
  }
  return out;
}

std::string_view to_string(CorpusKind kind) { return kind == CorpusKind::labeled ? "labeled" : "unlabeled"; }

CorpusKind parse_corpus_kind(std::string_view text) {
  if (text == "labeled") return CorpusKind::labeled;
  if (text == "unlabeled") return CorpusKind::unlabeled;
  throw ConfigError("unknown corpus kind '" + std::string(text) + "'");
}

Corpus::Corpus(CorpusKind kind, std::vector<Instance> instances, std::map<std::string, std::size_t> documents)
    : kind_(kind), instances_(std::move(instances)), documents_(std::move(documents)) {
  std::sort(instances_.begin(), instances_.end(),
            [](const Instance& a, const Instance& b) { return a.instance_id < b.instance_id; });
  for (std::size_t i = 0; i < instances_.size(); ++i) {
    const auto& inst = instances_[i];
    if (inst.target_index >= inst.tokens.size())
      throw ValidationError("instance " + inst.instance_id + ": target index out of range");
    if (inst.lemma.empty() || detail::to_lower(inst.lemma) != inst.lemma)
      throw ValidationError("instance " + inst.instance_id + ": lemma must be nonempty lowercase");
    if (kind_ == CorpusKind::labeled && !inst.gold)
      throw ValidationError("instance " + inst.instance_id + ": labeled corpus requires a gold label");
    if (!documents_.contains(inst.doc_id))
      throw ValidationError("instance " + inst.instance_id + ": unknown document " + inst.doc_id);
    if (!by_id_.emplace(inst.instance_id, i).second)
      throw ValidationError("duplicate instance id " + inst.instance_id);
  }
}

const Instance* Corpus::find(std::string_view instance_id) const {
  auto it = by_id_.find(std::string(instance_id));
  return it == by_id_.end() ? nullptr : &instances_[it->second];
}

const Instance& Corpus::at(std::string_view instance_id) const {
  if (const auto* inst = find(instance_id)) return *inst;
  throw ValidationError("unknown instance " + std::string(instance_id));
}

std::size_t Corpus::total_tokens() const {
  std::size_t total = 0;
  for (const auto& [doc, tokens] : documents_) total += tokens;
  return total;
}

Corpus Corpus::restrict_to_documents(const std::vector<std::string>& doc_ids) const {
  std::set<std::string> keep(doc_ids.begin(), doc_ids.end());
  std::vector<Instance> instances;
  for (const auto& inst : instances_)
    if (keep.contains(inst.doc_id)) instances.push_back(inst);
  std::map<std::string, std::size_t> documents;
  for (const auto& [doc, tokens] : documents_)
    if (keep.contains(doc)) documents.emplace(doc, tokens);
  return Corpus(kind_, std::move(instances), std::move(documents));
}

namespace {

std::string require_string(const json& record, const char* field, std::size_t line) {
  auto it = record.find(field);
  if (it == record.end() || !it->is_string())
    throw FormatError(std::string("missing or non-text field '") + field + "'", line);
  return it->get<std::string>();
}

}  // namespace

Corpus parse_corpus(std::istream& in, CorpusKind kind, const LabelInventory& inventory) {
  std::vector<Instance> instances;
  std::map<std::string, std::size_t> documents;
  std::set<std::pair<std::string, std::string>> sentences;
  std::set<std::string> ids;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (detail::trim(text).empty()) continue;
    json record;
    try {
      record = json::parse(text);
    } catch (const json::parse_error& e) {
      throw FormatError(std::string("malformed record: ") + e.what(), line);
    }
    if (!record.is_object()) throw FormatError("record is not an object", line);
    auto doc_id = require_string(record, "doc_id", line);
    auto sent_id = require_string(record, "sent_id", line);
    if (doc_id.empty() || sent_id.empty()) throw FormatError("empty doc_id or sent_id", line);
    if (!sentences.emplace(doc_id, sent_id).second)
      throw ValidationError("duplicate sentence " + doc_id + ":" + sent_id, line);

    auto tokens_it = record.find("tokens");
    if (tokens_it == record.end() || !tokens_it->is_array()) throw FormatError("missing token list", line);
    std::vector<std::string> tokens;
    for (const auto& tok : *tokens_it) {
      if (!tok.is_string()) throw FormatError("non-text token", line);
      tokens.push_back(tok.get<std::string>());
    }
    documents[doc_id] += tokens.size();

    auto targets_it = record.find("targets");
    if (targets_it == record.end() || !targets_it->is_array()) throw FormatError("missing target list", line);
    for (const auto& target : *targets_it) {
      if (!target.is_object()) throw FormatError("target is not an object", line);
      auto index_it = target.find("index");
      if (index_it == target.end() || !index_it->is_number_unsigned())
        throw FormatError("target index must be a non-negative integer", line);
      Instance inst;
      inst.doc_id = doc_id;
      inst.sent_id = sent_id;
      inst.tokens = tokens;
      inst.target_index = index_it->get<std::size_t>();
      inst.instance_id = make_instance_id(doc_id, sent_id, inst.target_index);
      inst.lemma = require_string(target, "lemma", line);
      if (inst.target_index >= tokens.size()) throw ValidationError("target index out of range", line);
      if (inst.lemma.empty() || detail::to_lower(inst.lemma) != inst.lemma)
        throw ValidationError("lemma '" + inst.lemma + "' must be nonempty lowercase", line);
      auto label_it = target.find("label");
      if (label_it != target.end() && !label_it->is_null()) {
        if (!label_it->is_string()) throw FormatError("label must be text", line);
        try {
          inst.gold = parse_label(label_it->get<std::string>(), inventory);
        } catch (const InventoryError& e) {
          throw InventoryError(e.identifier(), line);
        } catch (const FormatError& e) {
          throw FormatError(e.what(), line);
        }
      }
      if (kind == CorpusKind::labeled && !inst.gold)
        throw ValidationError("labeled corpus target " + inst.instance_id + " has no gold label", line);
      if (!ids.insert(inst.instance_id).second)
        throw ValidationError("duplicate instance id " + inst.instance_id, line);
      instances.push_back(std::move(inst));
    }
  }
  return Corpus(kind, std::move(instances), std::move(documents));
}

Corpus ingest_corpus(const std::filesystem::path& path, CorpusKind kind, const LabelInventory& inventory) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file " + path.string());
  return parse_corpus(in, kind, inventory);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  std::vector<const Instance*> order;
  for (const auto& inst : corpus.instances()) order.push_back(&inst);
  std::sort(order.begin(), order.end(), [](const Instance* a, const Instance* b) {
    return std::tie(a->doc_id, a->sent_id, a->target_index) < std::tie(b->doc_id, b->sent_id, b->target_index);
  });
  for (std::size_t i = 0; i < order.size();) {
    const Instance& first = *order[i];
    json record;
    record["doc_id"] = first.doc_id;
    record["sent_id"] = first.sent_id;
    record["tokens"] = first.tokens;
    json targets = json::array();
    for (; i < order.size() && order[i]->doc_id == first.doc_id && order[i]->sent_id == first.sent_id; ++i) {
      json target{{"index", order[i]->target_index}, {"lemma", order[i]->lemma}};
      if (order[i]->gold) target["label"] = render_label(*order[i]->gold);
      targets.push_back(std::move(target));
    }
    record["targets"] = std::move(targets);
    out << record.dump() << '\n';
  }
}

void write_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write corpus file " + path.string());
  write_corpus(out, corpus);
}

std::vector<Instance> instances_of_preposition(const Corpus& corpus, std::string_view lemma) {
  std::vector<Instance> out;
  for (const auto& inst : corpus.instances())
    if (inst.lemma == lemma) out.push_back(inst);
  return out;
}

}  // namespace proxysense
