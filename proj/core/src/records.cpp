#include "proxysense/records.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "proxysense/error.hpp"
#include "text.hpp"

namespace proxysense {

Json instance_to_json(const Instance& instance) {
  Json out{{"instance_id", instance.instance_id},
           {"doc_id", instance.doc_id},
           {"sent_id", instance.sent_id},
           {"tokens", instance.tokens},
           {"target_index", instance.target_index},
           {"lemma", instance.lemma}};
  out["label"] = instance.gold ? Json(render_label(*instance.gold)) : Json(nullptr);
  return out;
}

Instance instance_from_json(const Json& record, const LabelInventory& inventory) {
  Instance inst;
  inst.instance_id = record.at("instance_id").get<std::string>();
  inst.doc_id = record.at("doc_id").get<std::string>();
  inst.sent_id = record.at("sent_id").get<std::string>();
  inst.tokens = record.at("tokens").get<std::vector<std::string>>();
  inst.target_index = record.at("target_index").get<std::size_t>();
  inst.lemma = record.at("lemma").get<std::string>();
  if (auto it = record.find("label"); it != record.end() && !it->is_null())
    inst.gold = parse_label(it->get<std::string>(), inventory);
  return inst;
}

Json instance_public_json(const Instance& instance) {
  return {{"instance_id", instance.instance_id},
          {"tokens", instance.tokens},
          {"target_index", instance.target_index},
          {"target_width", instance.target_width()},
          {"lemma", instance.lemma},
          {"sentence", render_marked_sentence(instance)}};
}

Json batch_to_json(const NeighborBatch& batch) {
  Json options = Json::array();
  for (const auto& n : batch.options) {
    options.push_back({{"instance_id", n.instance.instance_id},
                       {"score", n.score},
                       {"label", n.instance.gold ? Json(render_label(*n.instance.gold)) : Json(nullptr)},
                       {"provenance", n.provenance}});
  }
  return {{"target_id", batch.target_id}, {"batch_index", batch.batch_index}, {"options", std::move(options)}};
}

NeighborBatch batch_from_json(const Json& record, const Corpus& labeled) {
  NeighborBatch batch;
  batch.target_id = record.at("target_id").get<std::string>();
  batch.batch_index = record.at("batch_index").get<std::size_t>();
  for (const auto& option : record.at("options")) {
    const auto id = option.at("instance_id").get<std::string>();
    const auto* inst = labeled.find(id);
    if (!inst) throw ValidationError("batch option " + id + " is not in the labeled corpus");
    batch.options.push_back({*inst, option.at("score").get<double>(),
                             option.at("provenance").get<std::set<std::string>>()});
  }
  return batch;
}

Json distribution_to_json(const SubstituteDistribution& dist) {
  return {{"key", dist.key}, {"counts", dist.counts}};
}

SubstituteDistribution distribution_from_json(const Json& record) {
  SubstituteDistribution dist;
  dist.key = record.at("key").get<std::string>();
  dist.counts = record.at("counts").get<std::map<std::string, std::int64_t>>();
  return dist;
}

Json tally_to_json(const Tally& tally) {
  Json out = Json::object();
  for (const auto& [option, n] : tally) out[option] = n;
  return out;
}

Json adjudication_to_json(const AdjudicatedInstance& adjudicated, const std::optional<SupersenseLabel>& predicted) {
  const Case c = classify_case(adjudicated.tagger_label, adjudicated.gold, adjudicated.batch);
  Json out{{"target_id", adjudicated.target_id},
           {"batch_index", adjudicated.batch.batch_index},
           {"tallies", tally_to_json(adjudicated.outcome.tallies)},
           {"result", to_string(adjudicated.outcome.result)},
           {"case", static_cast<int>(c)}};
  out["predicted_label"] = predicted ? Json(render_label(*predicted)) : Json(nullptr);
  if (adjudicated.outcome.result == PluralityOutcome::Result::winner) out["winner"] = adjudicated.outcome.winner;
  if (adjudicated.outcome.result == PluralityOutcome::Result::tie) out["tied"] = adjudicated.outcome.tied;
  out["none_involved"] = adjudicated.outcome.none_involved;
  return out;
}

std::vector<Json> read_jsonl(std::istream& in) {
  std::vector<Json> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (detail::trim(text).empty()) continue;
    try {
      out.push_back(Json::parse(text));
    } catch (const Json::parse_error& e) {
      throw FormatError(std::string("malformed record: ") + e.what(), line);
    }
  }
  return out;
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_jsonl(in);
}

void write_jsonl(std::ostream& out, const std::vector<Json>& records) {
  for (const auto& r : records) out << r.dump() << '\n';
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& records) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_jsonl(out, records);
}

}  // namespace proxysense
