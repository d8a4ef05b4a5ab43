#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "proxysense/adjudication.hpp"
#include "proxysense/corpus.hpp"
#include "proxysense/retrieval.hpp"
#include "proxysense/substitution.hpp"

// JSON line-record codecs shared by file exports, the event log and HTTP.
namespace proxysense {

using Json = nlohmann::json;

// Full instance record, gold included.
Json instance_to_json(const Instance& instance);
Instance instance_from_json(const Json& record, const LabelInventory& inventory);

// Annotator-facing view: tokens and marked sentence, never the gold label.
Json instance_public_json(const Instance& instance);

// {target_id, batch_index, options: [{instance_id, score, label, provenance}]}
Json batch_to_json(const NeighborBatch& batch);
// Options are re-hydrated from `labeled`; throws ValidationError for ids it
// does not contain.
NeighborBatch batch_from_json(const Json& record, const Corpus& labeled);

Json distribution_to_json(const SubstituteDistribution& dist);
SubstituteDistribution distribution_from_json(const Json& record);

Json tally_to_json(const Tally& tally);

// {target_id, batch_index, tallies, result, predicted_label, case}
Json adjudication_to_json(const AdjudicatedInstance& adjudicated, const std::optional<SupersenseLabel>& predicted);

std::vector<Json> read_jsonl(std::istream& in);
std::vector<Json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(std::ostream& out, const std::vector<Json>& records);
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& records);

}  // namespace proxysense
