#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "proxysense/error.hpp"
#include "proxysense/retrieval.hpp"
#include "proxysense/service.hpp"
#include "proxysense/simulation.hpp"
#include "proxysense/vectors.hpp"

// Operator pipeline: ingest -> partition -> vectors -> batches -> simulate ->
// aggregate -> report, every stage reading and writing files in one output
// directory.
namespace proxysense {

enum class Design { neighbor, substitution };

struct VectorConfig {
  std::string provider = "mock";  // mock | file | command
  std::filesystem::path file;
  std::string command;
  MockVectorProvider::Options mock;
};

struct PipelineConfig {
  std::filesystem::path inventory;
  std::filesystem::path labeled;
  std::filesystem::path targets;
  CorpusKind targets_kind = CorpusKind::labeled;
  std::vector<std::string> lemmas;  // empty: every target
  Design design = Design::neighbor;
  std::size_t n_splits = kDefaultSplits;
  VectorConfig vectors;
  std::vector<StrategyOptions> strategies;
  ServiceConfig service;
  std::vector<SimWorkerProfile> workers;
  std::optional<std::filesystem::path> lexicon;
  std::map<std::string, std::vector<std::string>> selection_options;
  std::int64_t min_count = kDefaultRadarMinCount;
  std::uint64_t seed = 0;
};

// Relative paths resolve against the config file's directory. A --seed
// override replaces the top-level seed and reseeds the mock provider,
// random strategies and workers derived from it.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
PipelineConfig parse_pipeline_config(const Json& record, const std::filesystem::path& base_dir);
void override_seed(PipelineConfig& config, std::uint64_t seed);

// Failure of one pipeline stage; the CLI maps it to exit status 2.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause)
      : Error("stage " + stage + ": " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

class Pipeline {
 public:
  Pipeline(PipelineConfig config, std::filesystem::path out_dir);

  void ingest();
  void partition();
  void vectors();
  void batches();
  void simulate();
  void aggregate();
  // which: radar | strategy-tally | cases | progress | all
  void report(const std::string& which = "all");
  void run();

  // Service reconstructed from the event log in the output directory, or a
  // freshly configured one when no log exists. Keeps this pipeline's vectors
  // attached for live batch creation.
  Service open_service();

  // Files written so far, relative to the output directory, with SHA-256.
  std::map<std::string, std::string> write_manifest() const;

  const PipelineConfig& config() const { return config_; }
  const std::filesystem::path& out_dir() const { return out_; }

 private:
  template <typename F>
  void stage(const std::string& name, F&& body);
  void load_inputs();
  void load_vectors();
  Service fresh_service();
  std::vector<RetrievalStrategy> strategies() const;

  PipelineConfig config_;
  std::filesystem::path out_;
  std::optional<LabelInventory> inventory_;
  std::optional<Corpus> labeled_;
  std::optional<Corpus> targets_;
  std::optional<VectorStore> store_;
};

inline constexpr const char* kReportNames[] = {"radar", "strategy-tally", "cases", "progress"};

// TSV text of one report over a service state. Throws ValidationError for an
// unknown report name.
std::string render_report(const Service& service, const std::string& which, std::int64_t min_count);

}  // namespace proxysense
