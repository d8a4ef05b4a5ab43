#include "proxysense/pipeline.hpp"

#include <fstream>
#include <sstream>

#include "proxysense/digest.hpp"
#include "proxysense/records.hpp"
#include "proxysense/reports.hpp"
#include "proxysense/rng.hpp"

namespace proxysense {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

StrategyOptions strategy_from_json(const Json& j, std::uint64_t seed) {
  StrategyOptions o;
  o.ranking = parse_ranking(j.value("ranking", "cosine"));
  o.same_word = j.value("same_word", false);
  o.same_supersense = j.value("same_supersense", false);
  o.diversity = j.value("diversity", false);
  o.k = j.value("k", std::size_t{5});
  o.require_tagger_prediction = j.value("require_tagger_prediction", false);
  o.seed = j.value("seed", seed);
  RetrievalStrategy{o};  // validates
  return o;
}

std::uint64_t worker_seed(std::uint64_t seed, const std::string& worker_id) { return mix_seed(seed, "worker:" + worker_id); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

PipelineConfig parse_pipeline_config(const Json& j, const fs::path& base) {
  PipelineConfig c;
  try {
    c.seed = j.value("seed", std::uint64_t{0});
    c.inventory = resolve(base, j.at("inventory").get<std::string>());
    c.labeled = resolve(base, j.at("labeled").get<std::string>());
    c.targets = resolve(base, j.value("targets", j.at("labeled").get<std::string>()));
    c.targets_kind = parse_corpus_kind(j.value("targets_kind", "labeled"));
    c.lemmas = j.value("lemmas", std::vector<std::string>{});
    const auto design = j.value("design", "neighbor");
    if (design == "neighbor") c.design = Design::neighbor;
    else if (design == "substitution") c.design = Design::substitution;
    else throw ConfigError("unknown design '" + design + "'");
    c.n_splits = j.value("n_splits", kDefaultSplits);

    const Json vec = j.value("vectors", Json::object());
    c.vectors.provider = vec.value("provider", "mock");
    if (c.vectors.provider != "mock" && c.vectors.provider != "file" && c.vectors.provider != "command")
      throw ConfigError("unknown vector provider '" + c.vectors.provider + "'");
    if (vec.contains("file")) c.vectors.file = resolve(base, vec.at("file").get<std::string>());
    c.vectors.command = vec.value("command", "");
    c.vectors.mock.epsilon = vec.value("epsilon", c.vectors.mock.epsilon);
    c.vectors.mock.flip_probability = vec.value("flip_probability", c.vectors.mock.flip_probability);
    c.vectors.mock.jitter = vec.value("jitter", c.vectors.mock.jitter);
    c.vectors.mock.seed = vec.value("seed", c.seed);

    const Json strategies = j.value("strategies", Json("pilot-4"));
    if (strategies.is_string()) {
      const auto preset = strategies.get<std::string>();
      if (preset == "pilot-3") {
        for (const auto& s : pilot_strategies(c.seed)) c.strategies.push_back(s.options());
      } else if (preset == "pilot-4") {
        StrategyOptions o;
        o.diversity = true;
        o.k = 5;
        o.seed = c.seed;
        c.strategies.push_back(o);
      } else {
        throw ConfigError("unknown strategy preset '" + preset + "'");
      }
    } else {
      for (const auto& s : strategies) c.strategies.push_back(strategy_from_json(s, c.seed));
    }
    if (c.design == Design::neighbor && c.strategies.empty()) throw ConfigError("no retrieval strategy configured");

    c.service = config_from_json(j.value("service", Json::object()));

    const Json workers = j.value("workers", Json::object({{"count", 5}}));
    if (workers.is_object()) {
      const auto count = workers.value("count", std::size_t{5});
      for (std::size_t i = 0; i < count; ++i) {
        SimWorkerProfile p;
        p.worker_id = "w" + std::to_string(i + 1);
        p.p = workers.value("p", 0.8);
        p.none_bias = workers.value("none_bias", 0.3);
        p.seed = worker_seed(c.seed, p.worker_id);
        c.workers.push_back(p);
      }
    } else {
      for (const auto& w : workers) {
        SimWorkerProfile p;
        p.worker_id = w.at("worker_id").get<std::string>();
        p.p = w.value("p", 0.8);
        p.none_bias = w.value("none_bias", 0.3);
        p.seed = w.value("seed", worker_seed(c.seed, p.worker_id));
        c.workers.push_back(p);
      }
    }
    for (const auto& p : c.workers) validate_profile(p);

    if (j.contains("lexicon")) c.lexicon = resolve(base, j.at("lexicon").get<std::string>());
    c.selection_options = j.value("selection_options", std::map<std::string, std::vector<std::string>>{});
    c.min_count = j.value("min_count", kDefaultRadarMinCount);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed pipeline config: ") + e.what());
  }
  return c;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_pipeline_config(j, fs::absolute(path).parent_path());
}

void override_seed(PipelineConfig& config, std::uint64_t seed) {
  config.seed = seed;
  config.vectors.mock.seed = seed;
  for (auto& s : config.strategies) s.seed = seed;
  for (auto& w : config.workers) w.seed = worker_seed(seed, w.worker_id);
}

Pipeline::Pipeline(PipelineConfig config, fs::path out_dir) : config_(std::move(config)), out_(std::move(out_dir)) {}

template <typename F>
void Pipeline::stage(const std::string& name, F&& body) {
  try {
    fs::create_directories(out_);
    body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
  try {
    write_manifest();
  } catch (const std::exception& e) {
    throw StageError(name, std::string("manifest: ") + e.what());
  }
}

void Pipeline::load_inputs() {
  if (inventory_ && labeled_ && targets_) return;
  inventory_ = LabelInventory::load(config_.inventory);
  labeled_ = ingest_corpus(config_.labeled, CorpusKind::labeled, *inventory_);
  Corpus targets = ingest_corpus(config_.targets, config_.targets_kind, *inventory_);
  if (!config_.lemmas.empty()) {
    std::vector<Instance> kept;
    for (const auto& lemma : config_.lemmas)
      for (auto& inst : instances_of_preposition(targets, lemma)) kept.push_back(std::move(inst));
    targets = Corpus(targets.kind(), std::move(kept), targets.documents());
  }
  targets_ = std::move(targets);
}

std::vector<RetrievalStrategy> Pipeline::strategies() const {
  std::vector<RetrievalStrategy> out;
  for (const auto& o : config_.strategies) out.emplace_back(o);
  return out;
}

void Pipeline::ingest() {
  stage("ingest", [&] {
    load_inputs();
    write_corpus(out_ / "labeled.jsonl", *labeled_);
    write_corpus(out_ / "targets.jsonl", *targets_);
    auto summary = [](const Corpus& c) {
      std::map<std::string, std::size_t> per_lemma;
      for (const auto& inst : c.instances()) ++per_lemma[inst.lemma];
      return Json{{"kind", to_string(c.kind())},
                  {"instances", c.size()},
                  {"documents", c.documents().size()},
                  {"tokens", c.total_tokens()},
                  {"per_lemma", per_lemma}};
    };
    write_text(out_ / "corpus-summary.json",
               Json{{"inventory", {{"version", inventory_->version()}, {"size", inventory_->size()}}},
                    {"labeled", summary(*labeled_)},
                    {"targets", summary(*targets_)}}
                       .dump(2) + "\n");
  });
}

void Pipeline::partition() {
  stage("partition", [&] {
    load_inputs();
    const auto splits = partition_jackknife(*labeled_, config_.n_splits);
    write_text(out_ / "splits.json", Json{{"n_splits", splits.n_splits},
                                          {"assignment", splits.assignment},
                                          {"split_tokens", splits.split_tokens(*labeled_)}}
                                         .dump(2) + "\n");
  });
}

void Pipeline::vectors() {
  stage("vectors", [&] {
    load_inputs();
    std::unique_ptr<VectorProvider> provider;
    if (config_.vectors.provider == "mock") {
      provider = std::make_unique<MockVectorProvider>(*inventory_, config_.vectors.mock);
    } else if (config_.vectors.provider == "file") {
      if (!fs::exists(config_.vectors.file))
        throw Error("vector file " + config_.vectors.file.string() + " does not exist");
      provider = std::make_unique<FileVectorProvider>(config_.vectors.file, *inventory_);
    } else {
      provider = std::make_unique<CommandVectorProvider>(config_.vectors.command, out_ / "provider", *inventory_);
    }
    const auto splits = partition_jackknife(*labeled_, config_.n_splits);
    VectorStore store = produce_vectors(*labeled_, splits, *provider, inventory_->size());
    add_heldout_vectors(store, *labeled_, *targets_, *provider, inventory_->size());
    write_vectors(out_ / "vectors.jsonl", store);
    Json provenance = Json::object();
    for (const auto& [id, v] : store.vectors())
      if (auto split = store.provenance(id)) provenance[id] = *split;
    write_text(out_ / "vector-provenance.json", provenance.dump(2) + "\n");
    store_ = std::move(store);
  });
}

void Pipeline::load_vectors() {
  if (store_) return;
  const auto path = out_ / "vectors.jsonl";
  if (!fs::exists(path)) throw Error("no vectors in " + out_.string() + "; run the vectors stage first");
  VectorStore store;
  for (auto& v : read_vectors(path, *inventory_)) store.insert(std::move(v), std::nullopt);
  store_ = std::move(store);
}

void Pipeline::batches() {
  stage("batches", [&] {
    load_inputs();
    std::vector<Json> records;
    if (config_.design == Design::substitution) {
      for (const auto& inst : targets_->instances()) {
        const auto prompt = build_generation_prompt(inst);
        records.push_back({{"instance_id", prompt.instance_id}, {"sentence", prompt.sentence}});
      }
      write_jsonl(out_ / "prompts.jsonl", records);
      return;
    }
    load_vectors();
    const auto strategies = this->strategies();
    for (const auto& target : targets_->instances()) {
      auto batch = strategies.size() == 1
                       ? retrieve_batch(target, *labeled_, *store_, strategies.front(), target.gold, {}, 0, *inventory_)
                       : retrieve_merged(target, *labeled_, *store_, strategies, target.gold, {}, 0, *inventory_);
      if (batch) records.push_back(batch_to_json(*batch));
      else records.push_back({{"target_id", target.instance_id}, {"batch_index", 0}, {"options", Json::array()}});
    }
    write_jsonl(out_ / "batches.jsonl", records);
  });
}

Service Pipeline::fresh_service() {
  Service service(logical_clock(0, 1));
  service.configure(config_.service);
  service.load_inventory(*inventory_);
  service.ingest(CorpusRole::labeled, *labeled_);
  service.ingest(CorpusRole::targets, *targets_);
  for (const auto& w : config_.workers) service.register_worker(w.worker_id, "token-" + w.worker_id);
  return service;
}

Service Pipeline::open_service() {
  load_inputs();
  const auto log_path = out_ / "events.jsonl";
  Service service = fs::exists(log_path) ? Service::replay(EventLog::read(log_path)) : fresh_service();
  if (config_.design == Design::neighbor && fs::exists(out_ / "vectors.jsonl")) {
    load_vectors();
    service.attach_retrieval(&*store_, strategies());
  }
  return service;
}

void Pipeline::simulate() {
  stage("simulate", [&] {
    load_inputs();
    Service service = fresh_service();
    SubstituteLexicon lexicon = synthetic_lexicon(*targets_);
    if (config_.lexicon)
      for (auto& [lemma, senses] : load_lexicon(*config_.lexicon))
        for (auto& [label, subs] : senses) lexicon[lemma][label] = subs;

    std::vector<SimResponse> responses;
    std::vector<std::string> warnings;
    auto drive = [&](TaskKind kind) {
      auto r = drive_service(service, config_.workers, kind, lexicon);
      responses.insert(responses.end(), r.log.begin(), r.log.end());
      warnings.insert(warnings.end(), r.warnings.begin(), r.warnings.end());
    };
    if (config_.design == Design::neighbor) {
      load_vectors();
      service.attach_retrieval(&*store_, strategies());
      service.create_neighbor_tasks();
      drive(TaskKind::neighbor);
    } else {
      service.create_generation_tasks();
      drive(TaskKind::generation);
      service.create_selection_tasks({}, config_.selection_options);
      drive(TaskKind::selection);
    }
    service.log().write(out_ / "events.jsonl");
    std::ofstream sim(out_ / "sim-responses.jsonl");
    write_simulation_log(sim, SimulationLog{responses, warnings});
    sim.close();
    write_text(out_ / "state-digest.txt", service.digest() + "\n");
    if (!warnings.empty()) {
      std::string text;
      for (const auto& w : warnings) text += w + "\n";
      write_text(out_ / "sim-warnings.txt", text);
    }
  });
}

void Pipeline::aggregate() {
  stage("aggregate", [&] {
    load_inputs();
    const auto log_path = out_ / "events.jsonl";
    if (!fs::exists(log_path)) throw Error("no event log in " + out_.string() + "; run the simulate stage first");
    const Service service = Service::replay(EventLog::read(log_path));
    const std::string digest = service.digest();
    if (fs::exists(out_ / "state-digest.txt")) {
      auto recorded = read_text(out_ / "state-digest.txt");
      while (!recorded.empty() && (recorded.back() == '\n' || recorded.back() == '\r')) recorded.pop_back();
      if (recorded != digest) throw Error("replayed state digest " + digest + " differs from live digest " + recorded);
    }
    write_text(out_ / "replay-digest.txt", digest + "\n");

    std::vector<Json> adjudications;
    for (const auto& a : service.adjudications()) adjudications.push_back(adjudication_to_json(a, predict_tag(a.outcome, a.batch)));
    write_jsonl(out_ / "adjudications.jsonl", adjudications);

    const auto distributions = service.instance_distributions();
    std::vector<Json> dist_records;
    for (const auto& [id, d] : distributions) dist_records.push_back(distribution_to_json(d));
    write_jsonl(out_ / "distributions.jsonl", dist_records);

    // Leave-one-out nearest-centroid labels for every gold-labeled instance
    // whose preposition has other labeled instances.
    std::vector<Json> inferred;
    const Corpus& targets = *service.targets();
    for (const auto& [id, d] : distributions) {
      const auto* inst = targets.find(id);
      if (!inst || !inst->gold) continue;
      std::map<std::string, SubstituteDistribution> others;
      for (const auto& [other, od] : distributions) {
        const auto* o = targets.find(other);
        if (other != id && o && o->gold) others.emplace(other, od);
      }
      const auto centroids = aggregate_by_label(others, targets);
      Json rec{{"instance_id", id}, {"gold", render_label(*inst->gold)}};
      try {
        const auto result = infer_label_nearest_centroid(d, centroids, inst->lemma);
        if (const auto* p = std::get_if<LabelPrediction>(&result)) {
          rec["predicted"] = render_label(p->label);
          rec["confidence"] = p->confidence;
        } else {
          rec["predicted"] = nullptr;
          rec["abstain"] = true;
        }
      } catch (const CoverageError&) {
        rec["predicted"] = nullptr;
        rec["coverage"] = false;
      }
      inferred.push_back(std::move(rec));
    }
    write_jsonl(out_ / "label-inference.jsonl", inferred);
  });
}

std::string render_report(const Service& service, const std::string& which, std::int64_t min_count) {
  if (which == "radar") return format_radar(service.radar(min_count));
  if (which == "strategy-tally") return format_strategy_tally(service.strategy_tally(), service.strategy_descriptions());
  if (which == "cases") return format_cases(service.cases());
  if (which == "progress") return format_progress(service.progress());
  throw ValidationError("unknown report '" + which + "'");
}

void Pipeline::report(const std::string& which) {
  if (which != "all") render_report(Service(), which, config_.min_count);  // usage check before any work
  stage("report", [&] {
    load_inputs();
    const auto log_path = out_ / "events.jsonl";
    const Service service = fs::exists(log_path) ? Service::replay(EventLog::read(log_path)) : Service();
    fs::create_directories(out_ / "reports");
    for (const char* name : kReportNames)
      if (which == "all" || which == name)
        write_text(out_ / "reports" / (std::string(name) + ".tsv"), render_report(service, name, config_.min_count));
  });
}

void Pipeline::run() {
  ingest();
  if (config_.design == Design::neighbor) {
    partition();
    vectors();
  }
  batches();
  simulate();
  aggregate();
  report("all");
}

std::map<std::string, std::string> Pipeline::write_manifest() const {
  std::map<std::string, std::string> files;
  if (fs::exists(out_)) {
    for (const auto& entry : fs::recursive_directory_iterator(out_)) {
      if (!entry.is_regular_file()) continue;
      const auto rel = fs::relative(entry.path(), out_).generic_string();
      if (rel == "manifest.json") continue;
      files[rel] = file_sha256(entry.path());
    }
  }
  Json manifest{{"files", files}};
  write_text(out_ / "manifest.json", manifest.dump(2) + "\n");
  return files;
}

}  // namespace proxysense
