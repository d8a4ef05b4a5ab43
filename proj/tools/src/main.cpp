// proxysense: operator command line for the crowdsourcing pipeline.
#include <csignal>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "proxysense/http.hpp"
#include "proxysense/pipeline.hpp"

namespace {

enum class Level { error, warn, info, debug };
Level g_level = Level::info;

void log(Level level, const std::string& message) {
  static const char* names[] = {"error", "warn", "info", "debug"};
  if (level <= g_level) std::cerr << "proxysense [" << names[static_cast<int>(level)] << "] " << message << "\n";
}

constexpr int kUsage = 1;
constexpr int kStageFailure = 2;

proxysense::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crowdsourcing pipeline for prepositional supersense labels", "proxysense"};
  app.set_version_flag("--version", PROXYSENSE_VERSION);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::string level = "info";
  app.add_option("--config", config_path, "Pipeline config file (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory for artifacts")->capture_default_str();
  app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--log-level", level, "error | warn | info | debug")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}))
      ->capture_default_str();

  auto* ingest = app.add_subcommand("ingest", "Validate and normalize corpora");
  auto* partition = app.add_subcommand("partition", "Assign labeled documents to jackknife splits");
  auto* vectors = app.add_subcommand("vectors", "Produce tagger probability vectors");
  auto* batches = app.add_subcommand("batches", "Build neighbor batches or generation prompts");
  auto* simulate = app.add_subcommand("simulate", "Run simulated workers against the service");
  auto* aggregate = app.add_subcommand("aggregate", "Replay the event log and export aggregates");
  auto* report = app.add_subcommand("report", "Write report files");
  auto* run = app.add_subcommand("run", "Run every stage in order");
  auto* serve = app.add_subcommand("serve", "Serve tasks over HTTP");

  std::string which = "all";
  report->add_option("which", which, "radar | strategy-tally | cases | progress | all")
      ->check(CLI::IsMember({"radar", "strategy-tally", "cases", "progress", "all"}));

  std::string host = "127.0.0.1";
  int port = 8080;
  std::string admin_token;
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--admin-token", admin_token, "Token for admin and report endpoints")
      ->envname("PROXYSENSE_ADMIN_TOKEN");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  if (level == "error") g_level = Level::error;
  else if (level == "warn") g_level = Level::warn;
  else if (level == "debug") g_level = Level::debug;

  proxysense::PipelineConfig config;
  try {
    config = proxysense::load_pipeline_config(config_path);
    if (seed) proxysense::override_seed(config, *seed);
  } catch (const proxysense::Error& e) {
    log(Level::error, e.what());
    return kUsage;
  }

  proxysense::Pipeline pipeline(config, out_dir);
  try {
    if (*ingest) pipeline.ingest();
    else if (*partition) pipeline.partition();
    else if (*vectors) pipeline.vectors();
    else if (*batches) pipeline.batches();
    else if (*simulate) pipeline.simulate();
    else if (*aggregate) pipeline.aggregate();
    else if (*report) pipeline.report(which);
    else if (*run) pipeline.run();
    else if (*serve) {
      if (admin_token.empty()) log(Level::warn, "no admin token set; admin and report endpoints are disabled");
      proxysense::Service service = pipeline.open_service();
      service.set_clock({});
      proxysense::HttpServer server(service, {admin_token, {}, config.min_count});
      const int bound = server.bind(host, port);
      if (bound < 0) {
        log(Level::error, "cannot bind " + host + ":" + std::to_string(port));
        return kStageFailure;
      }
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      log(Level::info, "listening on " + host + ":" + std::to_string(bound));
      server.listen();
      g_server = nullptr;
      std::filesystem::create_directories(out_dir);
      service.log().write(std::filesystem::path(out_dir) / "events.jsonl");
      pipeline.write_manifest();
      log(Level::info, "wrote " + std::to_string(service.log().size()) + " events");
    }
  } catch (const proxysense::StageError& e) {
    log(Level::error, e.what());
    return kStageFailure;
  } catch (const std::exception& e) {
    log(Level::error, e.what());
    return kStageFailure;
  }
  log(Level::debug, "done; artifacts in " + out_dir);
  return 0;
}
