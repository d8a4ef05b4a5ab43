#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "proxysense/error.hpp"
#include "proxysense/corpus.hpp"
#include "proxysense/service.hpp"

namespace proxysense {

// Synthetic annotator. With probability p the worker picks a correct option;
// otherwise with probability none_bias it abstains (None / [Omit]), else it
// picks a uniformly random incorrect option.
struct SimWorkerProfile {
  std::string worker_id;
  double p = 0.8;
  double none_bias = 0.0;
  std::uint64_t seed = 0;
};

// Throws ConfigError for probabilities outside [0, 1] or an empty id.
void validate_profile(const SimWorkerProfile& profile);

// One question as seen by a simulated worker. `correct` comes from the truth
// oracle and may include the abstain option; an empty `correct` means the
// truth is unknown.
struct SimTask {
  std::string task_id;
  std::vector<std::string> options;
  std::set<std::string> correct;
  std::string abstain;  // "None", "[Omit]", or empty when abstaining is not offered
};

struct SimResponse {
  std::string task_id;
  std::string worker_id;
  std::string choice;
  bool operator==(const SimResponse&) const = default;
};

struct SimulationLog {
  std::vector<SimResponse> responses;
  std::vector<std::string> warnings;
};

// Draws are keyed on (profile.seed, task_id), so a worker's answer does not
// depend on the order in which tasks reach it. Unknown truth with
// none_bias == 0 is degenerate: a warning is logged and the choice is uniform
// over every option.
std::string simulate_choice(const SimWorkerProfile& profile, const SimTask& task,
                            std::vector<std::string>* warnings = nullptr);

// Every profile answers every task, tasks in order, workers in order.
SimulationLog simulate_workers(const std::vector<SimWorkerProfile>& profiles, const std::vector<SimTask>& tasks);

void write_simulation_log(std::ostream& out, const SimulationLog& log);

// lemma -> rendered label -> substitutes consistent with that sense
using SubstituteLexicon = std::map<std::string, std::map<std::string, std::vector<std::string>>>;

SubstituteLexicon load_lexicon(const std::filesystem::path& path);
// Placeholder substitutes ("alt-<label>", "via-<label>") for every
// (lemma, gold) pair of the corpus, for runs without a lexicon.
SubstituteLexicon synthetic_lexicon(const Corpus& corpus);

// Builds the simulated view of a service task from gold labels.
// Neighbor: options bearing the target's gold, or None when none does.
// Selection: options listed in the lexicon for (lemma, gold), or [Omit].
// Generation: the lexicon entries of the lemma; correct ones for its gold.
SimTask truth_for_task(const Service& service, const Task& task, const SubstituteLexicon& lexicon);

struct DriveResult {
  std::size_t responses = 0;
  std::vector<SimResponse> log;
  std::vector<std::string> warnings;
};

// Round-robin over workers until no worker receives work of `kind`:
// assign_next_task, simulate_choice, submit_response.
DriveResult drive_service(Service& service, const std::vector<SimWorkerProfile>& profiles, TaskKind kind,
                          const SubstituteLexicon& lexicon);

// Deterministic clock for reproducible event logs: start, start + step, ...
Service::Clock logical_clock(std::int64_t start = 0, std::int64_t step = 1);

}  // namespace proxysense
