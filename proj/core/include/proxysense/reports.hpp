#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "proxysense/adjudication.hpp"
#include "proxysense/substitution.hpp"

// Tab-separated report exports. Output is a pure function of the input, so
// identical state always yields identical bytes.
namespace proxysense {

struct ProgressRow {
  std::string kind;
  std::size_t tasks = 0;
  std::size_t completed = 0;
  std::size_t responses = 0;
  std::size_t open_assignments = 0;
  std::size_t exhausted = 0;
  bool operator==(const ProgressRow&) const = default;
};

// lemma, label, substitute, count, write_in
std::string format_radar(const std::vector<RadarRow>& rows);

// strategy, votes, majority; None first, theoretical maximum last.
// `descriptions` maps provenance names to row titles.
std::string format_strategy_tally(const StrategyTally& tally,
                                  const std::map<std::string, std::string>& descriptions = {});

// case, tagger, crowd, none as "k/n" fractions; always four rows.
std::string format_cases(const CaseReport& report);

std::string format_progress(const std::vector<ProgressRow>& rows);

}  // namespace proxysense
