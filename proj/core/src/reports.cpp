#include "proxysense/reports.hpp"

#include <sstream>

namespace proxysense {

namespace {

std::string fraction(std::size_t k, std::size_t n) { return std::to_string(k) + "/" + std::to_string(n); }

}  // namespace

std::string format_radar(const std::vector<RadarRow>& rows) {
  std::ostringstream out;
  out << "lemma\tlabel\tsubstitute\tcount\twrite_in\n";
  for (const auto& r : rows)
    out << r.lemma << '\t' << render_label(r.label) << '\t' << r.substitute << '\t' << r.count << '\t'
        << (r.write_in ? "yes" : "no") << '\n';
  return out.str();
}

std::string format_strategy_tally(const StrategyTally& tally, const std::map<std::string, std::string>& descriptions) {
  std::ostringstream out;
  out << "strategy\tvotes\tmajority\n";
  for (const auto& row : tally.rows) {
    auto it = descriptions.find(row.strategy);
    out << (it == descriptions.end() ? row.strategy : it->second) << '\t' << row.votes << '\t' << row.majority << '\n';
  }
  out << "Theoretical Maximum\t" << tally.max_votes << '\t' << tally.max_majority << '\n';
  return out.str();
}

std::string format_cases(const CaseReport& report) {
  std::ostringstream out;
  out << "case\ttagger\tcrowd\tnone\n";
  for (const auto& row : report.rows)
    out << describe(row.id) << '\t' << fraction(row.tagger_correct, row.total) << '\t'
        << fraction(row.crowd_correct, row.total) << '\t' << fraction(row.none_chosen, row.total) << '\n';
  return out.str();
}

std::string format_progress(const std::vector<ProgressRow>& rows) {
  std::ostringstream out;
  out << "kind\ttasks\tcompleted\tresponses\topen_assignments\texhausted\n";
  for (const auto& r : rows)
    out << r.kind << '\t' << r.tasks << '\t' << r.completed << '\t' << r.responses << '\t' << r.open_assignments
        << '\t' << r.exhausted << '\n';
  return out.str();
}

}  // namespace proxysense
