#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "wbl/analyses.hpp"
#include "wbl/dynamics.hpp"
#include "wbl/error.hpp"
#include "wbl/spe_model.hpp"

namespace wbl::report {

// --- JSON forms of result types (fitted values and residuals left out) ---

nlohmann::json to_json(const stats::TestResult& t);
nlohmann::json to_json(const stats::RegressionFit& f);
nlohmann::json to_json(const stats::LmgShares& s);

nlohmann::json to_json(const analyses::AnovaResult& r);
nlohmann::json to_json(const analyses::ConditionComparison& r);
nlohmann::json to_json(const analyses::InteractionFit& r);
nlohmann::json to_json(const analyses::ValenceInteraction& r);
nlohmann::json to_json(const analyses::BestMiddleWorst& r);
nlohmann::json to_json(const analyses::FirstMessageEquivalence& r);
nlohmann::json to_json(const analyses::SimulatedReproduction& r);

nlohmann::json to_json(const dynamics::PairingSummary& r);
nlohmann::json to_json(const dynamics::TrajectoryFit& r);
nlohmann::json to_json(const dynamics::FirstLastReport& r);
nlohmann::json to_json(const dynamics::MirroringReport& r);
nlohmann::json to_json(const dynamics::CrossLaggedFit& r);
nlohmann::json to_json(const dynamics::ImportanceReport& r);

nlohmann::json to_json(const spe::HappinessModel& m);
// summary only; per-conversation predictions are left out
nlohmann::json to_json(const spe::CvReport& r);
// without per-entry predictions
nlohmann::json to_json(const spe::JournalGeneralization& r);

// --- reports ---

struct ResultRecord {
  std::string analysis;
  std::string filter;  // row selection the result was computed on
  nlohmann::json data = nullptr;
  // set instead of data when the analysis failed
  std::optional<nlohmann::json> error;

  bool ok() const noexcept { return !error.has_value(); }
  static nlohmann::json error_json(const Error& e);
};

// Provenance stamped into every artifact.
struct ArtifactHeader {
  std::string command;
  std::string version;
  std::string corpus_fingerprint;
  std::string config_hash;
  std::optional<std::uint64_t> seed;
  nlohmann::json config = nlohmann::json::object();

  nlohmann::json to_json() const;
  static ArtifactHeader from_json(const nlohmann::json& j);
};

struct AnalysisReport {
  ArtifactHeader header;
  std::vector<ResultRecord> results;

  const ResultRecord* find(std::string_view analysis) const noexcept;
};

// One header line, then one line per result.
std::string to_jsonl(const AnalysisReport& report);
AnalysisReport parse_jsonl(std::string_view text);

// Aligned plain-text tables, one section per known result, from the JSON
// data alone.
std::string render_tables(const AnalysisReport& report);

// Column-aligned table: first column left aligned, the rest right aligned.
class Table {
 public:
  explicit Table(std::vector<std::string> headers) : headers_(std::move(headers)) {}
  Table& row(std::vector<std::string> cells);
  std::string render() const;
  bool empty() const noexcept { return rows_.empty(); }

 private:
  std::vector<std::string> headers_;
  std::vector<std::vector<std::string>> rows_;
};

// Fixed decimals; NA for null or non-finite, no negative zero.
std::string fmt(const nlohmann::json& v, int decimals = 3);
std::string fmt(double v, int decimals = 3);
std::string fmt_p(const nlohmann::json& v);

}  // namespace wbl::report
