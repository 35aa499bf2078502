#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ivs/config.hpp"
#include "ivs/control.hpp"
#include "ivs/policy.hpp"

namespace ivs {

// A method as benchmarked: UNCAL, CAL_<instrument the observer was fitted
// on>, or IVS_<instrument the demos came from>.
struct MethodSpec {
  Method method = Method::uncal;
  std::string trained_on;  // empty for UNCAL
  std::string label() const;
  friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};
// "uncal", "cal_A", "ivs_A"; a bare "cal"/"ivs" means trained on A.
MethodSpec parse_method_spec(std::string_view s);

struct TransferRecord {
  int round = 0;
  int block_id = 0;
  int source_peg = 0;
  int target_peg = 0;
  int pick_attempts = 0;
  bool picked = false;
  bool placed = false;
  double time = 0.0;  // final pick's perception to release; successful transfers only
  CorrectionResult pick_correction;  // of the final pick attempt
  CorrectionResult place_correction;
  friend bool operator==(const TransferRecord&, const TransferRecord&) = default;
};

struct CorrectionStats {
  int count = 0;
  double mean_steps = 0.0;
  double mean_mm = 0.0;
  double mean_seconds = 0.0;
  friend bool operator==(const CorrectionStats&, const CorrectionStats&) = default;
};

struct TrialReport {
  std::string method;
  std::string instrument;
  std::uint64_t seed = 0;
  int k = 0;                // ensemble size (IVS), else 0
  double servo_rate = 0.0;  // Hz (IVS), else 0
  int picks_attempted = 0, picks_succeeded = 0;
  int places_attempted = 0, places_succeeded = 0;
  int transfers_attempted = 0, transfers_succeeded = 0;
  double mean_transfer_time = 0.0;    // over successful transfers
  double mean_correction_time = 0.0;  // pick + place correction per successful transfer
  CorrectionStats pick_correction, place_correction;
  double total_time = 0.0;
  std::vector<TransferRecord> transfers;
  friend bool operator==(const TrialReport&, const TrialReport&) = default;
};

// Trained artifacts a method may need.
struct Resources {
  const EnsemblePolicy* policy = nullptr;         // IVS
  std::map<std::string, Observer> observers;      // CAL, keyed by training instrument
};

TrialReport run_trial(const MethodSpec& method, const std::string& instrument, const Resources& res,
                      const Config& cfg, std::uint64_t seed);

struct CellSummary {
  std::string method;
  std::string instrument;
  int trials = 0;
  int transfers_attempted = 0, transfers_succeeded = 0;
  int picks_attempted = 0, picks_succeeded = 0;
  int places_attempted = 0, places_succeeded = 0;
  double transfer_rate = 0.0;
  double pick_rate = 0.0;
  double place_rate = 0.0;
  double mean_transfer_time = 0.0;
  CorrectionStats pick_correction, place_correction;
  friend bool operator==(const CellSummary&, const CellSummary&) = default;
};

struct AblationRow {
  int k = 0;
  double rate_hz = 0.0;
  int trials = 0;
  int transfers_attempted = 0, transfers_succeeded = 0;
  double transfer_rate = 0.0;
  friend bool operator==(const AblationRow&, const AblationRow&) = default;
};

inline constexpr int kReportSchemaVersion = 1;

struct BenchmarkSummary {
  int schema_version = kReportSchemaVersion;
  std::string config_hash;
  std::vector<TrialReport> trials;
  std::vector<CellSummary> cells;
  std::vector<AblationRow> ablation;
  friend bool operator==(const BenchmarkSummary&, const BenchmarkSummary&) = default;
};

CellSummary summarize(std::span<const TrialReport> trials);

// Trial i of every cell uses seed base_seed + i, so cells are paired.
BenchmarkSummary benchmark(const std::vector<MethodSpec>& methods, const std::vector<std::string>& instruments,
                           int n_trials, std::uint64_t base_seed, const Resources& res, const Config& cfg);

// IVS on `instrument` with the first k members of `policy` for each k, paced
// at the timing model's rate for k.
std::vector<AblationRow> ablate_ensemble(const EnsemblePolicy& policy, const std::vector<int>& k_list,
                                         int n_trials, std::uint64_t base_seed, const std::string& instrument,
                                         const Config& cfg, std::vector<TrialReport>* trials = nullptr);

// Observer fitted on excitation rollouts of `instrument`.
Observer fit_observer_for(const std::string& instrument, const Config& cfg, std::uint64_t seed);

std::string report_json(const BenchmarkSummary& summary);
BenchmarkSummary parse_report(const std::string& text);
void emit_report(const BenchmarkSummary& summary, const std::filesystem::path& path);
BenchmarkSummary read_report(const std::filesystem::path& path);

}  // namespace ivs
