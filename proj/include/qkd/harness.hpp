#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qkd/protocol.hpp"

#include <json.hpp>

namespace qkd {

std::string_view eve_variant_name(EveVariant v);
std::string_view eve_leg_name(EveLeg l);
std::string_view mode_name(Mode m);

EveVariant parse_eve_variant(const std::string& s);
EveLeg parse_eve_leg(const std::string& s);
Mode parse_mode(const std::string& s);
/// Accepts "default", "uniform16", "class1", or three comma-separated weights.
ClassWeights parse_weights(const std::string& s);

/// One full experiment description.  Everything that influences the sampled
/// outcomes lives here; `threads` and the output paths are execution details
/// and are excluded from the report's config echo.
struct RunConfig {
  std::uint64_t rounds = 100000;
  std::uint64_t seed = 1;
  Mode mode = Mode::standard;
  ClassWeights weights = ClassWeights::balanced();
  ChannelParams channel;
  EveStrategy eve;
  double sacrifice_fraction = 0.1;  // [0, 1)
  unsigned threads = 1;
  std::string out_path;  // report destination; empty writes to stdout
  std::string csv_path;  // per-round log; empty disables it

  void validate() const;
  static RunConfig from_json(const nlohmann::json& j);
  /// Experiment parameters only, in a fixed key order.
  nlohmann::ordered_json to_json() const;
};

struct BasisTally {
  std::uint64_t conclusive = 0;
  std::uint64_t errors = 0;  // against the source's logged phases
};

/// Everything a finished run produced, before serialization.  All aggregates
/// are reduced sequentially in round order, so they are independent of how
/// rounds were distributed over threads.
struct RunResult {
  RunConfig config;
  std::vector<RoundRecord> records;
  std::vector<AlicePhases> alice_log;
  SiftResult sift;

  std::uint64_t single_clicks = 0;
  std::uint64_t no_clicks = 0;
  std::uint64_t double_clicks = 0;
  std::uint64_t detected = 0;  // single + double clicks

  // Disjoint interpretation buckets: conclusive + inconclusive + discard
  // + no_click == rounds.  `inconclusive` counts clicked-but-undecided
  // rounds only.
  std::uint64_t conclusive = 0;
  std::uint64_t inconclusive = 0;
  std::uint64_t discards = 0;

  std::array<std::array<std::uint64_t, 2>, 3> cell_clicks{};  // [bin][detector]
  std::array<std::uint64_t, 3> class_rounds{};
  std::array<std::uint64_t, 3> class_detected{};
  std::array<std::uint64_t, 3> class_conclusive{};
  std::array<BasisTally, 6> basis_tally{};

  std::uint64_t true_errors = 0;
  double conclusive_fraction = 0.0;  // conclusive / detected
  double true_qber = 0.0;            // true_errors / conclusive
};

/// One round, fully determined by (config, round index): settings and phase
/// draws, outbound loss, outbound interception, misalignment into and out of
/// the reflection, inbound interception, inbound loss, readout rotations,
/// decode, detection sampling, interpretation.
RoundRecord simulate_round(std::uint64_t round, const RunConfig& cfg, const TableSet& tables);

RunResult run(const RunConfig& cfg);

nlohmann::ordered_json report_json(const RunResult& result);

void write_csv(std::ostream& os, const std::vector<RoundRecord>& records);

struct CheckResult {
  std::string name;
  bool pass = true;
  std::string detail;
};

/// Static assertion suite: closed-form propagation identities over the full
/// setting/phase grid, derived-table rules and self-consistency, exact rate
/// anchors, the gate-vs-uniform-rotation distinction, adversary oracle
/// anchors and monotonicity, and table regeneration determinism.
std::vector<CheckResult> verify(const RunConfig& cfg);

}  // namespace qkd
