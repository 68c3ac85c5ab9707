#pragma once

#include <string>
#include <vector>

#include "qkd/oracle.hpp"
#include "qkd/rng.hpp"

namespace qkd {

/// Everything Bob chooses for one round.
struct RoundSettings {
  MeasurementClass cls = MeasurementClass::c1;
  BobAngles angles;
};

/// Draw order is fixed: class (weighted), preparation combination (uniform
/// within the class), readout option (uniform over the mode's options).
RoundSettings choose_round_settings(SplitMix64& rng, const ClassWeights& weights, Mode mode);

/// Four independent fair bits, slot order 1..4.
AlicePhases choose_alice_phases(SplitMix64& rng);

/// What Bob concludes from one detection window.
///   conclusive   - the click pins down one basis difference; (basis, bit)
///                  contribute to the raw key
///   discard      - the window is announced and dropped: either clicks in
///                  more than one cell, or a click in a cell whose rate is
///                  provably independent of every phase choice
///   inconclusive - no click, or a click that depends on the phases without
///                  determining any basis
struct Interpretation {
  enum class Kind : std::uint8_t { conclusive, inconclusive, discard };

  Kind kind = Kind::inconclusive;
  Basis basis = Basis::d21;  // meaningful only when conclusive
  int bit = -1;              // meaningful only when conclusive

  static Interpretation conclusive(Basis b, int bit) {
    if (bit != 0 && bit != 1) throw std::invalid_argument("Interpretation: bit must be 0/1");
    return Interpretation{Kind::conclusive, b, bit};
  }
  static Interpretation inconclusive() { return Interpretation{}; }
  static Interpretation discard() {
    return Interpretation{Kind::discard, Basis::d21, -1};
  }

  bool operator==(const Interpretation&) const = default;
};

std::string_view interpretation_name(Interpretation::Kind k);

/// Classifies a detection event through the derived table for the round's
/// settings.  The table must have been derived for exactly these settings.
Interpretation interpret_detection(const BobAngles& angles, const DetectionEvent& event,
                                   const DecisionTable& table);

/// Public per-round announcement: outcome category plus, for conclusive
/// rounds, the basis.  Never mentions the measured bit, so two conclusive
/// rounds in the same basis announce identical strings.
std::string announcement(const Interpretation& interp);

/// Full trace of one simulated round.  The phases are Alice's secret; the
/// simulation records them so error rates can be scored against ground truth.
struct RoundRecord {
  std::uint64_t round = 0;
  RoundSettings settings;
  AlicePhases phases;
  DetectionEvent event;
  Interpretation interp;
};

std::string csv_header();
std::string to_csv_row(const RoundRecord& r);

/// Key agreement after the public discussion.  Conclusive rounds contribute
/// one aligned bit pair; a random floor(fraction * pairs) subset is revealed
/// for error estimation and removed from both keys.
struct SiftResult {
  std::vector<int> alice_key;
  std::vector<int> bob_key;
  std::uint64_t conclusive_rounds = 0;
  /// conclusive_rounds / total rounds.
  double sifted_rate = 0.0;
  std::uint64_t sacrificed = 0;
  std::uint64_t mismatches = 0;
  /// mismatches / sacrificed; zero when nothing was revealed.
  double measured_qber = 0.0;
};

/// Bob's records and Alice's phase log must be aligned: one log entry per
/// record, in round order.  Misaligned logs are rejected.
SiftResult sift(const std::vector<RoundRecord>& records,
                const std::vector<AlicePhases>& alice_log, double sacrifice_fraction,
                SplitMix64& rng);

}  // namespace qkd
