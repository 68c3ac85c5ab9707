#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qkd/channel.hpp"
#include "qkd/optics.hpp"

#include <json.hpp>

namespace qkd {

/// Exact click probabilities over the six (bin, detector) cells for one
/// setting and phase combination.  Computed by closed propagation through the
/// optics chain; no sampling anywhere.
struct OutcomeDistribution {
  std::array<std::array<double, 2>, 3> p{};  // [bin][detector]

  double at(int bin, Detector d) const {
    return p[static_cast<std::size_t>(bin)][d == Detector::spcm1 ? 0 : 1];
  }
  double total() const {
    double s = 0.0;
    for (const auto& row : p)
      for (double x : row) s += x;
    return s;
  }
};

OutcomeDistribution enumerate_outcome_distribution(const BobAngles& angles,
                                                   const AlicePhases& phases);

/// What a click in one cell tells Bob, derived by scanning all 16 phase
/// combinations:
///   forbidden       - zero probability for every phase choice
///   deterministic   - every phase choice with support shares one value of
///                     some basis difference; the click reveals that bit
///   random_uniform  - probability identical for all phase choices; the click
///                     carries no phase information at all
///   random          - probability varies with the phases but no basis is
///                     pinned down
enum class CellKind : std::uint8_t { forbidden, deterministic, random_uniform, random };

std::string_view cell_kind_name(CellKind k);

struct CellInfo {
  CellKind kind = CellKind::forbidden;
  /// All bases pinned down by this cell (usually one), enum order.
  std::vector<std::pair<Basis, int>> determined;
  /// Click probability averaged uniformly over the 16 phase combinations.
  double mean_probability = 0.0;
  bool phase_independent = true;

  Basis basis() const {
    if (determined.empty()) throw std::logic_error("CellInfo: cell determines no basis");
    return determined.front().first;
  }
  int bit() const {
    if (determined.empty()) throw std::logic_error("CellInfo: cell determines no basis");
    return determined.front().second;
  }
};

/// Readout rules for one full rotation setting, derived rather than written
/// down: classification of every detection cell plus the set of bases the
/// setting can conclude on.
struct DecisionTable {
  BobAngles key;
  std::array<std::array<CellInfo, 2>, 3> cells{};  // [bin][detector]

  const CellInfo& cell(int bin, Detector d) const {
    if (bin < 0 || bin > 2) throw std::invalid_argument("DecisionTable: bin out of range");
    return cells[static_cast<std::size_t>(bin)][d == Detector::spcm1 ? 0 : 1];
  }

  /// Bases appearing in deterministic cells, enum order, deduplicated.
  std::vector<Basis> targets() const;

  /// Exact conclusive-click probability under uniform random phases.
  double conclusive_probability() const;
};

DecisionTable derive_decision_table(const BobAngles& angles);

/// Pre-derived tables for every canonical setting of a mode, frozen before
/// any parallel work starts.
class TableSet {
 public:
  static TableSet prebuilt(Mode mode);

  const DecisionTable& at(const BobAngles& angles) const;
  const std::map<std::array<int, 4>, DecisionTable>& all() const { return tables_; }

  static std::array<int, 4> key_of(const BobAngles& a) {
    return {a.prep_early.quarter_pi(), a.prep_late.quarter_pi(), a.meas_early.quarter_pi(),
            a.meas_late.quarter_pi()};
  }

 private:
  std::map<std::array<int, 4>, DecisionTable> tables_;
};

/// Exact honest-run rates under the given weighting.
struct ProtocolRates {
  /// Fraction of detections that yield a sifted bit.
  double conclusive_fraction = 0.0;
  /// Per-class conclusive probability, uniform over combos and options.
  std::array<double, 3> class_conclusive{};
};

ProtocolRates exact_protocol_rates(const ClassWeights& weights, Mode mode);

/// Exact sifted-key error rates under an intercept-resend attack, by full
/// enumeration of settings, phases and measurement branches.  Loss is
/// excluded: it removes rounds without biasing which phase combinations
/// survive, so these ratios are unchanged by it.
struct EveQberReport {
  double qber = 0.0;  // zero when no conclusive mass exists
  double conclusive_fraction = 0.0;
  std::array<double, 3> class_qber{};
  std::array<bool, 3> class_present{};
  std::array<double, 6> basis_qber{};
  std::array<bool, 6> basis_present{};
  std::vector<std::string> derivation;

  double basis(Basis b) const { return basis_qber[static_cast<std::size_t>(b)]; }
  bool has_basis(Basis b) const { return basis_present[static_cast<std::size_t>(b)]; }
};

EveQberReport exact_eve_qber(const EveStrategy& strategy, const ClassWeights& weights,
                             Mode mode);

nlohmann::ordered_json tables_to_json(const TableSet& tables);
nlohmann::ordered_json rates_to_json(const ProtocolRates& rates);

}  // namespace qkd
