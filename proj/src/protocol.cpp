#include "qkd/protocol.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace qkd {

RoundSettings choose_round_settings(SplitMix64& rng, const ClassWeights& weights, Mode mode) {
  weights.validate();
  const double class_weights[3] = {weights.c1, weights.c2, weights.c3};
  const auto cls = static_cast<MeasurementClass>(rng.pick(class_weights));
  const auto combos = combos_in_class(cls);
  const auto& [pe, pl] = combos[rng.below(static_cast<std::uint32_t>(combos.size()))];
  const auto options = measurement_options(pe, pl, mode);
  const MeasurementOption opt =
      options[rng.below(static_cast<std::uint32_t>(options.size()))];
  return RoundSettings{cls, BobAngles{pe, pl, opt.meas_early, opt.meas_late}};
}

AlicePhases choose_alice_phases(SplitMix64& rng) {
  // Braced init evaluates left to right, fixing the slot order of the draws.
  return AlicePhases{BinaryPhase(rng.coin() ? 1 : 0), BinaryPhase(rng.coin() ? 1 : 0),
                     BinaryPhase(rng.coin() ? 1 : 0), BinaryPhase(rng.coin() ? 1 : 0)};
}

std::string_view interpretation_name(Interpretation::Kind k) {
  switch (k) {
    case Interpretation::Kind::conclusive: return "conclusive";
    case Interpretation::Kind::inconclusive: return "inconclusive";
    case Interpretation::Kind::discard: return "discard";
  }
  return "?";
}

Interpretation interpret_detection(const BobAngles& angles, const DetectionEvent& event,
                                   const DecisionTable& table) {
  if (!(table.key == angles))
    throw std::invalid_argument("interpret_detection: table derived for different settings");
  switch (event.kind) {
    case DetectionEvent::Kind::no_click: return Interpretation::inconclusive();
    case DetectionEvent::Kind::double_click: return Interpretation::discard();
    case DetectionEvent::Kind::click: break;
  }
  const CellInfo& cell = table.cell(event.bin, event.det);
  switch (cell.kind) {
    case CellKind::deterministic:
      return Interpretation::conclusive(cell.basis(), cell.bit());
    case CellKind::random_uniform: return Interpretation::discard();
    case CellKind::random:
    case CellKind::forbidden: return Interpretation::inconclusive();
  }
  throw std::logic_error("interpret_detection: unhandled cell kind");
}

std::string announcement(const Interpretation& interp) {
  if (interp.kind != Interpretation::Kind::conclusive)
    return std::string(interpretation_name(interp.kind));
  std::string out = "conclusive ";
  out += basis_name(interp.basis);
  return out;
}

std::string csv_header() {
  return "round,class,a1,a2,a3,a4,phi1,phi2,phi3,phi4,bin,detector,interpretation,bit";
}

std::string to_csv_row(const RoundRecord& r) {
  std::ostringstream os;
  os << r.round << ',' << class_name(r.settings.cls) << ','
     << r.settings.angles.prep_early.quarter_pi() << ','
     << r.settings.angles.prep_late.quarter_pi() << ','
     << r.settings.angles.meas_early.quarter_pi() << ','
     << r.settings.angles.meas_late.quarter_pi() << ',' << r.phases.early_h.bit() << ','
     << r.phases.early_v.bit() << ',' << r.phases.late_h.bit() << ','
     << r.phases.late_v.bit() << ',' << r.event.bin << ','
     << (r.event.kind == DetectionEvent::Kind::click ? detector_number(r.event.det) : 0)
     << ',' << interpretation_name(r.interp.kind) << ','
     << (r.interp.kind == Interpretation::Kind::conclusive ? r.interp.bit : -1);
  return os.str();
}

SiftResult sift(const std::vector<RoundRecord>& records,
                const std::vector<AlicePhases>& alice_log, double sacrifice_fraction,
                SplitMix64& rng) {
  if (!(sacrifice_fraction >= 0.0) || sacrifice_fraction > 1.0)
    throw std::invalid_argument("sift: sacrifice fraction must lie in [0, 1]");
  if (alice_log.size() != records.size())
    throw std::invalid_argument("sift: phase log and round records are misaligned");

  std::vector<int> alice, bob;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const RoundRecord& r = records[i];
    if (r.round != i)
      throw std::invalid_argument("sift: records are not in round order");
    if (r.interp.kind != Interpretation::Kind::conclusive) continue;
    if (r.event.kind != DetectionEvent::Kind::click)
      throw std::invalid_argument("sift: conclusive record without a single click");
    alice.push_back(alice_bit(r.interp.basis, alice_log[i]));
    bob.push_back(r.interp.bit);
  }

  SiftResult out;
  out.conclusive_rounds = alice.size();
  out.sifted_rate = records.empty()
                        ? 0.0
                        : static_cast<double>(alice.size()) / static_cast<double>(records.size());
  const std::size_t k = alice.size();
  const auto m = static_cast<std::size_t>(
      std::floor(sacrifice_fraction * static_cast<double>(k)));

  // Partial shuffle: the first m entries become the revealed subset.
  std::vector<std::uint32_t> order(k);
  std::iota(order.begin(), order.end(), 0U);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + rng.below(static_cast<std::uint32_t>(k - i));
    std::swap(order[i], order[j]);
  }

  std::vector<char> revealed(k, 0);
  for (std::size_t i = 0; i < m; ++i) {
    const std::uint32_t idx = order[i];
    revealed[idx] = 1;
    if (alice[idx] != bob[idx]) ++out.mismatches;
  }
  out.sacrificed = m;
  out.measured_qber =
      m > 0 ? static_cast<double>(out.mismatches) / static_cast<double>(m) : 0.0;

  for (std::size_t i = 0; i < k; ++i) {
    if (revealed[i]) continue;
    out.alice_key.push_back(alice[i]);
    out.bob_key.push_back(bob[i]);
  }
  return out;
}

}  // namespace qkd
