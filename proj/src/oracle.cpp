#include "qkd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qkd {

namespace {

std::string angle_key_string(const BobAngles& a) {
  std::ostringstream os;
  os << a.prep_early.quarter_pi() << "," << a.prep_late.quarter_pi() << ","
     << a.meas_early.quarter_pi() << "," << a.meas_late.quarter_pi();
  return os.str();
}

/// Weighted list of every (setting, option) pair a mode can produce.
struct WeightedSetting {
  MeasurementClass cls;
  BobAngles angles;
  double weight;
};

std::vector<WeightedSetting> enumerate_settings(const ClassWeights& weights, Mode mode) {
  weights.validate();
  std::vector<WeightedSetting> out;
  for (MeasurementClass cls :
       {MeasurementClass::c1, MeasurementClass::c2, MeasurementClass::c3}) {
    const auto combos = combos_in_class(cls);
    const double per_combo = weights.weight(cls) / static_cast<double>(combos.size());
    for (const auto& [pe, pl] : combos) {
      const auto options = measurement_options(pe, pl, mode);
      const double per_option = per_combo / static_cast<double>(options.size());
      for (const auto& opt : options)
        out.push_back({cls, BobAngles{pe, pl, opt.meas_early, opt.meas_late}, per_option});
    }
  }
  return out;
}

}  // namespace

OutcomeDistribution enumerate_outcome_distribution(const BobAngles& angles,
                                                   const AlicePhases& phases) {
  TimeBinnedState s = prepare_probe(angles.prep_early, angles.prep_late);
  s = alice_phase_gate(s, phases);
  s = apply_measurement_rotations(s, angles.meas_early, angles.meas_late);
  const DetectorAmplitudes amps = decode_mzi(s);
  OutcomeDistribution dist;
  for (int bin = 0; bin < 3; ++bin) {
    dist.p[static_cast<std::size_t>(bin)][0] = amps.prob(bin, Detector::spcm1);
    dist.p[static_cast<std::size_t>(bin)][1] = amps.prob(bin, Detector::spcm2);
  }
  return dist;
}

std::string_view cell_kind_name(CellKind k) {
  switch (k) {
    case CellKind::forbidden: return "forbidden";
    case CellKind::deterministic: return "deterministic";
    case CellKind::random_uniform: return "random_uniform";
    case CellKind::random: return "random";
  }
  return "?";
}

DecisionTable derive_decision_table(const BobAngles& angles) {
  std::array<OutcomeDistribution, 16> dists;
  for (int idx = 0; idx < 16; ++idx)
    dists[static_cast<std::size_t>(idx)] =
        enumerate_outcome_distribution(angles, AlicePhases::from_index(idx));

  DecisionTable table;
  table.key = angles;
  for (int bin = 0; bin < 3; ++bin) {
    for (Detector det : {Detector::spcm1, Detector::spcm2}) {
      CellInfo info;
      double pmin = 1.0, pmax = 0.0, psum = 0.0;
      std::vector<int> support;
      for (int idx = 0; idx < 16; ++idx) {
        const double p = dists[static_cast<std::size_t>(idx)].at(bin, det);
        pmin = std::min(pmin, p);
        pmax = std::max(pmax, p);
        psum += p;
        if (p > kTol) support.push_back(idx);
      }
      info.mean_probability = psum / 16.0;
      info.phase_independent = (pmax - pmin) <= kTol;
      if (support.empty()) {
        info.kind = CellKind::forbidden;
      } else {
        for (Basis b : kAllBases) {
          bool constant = true;
          const int first = alice_bit(b, AlicePhases::from_index(support.front()));
          for (int idx : support)
            if (alice_bit(b, AlicePhases::from_index(idx)) != first) {
              constant = false;
              break;
            }
          if (constant) info.determined.push_back({b, first});
        }
        if (!info.determined.empty())
          info.kind = CellKind::deterministic;
        else
          info.kind = info.phase_independent ? CellKind::random_uniform : CellKind::random;
      }
      table.cells[static_cast<std::size_t>(bin)][det == Detector::spcm1 ? 0 : 1] = info;
    }
  }
  return table;
}

std::vector<Basis> DecisionTable::targets() const {
  std::vector<Basis> out;
  for (Basis b : kAllBases) {
    bool found = false;
    for (const auto& row : cells)
      for (const auto& c : row)
        if (c.kind == CellKind::deterministic)
          for (const auto& [basis, bit] : c.determined)
            if (basis == b) found = true;
    if (found) out.push_back(b);
  }
  return out;
}

double DecisionTable::conclusive_probability() const {
  double s = 0.0;
  for (const auto& row : cells)
    for (const auto& c : row)
      if (c.kind == CellKind::deterministic) s += c.mean_probability;
  return s;
}

TableSet TableSet::prebuilt(Mode mode) {
  TableSet set;
  for (const auto& [pe, pl] : all_prep_combos())
    for (const auto& opt : measurement_options(pe, pl, mode)) {
      const BobAngles a{pe, pl, opt.meas_early, opt.meas_late};
      set.tables_.emplace(key_of(a), derive_decision_table(a));
    }
  return set;
}

const DecisionTable& TableSet::at(const BobAngles& angles) const {
  auto it = tables_.find(key_of(angles));
  if (it == tables_.end())
    throw std::invalid_argument("TableSet: no table derived for these settings");
  return it->second;
}

ProtocolRates exact_protocol_rates(const ClassWeights& weights, Mode mode) {
  ProtocolRates rates;
  std::array<double, 3> class_weight_sum{};
  for (const auto& ws : enumerate_settings(weights, mode)) {
    const double concl = derive_decision_table(ws.angles).conclusive_probability();
    const auto ci = static_cast<std::size_t>(ws.cls);
    rates.class_conclusive[ci] += ws.weight * concl;
    class_weight_sum[ci] += ws.weight;
    rates.conclusive_fraction += ws.weight * concl;
  }
  for (std::size_t ci = 0; ci < 3; ++ci)
    if (class_weight_sum[ci] > 0.0) rates.class_conclusive[ci] /= class_weight_sum[ci];
  return rates;
}

EveQberReport exact_eve_qber(const EveStrategy& strategy, const ClassWeights& weights,
                             Mode mode) {
  EveQberReport report;
  double concl_mass = 0.0, err_mass = 0.0;
  std::array<double, 3> class_concl{}, class_err{};
  std::array<double, 6> basis_concl{}, basis_err{};

  for (const auto& ws : enumerate_settings(weights, mode)) {
    const DecisionTable table = derive_decision_table(ws.angles);
    for (int phi = 0; phi < 16; ++phi) {
      const AlicePhases phases = AlicePhases::from_index(phi);
      const double w = ws.weight / 16.0;

      // Branch decomposition of the round: (probability, state reaching the
      // return rotations).
      std::vector<std::pair<double, TimeBinnedState>> branches;
      const TimeBinnedState probe = prepare_probe(ws.angles.prep_early, ws.angles.prep_late);
      if (strategy.intercepts_outbound()) {
        for (const auto& o : eve_outcome_set(probe, strategy.variant))
          branches.push_back({o.probability, alice_phase_gate(o.resent, phases)});
      } else {
        branches.push_back({1.0, alice_phase_gate(probe, phases)});
      }
      if (strategy.intercepts_inbound()) {
        std::vector<std::pair<double, TimeBinnedState>> expanded;
        for (const auto& [pb, state] : branches)
          for (const auto& o : eve_outcome_set(state, strategy.variant))
            expanded.push_back({pb * o.probability, o.resent});
        branches = std::move(expanded);
      }

      for (const auto& [pb, state] : branches) {
        const DetectorAmplitudes amps = decode_mzi(
            apply_measurement_rotations(state, ws.angles.meas_early, ws.angles.meas_late));
        for (int bin = 0; bin < 3; ++bin) {
          for (Detector det : {Detector::spcm1, Detector::spcm2}) {
            const CellInfo& cell = table.cell(bin, det);
            if (cell.kind != CellKind::deterministic) continue;
            const double mass = w * pb * amps.prob(bin, det);
            if (mass <= 0.0) continue;
            const bool error = cell.bit() != alice_bit(cell.basis(), phases);
            concl_mass += mass;
            if (error) err_mass += mass;
            class_concl[static_cast<std::size_t>(ws.cls)] += mass;
            if (error) class_err[static_cast<std::size_t>(ws.cls)] += mass;
            const auto bi = static_cast<std::size_t>(cell.basis());
            basis_concl[bi] += mass;
            if (error) basis_err[bi] += mass;
          }
        }
      }
    }
  }

  report.qber = concl_mass > 0.0 ? err_mass / concl_mass : 0.0;
  report.conclusive_fraction = concl_mass;
  for (std::size_t ci = 0; ci < 3; ++ci) {
    report.class_present[ci] = class_concl[ci] > 0.0;
    report.class_qber[ci] = class_concl[ci] > 0.0 ? class_err[ci] / class_concl[ci] : 0.0;
  }
  for (std::size_t bi = 0; bi < 6; ++bi) {
    report.basis_present[bi] = basis_concl[bi] > 0.0;
    report.basis_qber[bi] = basis_concl[bi] > 0.0 ? basis_err[bi] / basis_concl[bi] : 0.0;
  }

  std::ostringstream os;
  os.precision(17);
  for (std::size_t ci = 0; ci < 3; ++ci) {
    std::ostringstream line;
    line.precision(17);
    line << "class c" << ci + 1 << ": conclusive mass " << class_concl[ci] << ", error mass "
         << class_err[ci] << ", qber " << report.class_qber[ci];
    report.derivation.push_back(line.str());
  }
  for (Basis b : kAllBases) {
    const auto bi = static_cast<std::size_t>(b);
    if (basis_concl[bi] <= 0.0) continue;
    std::ostringstream line;
    line.precision(17);
    line << basis_name(b) << ": conclusive mass " << basis_concl[bi] << ", error mass "
         << basis_err[bi] << ", qber " << report.basis_qber[bi];
    report.derivation.push_back(line.str());
  }
  {
    std::ostringstream line;
    line.precision(17);
    line << "overall: conclusive mass " << concl_mass << ", error mass " << err_mass
         << ", qber " << report.qber << " (loss-independent ratios)";
    report.derivation.push_back(line.str());
  }
  return report;
}

nlohmann::ordered_json tables_to_json(const TableSet& tables) {
  nlohmann::ordered_json root;
  root["schema"] = "qkdsim-tables/1";
  nlohmann::ordered_json settings = nlohmann::ordered_json::object();
  for (const auto& [key, table] : tables.all()) {
    (void)key;
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (int bin = 0; bin < 3; ++bin) {
      for (Detector det : {Detector::spcm1, Detector::spcm2}) {
        const CellInfo& c = table.cell(bin, det);
        nlohmann::ordered_json e;
        e["bin"] = bin;
        e["detector"] = detector_number(det);
        e["classification"] = std::string(cell_kind_name(c.kind));
        if (c.kind == CellKind::deterministic) {
          e["basis"] = std::string(basis_name(c.basis()));
          e["value"] = c.bit();
        } else {
          e["basis"] = nullptr;
          e["value"] = nullptr;
        }
        e["probability"] = c.mean_probability;
        e["phase_independent"] = c.phase_independent;
        cells.push_back(e);
      }
    }
    settings[angle_key_string(table.key)] = cells;
  }
  root["settings"] = settings;
  return root;
}

nlohmann::ordered_json rates_to_json(const ProtocolRates& rates) {
  nlohmann::ordered_json j;
  j["conclusive_fraction"] = rates.conclusive_fraction;
  j["class_conclusive"] = {{"c1", rates.class_conclusive[0]},
                           {"c2", rates.class_conclusive[1]},
                           {"c3", rates.class_conclusive[2]}};
  return j;
}

}  // namespace qkd
