#include <doctest.h>

#include <cmath>
#include <set>

#include "qkd/oracle.hpp"

using namespace qkd;

namespace {

BobAngles angles(int a1, int a2, int a3, int a4) {
  return BobAngles{PcAngle(a1), PcAngle(a2), PcAngle(a3), PcAngle(a4)};
}

bool det_cell(const DecisionTable& t, int bin, Detector d, Basis b, int bit) {
  const CellInfo& c = t.cell(bin, d);
  return c.kind == CellKind::deterministic && c.basis() == b && c.bit() == bit;
}

}  // namespace

TEST_CASE("outcome distribution: definite preparation, agreeing phases") {
  // All four phases zero: the middle slot's second detector collects the
  // whole photon.
  const OutcomeDistribution d =
      enumerate_outcome_distribution(angles(0, 0, 0, 0), AlicePhases::from_index(0));
  CHECK(d.at(1, Detector::spcm2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.at(1, Detector::spcm1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(d.at(0, Detector::spcm1) == 0.0);
  CHECK(d.at(0, Detector::spcm2) == 0.0);
  CHECK(d.at(2, Detector::spcm1) == 0.0);
  CHECK(d.at(2, Detector::spcm2) == 0.0);

  // Flipping only the late-v phase moves the click to the first detector.
  const OutcomeDistribution f =
      enumerate_outcome_distribution(angles(0, 0, 0, 0), AlicePhases::from_index(8));
  CHECK(f.at(1, Detector::spcm1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.at(1, Detector::spcm2) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("outcome distribution: half-definite worked setting") {
  // (0, pi/4, pi/2, pi/4): the dumped early bin always carries half the
  // mass, split evenly over the detectors; the remaining half lands in the
  // middle slot when the late phases differ and in the latest slot when they
  // agree.
  const BobAngles a = angles(0, 1, 2, 1);
  for (int idx = 0; idx < 16; ++idx) {
    const AlicePhases ph = AlicePhases::from_index(idx);
    const OutcomeDistribution d = enumerate_outcome_distribution(a, ph);
    CHECK(d.at(0, Detector::spcm1) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(d.at(0, Detector::spcm2) == doctest::Approx(0.25).epsilon(1e-12));
    const double mid_mass = ph.late_v == ph.late_h ? 0.0 : 0.5;
    const double mid = d.at(1, Detector::spcm1) + d.at(1, Detector::spcm2);
    const double late = d.at(2, Detector::spcm1) + d.at(2, Detector::spcm2);
    CHECK(mid == doctest::Approx(mid_mass).epsilon(1e-12));
    CHECK(late == doctest::Approx(0.5 - mid_mass).epsilon(1e-12));
    CHECK(d.total() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("derived table: definite preparations read out at the middle slot") {
  for (const auto& [pe, pl] : combos_in_class(MeasurementClass::c1)) {
    const MeasurementOption opt = standard_measurement(pe, pl);
    const DecisionTable t = derive_decision_table(BobAngles{pe, pl, opt.meas_early, opt.meas_late});
    for (Detector det : {Detector::spcm1, Detector::spcm2}) {
      CHECK(t.cell(0, det).kind == CellKind::forbidden);
      CHECK(t.cell(2, det).kind == CellKind::forbidden);
      CHECK(t.cell(1, det).kind == CellKind::deterministic);
      CHECK(t.cell(1, det).mean_probability == doctest::Approx(0.5).epsilon(1e-12));
    }
    CHECK(t.cell(1, Detector::spcm1).bit() != t.cell(1, Detector::spcm2).bit());
    CHECK(t.conclusive_probability() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t.targets().size() == 1);
  }

  // Frozen assignments for the identity preparation: detector 1 fires on a
  // phase flip between the late-v and early-h slots, detector 2 on agreement.
  const DecisionTable t0 = derive_decision_table(angles(0, 0, 0, 0));
  CHECK(det_cell(t0, 1, Detector::spcm1, Basis::d41, 1));
  CHECK(det_cell(t0, 1, Detector::spcm2, Basis::d41, 0));

  // The slot pair tracked by each definite preparation follows which
  // polarization components the probe actually carries.
  CHECK(derive_decision_table(angles(0, 2, 0, 2)).targets() ==
        std::vector<Basis>{Basis::d31});
  CHECK(derive_decision_table(angles(2, 0, 2, 0)).targets() ==
        std::vector<Basis>{Basis::d42});
  CHECK(derive_decision_table(angles(2, 2, 2, 2)).targets() ==
        std::vector<Basis>{Basis::d32});
}

TEST_CASE("derived table: half-definite worked setting") {
  const DecisionTable t = derive_decision_table(angles(0, 1, 2, 1));
  for (Detector det : {Detector::spcm1, Detector::spcm2}) {
    CHECK(t.cell(0, det).kind == CellKind::random_uniform);
    CHECK(t.cell(0, det).phase_independent);
    CHECK(det_cell(t, 1, det, Basis::d43, 1));
    CHECK(det_cell(t, 2, det, Basis::d43, 0));
  }
  CHECK(t.conclusive_probability() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t.targets() == std::vector<Basis>{Basis::d43});
}

TEST_CASE("derived table: doubly-superposed worked setting") {
  const DecisionTable t = derive_decision_table(angles(1, -1, 1, 1));
  for (Detector det : {Detector::spcm1, Detector::spcm2}) {
    CHECK(det_cell(t, 0, det, Basis::d21, 0));
    CHECK(det_cell(t, 2, det, Basis::d43, 1));
    CHECK(t.cell(1, det).kind == CellKind::random);
    CHECK(!t.cell(1, det).phase_independent);
  }
  CHECK(t.conclusive_probability() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t.targets() == std::vector<Basis>{Basis::d21, Basis::d43});
}

TEST_CASE("every canonical table is self-consistent with its enumeration") {
  for (Mode mode : {Mode::standard, Mode::extended}) {
    const TableSet tables = TableSet::prebuilt(mode);
    // 16 canonical settings, plus 2 extra options for each of the 8
    // half-definite preparations and 4 extra for each of the 4 doubly
    // superposed ones.
    CHECK(tables.all().size() == (mode == Mode::standard ? 16u : 16u + 16u + 16u));
    for (const auto& [key, t] : tables.all()) {
      (void)key;
      const double concl = t.conclusive_probability();
      const bool unit = std::abs(concl - 1.0) <= 1e-12;
      const bool half = std::abs(concl - 0.5) <= 1e-12;
      CHECK((unit || half));
      for (int idx = 0; idx < 16; ++idx) {
        const AlicePhases ph = AlicePhases::from_index(idx);
        const OutcomeDistribution d = enumerate_outcome_distribution(t.key, ph);
        for (int bin = 0; bin < 3; ++bin) {
          for (Detector det : {Detector::spcm1, Detector::spcm2}) {
            const CellInfo& c = t.cell(bin, det);
            const double p = d.at(bin, det);
            if (c.kind == CellKind::forbidden) CHECK(p == 0.0);
            if (c.kind == CellKind::deterministic && p > 1e-12) {
              for (const auto& [basis, bit] : c.determined) CHECK(alice_bit(basis, ph) == bit);
            }
          }
        }
      }
    }
  }
}

TEST_CASE("interferometric readout options target the cross phase pairs") {
  // Each added option for a doubly-superposed preparation concludes on
  // exactly one early-late slot pair, at half efficiency.
  const std::vector<std::pair<MeasurementOption, Basis>> expect = {
      {{PcAngle(0), PcAngle(0)}, Basis::d41},
      {{PcAngle(0), PcAngle(2)}, Basis::d31},
      {{PcAngle(2), PcAngle(0)}, Basis::d42},
      {{PcAngle(2), PcAngle(2)}, Basis::d32},
  };
  for (const auto& [opt, basis] : expect) {
    const DecisionTable t =
        derive_decision_table(BobAngles{PcAngle(1), PcAngle(1), opt.meas_early, opt.meas_late});
    CHECK(t.targets() == std::vector<Basis>{basis});
    CHECK(t.conclusive_probability() == doctest::Approx(0.5).epsilon(1e-12));
    for (Detector det : {Detector::spcm1, Detector::spcm2}) {
      // The outer slots carry uniform phase-independent mass 1/8.
      CHECK(t.cell(0, det).kind == CellKind::random_uniform);
      CHECK(t.cell(0, det).mean_probability == doctest::Approx(0.125).epsilon(1e-12));
      CHECK(t.cell(2, det).kind == CellKind::random_uniform);
      CHECK(t.cell(2, det).mean_probability == doctest::Approx(0.125).epsilon(1e-12));
      CHECK(t.cell(1, det).kind == CellKind::deterministic);
    }
    CHECK(t.cell(1, Detector::spcm1).bit() != t.cell(1, Detector::spcm2).bit());
  }

  // Frozen detector polarity for the first option, from the amplitude
  // (u4 - u1)/(2 sqrt 2) on detector 1.
  const DecisionTable t = derive_decision_table(angles(1, 1, 0, 0));
  CHECK(det_cell(t, 1, Detector::spcm1, Basis::d41, 1));
  CHECK(det_cell(t, 1, Detector::spcm2, Basis::d41, 0));
}

TEST_CASE("half-definite preparations gain two interferometric options") {
  // Early bin definite: the extra options compare the definite early slot
  // against each late slot in turn.
  const auto opts = measurement_options(PcAngle(0), PcAngle(1), Mode::extended);
  REQUIRE(opts.size() == 3);
  CHECK(opts[0] == standard_measurement(PcAngle(0), PcAngle(1)));
  std::set<Basis> seen;
  for (std::size_t i = 1; i < opts.size(); ++i) {
    const DecisionTable t = derive_decision_table(
        BobAngles{PcAngle(0), PcAngle(1), opts[i].meas_early, opts[i].meas_late});
    REQUIRE(t.targets().size() == 1);
    seen.insert(t.targets().front());
    CHECK(t.conclusive_probability() == doctest::Approx(0.5).epsilon(1e-12));
  }
  CHECK(seen == std::set<Basis>{Basis::d41, Basis::d31});

  // Late bin definite: the definite late slot is compared against each early
  // slot in turn.  For a pi/2 late preparation the surviving late component
  // is horizontal, so the pairs involve the late-h slot.
  std::set<Basis> seen_late;
  const auto opts_late = measurement_options(PcAngle(1), PcAngle(2), Mode::extended);
  REQUIRE(opts_late.size() == 3);
  for (std::size_t i = 1; i < opts_late.size(); ++i) {
    const DecisionTable t = derive_decision_table(
        BobAngles{PcAngle(1), PcAngle(2), opts_late[i].meas_early, opts_late[i].meas_late});
    REQUIRE(t.targets().size() == 1);
    seen_late.insert(t.targets().front());
  }
  CHECK(seen_late == std::set<Basis>{Basis::d31, Basis::d32});
}

TEST_CASE("option counts per preparation class") {
  CHECK(measurement_options(PcAngle(0), PcAngle(2), Mode::extended).size() == 1);
  CHECK(measurement_options(PcAngle(1), PcAngle(-1), Mode::extended).size() == 5);
  for (const auto& [pe, pl] : all_prep_combos())
    CHECK(measurement_options(pe, pl, Mode::standard).size() == 1);
}

TEST_CASE("exact rates reproduce the closed-form efficiencies") {
  for (Mode mode : {Mode::standard, Mode::extended}) {
    const ProtocolRates r = exact_protocol_rates(ClassWeights::balanced(), mode);
    CHECK(r.class_conclusive[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.class_conclusive[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.class_conclusive[2] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.conclusive_fraction == doctest::Approx(0.75).epsilon(1e-12));
  }
  CHECK(exact_protocol_rates(ClassWeights::uniform16(), Mode::standard).conclusive_fraction ==
        doctest::Approx(0.625).epsilon(1e-12));
  CHECK(exact_protocol_rates(ClassWeights::class1_only(), Mode::standard).conclusive_fraction ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("interception oracle: fixed time-polarization measurement") {
  // Measuring arrival time and h/v destroys every phase relation: half the
  // sifted bits are wrong wherever the attack sits, while the conclusive
  // structure of the honest run survives.
  for (EveLeg leg : {EveLeg::bob_to_alice, EveLeg::alice_to_bob, EveLeg::both}) {
    const EveQberReport r = exact_eve_qber({EveVariant::time_pol_projective, leg},
                                           ClassWeights::balanced(), Mode::standard);
    CHECK(r.qber == doctest::Approx(0.5).epsilon(1e-12));
    for (std::size_t ci = 0; ci < 3; ++ci) {
      CHECK(r.class_present[ci]);
      CHECK(r.class_qber[ci] == doctest::Approx(0.5).epsilon(1e-12));
    }
    for (Basis b : kAllBases) {
      CHECK(r.has_basis(b));
      CHECK(r.basis(b) == doctest::Approx(0.5).epsilon(1e-12));
    }
    CHECK(!r.derivation.empty());
  }
  // A single interception leaves the conclusive mass at the honest level.
  const EveQberReport one = exact_eve_qber({EveVariant::time_pol_projective, EveLeg::alice_to_bob},
                                           ClassWeights::balanced(), Mode::standard);
  CHECK(one.conclusive_fraction == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("interception oracle: per-bin polarization measurement") {
  // Coin-flipped h/v vs diagonal measurement per photon.  Frozen exact
  // values from the hand enumeration; identical for either single leg by the
  // gate's basis-exchange symmetry.
  for (EveLeg leg : {EveLeg::bob_to_alice, EveLeg::alice_to_bob}) {
    const EveQberReport r = exact_eve_qber({EveVariant::per_bin_polarization, leg},
                                           ClassWeights::balanced(), Mode::standard);
    CHECK(r.qber == doctest::Approx(13.0 / 32.0).epsilon(1e-12));
    CHECK(r.conclusive_fraction == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(r.class_qber[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.class_qber[1] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(r.class_qber[2] == doctest::Approx(0.25).epsilon(1e-12));
    // Slot pairs read out interferometrically stay at one half; the pairs
    // read out by arrival time drop to 2/7.
    CHECK(r.basis(Basis::d41) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.basis(Basis::d31) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.basis(Basis::d42) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.basis(Basis::d32) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.basis(Basis::d21) == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
    CHECK(r.basis(Basis::d43) == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
  }
}

TEST_CASE("interception oracle: inactive adversary and monotonicity") {
  const EveQberReport off =
      exact_eve_qber({EveVariant::off, EveLeg::both}, ClassWeights::balanced(), Mode::standard);
  CHECK(off.qber == 0.0);
  CHECK(off.conclusive_fraction == doctest::Approx(0.75).epsilon(1e-12));

  for (EveVariant v : {EveVariant::per_bin_polarization, EveVariant::time_pol_projective}) {
    for (Mode mode : {Mode::standard, Mode::extended}) {
      const EveQberReport both =
          exact_eve_qber({v, EveLeg::both}, ClassWeights::balanced(), mode);
      for (EveLeg leg : {EveLeg::bob_to_alice, EveLeg::alice_to_bob}) {
        const EveQberReport single = exact_eve_qber({v, leg}, ClassWeights::balanced(), mode);
        CHECK(both.qber >= single.qber - 1e-12);
        for (Basis b : kAllBases)
          if (single.has_basis(b) && both.has_basis(b))
            CHECK(both.basis(b) >= single.basis(b) - 1e-12);
      }
      CHECK(both.qber > kQuditDisturbanceBound);
    }
  }
}

TEST_CASE("table serialization is deterministic and complete") {
  const nlohmann::ordered_json j = tables_to_json(TableSet::prebuilt(Mode::standard));
  CHECK(j["schema"] == "qkdsim-tables/1");
  CHECK(j["settings"].size() == 16);
  const auto& cells = j["settings"]["0,0,0,0"];
  REQUIRE(cells.size() == 6);
  // Cell order: (bin0, det1), (bin0, det2), (bin1, det1), ...
  CHECK(cells[2]["bin"] == 1);
  CHECK(cells[2]["detector"] == 1);
  CHECK(cells[2]["classification"] == "deterministic");
  CHECK(cells[2]["basis"] == "dphi41");
  CHECK(cells[2]["value"] == 1);
  CHECK(cells[0]["classification"] == "forbidden");
  CHECK(cells[0]["basis"].is_null());
  CHECK(tables_to_json(TableSet::prebuilt(Mode::standard)).dump() == j.dump());
}
