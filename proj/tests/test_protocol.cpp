#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "qkd/protocol.hpp"

using namespace qkd;

namespace {

BobAngles angles(int a1, int a2, int a3, int a4) {
  return BobAngles{PcAngle(a1), PcAngle(a2), PcAngle(a3), PcAngle(a4)};
}

}  // namespace

TEST_CASE("the three preparation classes partition the sixteen combinations") {
  std::set<std::pair<int, int>> seen;
  std::size_t total = 0;
  for (MeasurementClass c : {MeasurementClass::c1, MeasurementClass::c2, MeasurementClass::c3}) {
    for (const auto& [pe, pl] : combos_in_class(c)) {
      CHECK(classify(pe, pl) == c);
      seen.insert({pe.quarter_pi(), pl.quarter_pi()});
      ++total;
    }
  }
  CHECK(total == 16);
  CHECK(seen.size() == 16);
  CHECK(combos_in_class(MeasurementClass::c1).size() == 4);
  CHECK(combos_in_class(MeasurementClass::c2).size() == 8);
  CHECK(combos_in_class(MeasurementClass::c3).size() == 4);
}

TEST_CASE("key bit follows the phase difference of the announced slot pair") {
  // Slot 4 at pi, slot 3 at 0: their difference encodes a one.
  const AlicePhases ph{BinaryPhase(0), BinaryPhase(0), BinaryPhase(0), BinaryPhase(1)};
  CHECK(alice_bit(Basis::d43, ph) == 1);
  CHECK(alice_bit(Basis::d41, ph) == 1);
  CHECK(alice_bit(Basis::d21, ph) == 0);
  const AlicePhases both{BinaryPhase(1), BinaryPhase(1), BinaryPhase(0), BinaryPhase(0)};
  CHECK(alice_bit(Basis::d21, both) == 0);  // pi and pi agree
  CHECK(alice_bit(Basis::d31, both) == 1);
}

TEST_CASE("settings draw respects the class weights") {
  SplitMix64 rng(2024);
  const ClassWeights w = ClassWeights::balanced();
  const int n = 120000;
  std::array<int, 3> per_class{};
  std::map<std::array<int, 4>, int> per_setting;
  for (int i = 0; i < n; ++i) {
    const RoundSettings s = choose_round_settings(rng, w, Mode::standard);
    CHECK(classify(s.angles.prep_early, s.angles.prep_late) == s.cls);
    CHECK(standard_measurement(s.angles.prep_early, s.angles.prep_late) ==
          MeasurementOption{s.angles.meas_early, s.angles.meas_late});
    ++per_class[static_cast<std::size_t>(s.cls)];
    ++per_setting[TableSet::key_of(s.angles)];
  }
  const double expected[3] = {0.5, 1.0 / 3.0, 1.0 / 6.0};
  for (int c = 0; c < 3; ++c) {
    const double p = expected[c];
    const double se = std::sqrt(p * (1.0 - p) / n);
    CHECK(std::abs(static_cast<double>(per_class[static_cast<std::size_t>(c)]) / n - p) <
          3.5 * se);
  }
  CHECK(per_setting.size() == 16);  // every canonical setting occurs

  // Combinations are uniform inside a class: compare two class-1 settings.
  const double p1 = 0.5 / 4.0;
  const double se1 = std::sqrt(p1 * (1.0 - p1) / n);
  CHECK(std::abs(static_cast<double>(per_setting[{0, 0, 0, 0}]) / n - p1) < 3.5 * se1);
  CHECK(std::abs(static_cast<double>(per_setting[{2, 2, 2, 2}]) / n - p1) < 3.5 * se1);
}

TEST_CASE("settings draw covers the interferometric options evenly") {
  SplitMix64 rng(7);
  const int n = 150000;
  std::map<std::array<int, 4>, int> per_setting;
  for (int i = 0; i < n; ++i) {
    const RoundSettings s = choose_round_settings(rng, ClassWeights::balanced(), Mode::extended);
    ++per_setting[TableSet::key_of(s.angles)];
  }
  CHECK(per_setting.size() == 48);
  // A doubly-superposed preparation splits its weight over five options.
  const double p = (1.0 / 6.0) / 4.0 / 5.0;
  const double se = std::sqrt(p * (1.0 - p) / n);
  for (const std::array<int, 4> key :
       {std::array<int, 4>{1, 1, 1, 1}, {1, 1, 0, 0}, {1, 1, 2, 2}}) {
    CHECK(std::abs(static_cast<double>(per_setting[key]) / n - p) < 3.5 * se);
  }
}

TEST_CASE("phase draw is uniform over the sixteen combinations") {
  SplitMix64 rng(99);
  std::array<int, 16> counts{};
  const int n = 160000;
  for (int i = 0; i < n; ++i) {
    const AlicePhases ph = choose_alice_phases(rng);
    const int idx = ph.early_h.bit() | (ph.early_v.bit() << 1) | (ph.late_h.bit() << 2) |
                    (ph.late_v.bit() << 3);
    ++counts[static_cast<std::size_t>(idx)];
  }
  const double p = 1.0 / 16.0;
  const double se = std::sqrt(p * (1.0 - p) / n);
  for (int idx = 0; idx < 16; ++idx)
    CHECK(std::abs(static_cast<double>(counts[static_cast<std::size_t>(idx)]) / n - p) <
          4.0 * se);
}

TEST_CASE("interpretation of detection events") {
  const BobAngles a = angles(0, 1, 2, 1);
  const DecisionTable t = derive_decision_table(a);

  CHECK(interpret_detection(a, DetectionEvent::none(), t) == Interpretation::inconclusive());
  CHECK(interpret_detection(a, DetectionEvent::doubled(), t) == Interpretation::discard());
  // Middle and late slots conclude on the late pair; the early slot is a
  // phase-blind cell and is discarded by announcement.
  CHECK(interpret_detection(a, DetectionEvent::click_at(1, Detector::spcm1), t) ==
        Interpretation::conclusive(Basis::d43, 1));
  CHECK(interpret_detection(a, DetectionEvent::click_at(2, Detector::spcm2), t) ==
        Interpretation::conclusive(Basis::d43, 0));
  CHECK(interpret_detection(a, DetectionEvent::click_at(0, Detector::spcm2), t) ==
        Interpretation::discard());

  // The undecided middle slot of the doubly-superposed setting stays
  // inconclusive rather than being discarded.
  const BobAngles b = angles(1, -1, 1, 1);
  const DecisionTable tb = derive_decision_table(b);
  CHECK(interpret_detection(b, DetectionEvent::click_at(1, Detector::spcm1), tb) ==
        Interpretation::inconclusive());
  CHECK(interpret_detection(b, DetectionEvent::click_at(0, Detector::spcm1), tb) ==
        Interpretation::conclusive(Basis::d21, 0));

  // Settings and table must agree.
  CHECK_THROWS_AS(interpret_detection(b, DetectionEvent::none(), t), std::invalid_argument);
}

TEST_CASE("conclusive interpretations always agree with the source phases") {
  // Exhaustive noiseless property: for every setting, option, phase choice
  // and supported click cell, the interpreted bit equals the bit the phase
  // log implies.
  for (Mode mode : {Mode::standard, Mode::extended}) {
    const TableSet tables = TableSet::prebuilt(mode);
    for (const auto& [key, table] : tables.all()) {
      (void)key;
      for (int idx = 0; idx < 16; ++idx) {
        const AlicePhases ph = AlicePhases::from_index(idx);
        const OutcomeDistribution d = enumerate_outcome_distribution(table.key, ph);
        for (int bin = 0; bin < 3; ++bin) {
          for (Detector det : {Detector::spcm1, Detector::spcm2}) {
            if (d.at(bin, det) <= 1e-12) continue;
            const Interpretation interp =
                interpret_detection(table.key, DetectionEvent::click_at(bin, det), table);
            if (interp.kind == Interpretation::Kind::conclusive)
              CHECK(interp.bit == alice_bit(interp.basis, ph));
          }
        }
      }
    }
  }
}

TEST_CASE("announcements never reveal the measured bit") {
  for (Basis b : kAllBases)
    CHECK(announcement(Interpretation::conclusive(b, 0)) ==
          announcement(Interpretation::conclusive(b, 1)));
  CHECK(announcement(Interpretation::inconclusive()) == "inconclusive");
  CHECK(announcement(Interpretation::discard()) == "discard");
  CHECK(announcement(Interpretation::conclusive(Basis::d43, 1)) == "conclusive dphi43");
}

TEST_CASE("round records serialize to one CSV row") {
  CHECK(csv_header() ==
        "round,class,a1,a2,a3,a4,phi1,phi2,phi3,phi4,bin,detector,interpretation,bit");
  RoundRecord r;
  r.round = 12;
  r.settings = {MeasurementClass::c2, angles(0, 1, 2, 1)};
  r.phases = AlicePhases::from_index(9);  // slots 1 and 4 at pi
  r.event = DetectionEvent::click_at(2, Detector::spcm2);
  r.interp = Interpretation::conclusive(Basis::d43, 0);
  CHECK(to_csv_row(r) == "12,c2,0,1,2,1,1,0,0,1,2,2,conclusive,0");

  RoundRecord empty;
  empty.round = 3;
  empty.settings = {MeasurementClass::c1, angles(0, 0, 0, 0)};
  CHECK(to_csv_row(empty) == "3,c1,0,0,0,0,0,0,0,0,-1,0,inconclusive,-1");
}

namespace {

/// Builds an aligned record/log pair with the given per-round conclusive
/// bits; Alice's log is chosen so her bit disagrees where `flip` is set.
struct BuiltRun {
  std::vector<RoundRecord> records;
  std::vector<AlicePhases> log;
};

BuiltRun build_run(const std::vector<int>& bob_bits, const std::vector<bool>& flip) {
  BuiltRun out;
  for (std::size_t i = 0; i < bob_bits.size(); ++i) {
    RoundRecord r;
    r.round = i;
    r.settings = {MeasurementClass::c1, BobAngles{PcAngle(0), PcAngle(0), PcAngle(0), PcAngle(0)}};
    const int alice = flip[i] ? 1 - bob_bits[i] : bob_bits[i];
    // Slot pair (4, 1): encode `alice` via the late-v slot.
    out.log.push_back(AlicePhases{BinaryPhase(0), BinaryPhase(0), BinaryPhase(0),
                                  BinaryPhase(alice)});
    r.phases = out.log.back();
    r.event = DetectionEvent::click_at(1, bob_bits[i] ? Detector::spcm1 : Detector::spcm2);
    r.interp = Interpretation::conclusive(Basis::d41, bob_bits[i]);
    out.records.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("sifting keeps aligned bits and reveals a floor-sized sample") {
  const std::vector<int> bits = {0, 1, 1, 0, 1, 0, 0, 1, 1, 0};
  const BuiltRun run = build_run(bits, std::vector<bool>(bits.size(), false));
  SplitMix64 rng(5);
  const SiftResult s = sift(run.records, run.log, 0.25, rng);
  CHECK(s.conclusive_rounds == 10);
  CHECK(s.sifted_rate == doctest::Approx(1.0));
  CHECK(s.sacrificed == 2);  // floor(0.25 * 10)
  CHECK(s.mismatches == 0);
  CHECK(s.measured_qber == 0.0);
  CHECK(s.alice_key.size() == 8);
  CHECK(s.alice_key == s.bob_key);
}

TEST_CASE("sifting counts every mismatch when everything is revealed") {
  const std::vector<int> bits = {0, 1, 0, 1, 0, 1, 0, 1};
  std::vector<bool> flip(bits.size(), false);
  flip[1] = flip[4] = flip[6] = true;
  const BuiltRun run = build_run(bits, flip);
  SplitMix64 rng(6);
  const SiftResult s = sift(run.records, run.log, 1.0, rng);
  CHECK(s.sacrificed == 8);
  CHECK(s.mismatches == 3);
  CHECK(s.measured_qber == doctest::Approx(3.0 / 8.0));
  CHECK(s.alice_key.empty());
  CHECK(s.bob_key.empty());
}

TEST_CASE("sifting passes over undecided rounds") {
  const std::vector<int> bits = {1, 0, 1};
  BuiltRun run = build_run(bits, std::vector<bool>(bits.size(), false));
  run.records[1].interp = Interpretation::discard();
  run.records[1].event = DetectionEvent::doubled();
  SplitMix64 rng(8);
  const SiftResult s = sift(run.records, run.log, 0.0, rng);
  CHECK(s.conclusive_rounds == 2);
  CHECK(s.sifted_rate == doctest::Approx(2.0 / 3.0));
  CHECK(s.alice_key == std::vector<int>{1, 1});
}

TEST_CASE("sifting rejects malformed inputs") {
  const std::vector<int> bits = {1, 0};
  BuiltRun run = build_run(bits, std::vector<bool>(bits.size(), false));
  SplitMix64 rng(1);

  std::vector<AlicePhases> short_log = run.log;
  short_log.pop_back();
  CHECK_THROWS_AS(sift(run.records, short_log, 0.0, rng), std::invalid_argument);

  BuiltRun reordered = build_run(bits, std::vector<bool>(bits.size(), false));
  std::swap(reordered.records[0], reordered.records[1]);
  CHECK_THROWS_AS(sift(reordered.records, reordered.log, 0.0, rng), std::invalid_argument);

  BuiltRun broken = build_run(bits, std::vector<bool>(bits.size(), false));
  broken.records[0].event = DetectionEvent::none();  // conclusive without a click
  CHECK_THROWS_AS(sift(broken.records, broken.log, 0.0, rng), std::invalid_argument);

  CHECK_THROWS_AS(sift(run.records, run.log, -0.1, rng), std::invalid_argument);
  CHECK_THROWS_AS(sift(run.records, run.log, 1.5, rng), std::invalid_argument);
}
