#include "qkd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <ostream>
#include <sstream>
#include <thread>

namespace qkd {

namespace {

std::string utc_now_iso8601() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Binomial z-score of an observed proportion against an exact expectation.
/// Degenerate expectations (0 or 1) admit no spread: any deviation is an
/// immediate failure, reported as a huge score.
double z_score(double expected, double observed, std::uint64_t n) {
  if (n == 0) return 0.0;
  const double se = std::sqrt(expected * (1.0 - expected) / static_cast<double>(n));
  if (se == 0.0) return observed == expected ? 0.0 : 1e9;
  return (observed - expected) / se;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string_view eve_variant_name(EveVariant v) {
  switch (v) {
    case EveVariant::off: return "off";
    case EveVariant::per_bin_polarization: return "per_bin_polarization";
    case EveVariant::time_pol_projective: return "time_pol_projective";
  }
  return "?";
}

std::string_view eve_leg_name(EveLeg l) {
  switch (l) {
    case EveLeg::bob_to_alice: return "bob_to_alice";
    case EveLeg::alice_to_bob: return "alice_to_bob";
    case EveLeg::both: return "both";
  }
  return "?";
}

std::string_view mode_name(Mode m) {
  return m == Mode::standard ? "standard" : "extended";
}

EveVariant parse_eve_variant(const std::string& s) {
  if (s == "off") return EveVariant::off;
  if (s == "per_bin_polarization" || s == "perbin") return EveVariant::per_bin_polarization;
  if (s == "time_pol_projective" || s == "timepol") return EveVariant::time_pol_projective;
  throw std::invalid_argument(
      "unknown adversary variant '" + s +
      "' (expected off, per_bin_polarization or time_pol_projective)");
}

EveLeg parse_eve_leg(const std::string& s) {
  if (s == "bob_to_alice" || s == "outbound") return EveLeg::bob_to_alice;
  if (s == "alice_to_bob" || s == "inbound") return EveLeg::alice_to_bob;
  if (s == "both") return EveLeg::both;
  throw std::invalid_argument("unknown adversary leg '" + s +
                              "' (expected bob_to_alice, alice_to_bob or both)");
}

Mode parse_mode(const std::string& s) {
  if (s == "standard") return Mode::standard;
  if (s == "extended") return Mode::extended;
  throw std::invalid_argument("unknown mode '" + s + "' (expected standard or extended)");
}

ClassWeights parse_weights(const std::string& s) {
  if (s == "default") return ClassWeights::balanced();
  if (s == "uniform16") return ClassWeights::uniform16();
  if (s == "class1") return ClassWeights::class1_only();
  double w[3];
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t comma = s.find(',', pos);
    const bool last = (i == 2);
    if (last != (comma == std::string::npos))
      throw std::invalid_argument("weights must be a name or three comma-separated numbers");
    const std::string part = s.substr(pos, last ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      w[i] = std::stod(part, &used);
      if (used != part.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw std::invalid_argument("weights: cannot parse '" + part + "' as a number");
    }
    pos = comma + 1;
  }
  const ClassWeights weights{w[0], w[1], w[2]};
  weights.validate();
  return weights;
}

void RunConfig::validate() const {
  if (rounds < 1) throw std::invalid_argument("config: rounds must be at least 1");
  if (threads < 1) throw std::invalid_argument("config: threads must be at least 1");
  if (!(sacrifice_fraction >= 0.0) || sacrifice_fraction >= 1.0)
    throw std::invalid_argument("config: sacrifice fraction must lie in [0, 1)");
  weights.validate();
  channel.validate();
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: top level must be a JSON object");
  RunConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "rounds") {
      cfg.rounds = value.get<std::uint64_t>();
    } else if (key == "seed") {
      cfg.seed = value.get<std::uint64_t>();
    } else if (key == "mode") {
      cfg.mode = parse_mode(value.get<std::string>());
    } else if (key == "weights") {
      if (value.is_string()) {
        cfg.weights = parse_weights(value.get<std::string>());
      } else if (value.is_array() && value.size() == 3) {
        cfg.weights =
            ClassWeights{value[0].get<double>(), value[1].get<double>(), value[2].get<double>()};
      } else {
        throw std::invalid_argument("config: weights must be a name or [c1, c2, c3]");
      }
    } else if (key == "eve") {
      cfg.eve.variant = parse_eve_variant(value.get<std::string>());
    } else if (key == "eve_leg") {
      cfg.eve.leg = parse_eve_leg(value.get<std::string>());
    } else if (key == "loss") {
      const double loss = value.get<double>();
      if (loss < 0.0 || loss >= 1.0)
        throw std::invalid_argument("config: loss must lie in [0, 1)");
      cfg.channel.transmittance_per_leg = 1.0 - loss;
    } else if (key == "misalign_rad") {
      cfg.channel.misalignment_rad = value.get<double>();
    } else if (key == "dark_prob") {
      cfg.channel.dark_count_prob = value.get<double>();
    } else if (key == "sacrifice") {
      cfg.sacrifice_fraction = value.get<double>();
    } else if (key == "threads") {
      cfg.threads = value.get<unsigned>();
    } else if (key == "out") {
      cfg.out_path = value.get<std::string>();
    } else if (key == "csv_log") {
      cfg.csv_path = value.get<std::string>();
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["rounds"] = rounds;
  j["seed"] = seed;
  j["mode"] = std::string(mode_name(mode));
  j["weights"] = {weights.c1, weights.c2, weights.c3};
  j["eve"] = std::string(eve_variant_name(eve.variant));
  j["eve_leg"] = std::string(eve_leg_name(eve.leg));
  j["loss"] = 1.0 - channel.transmittance_per_leg;
  j["misalign_rad"] = channel.misalignment_rad;
  j["dark_prob"] = channel.dark_count_prob;
  j["sacrifice"] = sacrifice_fraction;
  return j;
}

RoundRecord simulate_round(std::uint64_t round, const RunConfig& cfg, const TableSet& tables) {
  SplitMix64 rng(derive_stream(cfg.seed, round));
  RoundRecord rec;
  rec.round = round;
  rec.settings = choose_round_settings(rng, cfg.weights, cfg.mode);
  rec.phases = choose_alice_phases(rng);

  const BobAngles& a = rec.settings.angles;
  TimeBinnedState state = prepare_probe(a.prep_early, a.prep_late);
  state = apply_loss(state, cfg.channel.transmittance_per_leg, rng);
  if (cfg.eve.intercepts_outbound()) state = eve_intercept_resend(state, cfg.eve, rng);
  state = apply_misalignment(state, cfg.channel.misalignment_rad);
  state = alice_phase_gate(state, rec.phases);
  state = apply_misalignment(state, cfg.channel.misalignment_rad);
  if (cfg.eve.intercepts_inbound()) state = eve_intercept_resend(state, cfg.eve, rng);
  state = apply_loss(state, cfg.channel.transmittance_per_leg, rng);
  state = apply_measurement_rotations(state, a.meas_early, a.meas_late);

  rec.event = sample_detection(decode_mzi(state), cfg.channel, rng);
  rec.interp = interpret_detection(a, rec.event, tables.at(a));
  return rec;
}

RunResult run(const RunConfig& cfg) {
  cfg.validate();
  const TableSet tables = TableSet::prebuilt(cfg.mode);

  RunResult res;
  res.config = cfg;
  res.records.resize(cfg.rounds);

  const std::uint64_t n = cfg.rounds;
  const auto workers = static_cast<unsigned>(std::min<std::uint64_t>(cfg.threads, n));
  if (workers <= 1) {
    for (std::uint64_t i = 0; i < n; ++i) res.records[i] = simulate_round(i, cfg, tables);
  } else {
    // Workers steal fixed-size blocks off a shared cursor and write disjoint
    // slots; every aggregate below is computed afterwards in round order.
    std::atomic<std::uint64_t> cursor{0};
    const std::uint64_t block =
        std::max<std::uint64_t>(1, n / (static_cast<std::uint64_t>(workers) * 16));
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (;;) {
            const std::uint64_t begin = cursor.fetch_add(block);
            if (begin >= n) break;
            const std::uint64_t end = std::min(n, begin + block);
            for (std::uint64_t i = begin; i < end; ++i)
              res.records[i] = simulate_round(i, cfg, tables);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  res.alice_log.reserve(n);
  for (const RoundRecord& rec : res.records) {
    res.alice_log.push_back(rec.phases);
    const auto ci = static_cast<std::size_t>(rec.settings.cls);
    ++res.class_rounds[ci];
    switch (rec.event.kind) {
      case DetectionEvent::Kind::click:
        ++res.single_clicks;
        ++res.cell_clicks[static_cast<std::size_t>(rec.event.bin)]
                         [rec.event.det == Detector::spcm1 ? 0 : 1];
        break;
      case DetectionEvent::Kind::no_click: ++res.no_clicks; break;
      case DetectionEvent::Kind::double_click: ++res.double_clicks; break;
    }
    if (rec.event.kind != DetectionEvent::Kind::no_click) ++res.class_detected[ci];
    switch (rec.interp.kind) {
      case Interpretation::Kind::conclusive: {
        ++res.conclusive;
        ++res.class_conclusive[ci];
        auto& tally = res.basis_tally[static_cast<std::size_t>(rec.interp.basis)];
        ++tally.conclusive;
        if (rec.interp.bit != alice_bit(rec.interp.basis, rec.phases)) {
          ++tally.errors;
          ++res.true_errors;
        }
        break;
      }
      case Interpretation::Kind::inconclusive:
        if (rec.event.kind == DetectionEvent::Kind::click) ++res.inconclusive;
        break;
      case Interpretation::Kind::discard: ++res.discards; break;
    }
  }
  res.detected = res.single_clicks + res.double_clicks;
  res.conclusive_fraction =
      res.detected > 0 ? static_cast<double>(res.conclusive) / static_cast<double>(res.detected)
                       : 0.0;
  res.true_qber = res.conclusive > 0
                      ? static_cast<double>(res.true_errors) / static_cast<double>(res.conclusive)
                      : 0.0;

  SplitMix64 sift_rng(derive_stream(cfg.seed, n));
  res.sift = sift(res.records, res.alice_log, cfg.sacrifice_fraction, sift_rng);
  return res;
}

namespace {

nlohmann::ordered_json proportion_block(double expected, double observed, std::uint64_t n) {
  nlohmann::ordered_json j;
  j["expected"] = expected;
  j["observed"] = observed;
  j["n"] = n;
  j["z"] = z_score(expected, observed, n);
  return j;
}

nlohmann::ordered_json oracle_comparison_json(const RunResult& r) {
  nlohmann::ordered_json j;
  const bool clean = r.config.channel.dark_count_prob == 0.0 &&
                     r.config.channel.misalignment_rad == 0.0;
  j["applicable"] = clean;
  if (!clean) {
    j["reason"] = "exact references assume zero dark counts and zero misalignment";
    return j;
  }
  double expected_fraction = 0.0;
  double expected_qber = 0.0;
  if (r.config.eve.variant == EveVariant::off) {
    const ProtocolRates rates = exact_protocol_rates(r.config.weights, r.config.mode);
    expected_fraction = rates.conclusive_fraction;
  } else {
    const EveQberReport er = exact_eve_qber(r.config.eve, r.config.weights, r.config.mode);
    expected_fraction = er.conclusive_fraction;
    expected_qber = er.qber;
  }
  j["conclusive_fraction"] = proportion_block(expected_fraction, r.conclusive_fraction, r.detected);
  j["true_qber"] = proportion_block(expected_qber, r.true_qber, r.conclusive);
  return j;
}

nlohmann::ordered_json eve_analysis_json(const RunResult& r) {
  nlohmann::ordered_json j;
  if (r.config.eve.variant == EveVariant::off) {
    j["enabled"] = false;
    return j;
  }
  j["enabled"] = true;
  j["strategy"] = {{"variant", std::string(eve_variant_name(r.config.eve.variant))},
                   {"leg", std::string(eve_leg_name(r.config.eve.leg))}};
  const EveQberReport er = exact_eve_qber(r.config.eve, r.config.weights, r.config.mode);

  nlohmann::ordered_json exact;
  exact["qber"] = er.qber;
  exact["conclusive_fraction"] = er.conclusive_fraction;
  nlohmann::ordered_json per_class = nlohmann::ordered_json::object();
  for (std::size_t ci = 0; ci < 3; ++ci) {
    if (!er.class_present[ci]) continue;
    const std::string key = "c" + std::to_string(ci + 1);
    per_class[key] = {{"qber", er.class_qber[ci]},
                      {"exceeds_threshold", er.class_qber[ci] > kQuditDisturbanceBound}};
  }
  exact["per_class"] = per_class;
  nlohmann::ordered_json per_basis = nlohmann::ordered_json::object();
  for (Basis b : kAllBases) {
    if (!er.has_basis(b)) continue;
    per_basis[std::string(basis_name(b))] = {
        {"qber", er.basis(b)}, {"exceeds_threshold", er.basis(b) > kQuditDisturbanceBound}};
  }
  exact["per_basis"] = per_basis;
  exact["derivation"] = er.derivation;
  j["exact"] = exact;

  j["disturbance_threshold"] = kQuditDisturbanceBound;
  j["exact_qber_exceeds_threshold"] = er.qber > kQuditDisturbanceBound;
  j["measured_qber"] = r.true_qber;
  j["measured_qber_exceeds_threshold"] = r.true_qber > kQuditDisturbanceBound;
  return j;
}

}  // namespace

nlohmann::ordered_json report_json(const RunResult& result) {
  nlohmann::ordered_json j;
  j["schema"] = "qkdsim-report/1";
  j["timestamp_utc"] = utc_now_iso8601();
  j["config"] = result.config.to_json();

  nlohmann::ordered_json counts;
  counts["rounds"] = result.config.rounds;
  counts["conclusive"] = result.conclusive;
  counts["inconclusive"] = result.inconclusive;
  counts["discard"] = result.discards;
  counts["no_click"] = result.no_clicks;
  counts["single_clicks"] = result.single_clicks;
  counts["double_clicks"] = result.double_clicks;
  counts["detected"] = result.detected;
  j["counts"] = counts;

  nlohmann::ordered_json cells = nlohmann::ordered_json::object();
  for (int bin = 0; bin < 3; ++bin) {
    cells["bin" + std::to_string(bin)] = {
        {"spcm1", result.cell_clicks[static_cast<std::size_t>(bin)][0]},
        {"spcm2", result.cell_clicks[static_cast<std::size_t>(bin)][1]}};
  }
  nlohmann::ordered_json per_class = nlohmann::ordered_json::object();
  for (std::size_t ci = 0; ci < 3; ++ci) {
    const std::string key = "c" + std::to_string(ci + 1);
    const double fraction =
        result.class_detected[ci] > 0
            ? static_cast<double>(result.class_conclusive[ci]) /
                  static_cast<double>(result.class_detected[ci])
            : 0.0;
    per_class[key] = {{"rounds", result.class_rounds[ci]},
                      {"detected", result.class_detected[ci]},
                      {"conclusive", result.class_conclusive[ci]},
                      {"conclusive_fraction", fraction}};
  }
  j["histograms"] = {{"cell_clicks", cells}, {"per_class", per_class}};

  nlohmann::ordered_json rates;
  rates["detected_fraction"] =
      static_cast<double>(result.detected) / static_cast<double>(result.config.rounds);
  rates["conclusive_fraction"] = result.conclusive_fraction;
  rates["sifted_rate"] = result.sift.sifted_rate;
  j["rates"] = rates;

  nlohmann::ordered_json sift_block;
  sift_block["conclusive_rounds"] = result.sift.conclusive_rounds;
  sift_block["sacrificed"] = result.sift.sacrificed;
  sift_block["mismatches"] = result.sift.mismatches;
  sift_block["estimated_qber"] = result.sift.measured_qber;
  sift_block["key_length"] = result.sift.alice_key.size();
  sift_block["keys_identical"] = result.sift.alice_key == result.sift.bob_key;
  j["sift"] = sift_block;

  nlohmann::ordered_json qber;
  qber["estimated"] = result.sift.measured_qber;
  qber["true_overall"] = result.true_qber;
  nlohmann::ordered_json per_basis = nlohmann::ordered_json::object();
  for (Basis b : kAllBases) {
    const auto& tally = result.basis_tally[static_cast<std::size_t>(b)];
    const double value =
        tally.conclusive > 0
            ? static_cast<double>(tally.errors) / static_cast<double>(tally.conclusive)
            : 0.0;
    per_basis[std::string(basis_name(b))] = {
        {"conclusive", tally.conclusive}, {"errors", tally.errors}, {"qber", value}};
  }
  qber["true_per_basis"] = per_basis;
  j["qber"] = qber;

  j["oracle_comparison"] = oracle_comparison_json(result);
  j["eve_analysis"] = eve_analysis_json(result);
  return j;
}

void write_csv(std::ostream& os, const std::vector<RoundRecord>& records) {
  os << csv_header() << '\n';
  for (const RoundRecord& r : records) os << to_csv_row(r) << '\n';
}

namespace {

Complex phase_unit(const BinaryPhase& p) { return Complex(p.unit_real(), 0.0); }

/// Reference forms computed with ordinary trigonometry, independent of the
/// table-exact path used by the optics chain.
Jones reference_reflected_bin0(const BobAngles& a, const AlicePhases& ph) {
  const double s1 = std::sin(a.prep_early.radians()), c1 = std::cos(a.prep_early.radians());
  const Complex u1 = phase_unit(ph.early_h), u2 = phase_unit(ph.early_v);
  return Jones{-u2 * s1 * kInvSqrt2, u1 * c1 * kInvSqrt2};
}

Jones reference_reflected_bin1(const BobAngles& a, const AlicePhases& ph) {
  const double s2 = std::sin(a.prep_late.radians()), c2 = std::cos(a.prep_late.radians());
  const Complex u3 = phase_unit(ph.late_h), u4 = phase_unit(ph.late_v);
  return Jones{-kImag * u4 * c2 * kInvSqrt2, -kImag * u3 * s2 * kInvSqrt2};
}

Jones reference_returned_bin0(const BobAngles& a, const AlicePhases& ph) {
  const double s1 = std::sin(a.prep_early.radians()), c1 = std::cos(a.prep_early.radians());
  const double s3 = std::sin(a.meas_early.radians()), c3 = std::cos(a.meas_early.radians());
  const Complex u1 = phase_unit(ph.early_h), u2 = phase_unit(ph.early_v);
  return Jones{-(u2 * s1 * c3 + u1 * c1 * s3) * kInvSqrt2,
               -(u2 * s1 * s3 - u1 * c1 * c3) * kInvSqrt2};
}

Jones reference_returned_bin1(const BobAngles& a, const AlicePhases& ph) {
  const double s2 = std::sin(a.prep_late.radians()), c2 = std::cos(a.prep_late.radians());
  const double s4 = std::sin(a.meas_late.radians()), c4 = std::cos(a.meas_late.radians());
  const Complex u3 = phase_unit(ph.late_h), u4 = phase_unit(ph.late_v);
  return Jones{-kImag * (u4 * c2 * c4 - u3 * s2 * s4) * kInvSqrt2,
               -kImag * (u4 * c2 * s4 + u3 * s2 * c4) * kInvSqrt2};
}

double jones_deviation(const Jones& a, const Jones& b) {
  return std::max(std::abs(a.h - b.h), std::abs(a.v - b.v));
}

struct CheckBuilder {
  std::vector<CheckResult> results;

  void add(const std::string& name, bool pass, const std::string& detail) {
    results.push_back({name, pass, detail});
  }
};

}  // namespace

std::vector<CheckResult> verify(const RunConfig& cfg) {
  cfg.validate();
  CheckBuilder out;

  // Closed-form propagation identities over every preparation combination,
  // its standard readout and all 16 phase choices.
  {
    double worst = 0.0;
    for (const auto& [pe, pl] : all_prep_combos()) {
      const MeasurementOption opt = standard_measurement(pe, pl);
      const BobAngles a{pe, pl, opt.meas_early, opt.meas_late};
      for (int idx = 0; idx < 16; ++idx) {
        const AlicePhases ph = AlicePhases::from_index(idx);
        TimeBinnedState reflected =
            alice_phase_gate(prepare_probe(a.prep_early, a.prep_late), ph);
        worst = std::max(worst,
                         jones_deviation(reflected.bin(0), reference_reflected_bin0(a, ph)));
        worst = std::max(worst,
                         jones_deviation(reflected.bin(1), reference_reflected_bin1(a, ph)));
        const TimeBinnedState returned =
            apply_measurement_rotations(reflected, a.meas_early, a.meas_late);
        worst = std::max(worst,
                         jones_deviation(returned.bin(0), reference_returned_bin0(a, ph)));
        worst = std::max(worst,
                         jones_deviation(returned.bin(1), reference_returned_bin1(a, ph)));
      }
    }
    out.add("propagation-closed-form", worst <= 1e-12,
            "max componentwise deviation " + format_double(worst) +
                " over 16 preparations x 16 phase choices");
  }

  // Probability conservation through decode over the same grid.
  {
    double worst = 0.0;
    for (const auto& [pe, pl] : all_prep_combos()) {
      const MeasurementOption opt = standard_measurement(pe, pl);
      const BobAngles a{pe, pl, opt.meas_early, opt.meas_late};
      for (int idx = 0; idx < 16; ++idx) {
        const OutcomeDistribution d =
            enumerate_outcome_distribution(a, AlicePhases::from_index(idx));
        worst = std::max(worst, std::abs(d.total() - 1.0));
      }
    }
    out.add("detection-probability-conservation", worst <= 1e-12,
            "max |total - 1| = " + format_double(worst));
  }

  // Single-arrival-slot rule for definite-polarization preparations: all
  // probability in the middle slot, split over detectors by one basis.
  {
    bool pass = true;
    std::string why = "all definite-polarization settings detect only in the middle slot";
    for (const auto& [pe, pl] : combos_in_class(MeasurementClass::c1)) {
      const MeasurementOption opt = standard_measurement(pe, pl);
      const BobAngles a{pe, pl, opt.meas_early, opt.meas_late};
      const DecisionTable table = derive_decision_table(a);
      for (int idx = 0; idx < 16 && pass; ++idx) {
        const OutcomeDistribution d =
            enumerate_outcome_distribution(a, AlicePhases::from_index(idx));
        const double mid = d.at(1, Detector::spcm1) + d.at(1, Detector::spcm2);
        const double side = d.total() - mid;
        if (std::abs(mid - 1.0) > 1e-12 || side > 1e-12) {
          pass = false;
          why = "probability escapes the middle arrival slot";
        }
      }
      for (Detector det : {Detector::spcm1, Detector::spcm2}) {
        const CellInfo& cell = table.cell(1, det);
        if (cell.kind != CellKind::deterministic) {
          pass = false;
          why = "middle-slot cell is not deterministic";
        }
      }
      if (pass &&
          table.cell(1, Detector::spcm1).bit() == table.cell(1, Detector::spcm2).bit()) {
        pass = false;
        why = "the two detectors must carry opposite bit values";
      }
    }
    out.add("definite-preparation-single-slot-rule", pass, why);
  }

  // Timing rules for the half-definite worked setting: early slot carries no
  // phase information, the two late slots pin the late-pair difference.
  {
    const BobAngles a{PcAngle(0), PcAngle(1), PcAngle(2), PcAngle(1)};
    const DecisionTable t = derive_decision_table(a);
    bool pass = true;
    std::string why = "early slot discards, middle slot reads value 1, late slot value 0";
    for (Detector det : {Detector::spcm1, Detector::spcm2}) {
      if (t.cell(0, det).kind != CellKind::random_uniform) pass = false;
      if (t.cell(1, det).kind != CellKind::deterministic ||
          t.cell(1, det).basis() != Basis::d43 || t.cell(1, det).bit() != 1)
        pass = false;
      if (t.cell(2, det).kind != CellKind::deterministic ||
          t.cell(2, det).basis() != Basis::d43 || t.cell(2, det).bit() != 0)
        pass = false;
    }
    if (!pass) why = "derived table deviates from the timing rules";
    out.add("half-definite-timing-rules", pass, why);
  }

  // Timing rules for the doubly-superposed worked setting.
  {
    const BobAngles a{PcAngle(1), PcAngle(-1), PcAngle(1), PcAngle(1)};
    const DecisionTable t = derive_decision_table(a);
    bool pass = true;
    std::string why =
        "earliest slot reads early-pair value 0, latest slot late-pair value 1, middle slot "
        "undecided";
    for (Detector det : {Detector::spcm1, Detector::spcm2}) {
      if (t.cell(0, det).kind != CellKind::deterministic ||
          t.cell(0, det).basis() != Basis::d21 || t.cell(0, det).bit() != 0)
        pass = false;
      if (t.cell(2, det).kind != CellKind::deterministic ||
          t.cell(2, det).basis() != Basis::d43 || t.cell(2, det).bit() != 1)
        pass = false;
      if (t.cell(1, det).kind != CellKind::random) pass = false;
    }
    if (!pass) why = "derived table deviates from the timing rules";
    out.add("doubly-superposed-timing-rules", pass, why);
  }

  // Self-consistency of every canonical table in the configured mode.
  {
    bool pass = true;
    std::string why = "deterministic cells agree with the source bit on every "
                      "supported phase choice; conclusive probability is 1 or 1/2";
    const TableSet tables = TableSet::prebuilt(cfg.mode);
    for (const auto& [key, table] : tables.all()) {
      (void)key;
      const double concl = table.conclusive_probability();
      if (std::abs(concl - 1.0) > 1e-12 && std::abs(concl - 0.5) > 1e-12) pass = false;
      for (int bin = 0; bin < 3; ++bin) {
        for (Detector det : {Detector::spcm1, Detector::spcm2}) {
          const CellInfo& cell = table.cell(bin, det);
          for (int idx = 0; idx < 16; ++idx) {
            const AlicePhases ph = AlicePhases::from_index(idx);
            const double p = enumerate_outcome_distribution(table.key, ph).at(bin, det);
            if (cell.kind == CellKind::forbidden && p > 1e-12) pass = false;
            if (cell.kind == CellKind::deterministic && p > 1e-12) {
              for (const auto& [basis, bit] : cell.determined)
                if (alice_bit(basis, ph) != bit) pass = false;
            }
          }
        }
      }
    }
    if (!pass) why = "a derived table contradicts its own enumeration";
    out.add("table-self-consistency", pass, why);
  }

  // Exact rate anchors.
  {
    const ProtocolRates def = exact_protocol_rates(ClassWeights::balanced(), cfg.mode);
    const ProtocolRates uni = exact_protocol_rates(ClassWeights::uniform16(), cfg.mode);
    const ProtocolRates c1o = exact_protocol_rates(ClassWeights::class1_only(), cfg.mode);
    const bool pass = std::abs(def.conclusive_fraction - 0.75) <= 1e-12 &&
                      std::abs(uni.conclusive_fraction - 0.625) <= 1e-12 &&
                      std::abs(c1o.conclusive_fraction - 1.0) <= 1e-12 &&
                      std::abs(def.class_conclusive[0] - 1.0) <= 1e-12 &&
                      std::abs(def.class_conclusive[1] - 0.5) <= 1e-12 &&
                      std::abs(def.class_conclusive[2] - 0.5) <= 1e-12;
    out.add("exact-rate-anchors", pass,
            "default " + format_double(def.conclusive_fraction) + ", uniform16 " +
                format_double(uni.conclusive_fraction) + ", single-class " +
                format_double(c1o.conclusive_fraction) + ", per-class {" +
                format_double(def.class_conclusive[0]) + ", " +
                format_double(def.class_conclusive[1]) + ", " +
                format_double(def.class_conclusive[2]) + "}");
  }

  // The reflection gate family is not a uniform 90-degree rotation: its
  // zero-phase member coincides with one, but the relative-phase members
  // admit no global scalar factor connecting them to it.
  {
    const Mat2 uniform = faraday_mirror();
    const Mat2 zero = phase_gate_cell(BinaryPhase(0), BinaryPhase(0));
    const Mat2 rel_v = phase_gate_cell(BinaryPhase(0), BinaryPhase(1));
    const Mat2 rel_h = phase_gate_cell(BinaryPhase(1), BinaryPhase(0));
    auto scalar_overlap = [&](const Mat2& g) {
      const Mat2 m = g.adjoint().compose(uniform);
      return std::abs(m.m00 + m.m11);  // == 2 iff g equals uniform up to a unit scalar
    };
    const bool zero_matches = std::abs(scalar_overlap(zero) - 2.0) <= 1e-12;
    const bool rel_differ =
        scalar_overlap(rel_v) < 2.0 - 1e-9 && scalar_overlap(rel_h) < 2.0 - 1e-9;
    // The diagonal-input images differ beyond a phase as well.
    const Jones d_uniform = uniform.apply(jones_d());
    const Jones d_rel = rel_v.apply(jones_d());
    const bool d_differ = std::abs(d_uniform.dot(d_rel)) < 1.0 - 1e-9;
    out.add("gate-vs-uniform-rotation", zero_matches && rel_differ && d_differ,
            "zero-phase member overlap 2, relative-phase member overlaps " +
                format_double(scalar_overlap(rel_v)) + " and " +
                format_double(scalar_overlap(rel_h)));
  }

  // Adversary oracle anchors (standard mode).
  {
    bool pass = true;
    std::ostringstream detail;
    detail.precision(17);
    const ClassWeights w = ClassWeights::balanced();
    for (EveLeg leg : {EveLeg::bob_to_alice, EveLeg::alice_to_bob, EveLeg::both}) {
      const EveQberReport er =
          exact_eve_qber({EveVariant::time_pol_projective, leg}, w, Mode::standard);
      if (std::abs(er.qber - 0.5) > 1e-12) pass = false;
    }
    for (EveLeg leg : {EveLeg::bob_to_alice, EveLeg::alice_to_bob}) {
      const EveQberReport er =
          exact_eve_qber({EveVariant::per_bin_polarization, leg}, w, Mode::standard);
      if (std::abs(er.qber - 13.0 / 32.0) > 1e-12) pass = false;
      if (std::abs(er.class_qber[0] - 0.5) > 1e-12 ||
          std::abs(er.class_qber[1] - 0.3) > 1e-12 ||
          std::abs(er.class_qber[2] - 0.25) > 1e-12)
        pass = false;
      if (std::abs(er.basis(Basis::d21) - 2.0 / 7.0) > 1e-12 ||
          std::abs(er.basis(Basis::d43) - 2.0 / 7.0) > 1e-12)
        pass = false;
      if (std::abs(er.conclusive_fraction - 2.0 / 3.0) > 1e-12) pass = false;
      detail << eve_leg_name(leg) << " " << er.qber << "; ";
    }
    const EveQberReport off = exact_eve_qber({EveVariant::off, EveLeg::both}, w, Mode::standard);
    if (off.qber != 0.0) pass = false;
    out.add("adversary-oracle-anchors", pass,
            "projective 1/2 on every leg, per-slot-polarization " + detail.str() +
                "off exactly 0");
  }

  // Every enabled interception exceeds the disturbance threshold in the
  // configured mode.
  {
    bool pass = true;
    double least = 1.0;
    for (EveVariant v : {EveVariant::per_bin_polarization, EveVariant::time_pol_projective}) {
      for (EveLeg leg : {EveLeg::bob_to_alice, EveLeg::alice_to_bob, EveLeg::both}) {
        const EveQberReport er = exact_eve_qber({v, leg}, cfg.weights, cfg.mode);
        least = std::min(least, er.qber);
        if (!(er.qber > kQuditDisturbanceBound)) pass = false;
      }
    }
    out.add("adversary-exceeds-disturbance-threshold", pass,
            "least interception error rate " + format_double(least) + " vs threshold " +
                format_double(kQuditDisturbanceBound));
  }

  // Interception on both legs never helps the key below any single leg.
  {
    bool pass = true;
    for (EveVariant v : {EveVariant::per_bin_polarization, EveVariant::time_pol_projective}) {
      const EveQberReport both = exact_eve_qber({v, EveLeg::both}, cfg.weights, cfg.mode);
      for (EveLeg leg : {EveLeg::bob_to_alice, EveLeg::alice_to_bob}) {
        const EveQberReport single = exact_eve_qber({v, leg}, cfg.weights, cfg.mode);
        if (both.qber < single.qber - 1e-12) pass = false;
        for (Basis b : kAllBases)
          if (single.has_basis(b) && both.has_basis(b) &&
              both.basis(b) < single.basis(b) - 1e-12)
            pass = false;
      }
    }
    out.add("adversary-two-leg-monotonicity", pass,
            "two-leg interception error rate is never below a single leg, per basis");
  }

  // Table regeneration is bit-for-bit reproducible.
  {
    const std::string once = tables_to_json(TableSet::prebuilt(cfg.mode)).dump();
    const std::string twice = tables_to_json(TableSet::prebuilt(cfg.mode)).dump();
    out.add("table-regeneration-determinism", once == twice,
            "two independent derivations serialize identically");
  }

  return out.results;
}

}  // namespace qkd
