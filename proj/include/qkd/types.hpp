#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

namespace qkd {

/// Numerical tolerance for exactness checks (unitarity, zero probabilities).
/// All honest-path probabilities in this model are dyadic fractions, so the
/// true gaps are many orders of magnitude wider than this.
inline constexpr double kTol = 1e-12;

/// Disturbance level up to which secret-key generation remains possible for a
/// four-dimensional carrier under intercept-resend style attacks.  Used only
/// as a reporting comparison line, never as a hard cutoff.
inline constexpr double kQuditDisturbanceBound = 0.25;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;

/// Pockels-cell rotation setting.  The protocol only ever drives the cells to
/// 0, +pi/4, -pi/4 or pi/2, so the angle is stored as an integer number of
/// quarter-pi units and its sine/cosine are table-exact.
class PcAngle {
 public:
  constexpr PcAngle() : q_(0) {}
  constexpr explicit PcAngle(int quarter_pi) : q_(static_cast<std::int8_t>(quarter_pi)) {
    if (quarter_pi != 0 && quarter_pi != 1 && quarter_pi != -1 && quarter_pi != 2)
      throw std::invalid_argument("PcAngle: rotation must be 0, +-pi/4 or pi/2");
  }

  constexpr int quarter_pi() const { return q_; }
  double radians() const { return q_ * (kPi / 4.0); }

  double cos() const {
    switch (q_) {
      case 0: return 1.0;
      case 2: return 0.0;
      default: return kInvSqrt2;
    }
  }
  double sin() const {
    switch (q_) {
      case 0: return 0.0;
      case 1: return kInvSqrt2;
      case -1: return -kInvSqrt2;
      default: return 1.0;
    }
  }

  bool operator==(const PcAngle&) const = default;

 private:
  std::int8_t q_;
};

/// Phase-modulator setting restricted to {0, pi}, stored as a bit so that
/// e^{i phi} is exactly +-1.
class BinaryPhase {
 public:
  constexpr BinaryPhase() : bit_(0) {}
  constexpr explicit BinaryPhase(int bit) : bit_(static_cast<std::uint8_t>(bit)) {
    if (bit != 0 && bit != 1)
      throw std::invalid_argument("BinaryPhase: phase must be 0 or pi (bit 0/1)");
  }

  constexpr int bit() const { return bit_; }
  double radians() const { return bit_ ? kPi : 0.0; }
  /// e^{i phi} for phi in {0, pi}: exactly +1 or -1.
  double unit_real() const { return bit_ ? -1.0 : 1.0; }

  bool operator==(const BinaryPhase&) const = default;

 private:
  std::uint8_t bit_;
};

/// Alice's four phase settings for one round.  Slots 1..4 follow the wiring of
/// her switch: slot 1 acts on the early-bin h component, slot 2 on early v,
/// slot 3 on late h, slot 4 on late v.
struct AlicePhases {
  BinaryPhase early_h, early_v, late_h, late_v;

  BinaryPhase by_slot(int slot) const {
    switch (slot) {
      case 1: return early_h;
      case 2: return early_v;
      case 3: return late_h;
      case 4: return late_v;
      default: throw std::invalid_argument("AlicePhases: slot must be 1..4");
    }
  }

  /// Phases indexed 0..15, bit k selecting slot k+1.  Used by the exhaustive
  /// enumeration paths.
  static AlicePhases from_index(int idx) {
    if (idx < 0 || idx > 15) throw std::invalid_argument("AlicePhases: index out of range");
    return AlicePhases{BinaryPhase(idx & 1), BinaryPhase((idx >> 1) & 1),
                       BinaryPhase((idx >> 2) & 1), BinaryPhase((idx >> 3) & 1)};
  }

  bool operator==(const AlicePhases&) const = default;
};

/// Announced basis of a conclusive detection: which pair of Alice's phase
/// slots the detection compared.  d43 means slot4 minus slot3, and so on.
enum class Basis : std::uint8_t { d21, d31, d41, d32, d42, d43 };

inline constexpr std::array<Basis, 6> kAllBases = {Basis::d21, Basis::d31, Basis::d41,
                                                   Basis::d32, Basis::d42, Basis::d43};

inline std::pair<int, int> basis_slots(Basis b) {
  switch (b) {
    case Basis::d21: return {2, 1};
    case Basis::d31: return {3, 1};
    case Basis::d41: return {4, 1};
    case Basis::d32: return {3, 2};
    case Basis::d42: return {4, 2};
    case Basis::d43: return {4, 3};
  }
  throw std::invalid_argument("basis_slots: unknown basis");
}

inline std::string_view basis_name(Basis b) {
  switch (b) {
    case Basis::d21: return "dphi21";
    case Basis::d31: return "dphi31";
    case Basis::d41: return "dphi41";
    case Basis::d32: return "dphi32";
    case Basis::d42: return "dphi42";
    case Basis::d43: return "dphi43";
  }
  return "?";
}

/// Key bit a basis encodes: 0 when the two phases agree, 1 when they differ
/// by pi.
inline int alice_bit(Basis b, const AlicePhases& ph) {
  auto [i, j] = basis_slots(b);
  return ph.by_slot(i) == ph.by_slot(j) ? 0 : 1;
}

/// Preparation classes over (prep_early, prep_late):
///   c1: both from {0, pi/2}   - definite polarization in both bins
///   c2: exactly one +-pi/4    - one bin definite, one superposed
///   c3: both from {+-pi/4}    - both bins superposed
enum class MeasurementClass : std::uint8_t { c1, c2, c3 };

inline bool is_diagonal(PcAngle a) { return a.quarter_pi() == 1 || a.quarter_pi() == -1; }

inline MeasurementClass classify(PcAngle prep_early, PcAngle prep_late) {
  const int diag = (is_diagonal(prep_early) ? 1 : 0) + (is_diagonal(prep_late) ? 1 : 0);
  if (diag == 0) return MeasurementClass::c1;
  if (diag == 2) return MeasurementClass::c3;
  return MeasurementClass::c2;
}

inline std::string_view class_name(MeasurementClass c) {
  switch (c) {
    case MeasurementClass::c1: return "c1";
    case MeasurementClass::c2: return "c2";
    case MeasurementClass::c3: return "c3";
  }
  return "?";
}

/// All 16 preparation combinations in a fixed enumeration order.
inline const std::array<std::pair<PcAngle, PcAngle>, 16>& all_prep_combos() {
  static const std::array<std::pair<PcAngle, PcAngle>, 16> combos = [] {
    constexpr int units[4] = {0, 2, 1, -1};
    std::array<std::pair<PcAngle, PcAngle>, 16> out{};
    int n = 0;
    for (int i : units)
      for (int j : units) out[n++] = {PcAngle(i), PcAngle(j)};
    return out;
  }();
  return combos;
}

inline std::vector<std::pair<PcAngle, PcAngle>> combos_in_class(MeasurementClass c) {
  std::vector<std::pair<PcAngle, PcAngle>> out;
  for (const auto& [a, b] : all_prep_combos())
    if (classify(a, b) == c) out.push_back({a, b});
  return out;
}

/// Bob's four rotations for one round: two applied at preparation, two applied
/// to the returning state before the interferometer.
struct BobAngles {
  PcAngle prep_early, prep_late, meas_early, meas_late;
  bool operator==(const BobAngles&) const = default;
};

enum class Detector : std::uint8_t { spcm1, spcm2 };

inline int detector_number(Detector d) { return d == Detector::spcm1 ? 1 : 2; }

/// Outcome of one gated detection window: a single click at (bin, detector),
/// no click at all, or clicks in more than one cell (which the protocol
/// discards).
struct DetectionEvent {
  enum class Kind : std::uint8_t { click, no_click, double_click };

  Kind kind = Kind::no_click;
  int bin = -1;
  Detector det = Detector::spcm1;

  static DetectionEvent click_at(int bin, Detector det) {
    if (bin < 0 || bin > 2) throw std::invalid_argument("DetectionEvent: bin must be 0..2");
    return DetectionEvent{Kind::click, bin, det};
  }
  static DetectionEvent none() { return DetectionEvent{}; }
  static DetectionEvent doubled() { return DetectionEvent{Kind::double_click, -2, Detector::spcm1}; }

  bool operator==(const DetectionEvent&) const = default;
};

/// Per-class selection weights for Bob's preparation draw; uniform inside a
/// class.
struct ClassWeights {
  double c1 = 0.5;
  double c2 = 1.0 / 3.0;
  double c3 = 1.0 / 6.0;

  /// Half the rounds in class one, the remaining twelve combinations uniform.
  static ClassWeights balanced() { return ClassWeights{0.5, 1.0 / 3.0, 1.0 / 6.0}; }
  /// All 16 combinations equally likely.
  static ClassWeights uniform16() { return ClassWeights{0.25, 0.5, 0.25}; }
  static ClassWeights class1_only() { return ClassWeights{1.0, 0.0, 0.0}; }

  double weight(MeasurementClass c) const {
    switch (c) {
      case MeasurementClass::c1: return c1;
      case MeasurementClass::c2: return c2;
      default: return c3;
    }
  }

  void validate() const {
    if (c1 < 0.0 || c2 < 0.0 || c3 < 0.0)
      throw std::invalid_argument("ClassWeights: weights must be non-negative");
    const double sum = c1 + c2 + c3;
    if (sum < 1.0 - 1e-9 || sum > 1.0 + 1e-9)
      throw std::invalid_argument("ClassWeights: weights must sum to 1");
  }
};

/// standard: timing-based readout for classes two and three.
/// extended: additionally allows interferometric readout of the cross phase
/// differences at the middle bin, at efficiency 1/2.
enum class Mode : std::uint8_t { standard, extended };

struct MeasurementOption {
  PcAngle meas_early, meas_late;
  bool operator==(const MeasurementOption&) const = default;
};

/// The canonical return-rotation choice for a preparation combination.
MeasurementOption standard_measurement(PcAngle prep_early, PcAngle prep_late);

/// All return-rotation choices available in the given mode, standard choice
/// first.  Order is fixed so that random selection is reproducible.
std::vector<MeasurementOption> measurement_options(PcAngle prep_early, PcAngle prep_late,
                                                   Mode mode);

}  // namespace qkd
