#pragma once

#include <array>

#include "qkd/state.hpp"

namespace qkd {

/// Propagation sense through a retarder.  The long-arm retarder uses the same
/// matrix both ways by convention; the source-port retarder does not.
enum class Direction : std::uint8_t { forward, returning };

/// Retarder in the long interferometer arm: h -> v on the way out,
/// v -> -h on the way back.  Both rules are realized by [[0,-1],[1,0]].
Mat2 half_wave_long_arm(Direction dir);

/// Non-reciprocal 45 degree rotator at the source port (same sense in both
/// directions).
Mat2 faraday_45();

/// Reciprocal retarder paired with the rotator above: d -> h forward, so the
/// forward composite passes h unchanged; the return composite rotates h -> v.
Mat2 half_wave_source(Direction dir);

/// Amplitude reaching detector 1 from light re-entering the source port.
/// The return composite turns h into v, which the source-side splitter
/// reflects onto the detector: a lossless relabeling for h-polarized input.
Complex source_port_spcm1_amplitude(const Jones& port_light);

/// The unrotated probe leaving the interferometer: the early bin carries h,
/// the late (reflected, factor i) bin carries v, each with half the weight.
TimeBinnedState source_superposition();

/// Probe as transmitted toward Alice: cell rotations applied per bin.
///   bin 0 = [cos a, sin a]/sqrt2,  bin 1 = i [-sin b, cos b]/sqrt2.
TimeBinnedState prepare_probe(PcAngle prep_early, PcAngle prep_late);

/// Single-bin action of the polarization-switching phase gate:
///   [a, b] -> [-e^{i phi_v} b, e^{i phi_h} a].
/// The incoming h component leaves as v carrying phi_h; the incoming v
/// component leaves as -h carrying phi_v.
Mat2 phase_gate_cell(BinaryPhase on_h, BinaryPhase on_v);

/// Alice's full reflection: slots (1,2) act on the early bin, (3,4) on the
/// late bin.  Occupied bins outside {0,1} are rejected.
TimeBinnedState alice_phase_gate(const TimeBinnedState& s, const AlicePhases& ph);

/// Bob's return-path cell rotations, early and late bin respectively.
TimeBinnedState apply_measurement_rotations(const TimeBinnedState& s, PcAngle meas_early,
                                            PcAngle meas_late);

/// Uniform 90 degree polarization rotation; the reference mirror-like
/// operator for the symmetry comparison against phase_gate_cell.
Mat2 faraday_mirror();

/// Complex detection amplitudes per (arrival bin, detector) cell after the
/// returning state has re-traversed the interferometer.
struct DetectorAmplitudes {
  std::array<std::array<Complex, 2>, 3> amp{};  // [bin][detector]

  Complex at(int bin, Detector d) const {
    if (bin < 0 || bin > 2) throw std::invalid_argument("DetectorAmplitudes: bin out of range");
    return amp[static_cast<std::size_t>(bin)][d == Detector::spcm1 ? 0 : 1];
  }

  double prob(int bin, Detector d) const { return std::norm(at(bin, d)); }

  double total_prob() const {
    double s = 0.0;
    for (const auto& row : amp)
      for (const auto& a : row) s += std::norm(a);
    return s;
  }
};

/// Maps a returning two-bin state onto the six detection cells.
///
/// Per output bin k: the short arm carries the h component of input bin k,
/// the long arm carries the retarded v component of input bin k-1 (one bin of
/// extra delay).  The 50/50 recombination puts the factor i on reflection:
///   detector1(k) = (i * short + long)/sqrt2   (via the source-port relabel)
///   detector2(k) = (short + i * long)/sqrt2
DetectorAmplitudes decode_mzi(const TimeBinnedState& s);

}  // namespace qkd
