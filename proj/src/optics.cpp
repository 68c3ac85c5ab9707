#include "qkd/optics.hpp"

namespace qkd {

Mat2 half_wave_long_arm(Direction) {
  // The stated element rules (h -> v out, v -> -h back) share one matrix.
  return {Complex(0.0), Complex(-1.0), Complex(1.0), Complex(0.0)};
}

Mat2 faraday_45() { return Mat2::rotation(PcAngle(1)); }

Mat2 half_wave_source(Direction dir) {
  return dir == Direction::forward ? Mat2::rotation(PcAngle(-1)) : Mat2::rotation(PcAngle(1));
}

Complex source_port_spcm1_amplitude(const Jones& port_light) {
  const Jones routed = faraday_45().apply(half_wave_source(Direction::returning).apply(port_light));
  return routed.v;  // v reflects off the source-side polarizing splitter
}

TimeBinnedState source_superposition() {
  const Jones in = jones_h();
  // 50/50 split: the transmitted half stays in the short arm; the reflected
  // half (factor i) takes the long arm, is rotated h -> v, and exits one bin
  // late.
  const TimeBinnedState short_arm = TimeBinnedState::single(0, Jones{in.h * kInvSqrt2, 0.0});
  const Jones long_pol =
      half_wave_long_arm(Direction::forward).apply(Jones{in.h * kImag * kInvSqrt2, 0.0});
  return short_arm.merged_with(TimeBinnedState::single(1, long_pol));
}

TimeBinnedState prepare_probe(PcAngle prep_early, PcAngle prep_late) {
  TimeBinnedState s = source_superposition();
  s = s.with_bin_unitary(0, Mat2::rotation(prep_early));
  s = s.with_bin_unitary(1, Mat2::rotation(prep_late));
  return s;
}

Mat2 phase_gate_cell(BinaryPhase on_h, BinaryPhase on_v) {
  return {Complex(0.0), Complex(-on_v.unit_real()), Complex(on_h.unit_real()), Complex(0.0)};
}

TimeBinnedState alice_phase_gate(const TimeBinnedState& s, const AlicePhases& ph) {
  if (!s.occupies_only(1))
    throw std::invalid_argument("alice_phase_gate: state occupies a bin outside {0,1}");
  TimeBinnedState out = s;
  out = out.with_bin_unitary(0, phase_gate_cell(ph.early_h, ph.early_v));
  out = out.with_bin_unitary(1, phase_gate_cell(ph.late_h, ph.late_v));
  return out;
}

TimeBinnedState apply_measurement_rotations(const TimeBinnedState& s, PcAngle meas_early,
                                            PcAngle meas_late) {
  TimeBinnedState out = s;
  out = out.with_bin_unitary(0, Mat2::rotation(meas_early));
  out = out.with_bin_unitary(1, Mat2::rotation(meas_late));
  return out;
}

Mat2 faraday_mirror() { return Mat2::rotation(PcAngle(2)); }

DetectorAmplitudes decode_mzi(const TimeBinnedState& s) {
  if (!s.occupies_only(1))
    throw std::invalid_argument("decode_mzi: state occupies a bin outside {0,1}");
  DetectorAmplitudes out;
  const Mat2 retarder = half_wave_long_arm(Direction::returning);
  for (int k = 0; k <= 2; ++k) {
    // Short arm: h component of bin k arrives on time.
    const Complex short_arm = (k <= 1) ? s.bin(k).h : Complex(0.0);
    // Long arm: v component of bin k-1, retarded to -h, one bin late.
    Complex long_arm{0.0};
    if (k >= 1) long_arm = retarder.apply(Jones{0.0, s.bin(k - 1).v}).h;
    const Complex to_source_port = (kImag * short_arm + long_arm) * kInvSqrt2;
    const Complex to_open_port = (short_arm + kImag * long_arm) * kInvSqrt2;
    out.amp[static_cast<std::size_t>(k)][0] =
        source_port_spcm1_amplitude(Jones{to_source_port, 0.0});
    out.amp[static_cast<std::size_t>(k)][1] = to_open_port;
  }
  return out;
}

}  // namespace qkd
