#include "qkd/types.hpp"

namespace qkd {

MeasurementOption standard_measurement(PcAngle prep_early, PcAngle prep_late) {
  switch (classify(prep_early, prep_late)) {
    case MeasurementClass::c1:
      // Undo the preparation rotations; detection collapses to the middle bin
      // and the detector identity carries the bit.
      return MeasurementOption{prep_early, prep_late};
    case MeasurementClass::c2:
      if (!is_diagonal(prep_early)) {
        // Early bin definite: dump it to the earliest slot as plain h, read
        // the late superposition out by arrival time.
        return MeasurementOption{PcAngle(prep_early.quarter_pi() == 0 ? 2 : 0), PcAngle(1)};
      }
      // Late bin definite: dump it to the latest slot, read the early
      // superposition out by arrival time.
      return MeasurementOption{PcAngle(1), PcAngle(prep_late.quarter_pi() == 0 ? 2 : 0)};
    case MeasurementClass::c3:
    default:
      // Both bins superposed: earliest slot keys on the early phase pair,
      // latest slot on the late phase pair.
      return MeasurementOption{PcAngle(1), PcAngle(1)};
  }
}

std::vector<MeasurementOption> measurement_options(PcAngle prep_early, PcAngle prep_late,
                                                   Mode mode) {
  std::vector<MeasurementOption> out{standard_measurement(prep_early, prep_late)};
  if (mode == Mode::standard) return out;

  // Extended mode adds choices that steer equal-weight amplitudes from both
  // bins into the middle arrival slot, where their interference reads out one
  // cross phase difference at efficiency 1/2.
  switch (classify(prep_early, prep_late)) {
    case MeasurementClass::c1:
      break;
    case MeasurementClass::c2:
      if (!is_diagonal(prep_early)) {
        // meas_late in {0, pi/2} selects which late phase survives into the
        // middle slot; meas_early = pi/4 splits the definite early bin.
        out.push_back(MeasurementOption{PcAngle(1), PcAngle(0)});
        out.push_back(MeasurementOption{PcAngle(1), PcAngle(2)});
      } else {
        out.push_back(MeasurementOption{PcAngle(0), PcAngle(1)});
        out.push_back(MeasurementOption{PcAngle(2), PcAngle(1)});
      }
      break;
    case MeasurementClass::c3:
      // meas_early selects the early phase, meas_late the late phase.
      out.push_back(MeasurementOption{PcAngle(0), PcAngle(0)});
      out.push_back(MeasurementOption{PcAngle(0), PcAngle(2)});
      out.push_back(MeasurementOption{PcAngle(2), PcAngle(0)});
      out.push_back(MeasurementOption{PcAngle(2), PcAngle(2)});
      break;
  }
  return out;
}

}  // namespace qkd
