#pragma once

#include <vector>

#include "qkd/optics.hpp"
#include "qkd/rng.hpp"

namespace qkd {

/// Per-leg fiber model.  Loss is sampled per pass; misalignment is a residual
/// polarization rotation the probe picks up entering and leaving the remote
/// station; dark counts fire independently in every gated detection cell.
struct ChannelParams {
  double transmittance_per_leg = 1.0;  // (0, 1]
  double misalignment_rad = 0.0;
  double dark_count_prob = 0.0;  // per cell, [0, 1)

  void validate() const {
    if (!(transmittance_per_leg > 0.0) || transmittance_per_leg > 1.0)
      throw std::invalid_argument("ChannelParams: transmittance must lie in (0, 1]");
    if (dark_count_prob < 0.0 || dark_count_prob >= 1.0)
      throw std::invalid_argument("ChannelParams: dark count probability must lie in [0, 1)");
  }
};

enum class EveVariant : std::uint8_t { off, per_bin_polarization, time_pol_projective };
enum class EveLeg : std::uint8_t { bob_to_alice, alice_to_bob, both };

/// Intercept-resend adversary.
///   per_bin_polarization: projective arrival-time measurement, then a
///     polarization measurement in a per-photon coin-flipped basis (h/v or
///     d/dbar), resending the observed eigenstate.
///   time_pol_projective: the fixed four-outcome {bin} x {h, v} measurement.
struct EveStrategy {
  EveVariant variant = EveVariant::off;
  EveLeg leg = EveLeg::alice_to_bob;

  bool intercepts_outbound() const {
    return variant != EveVariant::off &&
           (leg == EveLeg::bob_to_alice || leg == EveLeg::both);
  }
  bool intercepts_inbound() const {
    return variant != EveVariant::off &&
           (leg == EveLeg::alice_to_bob || leg == EveLeg::both);
  }
};

/// Photon survives a leg with the given transmittance, otherwise vacuum.
TimeBinnedState apply_loss(const TimeBinnedState& s, double transmittance, SplitMix64& rng);

/// Residual rotation applied to every occupied bin.
TimeBinnedState apply_misalignment(const TimeBinnedState& s, double angle_rad);

/// One measurement branch of an interception: probability of the outcome and
/// the unit-amplitude eigenstate Eve resends.
struct EveOutcome {
  double probability;
  TimeBinnedState resent;
};

/// Exhaustive outcome decomposition of an interception, basis coins included.
/// Probabilities sum to one for any non-vacuum input; zero-probability
/// branches are dropped.  Both the sampled path and the exact enumeration
/// draw from this single decomposition.
std::vector<EveOutcome> eve_outcome_set(const TimeBinnedState& s, EveVariant variant);

/// Samples one interception.  Off is an exact no-op (no randomness consumed).
TimeBinnedState eve_intercept_resend(const TimeBinnedState& s, const EveStrategy& strategy,
                                     SplitMix64& rng);

/// Samples the gated detection window: at most one real click per the cell
/// probabilities, plus independent dark counts.  Exactly one fired cell gives
/// a click event; none gives no_click; more than one gives double_click.
DetectionEvent sample_detection(const DetectorAmplitudes& amps, const ChannelParams& params,
                                SplitMix64& rng);

}  // namespace qkd
