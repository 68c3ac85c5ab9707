#include "qkd/channel.hpp"

#include <array>

namespace qkd {

TimeBinnedState apply_loss(const TimeBinnedState& s, double transmittance, SplitMix64& rng) {
  if (!(transmittance > 0.0) || transmittance > 1.0)
    throw std::invalid_argument("apply_loss: transmittance must lie in (0, 1]");
  if (s.is_vacuum() || transmittance == 1.0) return s;  // exact no-op, no draw
  return rng.bernoulli(transmittance) ? s : TimeBinnedState{};
}

TimeBinnedState apply_misalignment(const TimeBinnedState& s, double angle_rad) {
  if (angle_rad == 0.0) return s;
  return s.with_all_bins(Mat2::rotation(angle_rad));
}

std::vector<EveOutcome> eve_outcome_set(const TimeBinnedState& s, EveVariant variant) {
  if (variant == EveVariant::off)
    throw std::invalid_argument("eve_outcome_set: no measurement for the off strategy");
  const double total = s.total_norm_sq();
  if (total > 1.0 + kTol)
    throw std::invalid_argument("eve_outcome_set: multi-photon input rejected");
  std::vector<EveOutcome> out;
  if (s.is_vacuum()) return out;

  struct BasisPair {
    double coin;
    std::array<Jones, 2> states;
  };
  std::vector<BasisPair> bases;
  if (variant == EveVariant::per_bin_polarization) {
    bases.push_back({0.5, {jones_h(), jones_v()}});
    bases.push_back({0.5, {jones_d(), jones_dbar()}});
  } else {
    bases.push_back({1.0, {jones_h(), jones_v()}});
  }

  for (const auto& [bin, pol] : s.bins()) {
    for (const auto& basis : bases) {
      for (const Jones& eigen : basis.states) {
        const double p = basis.coin * std::norm(eigen.dot(pol)) / total;
        if (p <= 0.0) continue;
        out.push_back({p, TimeBinnedState::single(bin, eigen)});
      }
    }
  }
  return out;
}

TimeBinnedState eve_intercept_resend(const TimeBinnedState& s, const EveStrategy& strategy,
                                     SplitMix64& rng) {
  if (strategy.variant == EveVariant::off) return s;
  if (s.is_vacuum()) return s;
  const auto outcomes = eve_outcome_set(s, strategy.variant);
  std::vector<double> probs;
  probs.reserve(outcomes.size());
  for (const auto& o : outcomes) probs.push_back(o.probability);
  return outcomes[rng.pick(probs)].resent;
}

DetectionEvent sample_detection(const DetectorAmplitudes& amps, const ChannelParams& params,
                                SplitMix64& rng) {
  params.validate();
  if (amps.total_prob() > 1.0 + kTol)
    throw std::invalid_argument("sample_detection: probabilities exceed one");

  // Cell order: (bin0,d1), (bin0,d2), (bin1,d1), ... fixed for reproducibility.
  std::array<double, 6> probs{};
  for (int bin = 0; bin < 3; ++bin) {
    probs[static_cast<std::size_t>(2 * bin)] = amps.prob(bin, Detector::spcm1);
    probs[static_cast<std::size_t>(2 * bin + 1)] = amps.prob(bin, Detector::spcm2);
  }
  const std::size_t real = rng.pick_with_residual(probs);

  int fired = 0;
  std::size_t fired_cell = 0;
  for (std::size_t cell = 0; cell < 6; ++cell) {
    bool hit = (cell == real);
    if (params.dark_count_prob > 0.0 && rng.bernoulli(params.dark_count_prob)) hit = true;
    if (hit) {
      ++fired;
      fired_cell = cell;
    }
  }
  // A dark count in the same gate as the real click is indistinguishable from
  // it, so only distinct fired cells count as a double click.
  if (fired == 0) return DetectionEvent::none();
  if (fired > 1) return DetectionEvent::doubled();
  return DetectionEvent::click_at(static_cast<int>(fired_cell / 2),
                                  fired_cell % 2 == 0 ? Detector::spcm1 : Detector::spcm2);
}

}  // namespace qkd
