#include "qkd/state.hpp"

#include <cmath>

namespace qkd {

double Mat2::unitarity_error() const {
  const Mat2 g = adjoint().compose(*this);
  double err = 0.0;
  err = std::max(err, std::abs(g.m00 - Complex(1.0)));
  err = std::max(err, std::abs(g.m11 - Complex(1.0)));
  err = std::max(err, std::abs(g.m01));
  err = std::max(err, std::abs(g.m10));
  return err;
}

Mat2 Mat2::rotation(double radians) {
  const double c = std::cos(radians);
  const double s = std::sin(radians);
  return {Complex(c), Complex(-s), Complex(s), Complex(c)};
}

TimeBinnedState TimeBinnedState::single(int bin, const Jones& pol) {
  if (bin < 0) throw std::invalid_argument("TimeBinnedState: negative bin index");
  if (pol.norm_sq() > 1.0 + kTol)
    throw std::invalid_argument("TimeBinnedState: amplitudes exceed unit norm");
  TimeBinnedState s;
  s.bins_[bin] = pol;
  return s;
}

TimeBinnedState TimeBinnedState::merged_with(const TimeBinnedState& other) const {
  TimeBinnedState out = *this;
  for (const auto& [idx, j] : other.bins_) {
    auto it = out.bins_.find(idx);
    if (it == out.bins_.end())
      out.bins_[idx] = j;
    else
      it->second = it->second + j;
  }
  if (out.total_norm_sq() > 1.0 + kTol)
    throw std::invalid_argument("merged_with: combined state exceeds unit norm");
  return out;
}

TimeBinnedState TimeBinnedState::with_bin_unitary(int bin, const Mat2& u) const {
  if (bin < 0) throw std::invalid_argument("with_bin_unitary: negative bin index");
  if (!u.is_unitary())
    throw std::invalid_argument("with_bin_unitary: operator is not unitary");
  TimeBinnedState out = *this;
  auto it = out.bins_.find(bin);
  if (it != out.bins_.end()) it->second = u.apply(it->second);
  return out;
}

TimeBinnedState TimeBinnedState::with_all_bins(const Mat2& u) const {
  if (!u.is_unitary())
    throw std::invalid_argument("with_all_bins: operator is not unitary");
  TimeBinnedState out = *this;
  for (auto& [_, j] : out.bins_) j = u.apply(j);
  return out;
}

}  // namespace qkd
