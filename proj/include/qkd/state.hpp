#pragma once

#include <complex>
#include <map>

#include "qkd/types.hpp"

namespace qkd {

using Complex = std::complex<double>;

inline constexpr Complex kImag{0.0, 1.0};

/// Polarization amplitude pair (horizontal, vertical).
struct Jones {
  Complex h{0.0, 0.0};
  Complex v{0.0, 0.0};

  double norm_sq() const { return std::norm(h) + std::norm(v); }

  Jones operator+(const Jones& o) const { return {h + o.h, v + o.v}; }
  Jones operator-(const Jones& o) const { return {h - o.h, v - o.v}; }
  Jones operator*(Complex c) const { return {h * c, v * c}; }

  /// <this|other>.
  Complex dot(const Jones& o) const { return std::conj(h) * o.h + std::conj(v) * o.v; }

  bool approx(const Jones& o, double tol = kTol) const {
    return std::abs(h - o.h) <= tol && std::abs(v - o.v) <= tol;
  }
};

inline Jones operator*(Complex c, const Jones& j) { return j * c; }

inline Jones jones_h() { return {1.0, 0.0}; }
inline Jones jones_v() { return {0.0, 1.0}; }
inline Jones jones_d() { return {kInvSqrt2, kInvSqrt2}; }
inline Jones jones_dbar() { return {kInvSqrt2, -kInvSqrt2}; }

/// 2x2 complex operator on a polarization pair.
struct Mat2 {
  Complex m00{0.0}, m01{0.0}, m10{0.0}, m11{0.0};

  Jones apply(const Jones& j) const {
    return {m00 * j.h + m01 * j.v, m10 * j.h + m11 * j.v};
  }

  Mat2 compose(const Mat2& rhs) const {  // this * rhs
    return {m00 * rhs.m00 + m01 * rhs.m10, m00 * rhs.m01 + m01 * rhs.m11,
            m10 * rhs.m00 + m11 * rhs.m10, m10 * rhs.m01 + m11 * rhs.m11};
  }

  Mat2 adjoint() const {
    return {std::conj(m00), std::conj(m10), std::conj(m01), std::conj(m11)};
  }

  /// Largest entry deviation of U^dagger U from the identity.
  double unitarity_error() const;

  bool is_unitary(double tol = kTol) const { return unitarity_error() <= tol; }

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

  /// Polarization rotation by an arbitrary angle (radians).
  static Mat2 rotation(double radians);

  /// Rotation with table-exact entries for the discrete cell settings.
  static Mat2 rotation(PcAngle a) {
    return {Complex(a.cos()), Complex(-a.sin()), Complex(a.sin()), Complex(a.cos())};
  }
};

/// Single-photon polarization amplitudes spread over discrete arrival bins.
/// Bin indices count delay steps relative to the earliest possible arrival.
/// An empty state is the vacuum (photon lost).
class TimeBinnedState {
 public:
  TimeBinnedState() = default;

  /// State occupying one bin.  The amplitude pair may be sub-normalized but
  /// never more than unit norm.
  static TimeBinnedState single(int bin, const Jones& pol);

  /// Coherent superposition of two path contributions: amplitudes add per
  /// bin.  The combined state may not exceed unit norm.
  TimeBinnedState merged_with(const TimeBinnedState& other) const;

  /// Applies a unitary to one bin, leaving all others untouched.
  TimeBinnedState with_bin_unitary(int bin, const Mat2& u) const;

  /// Applies the same unitary to every occupied bin.
  TimeBinnedState with_all_bins(const Mat2& u) const;

  Jones bin(int idx) const {
    auto it = bins_.find(idx);
    return it == bins_.end() ? Jones{} : it->second;
  }

  bool is_vacuum() const { return bins_.empty(); }

  double total_norm_sq() const {
    double s = 0.0;
    for (const auto& [_, j] : bins_) s += j.norm_sq();
    return s;
  }

  double bin_norm_sq(int idx) const { return bin(idx).norm_sq(); }

  const std::map<int, Jones>& bins() const { return bins_; }

  /// True when every bin holding amplitude lies inside [0, max_bin].
  bool occupies_only(int max_bin) const {
    for (const auto& [idx, j] : bins_)
      if (j.norm_sq() > 0.0 && idx > max_bin) return false;
    return true;
  }

 private:
  std::map<int, Jones> bins_;
};

}  // namespace qkd
