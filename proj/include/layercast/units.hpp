#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>

namespace layercast {

/// Bandwidth in fixed-point tenths of a kbps. All conservation sums are
/// computed on this type, so they are exact and platform independent.
class Bandwidth {
 public:
  constexpr Bandwidth() = default;

  static constexpr Bandwidth from_tenths(std::int64_t tenths) { return Bandwidth(tenths); }

  /// Rounds to the nearest 0.1 kbps.
  static Bandwidth from_kbps(double kbps) {
    return Bandwidth(static_cast<std::int64_t>(std::llround(kbps * kScale)));
  }

  /// Largest representable value not exceeding `kbps`.
  static Bandwidth floor_kbps(double kbps) {
    return Bandwidth(static_cast<std::int64_t>(std::floor(kbps * kScale + 1e-9)));
  }

  constexpr std::int64_t tenths() const { return tenths_; }
  constexpr double kbps() const { return static_cast<double>(tenths_) / kScale; }

  constexpr Bandwidth& operator+=(Bandwidth o) { tenths_ += o.tenths_; return *this; }
  constexpr Bandwidth& operator-=(Bandwidth o) { tenths_ -= o.tenths_; return *this; }
  friend constexpr Bandwidth operator+(Bandwidth a, Bandwidth b) { return a += b; }
  friend constexpr Bandwidth operator-(Bandwidth a, Bandwidth b) { return a -= b; }
  friend constexpr auto operator<=>(Bandwidth, Bandwidth) = default;

  static constexpr std::int64_t kScale = 10;

 private:
  constexpr explicit Bandwidth(std::int64_t tenths) : tenths_(tenths) {}
  std::int64_t tenths_ = 0;
};

constexpr Bandwidth min(Bandwidth a, Bandwidth b) { return a < b ? a : b; }
constexpr Bandwidth max(Bandwidth a, Bandwidth b) { return a < b ? b : a; }

/// Unit prices are positive integers (currency units per kbps).
using Price = std::int64_t;

/// Payment in currency units, scaled like Bandwidth (tenths). Exact.
using Payment = std::int64_t;

constexpr Payment payment_for(Bandwidth granted, Price unit_price) {
  return granted.tenths() * unit_price;
}

}  // namespace layercast
