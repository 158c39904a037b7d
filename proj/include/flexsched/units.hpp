/* Copyright 2026 The flexsched Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Integer-scaled quantities. All arithmetic on bandwidth, time and routing
// cost is exact; doubles only appear at the input/output boundary.

#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>

namespace flexsched {

template <typename Tag>
class Quantity {
 public:
  using rep = std::int64_t;

  constexpr Quantity() = default;
  constexpr explicit Quantity(rep raw) : raw_(raw) {}

  [[nodiscard]] constexpr rep raw() const { return raw_; }

  constexpr auto operator<=>(const Quantity&) const = default;

  constexpr Quantity& operator+=(Quantity o) {
    raw_ += o.raw_;
    return *this;
  }
  constexpr Quantity& operator-=(Quantity o) {
    raw_ -= o.raw_;
    return *this;
  }
  friend constexpr Quantity operator+(Quantity a, Quantity b) { return a += b; }
  friend constexpr Quantity operator-(Quantity a, Quantity b) { return a -= b; }
  friend constexpr Quantity operator*(rep k, Quantity q) {
    return Quantity(k * q.raw_);
  }
  friend constexpr Quantity operator*(Quantity q, rep k) { return k * q; }

  static constexpr Quantity zero() { return Quantity(0); }
  static constexpr Quantity max() {
    return Quantity(std::numeric_limits<rep>::max());
  }

 private:
  rep raw_ = 0;
};

struct BandwidthTag {};
struct DurationTag {};
struct CostTag {};
struct PayloadTag {};

/// Rate in Mbit/s.
using Bandwidth = Quantity<BandwidthTag>;
/// Time in nanoseconds.
using Duration = Quantity<DurationTag>;
/// Routing cost in units of 1e-9.
using Cost = Quantity<CostTag>;
/// Model payload in Mbit.
using Payload = Quantity<PayloadTag>;

namespace detail {

inline std::int64_t scale_checked(double value, double factor,
                                  const char* what) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument(std::string(what) + " must be finite");
  }
  double scaled = std::round(value * factor);
  if (std::fabs(scaled) > 9.0e18) {
    throw std::invalid_argument(std::string(what) + " out of range");
  }
  return static_cast<std::int64_t>(scaled);
}

// Renders raw / per_unit with six fractional digits. per_unit is a power of
// ten; finer resolutions are rounded half away from zero.
inline std::string fixed6(std::int64_t raw, std::int64_t per_unit) {
  const bool negative = raw < 0;
  std::uint64_t mag = negative ? 0ULL - static_cast<std::uint64_t>(raw)
                               : static_cast<std::uint64_t>(raw);
  const std::uint64_t unit = static_cast<std::uint64_t>(per_unit);
  std::uint64_t whole = mag / unit;
  std::uint64_t frac = mag % unit;
  if (unit <= 1000000ULL) {
    frac *= 1000000ULL / unit;
  } else {
    const std::uint64_t div = unit / 1000000ULL;
    std::uint64_t q = frac / div;
    if ((frac % div) * 2 >= div) ++q;
    frac = q;
    if (frac == 1000000ULL) {
      frac = 0;
      ++whole;
    }
  }
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%llu.%06llu", negative ? "-" : "",
                static_cast<unsigned long long>(whole),
                static_cast<unsigned long long>(frac));
  return buf;
}

}  // namespace detail

inline Bandwidth gbps(double v) {
  return Bandwidth(detail::scale_checked(v, 1e3, "bandwidth"));
}
inline Duration ms(double v) {
  return Duration(detail::scale_checked(v, 1e6, "duration"));
}
inline Cost cost(double v) {
  return Cost(detail::scale_checked(v, 1e9, "cost"));
}
inline Payload gbit(double v) {
  return Payload(detail::scale_checked(v, 1e3, "payload"));
}

inline double to_gbps(Bandwidth b) { return static_cast<double>(b.raw()) / 1e3; }
inline double to_ms(Duration d) { return static_cast<double>(d.raw()) / 1e6; }
inline double to_double(Cost c) { return static_cast<double>(c.raw()) / 1e9; }
inline double to_gbit(Payload p) { return static_cast<double>(p.raw()) / 1e3; }

/// Exact six-decimal rendering, e.g. 100050000 ns -> "100.050000".
inline std::string format_ms(Duration d) { return detail::fixed6(d.raw(), 1000000); }
inline std::string format_gbps(Bandwidth b) { return detail::fixed6(b.raw(), 1000); }

/// Mean of `count` values summing to `sum`, rounded half away from zero to
/// the quantity's resolution.
template <typename Tag>
Quantity<Tag> rounded_mean(Quantity<Tag> sum, std::int64_t count) {
  if (count <= 0) throw std::invalid_argument("rounded_mean: empty sample");
  const std::int64_t q = sum.raw() / count;
  const std::int64_t r = sum.raw() % count;
  if (2 * (r < 0 ? -r : r) >= count) return Quantity<Tag>(q + (sum.raw() < 0 ? -1 : 1));
  return Quantity<Tag>(q);
}

/// Time to push one payload at the reserved rate, rounded to the nearest ns.
inline Duration transmission_time(Payload size, Bandwidth rate) {
  // size[Mbit] / rate[Mbit/s] seconds = size * 1e9 / rate ns
  constexpr std::int64_t kNsPerS = 1000000000;
  if (rate <= Bandwidth::zero()) throw std::invalid_argument("transmission rate must be positive");
  if (size.raw() < 0 || size.raw() > std::numeric_limits<std::int64_t>::max() / kNsPerS) {
    throw std::invalid_argument("payload out of range");
  }
  const std::int64_t num = size.raw() * kNsPerS;
  std::int64_t q = num / rate.raw();
  if ((num % rate.raw()) * 2 >= rate.raw()) ++q;
  return Duration(q);
}

}  // namespace flexsched
