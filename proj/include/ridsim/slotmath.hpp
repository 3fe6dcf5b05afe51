#pragma once

#include <cstdint>
#include <vector>

namespace ridsim {

/// Index of a slot on the discrete timeline. One slot lasts `SlotParams::delta_us`.
using Slot = std::uint64_t;

/// An event recurring every `period_slots`, first at `start_slot`.
struct PeriodicEvent {
  Slot start_slot = 0;
  Slot period_slots = 1;

  /// Same event with `start_slot` reduced modulo the period.
  PeriodicEvent canonical() const;
};

/// Slots at which two coprime periodic events coincide.
struct MatchSet {
  Slot first_match = 0;    // smallest non-negative coincidence slot
  Slot common_period = 0;  // product of the two periods
  Slot horizon = 0;
  std::vector<Slot> matches;  // every coincidence in [0, horizon), ascending
};

/// Multiplicative inverse of `a` modulo `m` via extended Euclid.
/// Throws InvalidModulus if m < 2 and NotCoprime if gcd(a, m) != 1.
std::uint64_t mod_inverse(std::uint64_t a, std::uint64_t m);

/// All slots t in [0, horizon) with t = e1.start (mod e1.period) and
/// t = e2.start (mod e2.period). Periods must be coprime (NotCoprime otherwise).
MatchSet crt_match(PeriodicEvent e1, PeriodicEvent e2, Slot horizon);

/// Integer n >= 1 nearest to `target` that is coprime with `modulus`.
/// Equidistant candidates resolve to the smaller one.
std::uint64_t coprime_approx(std::uint64_t target, std::uint64_t modulus);

}  // namespace ridsim
