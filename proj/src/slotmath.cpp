#include "ridsim/slotmath.hpp"

#include <numeric>
#include <string>

#include "ridsim/error.hpp"

namespace ridsim {

namespace {

using u128 = unsigned __int128;

// Inverse used inside the CRT formula, where a modulus of 1 is legal and every
// residue collapses to zero.
std::uint64_t crt_inverse(std::uint64_t a, std::uint64_t m) {
  if (m == 1) {
    return 0;
  }
  return mod_inverse(a, m);
}

}  // namespace

PeriodicEvent PeriodicEvent::canonical() const {
  if (period_slots == 0) {
    throw InvalidArgument("periodic event needs a positive period");
  }
  return PeriodicEvent{start_slot % period_slots, period_slots};
}

std::uint64_t mod_inverse(std::uint64_t a, std::uint64_t m) {
  if (m < 2) {
    throw InvalidModulus("modulus must be >= 2, got " + std::to_string(m));
  }
  // Extended Euclid on signed 128-bit to keep the Bezout coefficients exact.
  __int128 old_r = static_cast<__int128>(a % m);
  __int128 r = static_cast<__int128>(m);
  __int128 old_s = 1;
  __int128 s = 0;
  while (r != 0) {
    const __int128 q = old_r / r;
    const __int128 next_r = old_r - q * r;
    old_r = r;
    r = next_r;
    const __int128 next_s = old_s - q * s;
    old_s = s;
    s = next_s;
  }
  if (old_r != 1) {
    throw NotCoprime("gcd(" + std::to_string(a) + ", " + std::to_string(m) +
                     ") = " + std::to_string(static_cast<std::uint64_t>(old_r)));
  }
  const __int128 mm = static_cast<__int128>(m);
  __int128 x = old_s % mm;
  if (x < 0) {
    x += mm;
  }
  return static_cast<std::uint64_t>(x);
}

MatchSet crt_match(PeriodicEvent e1, PeriodicEvent e2, Slot horizon) {
  e1 = e1.canonical();
  e2 = e2.canonical();
  const std::uint64_t p1 = e1.period_slots;
  const std::uint64_t p2 = e2.period_slots;
  if (std::gcd(p1, p2) != 1) {
    throw NotCoprime("periods " + std::to_string(p1) + " and " + std::to_string(p2) +
                     " share a factor");
  }
  const u128 common = static_cast<u128>(p1) * p2;
  const u128 term1 = static_cast<u128>(e1.start_slot) * p2 % common * crt_inverse(p2 % p1, p1);
  const u128 term2 = static_cast<u128>(e2.start_slot) * p1 % common * crt_inverse(p1 % p2, p2);
  const Slot first = static_cast<Slot>((term1 % common + term2 % common) % common);

  MatchSet out;
  out.first_match = first;
  out.common_period = static_cast<Slot>(common);
  out.horizon = horizon;
  for (u128 t = first; t < horizon; t += common) {
    out.matches.push_back(static_cast<Slot>(t));
  }
  return out;
}

std::uint64_t coprime_approx(std::uint64_t target, std::uint64_t modulus) {
  if (target == 0) {
    throw InvalidArgument("coprime_approx target must be >= 1");
  }
  for (std::uint64_t d = 0;; ++d) {
    if (d < target && std::gcd(target - d, modulus) == 1) {
      return target - d;
    }
    if (std::gcd(target + d, modulus) == 1) {
      return target + d;
    }
  }
}

}  // namespace ridsim
