#include <cmath>
#include <set>

#include "doctest.h"
#include "core/rng.hpp"

using namespace psiotdr::rng;

TEST_CASE("philox4x32-10 known answers") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams depend only on seed and shot") {
  ShotStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u32();
    CHECK(x == b.next_u32());
    (void)c;
    (void)d;
  }
  ShotStream e(42, 7), f(42, 8), g(43, 7);
  int same_shot = 0, same_seed = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = e.next_u32();
    same_shot += x == f.next_u32();
    same_seed += x == g.next_u32();
  }
  CHECK(same_shot < 3);
  CHECK(same_seed < 3);
}

TEST_CASE("uniform stays inside the open interval") {
  ShotStream s(1, 0);
  double lo = 1, hi = 0, sum = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("normal, exponential and poisson moments") {
  ShotStream s(9, 3);
  const int n = 200000;
  double m = 0, v = 0, e = 0;
  for (int i = 0; i < n; ++i) {
    const double x = s.normal();
    m += x;
    v += x * x;
    e += s.exponential(4.0);
  }
  CHECK(std::abs(m / n) < 0.01);
  CHECK(v / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(e / n == doctest::Approx(0.25).epsilon(0.01));
  for (double mean : {0.02, 3.5, 29.0, 31.0, 500.0}) {
    double pm = 0, pv = 0;
    const int k = 100000;
    for (int i = 0; i < k; ++i) {
      const double x = static_cast<double>(s.poisson(mean));
      pm += x;
      pv += x * x;
    }
    pm /= k;
    pv = pv / k - pm * pm;
    CAPTURE(mean);
    CHECK(pm == doctest::Approx(mean).epsilon(5 * std::sqrt(mean / k) / mean + 1e-3));
    CHECK(pv == doctest::Approx(mean).epsilon(0.05));
  }
  CHECK(s.poisson(0.0) == 0);
}

TEST_CASE("derived seeds are distinct") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(derive_seed(20240601, i));
  CHECK(seen.size() == 10000);
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}
