#include <doctest.h>

#include <set>

#include "hscg/rng.hpp"

using namespace hscg;

TEST_CASE("same seed, same stream") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
}

TEST_CASE("sample_without_replacement is sorted and distinct") {
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const auto idx = rng.sample_without_replacement(20, 7);
    REQUIRE(idx.size() == 7);
    std::set<int> seen(idx.begin(), idx.end());
    CHECK(seen.size() == 7);
    for (std::size_t i = 1; i < idx.size(); ++i) CHECK(idx[i - 1] < idx[i]);
    for (int v : idx) {
      CHECK(v >= 0);
      CHECK(v < 20);
    }
  }
}

TEST_CASE("full draw covers the index range") {
  Rng rng(9);
  const auto idx = rng.sample_without_replacement(8, 8);
  for (int i = 0; i < 8; ++i) CHECK(idx[i] == i);
}

TEST_CASE("uniform_int covers [0, n) roughly uniformly") {
  Rng rng(77);
  std::vector<int> counts(5, 0);
  const int draws = 50000;
  for (int i = 0; i < draws; ++i) ++counts[rng.uniform_int(5)];
  for (int c : counts) {
    CHECK(c > draws / 5 - 600);
    CHECK(c < draws / 5 + 600);
  }
}

TEST_CASE("normal moments") {
  Rng rng(31);
  double sum = 0.0, sum_sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum_sq += z * z;
  }
  CHECK(sum / n == doctest::Approx(0.0).epsilon(0.02));
  CHECK(sum_sq / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("split streams are reproducible and independent") {
  Rng c = Rng(123).split(1);
  Rng d = Rng(123).split(1);
  CHECK(c.uniform() == d.uniform());

  Rng fresh(123);
  Rng e = Rng(123).split(1);
  bool any_diff = false;
  for (int i = 0; i < 10; ++i)
    if (e.uniform() != fresh.uniform()) any_diff = true;
  CHECK(any_diff);
}
