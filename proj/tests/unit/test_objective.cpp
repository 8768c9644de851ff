#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ilsynth/objective.hpp"
#include "support.hpp"

using namespace ilsynth;
using namespace ilsynth::build;

namespace {

constexpr Objective kAll[] = {Objective::LogArith, Objective::Arith, Objective::Hamming, Objective::Xor};

// Formula-level reference, written directly from the definitions.
double ref_distance(Objective obj, const std::vector<Word>& a, const std::vector<Word>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long long d = std::llabs(static_cast<long long>(static_cast<std::int32_t>(a[i])) -
                                   static_cast<long long>(static_cast<std::int32_t>(b[i])));
    switch (obj) {
      case Objective::LogArith:
        sum += std::log2(1.0 + static_cast<double>(d));
        break;
      case Objective::Arith:
        sum += static_cast<double>(d);
        break;
      case Objective::Hamming: {
        Word x = a[i] ^ b[i];
        int bits = 0;
        for (; x; x &= x - 1) ++bits;
        sum += bits;
        break;
      }
      case Objective::Xor:
        sum += static_cast<double>(a[i] ^ b[i]);
        break;
    }
  }
  return sum;
}

}  // namespace

TEST_CASE("distance of outputs (1,1) against (1,-1)") {
  const std::vector<Word> cand{1, 1}, target{1, 0xFFFFFFFFu};
  CHECK(distance(Objective::LogArith, cand, target) == doctest::Approx(std::log2(3.0)));
  CHECK(distance(Objective::LogArith, cand, target) == doctest::Approx(1.585).epsilon(1e-3));
  CHECK(distance(Objective::Arith, cand, target) == 2.0);
  CHECK(distance(Objective::Hamming, cand, target) == 31.0);
  CHECK(distance(Objective::Xor, cand, target) == static_cast<double>(0xFFFFFFFEu));
}

TEST_CASE("full bit flip under Hamming") {
  const std::vector<Word> a{0}, b{0xFFFFFFFFu};
  CHECK(distance(Objective::Hamming, a, b) == 32.0);
}

TEST_CASE("arithmetic distance does not wrap") {
  const std::vector<Word> a{0x7FFFFFFFu}, b{0x80000000u};
  CHECK(distance(Objective::Arith, a, b) == 4294967295.0);
}

TEST_CASE("names") {
  for (Objective o : kAll) CHECK(objective_from_name(objective_name(o)) == o);
  CHECK(objective_from_name("LogArith") == Objective::LogArith);
  CHECK_THROWS_AS(objective_from_name("cosine"), PreconditionError);
}

TEST_CASE("expression distance against a sample set") {
  const SampleSet s(2, {{1, 2}, {3, 4}}, {3, 7});
  for (Objective o : kAll) CHECK(distance(o, add(v(0), v(1)), s) == 0.0);
  CHECK(distance(Objective::Arith, sub(v(0), v(1)), s) == 4.0 + 8.0);
  Scorer score(s, Objective::Arith);
  CHECK(score(mul(v(0), v(1))) == 1.0 + 5.0);
  CHECK(score.last_outputs()[1] == 12u);
}

TEST_CASE("distances match the formula reference") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t n = 1 + rng() % 20;
    std::vector<Word> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = testsupport::random_word(rng);
      b[i] = testsupport::random_word(rng);
    }
    for (Objective o : kAll) REQUIRE(distance(o, a, b) == doctest::Approx(ref_distance(o, a, b)));
  }
}

TEST_CASE("axioms: non-negative, zero iff equal, permutation invariant, monotone") {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t n = 1 + rng() % 30;
    std::vector<Word> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = testsupport::random_word(rng);
      b[i] = rng() % 3 == 0 ? a[i] : testsupport::random_word(rng);
    }
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Word> pa(n), pb(n);
    for (std::size_t i = 0; i < n; ++i) {
      pa[i] = a[perm[i]];
      pb[i] = b[perm[i]];
    }
    auto a2 = a, b2 = b;
    a2.push_back(testsupport::random_word(rng));
    b2.push_back(testsupport::random_word(rng));
    for (Objective o : kAll) {
      const double d = distance(o, a, b);
      REQUIRE(d >= 0.0);
      REQUIRE((d == 0.0) == (a == b));
      REQUIRE(distance(o, pa, pb) == doctest::Approx(d));
      REQUIRE(distance(o, a2, b2) >= d);
      REQUIRE(distance(o, a, a) == 0.0);
    }
  }
}
