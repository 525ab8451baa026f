#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gbs/matrix.hpp"

using namespace gbs;

namespace {

IntMatrix make(std::vector<std::vector<long long>> a) {
  IntMatrix m;
  m.n = static_cast<int>(a.size());
  m.a = std::move(a);
  return m;
}

}  // namespace

TEST_CASE("irreducibility basics") {
  CHECK(is_irreducible(make({{1, 1}, {1, 0}})).irreducible);
  auto r = is_irreducible(make({{1, 0}, {1, 1}}));
  CHECK_FALSE(r.irreducible);
  REQUIRE(r.invariant_block.size() == 1);
  // column 0 maps into {0,1}; column 1 maps into {1}: J = {1}
  CHECK(r.invariant_block[0] == 1);
  CHECK(is_irreducible(make({{2}})).irreducible);
  CHECK_FALSE(is_irreducible(make({{0}})).irreducible);
}

TEST_CASE("primitivity: aperiodicity test vs examples") {
  CHECK(is_primitive(make({{1, 1}, {1, 0}})));
  CHECK_FALSE(is_primitive(make({{0, 1}, {1, 0}})));
  CHECK_FALSE(is_primitive(make({{1, 0}, {0, 1}})));
  CHECK(is_primitive(make({{2}})));
}

TEST_CASE("pf_is_one on irreducible integer matrices") {
  CHECK(pf_is_one(make({{0, 1}, {1, 0}})));
  CHECK(pf_is_one(make({{1}})));
  CHECK_FALSE(pf_is_one(make({{1, 1}, {1, 0}})));
  CHECK_FALSE(pf_is_one(make({{2}})));
  CHECK_THROWS_AS(pf_is_one(make({{1, 0}, {1, 1}})), precondition_error);
  // row-sum growth confirms lambda > 1 for the golden matrix
  IntMatrix A = make({{1, 1}, {1, 0}});
  IntMatrix P = A;
  long long prev = 2;
  for (int i = 0; i < 6; ++i) P = matmul(P, A);
  long long total = P.a[0][0] + P.a[0][1] + P.a[1][0] + P.a[1][1];
  CHECK(total > prev);
}

TEST_CASE("primitivity agrees with Wielandt powering, exhaustive supports") {
  // all support patterns for n <= 3 and sampled entry values {1,2}
  for (int n = 1; n <= 3; ++n) {
    int cells = n * n;
    for (int mask = 0; mask < (1 << cells); ++mask) {
      IntMatrix A = IntMatrix::zero(n);
      for (int c = 0; c < cells; ++c)
        if (mask & (1 << c)) A.a[c / n][c % n] = 1 + (c % 2);
      CHECK(is_primitive(A) == is_primitive_wielandt(A));
    }
  }
}

TEST_CASE("A(f)^k multiplication sanity") {
  IntMatrix A = make({{1, 1}, {1, 0}});
  IntMatrix A2 = matmul(A, A);
  CHECK(A2 == make({{2, 1}, {1, 1}}));
}
