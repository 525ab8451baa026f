#ifndef GBS_MATRIX_HPP
#define GBS_MATRIX_HPP

#include <optional>
#include <vector>

#include "gbs/errors.hpp"

namespace gbs {

// Non-negative integer matrix indexed by unoriented edge orbits.
struct IntMatrix {
  int n = 0;
  std::vector<std::vector<long long>> a;

  static IntMatrix zero(int n) {
    return IntMatrix{n, std::vector<std::vector<long long>>(
                            n, std::vector<long long>(n, 0))};
  }
  long long& at(int i, int j) { return a[i][j]; }
  long long at(int i, int j) const { return a[i][j]; }
  bool operator==(const IntMatrix& o) const { return n == o.n && a == o.a; }
};

IntMatrix matmul(const IntMatrix& x, const IntMatrix& y);

struct IrreducibilityResult {
  bool irreducible;
  // When reducible: a proper nonempty J with A_{i,j} = 0 for all i outside J,
  // j in J, i.e. the spanned subforest is f-invariant.
  std::vector<int> invariant_block;
};

// Reachability on the support digraph (arc j -> i iff A_{ij} > 0).
IrreducibilityResult is_irreducible(const IntMatrix& A);

// Irreducible + aperiodic (gcd of support cycle lengths = 1). The Wielandt
// powering bound (n-1)^2 + 1 is the independent oracle in the tests.
bool is_primitive(const IntMatrix& A);

// Support-only powering oracle: some power up to the Wielandt bound is
// entrywise positive.
bool is_primitive_wielandt(const IntMatrix& A);

// Least n >= 1 with A^n entrywise positive (support powering); nullopt if
// none up to the Wielandt bound.
std::optional<int> positivity_exponent(const IntMatrix& A);

// For an irreducible non-negative integer matrix, lambda_PF = 1 iff the
// matrix is a permutation matrix.
bool pf_is_one(const IntMatrix& A);

}  // namespace gbs

#endif  // GBS_MATRIX_HPP
