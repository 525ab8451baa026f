#include "gbs/matrix.hpp"

#include <numeric>
#include <queue>

namespace gbs {

IntMatrix matmul(const IntMatrix& x, const IntMatrix& y) {
  if (x.n != y.n) throw precondition_error("matmul: size mismatch");
  IntMatrix r = IntMatrix::zero(x.n);
  for (int i = 0; i < x.n; ++i)
    for (int k = 0; k < x.n; ++k) {
      if (x.a[i][k] == 0) continue;
      for (int j = 0; j < x.n; ++j) r.a[i][j] += x.a[i][k] * y.a[k][j];
    }
  return r;
}

namespace {

std::vector<std::vector<char>> support(const IntMatrix& A) {
  std::vector<std::vector<char>> s(A.n, std::vector<char>(A.n, 0));
  for (int i = 0; i < A.n; ++i)
    for (int j = 0; j < A.n; ++j) s[i][j] = A.a[i][j] > 0;
  return s;
}

std::vector<std::vector<char>> bmul(const std::vector<std::vector<char>>& x,
                                    const std::vector<std::vector<char>>& y) {
  int n = static_cast<int>(x.size());
  std::vector<std::vector<char>> r(n, std::vector<char>(n, 0));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      if (x[i][k])
        for (int j = 0; j < n; ++j)
          if (y[k][j]) r[i][j] = 1;
  return r;
}

bool all_positive(const std::vector<std::vector<char>>& x) {
  for (const auto& row : x)
    for (char c : row)
      if (!c) return false;
  return true;
}

// Vertices reachable from j along arcs j -> i with A_{ij} > 0, i.e. the edge
// orbits crossed by iterated images of e_j.
std::vector<char> reach_from(const IntMatrix& A, int j0) {
  std::vector<char> seen(A.n, 0);
  std::queue<int> q;
  seen[j0] = 1;
  q.push(j0);
  while (!q.empty()) {
    int j = q.front();
    q.pop();
    for (int i = 0; i < A.n; ++i)
      if (A.a[i][j] > 0 && !seen[i]) {
        seen[i] = 1;
        q.push(i);
      }
  }
  return seen;
}

}  // namespace

IrreducibilityResult is_irreducible(const IntMatrix& A) {
  if (A.n == 0) throw precondition_error("is_irreducible: empty matrix");
  for (int j = 0; j < A.n; ++j) {
    std::vector<char> seen = reach_from(A, j);
    bool all = true;
    for (char c : seen) all = all && c;
    if (!all) {
      // The reachable set of j is closed under taking images:
      // f(span J) stays in span J.
      std::vector<int> J;
      for (int i = 0; i < A.n; ++i)
        if (seen[i]) J.push_back(i);
      return {false, J};
    }
    // A 1x1 matrix must have a positive entry to count as irreducible.
    if (A.n == 1 && A.a[0][0] == 0) return {false, {}};
  }
  return {true, {}};
}

bool is_primitive(const IntMatrix& A) {
  auto irr = is_irreducible(A);
  if (!irr.irreducible) return false;
  // Aperiodicity: BFS levels from node 0 in the support digraph; the period
  // is the gcd of level(u) + 1 - level(v) over arcs u -> v.
  std::vector<long long> level(A.n, -1);
  std::queue<int> q;
  level[0] = 0;
  q.push(0);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v = 0; v < A.n; ++v)
      if (A.a[v][u] > 0 && level[v] < 0) {
        level[v] = level[u] + 1;
        q.push(v);
      }
  }
  long long g = 0;
  for (int u = 0; u < A.n; ++u)
    for (int v = 0; v < A.n; ++v)
      if (A.a[v][u] > 0) g = std::gcd(g, level[u] + 1 - level[v]);
  return g == 1;
}

std::optional<int> positivity_exponent(const IntMatrix& A) {
  auto s = support(A);
  auto p = s;
  long long bound = static_cast<long long>(A.n - 1) * (A.n - 1) + 1;
  for (long long k = 1; k <= bound; ++k) {
    if (all_positive(p)) return static_cast<int>(k);
    p = bmul(p, s);
  }
  if (all_positive(p)) return static_cast<int>(bound) + 1;
  return std::nullopt;
}

bool is_primitive_wielandt(const IntMatrix& A) {
  return positivity_exponent(A).has_value();
}

bool pf_is_one(const IntMatrix& A) {
  auto irr = is_irreducible(A);
  if (!irr.irreducible)
    throw precondition_error("pf_is_one: matrix is reducible");
  for (int i = 0; i < A.n; ++i) {
    long long row = 0, col = 0;
    for (int j = 0; j < A.n; ++j) {
      if (A.a[i][j] < 0 || A.a[j][i] < 0)
        throw precondition_error("pf_is_one: negative entry");
      row += A.a[i][j];
      col += A.a[j][i];
    }
    if (row != 1 || col != 1) return false;
  }
  return true;
}

}  // namespace gbs
