#include "gbs/nielsen.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace gbs {

CoverPath full_path(const GraphOfGroups& g, const OneTurnPath& p) {
  return path_concat(g, path_reverse(g, p.left), p.right);
}

OneTurnPath branches_of(const TrainTrackMap& f, const CoverPath& p) {
  const GraphOfGroups& g = f.graph();
  if (!is_tight(g, p)) throw precondition_error("branches_of: path not tight");
  int where = -1;
  for (int i = 0; i + 1 < p.length(); ++i) {
    TurnOrbit t = f.canonical_turn(edge_reverse(g, p.edges[i]),
                                   p.edges[i + 1]);
    if (!f.turn_table().legal(t)) {
      if (where >= 0)
        throw precondition_error("branches_of: more than one illegal turn");
      where = i;
    }
  }
  if (where < 0)
    throw precondition_error("branches_of: path has no illegal turn");
  OneTurnPath out;
  out.left = path_reverse(g, subpath(g, p, 0, where + 1));
  out.right = subpath(g, p, where + 1, p.length() - where - 1);
  return out;
}

BranchImage branch_image(const TrainTrackMap& f, const CoverPath& left,
                         const CoverPath& right) {
  const GraphOfGroups& g = f.graph();
  CoverPath L = f.map_path(left);
  CoverPath R = f.map_path(right);
  if (!is_tight(g, L) || !is_tight(g, R))
    throw internal_error("branch_image: image of a legal branch backtracks");
  int c = 0;
  int m = std::min(L.length(), R.length());
  while (c < m && L.edges[c] == R.edges[c]) ++c;
  BranchImage out;
  out.cancelled = c;
  out.left = subpath(g, L, c, L.length() - c);
  out.right = subpath(g, R, c, R.length() - c);
  return out;
}

namespace {

// Search g with g * translate(sub) contained in host, both one-turn paths
// aligned at their illegal turns. Proper = forbid equality of both branch
// lengths. Returns (g, swapped).
struct Alignment {
  Word g;
  bool swapped;
};

bool prefix_of(const GraphOfGroups& g, const CoverPath& small,
               const CoverPath& big) {
  (void)g;
  if (small.length() > big.length()) return false;
  if (small.start != big.start) return false;
  for (int i = 0; i < small.length(); ++i)
    if (!(small.edges[i] == big.edges[i])) return false;
  return true;
}

// g * sub.side is a prefix of big, compared edge by edge with early exit.
bool translated_prefix(const GraphOfGroups& g, const Word& tr,
                       const CoverPath& sub, const CoverPath& big) {
  if (sub.length() > big.length()) return false;
  for (int i = 0; i < sub.length(); ++i)
    if (!(act(g, tr, sub.edges[i]) == big.edges[i])) return false;
  return true;
}

std::optional<Alignment> align_into(const TrainTrackMap& f,
                                    const OneTurnPath& sub,
                                    const OneTurnPath& host,
                                    bool proper_only) {
  const GraphOfGroups& g = f.graph();
  // cheap rejects first
  bool fit_straight = sub.left.length() <= host.left.length() &&
                      sub.right.length() <= host.right.length();
  bool fit_swapped = sub.left.length() <= host.right.length() &&
                     sub.right.length() <= host.left.length();
  if (proper_only) {
    fit_straight = fit_straight && !(sub.left.length() == host.left.length() &&
                                     sub.right.length() == host.right.length());
    fit_swapped = fit_swapped && !(sub.left.length() == host.right.length() &&
                                   sub.right.length() == host.left.length());
  }
  if (!fit_straight && !fit_swapped) return std::nullopt;
  if (!(f.canonical_turn(sub.left.edges.front(), sub.right.edges.front()) ==
        f.canonical_turn(host.left.edges.front(), host.right.edges.front())))
    return std::nullopt;
  auto g0 = same_orbit(g, sub.turn_point(), host.turn_point());
  if (!g0) return std::nullopt;
  Word a = point_stabilizer_generator(g, host.turn_point());
  // sweep the stabilizer orbit; the first germs bound the sweep period
  CoverEdge zL = act(g, *g0, sub.left.edges.front());
  CoverEdge zR = act(g, *g0, sub.right.edges.front());
  Word cur = *g0;
  CoverEdge cL = zL, cR = zR;
  for (long long j = 0; j < (1 << 22); ++j) {
    bool straight = fit_straight && cL == host.left.edges.front() &&
                    cR == host.right.edges.front() &&
                    translated_prefix(g, cur, sub.left, host.left) &&
                    translated_prefix(g, cur, sub.right, host.right);
    if (straight) return Alignment{reduce_word(g, cur), false};
    bool swapped = fit_swapped && cL == host.right.edges.front() &&
                   cR == host.left.edges.front() &&
                   translated_prefix(g, cur, sub.left, host.right) &&
                   translated_prefix(g, cur, sub.right, host.left);
    if (swapped) return Alignment{reduce_word(g, cur), true};
    cur = reduce_word(g, concat(g, a, cur));
    cL = act(g, a, cL);
    cR = act(g, a, cR);
    if (cL == zL && cR == zR) break;  // whole stabilizer orbit swept
  }
  return std::nullopt;
}

std::string orbit_key_of(const TrainTrackMap& f, const OneTurnPath& p) {
  return f.path_orbit_key(full_path(f.graph(), p));
}

}  // namespace

std::optional<PinpWitness> pseudo_pinp_witness(const TrainTrackMap& f,
                                               const OneTurnPath& eta,
                                               int pmax, NielsenMemo* memo) {
  const GraphOfGroups& g = f.graph();
  std::string key;
  if (memo) {
    key = path_key(g, full_path(g, eta));
    auto it = memo->pseudo_pinp.find(key);
    if (it != memo->pseudo_pinp.end()) {
      auto [tested, found] = it->second;
      if (found > 0 && found <= pmax) {
        // recompute the instance witness at the known period
        CoverPath L = eta.left, R = eta.right;
        for (int m = 1; m <= found; ++m) {
          BranchImage bi = branch_image(f, L, R);
          L = bi.left;
          R = bi.right;
        }
        if (L.length() == 0 || R.length() == 0)
          throw internal_error("cached pseudo-pINP period is inconsistent");
        auto al = align_into(f, eta, OneTurnPath{L, R}, false);
        if (!al)
          throw internal_error("cached pseudo-pINP witness not recoverable");
        return PinpWitness{found, reduce_word(g, inverse(g, al->g)),
                           al->swapped};
      }
      if (found == 0 && tested >= pmax) return std::nullopt;
    }
  }
  CoverPath L = eta.left, R = eta.right;
  std::optional<PinpWitness> result;
  int legal_at = -1;
  for (int m = 1; m <= pmax; ++m) {
    BranchImage bi = branch_image(f, L, R);
    L = bi.left;
    R = bi.right;
    if (L.length() == 0 || R.length() == 0) {
      legal_at = m;  // image became legal; no later iterate contains eta
      break;
    }
    auto al = align_into(f, eta, OneTurnPath{L, R}, false);
    if (al) {
      // eta subset al->g^-1 * [f^m(eta)]
      result = PinpWitness{m, reduce_word(g, inverse(g, al->g)), al->swapped};
      break;
    }
  }
  if (memo) {
    int tested = result ? result->period
                        : (legal_at > 0 ? std::numeric_limits<int>::max()
                                        : pmax);
    memo->pseudo_pinp[key] = {tested, result ? result->period : 0};
  }
  return result;
}

ClassifyResult classify(const TrainTrackMap& f, const OneTurnPath& gamma,
                        int max_rounds, NielsenMemo* memo) {
  const GraphOfGroups& g = f.graph();
  if (gamma.left.length() == 0 || gamma.right.length() == 0)
    throw precondition_error("classify: a branch is empty");
  if (gamma.left.start != gamma.right.start)
    throw precondition_error("classify: branches start at different points");
  {
    TurnOrbit t =
        f.canonical_turn(gamma.left.edges.front(), gamma.right.edges.front());
    if (f.turn_table().legal(t))
      throw precondition_error("classify: turn at the concatenation is legal");
  }
  std::string key;
  if (memo) {
    key = orbit_key_of(f, gamma);
    auto it = memo->classify_case.find(key);
    if (it != memo->classify_case.end()) {
      // period is re-derivable; cached runs carry case only
      ClassifyResult r;
      r.kind = static_cast<GammaCase>(it->second);
      r.rounds = 0;
      if (r.kind == GammaCase::has_pinp || r.kind == GammaCase::image_has_pinp) {
        // recompute period data below by falling through
      } else {
        return r;
      }
    }
  }
  CoverPath L = gamma.left, R = gamma.right;
  ClassifyResult out;
  for (int n = 0; n <= max_rounds; ++n) {
    if (n > 0) {
      BranchImage bi = branch_image(f, L, R);
      L = bi.left;
      R = bi.right;
    }
    if (L.length() == 0 || R.length() == 0) {
      out.kind = GammaCase::contained;
      out.rounds = n;
      if (memo) memo->classify_case[key.empty() ? orbit_key_of(f, gamma) : key] =
          static_cast<int>(out.kind);
      return out;
    }
    TurnOrbit t = f.canonical_turn(L.edges.front(), R.edges.front());
    if (f.turn_table().legal(t)) {
      out.kind = GammaCase::legal_split;
      out.rounds = n;
      if (memo) memo->classify_case[key.empty() ? orbit_key_of(f, gamma) : key] =
          static_cast<int>(out.kind);
      return out;
    }
    // does [f^n(gamma)] contain a pseudo-pINP with period at most n+1?
    std::optional<PinpWitness> found;
    for (int a = 1; a <= L.length() && !found; ++a) {
      for (int b = 1; b <= R.length() && !found; ++b) {
        OneTurnPath sub{subpath(g, L, 0, a), subpath(g, R, 0, b)};
        found = pseudo_pinp_witness(f, sub, n + 1, memo);
      }
    }
    if (found) {
      int p = found->period;
      // case 3 iff gamma itself contains one with period (at most) p
      std::optional<PinpWitness> own;
      for (int a = 1; a <= gamma.left.length() && !own; ++a)
        for (int b = 1; b <= gamma.right.length() && !own; ++b) {
          OneTurnPath sub{subpath(g, gamma.left, 0, a),
                          subpath(g, gamma.right, 0, b)};
          own = pseudo_pinp_witness(f, sub, p, memo);
        }
      out.kind = own ? GammaCase::has_pinp : GammaCase::image_has_pinp;
      out.period = own ? own->period : p;
      out.witness = own;
      out.rounds = n;
      if (memo) memo->classify_case[key.empty() ? orbit_key_of(f, gamma) : key] =
          static_cast<int>(out.kind);
      return out;
    }
  }
  throw bound_exhausted("classify: exceeded max_rounds without settling");
}

namespace {

// All legal tight paths from the given first germ, of length 1..max_len.
std::vector<CoverPath> legal_extensions(const TrainTrackMap& f,
                                        const CoverEdge& first, int max_len) {
  const GraphOfGroups& g = f.graph();
  std::vector<CoverPath> out;
  std::vector<CoverPath> frontier;
  frontier.push_back(CoverPath{first.origin, {first}});
  out.push_back(frontier.front());
  for (int len = 2; len <= max_len; ++len) {
    std::vector<CoverPath> next;
    for (const CoverPath& p : frontier) {
      CoverPoint tip = edge_endpoint(g, p.edges.back());
      CoverEdge back = edge_reverse(g, p.edges.back());
      for (CoverEdge& d : germs_at(g, tip)) {
        if (d == back) continue;
        if (!f.turn_table().legal(f.canonical_turn(back, d))) continue;
        CoverPath q = p;
        q.edges.push_back(d);
        next.push_back(q);
        out.push_back(std::move(q));
      }
    }
    frontier = std::move(next);
  }
  return out;
}

CoverPoint path_endpoint_of(const GraphOfGroups& g, const CoverPath& p) {
  return path_endpoint(g, p);
}

// Straight-only witness used for endpoint analysis; a swapped witness at
// period p composes to a straight one at period 2p.
std::optional<PinpWitness> straight_witness(const TrainTrackMap& f,
                                            const OneTurnPath& eta,
                                            int pmax) {
  const GraphOfGroups& g = f.graph();
  CoverPath L = eta.left, R = eta.right;
  for (int m = 1; m <= pmax; ++m) {
    BranchImage bi = branch_image(f, L, R);
    L = bi.left;
    R = bi.right;
    if (L.length() == 0 || R.length() == 0) return std::nullopt;
    auto al = align_into(f, eta, OneTurnPath{L, R}, false);
    if (al && !al->swapped)
      return PinpWitness{m, reduce_word(g, inverse(g, al->g)), false};
  }
  return std::nullopt;
}

}  // namespace

// Certified rational bounds on the PF-metric edge lengths (the entries of
// the Perron eigenvector of A^T, normalized by v_0 = 1): iterating
// P = (A^T)^m, v_i/v_0 lies between the min and max of P_ik/P_0k over k.
// The two legal branches of a pINP have equal metric length, so a minimal
// pseudo-pINP hull has branches whose metric lengths differ by less than
// one edge length; this is the eligibility window for L-restarts.
struct MetricBounds {
  std::vector<Rational> lo, hi;
  Rational max_edge_hi{Int(1), Int(1)};

  Rational path_lo(const GraphOfGroups& g, const CoverPath& p) const {
    Rational s{Int(0), Int(1)};
    for (const CoverEdge& d : p.edges) s = s + lo[g.unoriented_index(d.edge)];
    return s;
  }
  Rational path_hi(const GraphOfGroups& g, const CoverPath& p) const {
    Rational s{Int(0), Int(1)};
    for (const CoverEdge& d : p.edges) s = s + hi[g.unoriented_index(d.edge)];
    return s;
  }
  // Could the two branches have equal metric length up to one edge, i.e.
  // could this be a truncation of a minimal pseudo-pINP hull?
  bool balanced(const GraphOfGroups& g, const CoverPath& a,
                const CoverPath& b) const {
    return path_lo(g, a) < path_hi(g, b) + max_edge_hi &&
           path_lo(g, b) < path_hi(g, a) + max_edge_hi;
  }
};

static MetricBounds metric_bounds(const IntMatrix& A) {
  auto pos = positivity_exponent(A);
  if (!pos)
    throw precondition_error("find_all_pinps: transition matrix not primitive");
  int m = *pos + 24;  // extra powers tighten the bounds geometrically
  // B = (A^T)^m with exact integers
  std::vector<std::vector<Int>> B(A.n, std::vector<Int>(A.n, Int(0)));
  for (int i = 0; i < A.n; ++i)
    for (int j = 0; j < A.n; ++j) B[i][j] = A.a[j][i];
  auto mul = [&](const std::vector<std::vector<Int>>& X) {
    std::vector<std::vector<Int>> C(A.n, std::vector<Int>(A.n, Int(0)));
    for (int i = 0; i < A.n; ++i)
      for (int k = 0; k < A.n; ++k)
        for (int j = 0; j < A.n; ++j) C[i][j] += X[i][k] * Int(A.a[j][k]);
    return C;
  };
  for (int s = 1; s < m; ++s) B = mul(B);
  MetricBounds out;
  out.lo.resize(A.n, Rational(Int(1), Int(1)));
  out.hi.resize(A.n, Rational(Int(1), Int(1)));
  for (int i = 0; i < A.n; ++i) {
    Rational lo(B[i][0], B[0][0]), hi(B[i][0], B[0][0]);
    for (int k = 1; k < A.n; ++k) {
      Rational r(B[i][k], B[0][k]);
      if (r < lo) lo = r;
      if (hi < r) hi = r;
    }
    out.lo[i] = lo;
    out.hi[i] = hi;
    if (out.max_edge_hi < hi) out.max_edge_hi = hi;
  }
  return out;
}

PinpSearch find_all_pinps(const TrainTrackMap& f, int max_length,
                          int max_rounds) {
  const GraphOfGroups& g = f.graph();
  NielsenMemo memo;
  // illegal turn orbits with a representative germ pair at the rep vertex
  std::vector<std::pair<CoverEdge, CoverEdge>> illegal;
  for (const TurnInfo& info : f.turn_table().turns()) {
    if (info.legal) continue;
    CoverPoint rep = f.marking().rep_vertex(g, info.turn.vertex);
    illegal.emplace_back(CoverEdge{rep, info.turn.e1, Int(info.turn.r1)},
                         CoverEdge{rep, info.turn.e2, Int(info.turn.r2)});
  }
  PinpSearch out;
  if (illegal.empty()) {
    out.terminal_length = 1;
    return out;  // no illegal turns, no pINPs
  }
  MetricBounds mb = metric_bounds(f.transition_matrix());
  for (int L = 1; L <= max_length; ++L) {
    std::map<std::string, OneTurnPath> candidates;
    for (auto& [d1, d2] : illegal) {
      auto A = legal_extensions(f, d1, L);
      auto B = legal_extensions(f, d2, L);
      for (const CoverPath& a : A)
        for (const CoverPath& b : B) {
          OneTurnPath cand{a, b};
          candidates.emplace(orbit_key_of(f, cand), cand);
        }
    }
    bool frontier_contained = false;
    std::vector<const OneTurnPath*> case3;
    std::vector<int> case3_period;
    // classify in increasing branch size so the case-(1) prune propagates:
    // if a prefix pair splits legally, so does every extension
    std::vector<std::pair<std::pair<int, int>, const std::string*>> order;
    for (auto& [key, cand] : candidates)
      order.push_back(
          {{cand.left.length() + cand.right.length(),
            cand.left.length()},
           &key});
    std::sort(order.begin(), order.end(),
              [](const auto& x, const auto& y) {
                if (x.first != y.first) return x.first < y.first;
                return *x.second < *y.second;
              });
    for (auto& [sz, keyp] : order) {
      (void)sz;
      const OneTurnPath& cand = candidates.at(*keyp);
      bool pruned_legal = false;
      for (int side = 0; side < 2 && !pruned_legal; ++side) {
        const CoverPath& longer = side == 0 ? cand.left : cand.right;
        if (longer.length() < 2) continue;
        OneTurnPath parent{
            side == 0 ? subpath(g, cand.left, 0, cand.left.length() - 1)
                      : cand.left,
            side == 1 ? subpath(g, cand.right, 0, cand.right.length() - 1)
                      : cand.right};
        auto it = memo.classify_case.find(orbit_key_of(f, parent));
        if (it != memo.classify_case.end() &&
            it->second == static_cast<int>(GammaCase::legal_split))
          pruned_legal = true;
      }
      if (pruned_legal) {
        memo.classify_case[*keyp] =
            static_cast<int>(GammaCase::legal_split);
        continue;
      }
      ClassifyResult r = classify(f, cand, max_rounds, &memo);
      if (r.kind == GammaCase::contained) {
        int mx = std::max(cand.left.length(), cand.right.length());
        // A truncation of a bigger minimal pseudo-pINP hull is in case (2)
        // (Lemma, part (iv)) and its branches are metrically balanced within
        // one edge; only such frontier candidates force the window to grow.
        if (mx == L && mb.balanced(g, cand.left, cand.right))
          frontier_contained = true;
      }
      if (r.kind == GammaCase::has_pinp) {
        case3.push_back(&cand);
        case3_period.push_back(r.period);
      }
    }
    if (frontier_contained) {
      if (L == max_length)
        throw bound_exhausted(
            "find_all_pinps: max_L reached while frontier candidates are "
            "still in the swallowing case; increase --max-l");
      continue;
    }
    // collect all pseudo-pINPs inside the case-3 paths and keep minimal ones
    std::map<std::string, std::pair<OneTurnPath, PinpWitness>> collected;
    for (size_t c = 0; c < case3.size(); ++c) {
      const OneTurnPath& gamma = *case3[c];
      int p = case3_period[c];
      std::vector<std::pair<std::pair<int, int>, PinpWitness>> here;
      for (int a = 1; a <= gamma.left.length(); ++a)
        for (int b = 1; b <= gamma.right.length(); ++b) {
          OneTurnPath sub{subpath(g, gamma.left, 0, a),
                          subpath(g, gamma.right, 0, b)};
          auto w = pseudo_pinp_witness(f, sub, p, &memo);
          if (w) here.push_back({{a, b}, *w});
        }
      // componentwise-minimal inside this candidate
      for (auto& [ab, w] : here) {
        bool minimal = true;
        for (auto& [ab2, w2] : here)
          if (ab2 != ab && ab2.first <= ab.first && ab2.second <= ab.second)
            minimal = false;
        if (!minimal) continue;
        OneTurnPath sub{subpath(g, gamma.left, 0, ab.first),
                        subpath(g, gamma.right, 0, ab.second)};
        collected.emplace(orbit_key_of(f, sub), std::make_pair(sub, w));
      }
    }
    // cross-orbit minimality: drop any rep strictly containing a translate
    // of another
    std::vector<std::string> keys;
    for (auto& [k, v] : collected) keys.push_back(k);
    std::set<std::string> dropped;
    for (const std::string& k : keys)
      for (const std::string& k2 : keys) {
        if (k == k2 || dropped.count(k)) continue;
        if (align_into(f, collected.at(k2).first, collected.at(k).first,
                       /*proper_only=*/true))
          dropped.insert(k);
      }
    for (const std::string& k : keys) {
      if (dropped.count(k)) continue;
      auto& [hull, w] = collected.at(k);
      PseudoPinp pp;
      pp.hull = hull;
      std::optional<PinpWitness> sw = w.swapped
                                          ? straight_witness(f, hull, 2 * w.period)
                                          : std::optional<PinpWitness>(w);
      if (!sw)
        throw internal_error("no straight witness for a pseudo-pINP");
      pp.period = sw->period;
      pp.twist = sw->twist;
      // flush test: hull subset twist*[f^p(hull)]; an end is at a vertex
      // exactly when the containment is flush on that side
      CoverPath Lb = hull.left, Rb = hull.right;
      for (int m = 1; m <= pp.period; ++m) {
        BranchImage bi = branch_image(f, Lb, Rb);
        Lb = bi.left;
        Rb = bi.right;
      }
      CoverPath tl = act(g, pp.twist, Lb), tr = act(g, pp.twist, Rb);
      if (!prefix_of(g, hull.left, tl) || !prefix_of(g, hull.right, tr))
        throw internal_error("straight witness does not align");
      pp.left_end_at_vertex = hull.left.length() == tl.length();
      pp.right_end_at_vertex = hull.right.length() == tr.length();
      out.minimal.push_back(std::move(pp));
    }
    out.terminal_length = L;
    return out;
  }
  throw bound_exhausted("find_all_pinps: exceeded max_length");
}

namespace {

struct MarkerRef {
  int orbit;        // unoriented edge orbit index (in the pre-subdivision graph)
  long long key;    // slot position along the oriented rep edge
  Word transporter; // h with h * (instance endpoint) = marker rep point
};

// Find the unique occurrence of `target` (or its reverse) in path F.
std::pair<int, bool> find_slot(const GraphOfGroups& g, const CoverPath& F,
                               const CoverEdge& target) {
  int found = -1;
  bool reversed = false;
  CoverEdge tr = edge_reverse(g, target);
  for (int i = 0; i < F.length(); ++i) {
    if (F.edges[i] == target) {
      if (found >= 0) throw internal_error("slot occurrence not unique");
      found = i;
      reversed = false;
    } else if (F.edges[i] == tr) {
      if (found >= 0) throw internal_error("slot occurrence not unique");
      found = i;
      reversed = true;
    }
  }
  if (found < 0) throw internal_error("slot occurrence not found");
  return {found, reversed};
}

Word phi_iter(const TrainTrackMap& f, const Word& w, int k) {
  return f.phi().apply_iter(f.graph(), w, k);
}

}  // namespace

NielsenAnalysis subdivide_at_pinps(const TrainTrackMap& f,
                                   const PinpSearch& search, int max_rounds) {
  const GraphOfGroups& g = f.graph();
  NielsenAnalysis out{f, {}, search.terminal_length, 1, false};
  if (search.minimal.empty()) return out;

  // common period and composed twists: hull subset twist_k * [f^k(hull)]
  int k = 1;
  for (const PseudoPinp& pp : search.minimal) k = std::lcm(k, pp.period);
  out.common_period = k;
  std::vector<Word> twist_k;
  for (const PseudoPinp& pp : search.minimal) {
    Word t = pp.twist;
    for (int m = 1; m * pp.period < k; ++m)
      t = reduce_word(g, concat(g, t, phi_iter(f, pp.twist, m * pp.period)));
    twist_k.push_back(t);
  }

  // f^k of each oriented rep edge, computed once per needed orbit
  std::map<int, CoverPath> fk_of_rep;
  auto fk_rep = [&](int e) -> const CoverPath& {
    auto it = fk_of_rep.find(e);
    if (it != fk_of_rep.end()) return it->second;
    CoverPath p = f.map_edge(f.marking().rep_edge(g, e));
    for (int m = 1; m < k; ++m) p = f.map_path(p);
    return fk_of_rep.emplace(e, std::move(p)).first->second;
  };

  // markers per pinp side
  struct SideMarker {
    bool at_vertex;
    int orbit = -1;
    long long key = 0;
    Word transporter;  // h with h * (side endpoint) = marker rep point
  };
  std::vector<std::array<SideMarker, 2>> side_markers(search.minimal.size());
  // orbit -> sorted distinct keys
  std::map<int, std::set<long long>> orbit_keys;

  for (size_t i = 0; i < search.minimal.size(); ++i) {
    const PseudoPinp& pp = search.minimal[i];
    for (int side = 0; side < 2; ++side) {
      bool at_vertex = side == 0 ? pp.left_end_at_vertex : pp.right_end_at_vertex;
      SideMarker sm;
      sm.at_vertex = at_vertex;
      if (!at_vertex) {
        const CoverPath& br = side == 0 ? pp.hull.left : pp.hull.right;
        CoverEdge d = br.edges.back();
        int uo = g.unoriented_index(d.edge);
        int rep = g.unoriented_reps()[uo];
        // transport the instance edge to the rep edge (same orientation)
        Word h;
        if (d.edge == rep) {
          h = reduce_word(g, inverse(g, f.edge_transporter(d)));
        } else {
          CoverEdge rev_rep = edge_reverse(g, f.marking().rep_edge(g, rep));
          // both d and rev_rep lie over the non-rep orientation
          Word hd = f.edge_transporter(d);
          Word hr = f.edge_transporter(rev_rep);
          h = reduce_word(g, concat(g, hr, inverse(g, hd)));
        }
        // witness of the marker point: fixed by twist_k o f^k; transported
        Word u = twist_k[i];
        Word u_rep = reduce_word(
            g, concat(g, concat(g, h, u), phi_iter(f, inverse(g, h), k)));
        // f^k maps the rep edge monotonically onto F; the marker's slot is
        // the unique geometric occurrence of u_rep^{-1} * E inside F, and
        // slot order equals position order along the edge. Equal slots force
        // equal points (unique fixed point of the expanding affine branch).
        const CoverPath& F = fk_rep(rep);
        CoverEdge target = act(g, reduce_word(g, inverse(g, u_rep)),
                               f.marking().rep_edge(g, rep));
        sm.key = find_slot(g, F, target).first;
        sm.orbit = uo;
        sm.transporter = h;
        orbit_keys[uo].insert(sm.key);
      }
      side_markers[i][side] = std::move(sm);
    }
  }

  if (orbit_keys.empty()) {
    // every endpoint is already a vertex; realize pINPs directly
    for (size_t i = 0; i < search.minimal.size(); ++i) {
      const PseudoPinp& pp = search.minimal[i];
      CoverPoint a = path_endpoint_of(g, pp.hull.left);
      CoverPoint b = path_endpoint_of(g, pp.hull.right);
      CoverPath path = geodesic(g, a, b);
      out.pinps.push_back(EdgePinp{path, 0, Word{}, false});
    }
  } else {
    out.subdivided = true;
  }

  // nothing to subdivide: fill identities and return
  const TrainTrackMap* cur_map = &f;
  TrainTrackMap subdivided_map = f;  // replaced below when subdividing

  if (out.subdivided) {
    // ---- build the subdivided graph by chaining subdivide_edge ----
    struct Step {
      Subdivision sub;
    };
    GraphOfGroups curg = g;
    std::vector<Subdivision> steps;
    // per subdivided orbit: ids of the new vertices and chain edges in order
    std::map<int, std::vector<std::string>> orbit_vertex_ids;
    std::map<int, std::vector<std::string>> orbit_chain_ids;
    for (auto& [uo, keys] : orbit_keys) {
      int rep_old = g.unoriented_reps()[uo];
      int rep_cur = curg.edge_index(g.edge_id(rep_old));
      Subdivision sub =
          subdivide_edge(curg, rep_cur, static_cast<int>(keys.size()));
      std::vector<std::string> ids, chain;
      for (int v : sub.new_vertices) ids.push_back(sub.graph.vertex_id(v));
      for (int e2 : sub.new_edges_forward) chain.push_back(sub.graph.edge_id(e2));
      orbit_vertex_ids[uo] = ids;
      orbit_chain_ids[uo] = chain;
      curg = sub.graph;
      steps.push_back(std::move(sub));
    }
    const GraphOfGroups gf = curg;

    auto rw = [&](Word w) {
      const GraphOfGroups* cur = &g;
      for (const Subdivision& st : steps) {
        w = st.rewrite.apply(*cur, st.graph, w);
        cur = &st.graph;
      }
      return w;
    };
    auto uw = [&](Word w) {
      for (int i = static_cast<int>(steps.size()) - 1; i >= 0; --i) {
        const GraphOfGroups& src = steps[i].graph;
        const GraphOfGroups& dst = i == 0 ? g : steps[i - 1].graph;
        w = steps[i].unrewrite.apply(src, dst, w);
      }
      return w;
    };

    // new marking: rewritten base paths for old vertices, chain prefixes for
    // the subdivision vertices
    Marking nm;
    nm.basepoint = f.marking().basepoint;
    nm.base_paths.assign(gf.num_vertices(), Word{});
    for (int v = 0; v < g.num_vertices(); ++v)
      nm.base_paths[gf.vertex_index(g.vertex_id(v))] =
          rw(f.marking().base_paths[v]);
    // marker key -> new vertex index, and the chain data per orbit
    std::map<int, std::vector<int>> orbit_new_vertices;
    std::map<std::pair<int, long long>, int> marker_vertex;
    for (auto& [uo, keys] : orbit_keys) {
      std::vector<int> nv;
      for (const std::string& id : orbit_vertex_ids[uo])
        nv.push_back(gf.vertex_index(id));
      orbit_new_vertices[uo] = nv;
      int rep_old = g.unoriented_reps()[uo];
      Word base = rw(f.marking().base_paths[g.origin(rep_old)]);
      const std::vector<std::string>& chain = orbit_chain_ids[uo];
      int idx = 0;
      for (long long key : keys) {
        Word w = base;
        for (int c = 0; c <= idx; ++c)
          w.syls.push_back({gf.edge_index(chain[c]), Int(0)});
        int nvtx = nv[idx];
        nm.base_paths[nvtx] = w;
        marker_vertex[{uo, key}] = nvtx;
        ++idx;
      }
    }

    // the induced automorphism on the subdivided graph
    std::vector<Word> vi, ei, vii, eii;
    for (int v = 0; v < gf.num_vertices(); ++v) {
      Word lv = nm.vertex_loop(gf, v, Int(1));
      vi.push_back(reduce_word(gf, rw(f.phi().apply(g, uw(lv)))));
      vii.push_back(reduce_word(gf, rw(f.phi_inverse().apply(g, uw(lv)))));
    }
    for (int e = 0; e < gf.num_edges(); ++e) {
      Word le = nm.edge_loop(gf, e);
      ei.push_back(reduce_word(gf, rw(f.phi().apply(g, uw(le)))));
      eii.push_back(reduce_word(gf, rw(f.phi_inverse().apply(g, uw(le)))));
    }
    Automorphism phi2(gf, nm, vi, ei), phi2i(gf, nm, vii, eii);

    // vertex images: old vertices transport; new vertices via the image
    // pINP correspondence
    std::vector<CoverPoint> vimgs(gf.num_vertices());
    for (int v = 0; v < g.num_vertices(); ++v) {
      CoverPoint y = f.map_point(f.marking().rep_vertex(g, v));
      vimgs[gf.vertex_index(g.vertex_id(v))] = make_point(gf, rw(y.path));
    }

    // image link: [f(hull_i)] hosts exactly one rep translate
    struct Link {
      int rep;
      Word w;
      bool swapped;
    };
    std::vector<Link> link(search.minimal.size());
    for (size_t i = 0; i < search.minimal.size(); ++i) {
      CoverPath q = f.map_path_tight(full_path(g, search.minimal[i].hull));
      OneTurnPath Q = branches_of(f, q);
      std::optional<Link> got;
      for (size_t m = 0; m < search.minimal.size(); ++m) {
        auto al = align_into(f, search.minimal[m].hull, Q, false);
        if (al) {
          if (got) throw internal_error("ambiguous pINP image link");
          got = Link{static_cast<int>(m), al->g, al->swapped};
        }
      }
      if (!got) throw internal_error("pINP image is not in the computed set");
      link[i] = *got;
    }

    // new-tree endpoint of pinp i on a given side
    auto endpoint_new = [&](int i, int side) -> CoverPoint {
      const PseudoPinp& pp = search.minimal[i];
      const SideMarker& sm = side_markers[i][side];
      const CoverPath& br = side == 0 ? pp.hull.left : pp.hull.right;
      if (sm.at_vertex) {
        CoverPoint x = path_endpoint_of(g, br);
        return make_point(gf, rw(x.path));
      }
      int nvtx = marker_vertex.at({sm.orbit, sm.key});
      // marker rep point = sm.transporter * endpoint; so endpoint =
      // transporter^{-1} * rep point
      Word back = rw(reduce_word(g, inverse(g, sm.transporter)));
      return act(gf, back, make_point(gf, nm.base_paths[nvtx]));
    };

    // images of the new vertices: the rep marker is transporter * (instance
    // endpoint), and f(instance endpoint) is the matching endpoint of the
    // image pINP, so f(rep marker) = phi(transporter) * link.w * endpoint.
    for (size_t i = 0; i < search.minimal.size(); ++i) {
      for (int side = 0; side < 2; ++side) {
        const SideMarker& sm = side_markers[i][side];
        if (sm.at_vertex) continue;
        const Link& lk = link[i];
        int side2 = lk.swapped ? 1 - side : side;
        Word mover = reduce_word(
            g, concat(g, f.phi().apply(g, sm.transporter), lk.w));
        CoverPoint target =
            act(gf, rw(mover), endpoint_new(lk.rep, side2));
        int nvtx = marker_vertex.at({sm.orbit, sm.key});
        vimgs[nvtx] = target;
      }
    }

    // edge images: the whole map is determined by the vertex images, since
    // every edge maps to the geodesic between its endpoint images
    auto map_point_raw = [&](const CoverPoint& x) {
      int v = quotient_vertex(gf, x);
      Word h = reduce_word(
          gf, concat(gf, nm.base_paths[v], inverse(gf, x.path)));
      return act(gf, phi2.apply(gf, inverse(gf, h)), vimgs[v]);
    };
    std::map<int, CoverPath> eimgs;
    for (int e : gf.unoriented_reps()) {
      CoverEdge rep = nm.rep_edge(gf, e);
      CoverPoint a = vimgs[gf.origin(e)];
      CoverPoint b = map_point_raw(edge_endpoint(gf, rep));
      CoverPath geo = geodesic(gf, a, b);
      if (geo.edges.empty())
        throw internal_error("subdivision produced an edge with point image");
      eimgs[e] = geo;
    }
    subdivided_map = TrainTrackMap(gf, nm, phi2, phi2i, vimgs, eimgs);
    cur_map = &subdivided_map;

    // realize every pINP as an edge path in the new tree
    for (size_t i = 0; i < search.minimal.size(); ++i) {
      CoverPoint a = endpoint_new(static_cast<int>(i), 0);
      CoverPoint b = endpoint_new(static_cast<int>(i), 1);
      CoverPath path = geodesic(gf, a, b);
      out.pinps.push_back(EdgePinp{path, 0, Word{}, false});
    }
  }

  // exact Nielsen identities [f^p(eta)] = twist * eta
  const TrainTrackMap& fm = *cur_map;
  const GraphOfGroups& gm = fm.graph();
  for (EdgePinp& ep : out.pinps) {
    CoverPath p = ep.path;
    bool done = false;
    for (int m = 1; m <= std::max(2 * out.common_period, 2) && !done; ++m) {
      p = fm.map_path_tight(p);
      CoverPoint a = p.start, b = path_endpoint(gm, p);
      CoverPoint x = ep.path.start, y = path_endpoint(gm, ep.path);
      if (auto w = pair_same_orbit(gm, x, y, a, b)) {
        ep.period = m;
        ep.twist = *w;
        ep.reversed = false;
        done = true;
      } else if (auto w2 = pair_same_orbit(gm, y, x, a, b)) {
        ep.period = m;
        ep.twist = *w2;
        ep.reversed = true;
        done = true;
      }
    }
    if (!done)
      throw internal_error(
          "post-subdivision pINP did not close up under iteration");
  }
  (void)max_rounds;
  out.map = *cur_map;
  return out;
}

NielsenAnalysis nielsen_analysis(const TrainTrackMap& f, int max_length,
                                 int max_rounds) {
  PinpSearch s = find_all_pinps(f, max_length, max_rounds);
  return subdivide_at_pinps(f, s, max_rounds);
}

}  // namespace gbs
