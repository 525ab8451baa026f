#include "gbs/cover.hpp"

#include <algorithm>
#include <sstream>

namespace gbs {

namespace {
constexpr long long kSweepGuard = 1 << 22;
}

bool CoverEdge::operator<(const CoverEdge& o) const {
  if (edge != o.edge) return edge < o.edge;
  if (germ != o.germ) return germ < o.germ;
  return origin < o.origin;
}

CoverPoint make_point(const GraphOfGroups& g, const Word& path_word) {
  Word nf = normal_form(g, path_word);
  if (nf.syls.empty())
    nf.head = 0;
  else
    nf.syls.back().exp = 0;
  return CoverPoint{std::move(nf)};
}

CoverPoint base_point(const GraphOfGroups& g, int base_vertex) {
  (void)g;
  Word w;
  w.start = base_vertex;
  return CoverPoint{w};
}

int quotient_vertex(const GraphOfGroups& g, const CoverPoint& x) {
  return end_vertex(g, x.path);
}

CoverEdge make_edge(const GraphOfGroups& g, const Word& origin_word, int edge,
                    const Int& germ) {
  Word nf = normal_form(g, origin_word);
  Int trailing = nf.syls.empty() ? nf.head : nf.syls.back().exp;
  if (nf.syls.empty())
    nf.head = 0;
  else
    nf.syls.back().exp = 0;
  if (end_vertex(g, nf) != g.origin(edge))
    throw precondition_error("make_edge: origin word does not end at o(e)");
  CoverEdge d;
  d.origin = CoverPoint{std::move(nf)};
  d.edge = edge;
  d.germ = mod_nonneg(germ + trailing, Int(g.label(edge)));
  return d;
}

Word edge_word(const GraphOfGroups& g, const CoverEdge& d) {
  Word w = d.origin.path;
  if (w.syls.empty())
    w.head += d.germ;
  else
    w.syls.back().exp += d.germ;
  w.syls.push_back({d.edge, Int(0)});
  (void)g;
  return w;
}

CoverPoint edge_endpoint(const GraphOfGroups& g, const CoverEdge& d) {
  return make_point(g, edge_word(g, d));
}

CoverEdge edge_reverse(const GraphOfGroups& g, const CoverEdge& d) {
  return make_edge(g, edge_word(g, d), g.reverse(d.edge), Int(0));
}

bool point_eq(const GraphOfGroups& g, const CoverPoint& x,
              const CoverPoint& y) {
  (void)g;
  return x == y;
}

CoverPoint act(const GraphOfGroups& g, const Word& elt, const CoverPoint& x) {
  return make_point(g, concat(g, elt, x.path));
}

CoverEdge act(const GraphOfGroups& g, const Word& elt, const CoverEdge& d) {
  Word w = concat(g, elt, d.origin.path);
  return make_edge(g, w, d.edge, d.germ);
}

CoverPath act(const GraphOfGroups& g, const Word& elt, const CoverPath& p) {
  CoverPath r;
  r.start = act(g, elt, p.start);
  r.edges.reserve(p.edges.size());
  for (const CoverEdge& d : p.edges) r.edges.push_back(act(g, elt, d));
  return r;
}

std::optional<Word> same_orbit(const GraphOfGroups& g, const CoverPoint& x,
                               const CoverPoint& y) {
  if (quotient_vertex(g, x) != quotient_vertex(g, y)) return std::nullopt;
  return reduce_word(g, concat(g, y.path, inverse(g, x.path)));
}

Word point_stabilizer_generator(const GraphOfGroups& g, const CoverPoint& x) {
  Word a;
  a.start = quotient_vertex(g, x);
  a.head = 1;
  return reduce_word(g, concat(g, concat(g, x.path, a), inverse(g, x.path)));
}

long long stabilizer_period(const GraphOfGroups& g, const CoverPoint& x,
                            const CoverPoint& y) {
  Word a = point_stabilizer_generator(g, x);
  CoverPoint cur = y;
  for (long long i = 1; i <= kSweepGuard; ++i) {
    cur = act(g, a, cur);
    if (cur == y) return i;
  }
  throw internal_error("stabilizer_period: sweep guard exceeded");
}

std::optional<Word> pair_same_orbit(const GraphOfGroups& g,
                                    const CoverPoint& x, const CoverPoint& x2,
                                    const CoverPoint& y, const CoverPoint& y2) {
  auto g0 = same_orbit(g, x, y);
  if (!g0) return std::nullopt;
  CoverPoint z = act(g, *g0, x2);
  Word a = point_stabilizer_generator(g, y);
  Word acc = *g0;
  CoverPoint cur = z;
  for (long long j = 0; j <= kSweepGuard; ++j) {
    if (cur == y2) return reduce_word(g, acc);
    cur = act(g, a, cur);
    acc = reduce_word(g, concat(g, a, acc));
    if (cur == z) break;  // full stabilizer orbit of x2 exhausted
  }
  return std::nullopt;
}

std::vector<CoverEdge> germs_at(const GraphOfGroups& g, const CoverPoint& x) {
  std::vector<CoverEdge> out;
  for (int e : g.edges_at(quotient_vertex(g, x))) {
    long long n = g.label_abs(e);
    for (long long i = 0; i < n; ++i) {
      CoverEdge d;
      d.origin = x;
      d.edge = e;
      d.germ = i;
      out.push_back(d);
    }
  }
  return out;
}

std::vector<CoverPath> edge_paths_from(const GraphOfGroups& g,
                                       const CoverPoint& x, int n) {
  if (n < 0) throw precondition_error("edge_paths_from: negative length");
  std::vector<CoverPath> frontier;
  frontier.push_back(CoverPath{x, {}});
  for (int step = 0; step < n; ++step) {
    std::vector<CoverPath> next;
    for (const CoverPath& p : frontier) {
      CoverPoint tip = path_endpoint(g, p);
      CoverEdge back;
      bool has_back = !p.edges.empty();
      if (has_back) back = edge_reverse(g, p.edges.back());
      for (CoverEdge& d : germs_at(g, tip)) {
        if (has_back && d == back) continue;
        CoverPath q = p;
        q.edges.push_back(d);
        next.push_back(std::move(q));
      }
    }
    frontier = std::move(next);
  }
  return frontier;
}

bool is_tight(const GraphOfGroups& g, const CoverPath& p) {
  for (size_t i = 0; i + 1 < p.edges.size(); ++i)
    if (p.edges[i + 1] == edge_reverse(g, p.edges[i])) return false;
  return true;
}

CoverPath tighten(const GraphOfGroups& g, const CoverPath& p) {
  CoverPath r;
  r.start = p.start;
  for (const CoverEdge& d : p.edges) {
    if (!r.edges.empty() && d == edge_reverse(g, r.edges.back()))
      r.edges.pop_back();
    else
      r.edges.push_back(d);
  }
  return r;
}

CoverPath path_reverse(const GraphOfGroups& g, const CoverPath& p) {
  CoverPath r;
  r.start = path_endpoint(g, p);
  for (auto it = p.edges.rbegin(); it != p.edges.rend(); ++it)
    r.edges.push_back(edge_reverse(g, *it));
  return r;
}

CoverPath path_concat(const GraphOfGroups& g, const CoverPath& a,
                      const CoverPath& b) {
  if (path_endpoint(g, a) != b.start)
    throw precondition_error("path_concat: endpoints do not match");
  CoverPath r = a;
  r.edges.insert(r.edges.end(), b.edges.begin(), b.edges.end());
  return r;
}

CoverPoint path_endpoint(const GraphOfGroups& g, const CoverPath& p) {
  if (p.edges.empty()) return p.start;
  return edge_endpoint(g, p.edges.back());
}

CoverPath subpath(const GraphOfGroups& g, const CoverPath& p, int from,
                  int len) {
  if (from < 0 || len < 0 || from + len > p.length())
    throw precondition_error("subpath: out of range");
  CoverPath r;
  r.start = from == 0 ? p.start : edge_endpoint(g, p.edges[from - 1]);
  r.edges.assign(p.edges.begin() + from, p.edges.begin() + from + len);
  return r;
}

// Walks carry the exact running prefix word: canonical endpoints drop the
// trailing vertex exponent, which is lost information whenever the next
// germ must be measured against it (normalization pushes or cancellation
// into the prefix both expose one).
CoverPath path_from_word(const GraphOfGroups& g, const Word& w) {
  CoverPath p;
  Word running;
  running.start = w.start;
  running.head = w.head;
  p.start = make_point(g, running);
  for (int i = 0; i < w.length(); ++i) {
    CoverEdge d = make_edge(g, running, w.syls[i].edge, Int(0));
    running.syls.push_back({w.syls[i].edge, w.syls[i].exp});
    running = reduce_word(g, running);
    p.edges.push_back(std::move(d));
  }
  return p;
}

CoverEdge edge_from_word(const GraphOfGroups& g, const Word& w) {
  if (w.syls.empty())
    throw precondition_error("edge_from_word: word has no edge letter");
  CoverPath p = path_from_word(g, w);
  return p.edges.back();
}

Word word_of_path(const GraphOfGroups& g, const CoverPath& p) {
  Word w = p.start.path;
  for (const CoverEdge& d : p.edges) {
    if (w.syls.empty())
      w.head += d.germ;
    else
      w.syls.back().exp += d.germ;
    w.syls.push_back({d.edge, Int(0)});
  }
  (void)g;
  return w;
}

Word germ_word_of_path(const GraphOfGroups& g, const CoverPath& p) {
  Word w;
  w.start = quotient_vertex(g, p.start);
  for (const CoverEdge& d : p.edges) {
    if (w.syls.empty())
      w.head += d.germ;
    else
      w.syls.back().exp += d.germ;
    w.syls.push_back({d.edge, Int(0)});
  }
  return w;
}

CoverPath path_from_point_and_word(const GraphOfGroups& g,
                                   const CoverPoint& start, const Word& rel) {
  if (rel.start != quotient_vertex(g, start))
    throw precondition_error(
        "path_from_point_and_word: word not based at the start vertex");
  CoverPath p;
  p.start = start;
  Word running = start.path;
  if (running.syls.empty())
    running.head += rel.head;
  else
    running.syls.back().exp += rel.head;
  for (int i = 0; i < rel.length(); ++i) {
    CoverEdge d = make_edge(g, running, rel.syls[i].edge, Int(0));
    running.syls.push_back({rel.syls[i].edge, rel.syls[i].exp});
    running = reduce_word(g, running);
    p.edges.push_back(std::move(d));
  }
  return p;
}

CoverPath geodesic(const GraphOfGroups& g, const CoverPoint& x,
                   const CoverPoint& y) {
  Word rel = reduce_word(g, concat(g, inverse(g, x.path), y.path));
  return path_from_point_and_word(g, x, rel);
}

Int distance(const GraphOfGroups& g, const CoverPoint& x,
             const CoverPoint& y) {
  return Int(
      reduce_word(g, concat(g, inverse(g, x.path), y.path)).length());
}

TranslationData translation_length(const GraphOfGroups& g, const Word& elt,
                                   int base_vertex) {
  if (!is_loop(g, elt) || elt.start != base_vertex)
    throw precondition_error("translation_length: not a based loop");
  CoverPoint x = base_point(g, base_vertex);
  CoverPoint gx = act(g, elt, x);
  CoverPath p = geodesic(g, x, gx);
  int D = p.length();
  TranslationData out;
  if (D == 0) {
    out.kind = IsometryKind::elliptic;
    out.axis_segment = CoverPath{x, {}};
    return out;
  }
  CoverPath back = path_reverse(g, p);      // from gx to x
  CoverPath fwd = act(g, elt, p);           // from gx to g^2 x
  int ell = 0;
  while (ell < D && back.edges[ell] == fwd.edges[ell]) ++ell;
  if (D - 2 * ell > 0) {
    out.kind = IsometryKind::loxodromic;
    out.length = D - 2 * ell;
    out.axis_segment = subpath(g, p, ell, static_cast<int>(out.length));
  } else {
    // Elliptic: the midpoint of [x, gx] is fixed. D is even because the
    // action has no inversions.
    out.kind = IsometryKind::elliptic;
    if (D % 2 != 0)
      throw internal_error("elliptic isometry with odd displacement");
    CoverPoint mid =
        D == 0 ? x : edge_endpoint(g, p.edges[D / 2 - 1]);
    out.axis_segment = CoverPath{mid, {}};
  }
  return out;
}

namespace {

// Compact exact serialization; canonical forms carry small exponents, so a
// fixed-width fast path covers everything but pathological inputs.
void append_int(std::string& out, const Int& v) {
  if (v >= std::numeric_limits<long long>::min() &&
      v <= std::numeric_limits<long long>::max()) {
    long long x = static_cast<long long>(v);
    out.push_back('i');
    out.append(reinterpret_cast<const char*>(&x), sizeof(x));
  } else {
    out.push_back('s');
    out += v.str();
    out.push_back('\0');
  }
}

void append_i32(std::string& out, int v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(v));
}

void append_word(std::string& out, const Word& w) {
  append_i32(out, w.start);
  append_int(out, w.head);
  append_i32(out, w.length());
  for (const Syllable& s : w.syls) {
    append_i32(out, s.edge);
    append_int(out, s.exp);
  }
}

}  // namespace

std::string point_key(const GraphOfGroups& g, const CoverPoint& x) {
  (void)g;
  std::string out;
  out.reserve(16 + 24 * x.path.syls.size());
  append_word(out, x.path);
  return out;
}

std::string edge_key(const GraphOfGroups& g, const CoverEdge& d) {
  (void)g;
  std::string out;
  out.reserve(32 + 24 * d.origin.path.syls.size());
  append_word(out, d.origin.path);
  append_i32(out, d.edge);
  append_int(out, d.germ);
  return out;
}

std::string path_key(const GraphOfGroups& g, const CoverPath& p) {
  (void)g;
  std::string out;
  out.reserve(64 + 32 * p.edges.size());
  append_word(out, p.start.path);
  append_i32(out, p.length());
  for (const CoverEdge& d : p.edges) {
    append_word(out, d.origin.path);
    append_i32(out, d.edge);
    append_int(out, d.germ);
  }
  return out;
}

std::string path_orbit_key(const GraphOfGroups& g,
                           const std::vector<Word>& base_paths,
                           const CoverPath& p) {
  if (p.edges.empty()) {
    return "pt:" + std::to_string(quotient_vertex(g, p.start));
  }
  std::string best;
  for (int orient = 0; orient < 2; ++orient) {
    CoverPath q = orient == 0 ? p : path_reverse(g, p);
    int v = quotient_vertex(g, q.start);
    CoverPoint rep = make_point(g, base_paths.at(v));
    Word tr = reduce_word(g, concat(g, base_paths.at(v),
                                    inverse(g, q.start.path)));
    CoverPath q0 = act(g, tr, q);
    Word a = point_stabilizer_generator(g, rep);
    CoverPath cur = q0;
    for (long long j = 0; j <= kSweepGuard; ++j) {
      std::string k = path_key(g, cur);
      if (best.empty() || k < best) best = std::move(k);
      cur = act(g, a, cur);
      if (cur == q0) break;
    }
  }
  return best;
}

}  // namespace gbs
