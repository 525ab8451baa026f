#ifndef GBS_COVER_HPP
#define GBS_COVER_HPP

#include <optional>
#include <string>
#include <vector>

#include "gbs/word.hpp"

namespace gbs {

// A vertex of the universal cover: the class of a path word from the base
// vertex modulo the terminal vertex group. Stored canonically (reduced,
// exponents pushed into germ range, trailing exponent zero), so equality is
// structural equality.
struct CoverPoint {
  Word path;
  bool operator==(const CoverPoint& o) const { return path == o.path; }
  bool operator!=(const CoverPoint& o) const { return !(*this == o); }
  bool operator<(const CoverPoint& o) const { return path < o.path; }
};

// An oriented edge of the cover: origin point plus a germ a^{g} t_e with
// 0 <= g < |lambda(e)|, relative to the canonical origin word.
struct CoverEdge {
  CoverPoint origin;
  int edge = -1;
  Int germ = 0;
  bool operator==(const CoverEdge& o) const {
    return edge == o.edge && germ == o.germ && origin == o.origin;
  }
  bool operator!=(const CoverEdge& o) const { return !(*this == o); }
  bool operator<(const CoverEdge& o) const;
};

// An edge path; empty paths remember their single point.
struct CoverPath {
  CoverPoint start;
  std::vector<CoverEdge> edges;
  int length() const { return static_cast<int>(edges.size()); }
  bool operator==(const CoverPath& o) const {
    return start == o.start && edges == o.edges;
  }
};

CoverPoint make_point(const GraphOfGroups& g, const Word& path_word);
CoverPoint base_point(const GraphOfGroups& g, int base_vertex);
int quotient_vertex(const GraphOfGroups& g, const CoverPoint& x);

// Edge from the point of `origin_word`, germ exponent taken mod |lambda(e)|.
CoverEdge make_edge(const GraphOfGroups& g, const Word& origin_word, int edge,
                    const Int& germ);
CoverPoint edge_endpoint(const GraphOfGroups& g, const CoverEdge& d);
CoverEdge edge_reverse(const GraphOfGroups& g, const CoverEdge& d);
// Path word of the far endpoint: origin word + a^{germ} t_e.
Word edge_word(const GraphOfGroups& g, const CoverEdge& d);

bool point_eq(const GraphOfGroups& g, const CoverPoint& x, const CoverPoint& y);

CoverPoint act(const GraphOfGroups& g, const Word& elt, const CoverPoint& x);
CoverEdge act(const GraphOfGroups& g, const Word& elt, const CoverEdge& d);
CoverPath act(const GraphOfGroups& g, const Word& elt, const CoverPath& p);

// g with g x = y, when x and y lie over the same quotient vertex.
std::optional<Word> same_orbit(const GraphOfGroups& g, const CoverPoint& x,
                               const CoverPoint& y);

// Generator of stab(x): x a_v x^{-1} as a based loop.
Word point_stabilizer_generator(const GraphOfGroups& g, const CoverPoint& x);

// Least i >= 1 with a_x^i y = y; finite by local finiteness.
long long stabilizer_period(const GraphOfGroups& g, const CoverPoint& x,
                            const CoverPoint& y);

// g with (gx, gx') = (y, y'), searched over the stab(y) sweep.
std::optional<Word> pair_same_orbit(const GraphOfGroups& g,
                                    const CoverPoint& x, const CoverPoint& x2,
                                    const CoverPoint& y, const CoverPoint& y2);

// All germs at x, ordered by (edge index, germ exponent).
std::vector<CoverEdge> germs_at(const GraphOfGroups& g, const CoverPoint& x);

// All tight edge paths of length n from x.
std::vector<CoverPath> edge_paths_from(const GraphOfGroups& g,
                                       const CoverPoint& x, int n);

bool is_tight(const GraphOfGroups& g, const CoverPath& p);
CoverPath tighten(const GraphOfGroups& g, const CoverPath& p);
CoverPath path_reverse(const GraphOfGroups& g, const CoverPath& p);
CoverPath path_concat(const GraphOfGroups& g, const CoverPath& a,
                      const CoverPath& b);
CoverPoint path_endpoint(const GraphOfGroups& g, const CoverPath& p);
CoverPath subpath(const GraphOfGroups& g, const CoverPath& p, int from,
                  int len);

// Reinterpret a path word as the edge path it spells (no reduction); the
// trailing exponent is dropped.
CoverPath path_from_word(const GraphOfGroups& g, const Word& w);
// The cover edge spelled by a word ending in an edge letter.
CoverEdge edge_from_word(const GraphOfGroups& g, const Word& w);
// Full path word: start word plus one syllable per edge.
Word word_of_path(const GraphOfGroups& g, const CoverPath& p);
// Word of the germ syllables only, based at the quotient vertex of p.start.
Word germ_word_of_path(const GraphOfGroups& g, const CoverPath& p);
// Walk a relative word from a concrete start point.
CoverPath path_from_point_and_word(const GraphOfGroups& g,
                                   const CoverPoint& start, const Word& rel);

// The tree geodesic between two points, via the reduced relative word.
CoverPath geodesic(const GraphOfGroups& g, const CoverPoint& x,
                   const CoverPoint& y);
Int distance(const GraphOfGroups& g, const CoverPoint& x, const CoverPoint& y);

enum class IsometryKind { elliptic, loxodromic };

struct TranslationData {
  IsometryKind kind;
  long long length = 0;
  // loxodromic: one fundamental domain [w, gw] on the axis;
  // elliptic: the empty path at a fixed point.
  CoverPath axis_segment;
};

// Combinatorial translation length of the loop g, computed from the overlap
// of [gx,x] with [gx,g^2 x]; d(x,g^2x)-d(x,gx) is the test oracle for it.
TranslationData translation_length(const GraphOfGroups& g, const Word& elt,
                                   int base_vertex);

// Stable strings for orbit bookkeeping.
std::string point_key(const GraphOfGroups& g, const CoverPoint& x);
std::string edge_key(const GraphOfGroups& g, const CoverEdge& d);
std::string path_key(const GraphOfGroups& g, const CoverPath& p);

// Canonical key of the G-orbit of an UNORIENTED path: minimum of the
// serializations of all stabilizer-sweep translates of both orientations,
// each translated to start at the canonical lift of its start vertex given
// by base_paths.
std::string path_orbit_key(const GraphOfGroups& g,
                           const std::vector<Word>& base_paths,
                           const CoverPath& p);

}  // namespace gbs

#endif  // GBS_COVER_HPP
