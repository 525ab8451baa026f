#ifndef GBS_WORD_HPP
#define GBS_WORD_HPP

#include <string>
#include <vector>

#include "gbs/graph.hpp"
#include "gbs/numeric.hpp"

namespace gbs {

// One syllable t_e a^{exp} of a path word.
struct Syllable {
  int edge;
  Int exp;
  bool operator==(const Syllable& o) const {
    return edge == o.edge && exp == o.exp;
  }
};

// A path in the graph of groups: a_{v0}^{k0} t_{e1} a^{k1} ... t_{en} a^{kn}.
// The path condition (o(e_{i+1}) = t(e_i), o(e_1) = start) is a constructed
// invariant, checked by check_path. Loops based at the marking's basepoint
// represent group elements.
struct Word {
  int start = 0;
  Int head = 0;
  std::vector<Syllable> syls;

  int length() const { return static_cast<int>(syls.size()); }
  bool operator==(const Word& o) const {
    return start == o.start && head == o.head && syls == o.syls;
  }
  bool operator<(const Word& o) const;
};

void check_path(const GraphOfGroups& g, const Word& w);
int end_vertex(const GraphOfGroups& g, const Word& w);
bool is_loop(const GraphOfGroups& g, const Word& w);

Word concat(const GraphOfGroups& g, const Word& a, const Word& b);
Word inverse(const GraphOfGroups& g, const Word& w);
// |n| small; exponent words of elliptic elements take the closed form in
// Automorphism instead.
Word power(const GraphOfGroups& g, const Word& w, long long n);

// Britton reduction: innermost pinch first, leftmost tie-break. The result
// has no subword t_e a^k t_{ebar} with lambda(ebar) | k.
Word reduce_word(const GraphOfGroups& g, const Word& w);
bool is_reduced(const GraphOfGroups& g, const Word& w);

// Reduce, then push exponents rightward so that the exponent before each
// t_e lies in [0, |lambda(e)|). Unique per Bass group element; the trailing
// exponent stays free.
Word normal_form(const GraphOfGroups& g, const Word& w);

// Word problem on loops: w = 1 iff the reduced form is a^0 of length 0.
bool is_trivial(const GraphOfGroups& g, const Word& w);

// Product over edge letters of lambda(e)/lambda(ebar). Convention note: for
// BS(2,3) presented with lambda(e)=2, lambda(ebar)=3 this gives
// modulus(t) = 2/3; only unimodularity is consumed downstream.
Rational modulus(const GraphOfGroups& g, const Word& w);

std::string word_str(const GraphOfGroups& g, const Word& w);

Word word_from_json(const GraphOfGroups& g, const nlohmann::json& j,
                    int start_vertex);
nlohmann::json word_to_json(const GraphOfGroups& g, const Word& w);

// Letter substitution induced by a graph move (subdivision, collapse).
// Vertex letters map to powers of a vertex letter, edge letters to fixed
// connecting words; both directions of every move used here have this shape.
struct WordMap {
  struct VertexImage {
    int vertex;
    Int mult;
  };
  std::vector<VertexImage> vertex_to;  // indexed by source vertex
  std::vector<Word> edge_to;           // indexed by source oriented edge

  Word apply(const GraphOfGroups& src, const GraphOfGroups& dst,
             const Word& w) const;
};

// Subdivision of a single edge orbit at interior_count interior points,
// Prop. (vii) shape: lambda(E1) = lambda(e), interior labels 1, last
// reverse label lambda(ebar).
struct Subdivision {
  GraphOfGroups graph;
  WordMap rewrite;    // old -> new
  WordMap unrewrite;  // new -> old
  std::vector<int> new_vertices;        // new-graph vertex indices, in order
  std::vector<int> new_edges_forward;   // chain replacing e, oriented as e
};

Subdivision subdivide_edge(const GraphOfGroups& g, int e, int interior_count);

}  // namespace gbs

#endif  // GBS_WORD_HPP
