#ifndef GBS_EXAMPLES_HPP
#define GBS_EXAMPLES_HPP

#include <initializer_list>
#include <string>

#include "gbs/traintrack.hpp"
#include "testutil.hpp"

namespace gbs::test {

// Loop words over the marking generators, written as whitespace-separated
// tokens: an edge id, ~id for its inverse, or id^k for a vertex power.
inline Word gen_word(const GraphOfGroups& g, const Marking& m,
                     const std::string& spec) {
  Word w;
  w.start = m.basepoint;
  size_t i = 0;
  while (i < spec.size()) {
    while (i < spec.size() && spec[i] == ' ') ++i;
    if (i >= spec.size()) break;
    size_t j = spec.find(' ', i);
    std::string tok = spec.substr(i, j == std::string::npos ? j : j - i);
    i = j == std::string::npos ? spec.size() : j + 1;
    bool inv = false;
    if (tok[0] == '~') {
      inv = true;
      tok = tok.substr(1);
    }
    long long k = 1;
    size_t caret = tok.find('^');
    if (caret != std::string::npos) {
      k = std::stoll(tok.substr(caret + 1));
      tok = tok.substr(0, caret);
    }
    Word piece;
    bool is_vertex = false;
    for (int v = 0; v < g.num_vertices(); ++v)
      if (g.vertex_id(v) == tok) is_vertex = true;
    if (is_vertex) {
      piece = m.vertex_loop(g, g.vertex_index(tok), Int(k));
    } else {
      piece = m.edge_loop(g, g.edge_index(tok));
      if (k != 1) piece = power(g, piece, k);
    }
    if (inv) piece = inverse(g, piece);
    w = concat(g, w, piece);
  }
  return reduce_word(g, w);
}

// Assemble a train track map from phi given on the marking generators and
// the vertex images; edge images are the geodesics between endpoint images.
inline TrainTrackMap build_map(const GraphOfGroups& g, int base,
                               const std::vector<std::string>& phi_vertex,
                               const std::vector<std::string>& phi_edge_reps,
                               const std::vector<std::string>& inv_vertex,
                               const std::vector<std::string>& inv_edge_reps,
                               const std::vector<Word>& vertex_image_words) {
  Marking m = Marking::bfs(g, base);
  auto build_auto = [&](const std::vector<std::string>& vs,
                        const std::vector<std::string>& es) {
    std::vector<Word> vi(g.num_vertices()), ei(g.num_edges());
    for (int v = 0; v < g.num_vertices(); ++v) vi[v] = gen_word(g, m, vs[v]);
    for (int k = 0; k < g.num_unoriented_edges(); ++k) {
      int e = g.unoriented_reps()[k];
      ei[e] = gen_word(g, m, es[k]);
      ei[g.reverse(e)] = inverse(g, ei[e]);
    }
    return Automorphism(g, m, vi, ei);
  };
  Automorphism phi = build_auto(phi_vertex, phi_edge_reps);
  Automorphism phi_inv = build_auto(inv_vertex, inv_edge_reps);
  std::vector<CoverPoint> vimgs;
  for (int v = 0; v < g.num_vertices(); ++v)
    vimgs.push_back(make_point(g, vertex_image_words[v]));
  // derive edge images: f(e) is the geodesic between the endpoint images
  auto point_image = [&](const CoverPoint& x) {
    int v = quotient_vertex(g, x);
    Word h = reduce_word(g, concat(g, m.base_paths[v], inverse(g, x.path)));
    return act(g, phi.apply(g, inverse(g, h)), vimgs[v]);
  };
  std::map<int, CoverPath> eimgs;
  for (int e : g.unoriented_reps()) {
    CoverEdge rep = m.rep_edge(g, e);
    CoverPath geo =
        geodesic(g, vimgs[g.origin(e)], point_image(edge_endpoint(g, rep)));
    eimgs[e] = geo;
  }
  return TrainTrackMap(g, m, phi, phi_inv, vimgs, eimgs);
}

// Rose with k loops at one vertex "v", loop i labelled (lab, lab) with ids
// "A","B","C",... and reverses "A'","B'",...
inline GraphOfGroups rose(int k, long long lab) {
  std::vector<GraphOfGroups::Edge> edges;
  for (int i = 0; i < k; ++i) {
    std::string id(1, static_cast<char>('A' + i));
    edges.push_back({id, 2 * i + 1, 0, 0, lab});
    edges.push_back({id + "'", 2 * i, 0, 0, lab});
  }
  return GraphOfGroups({"v"}, edges);
}

inline Word base_word(const GraphOfGroups& g, int v = 0) {
  (void)g;
  Word w;
  w.start = v;
  return w;
}

// phi: A -> AB, B -> A on F_2 x Z; the archetypal exponential map with a
// Nielsen path (the commutator class is periodic).
inline TrainTrackMap golden_f2z() {
  GraphOfGroups g = rose(2, 1);
  return build_map(g, 0, {"v^1"}, {"A B", "A"}, {"v^1"}, {"B", "~B A"},
                   {base_word(g)});
}

// phi: A -> AB, B -> AC, C -> A on F_3 x Z; expected pseudo-atoroidal.
inline TrainTrackMap tribonacci_f3z() {
  GraphOfGroups g = rose(3, 1);
  return build_map(g, 0, {"v^1"}, {"A B", "A C", "A"}, {"v^1"},
                   {"C", "~C A", "~C B"}, {base_word(g)});
}

// Same golden substitution on the rose with labels (2,2): germ residues mod
// 2 matter; the Whitehead graph splits into two components swapped by a.
inline TrainTrackMap golden_mod2() {
  GraphOfGroups g = rose(2, 2);
  return build_map(g, 0, {"v^1"}, {"A B", "A"}, {"v^1"}, {"B", "~B A"},
                   {base_word(g)});
}

// phi: A -> B, B -> C, C -> AB on F_3 x Z: primitive, and the pseudo-pINP
// search comes back empty.
inline TrainTrackMap cyclic_f3z() {
  GraphOfGroups g = rose(3, 1);
  return build_map(g, 0, {"v^1"}, {"B", "C", "A B"}, {"v^1"},
                   {"C ~A", "A", "B"}, {base_word(g)});
}

// Loop swap on F_2 x Z: transition matrix is an irreducible permutation.
inline TrainTrackMap swap_f2z() {
  GraphOfGroups g = rose(2, 1);
  return build_map(g, 0, {"v^1"}, {"B", "A"}, {"v^1"}, {"B", "A"},
                   {base_word(g)});
}

// A -> AB, B -> A, C -> CA on F_3 x Z: the subgraph {A,B} is invariant and
// essential, so the map is reducible with a subforest certificate.
inline TrainTrackMap reducible_f3z() {
  GraphOfGroups g = rose(3, 1);
  return build_map(g, 0, {"v^1"}, {"A B", "A", "C A"}, {"v^1"},
                   {"B", "~B A", "C ~B"}, {base_word(g)});
}

// The golden_mod2 outer automorphism presented on a non-reduced tree: a
// segment E: u -> w with labels (2,1) and the two loops Y, Z at w. The orbit
// of E spans an invariant collapsible subforest; collapsing it yields
// golden_mod2.
inline GraphOfGroups unreduced_graph() {
  std::vector<GraphOfGroups::Edge> edges;
  edges.push_back({"E", 1, 0, 1, 2});   // u -> w, label 2 at u
  edges.push_back({"E'", 0, 1, 0, 1});  // w -> u, label 1 at w
  edges.push_back({"Y", 3, 1, 1, 1});
  edges.push_back({"Y'", 2, 1, 1, 1});
  edges.push_back({"Z", 5, 1, 1, 1});
  edges.push_back({"Z'", 4, 1, 1, 1});
  return GraphOfGroups({"u", "w"}, edges);
}

inline TrainTrackMap golden_mod2_unreduced() {
  GraphOfGroups g = unreduced_graph();
  // basepoint u; p_w = E; generators: a_u, a_w, Y-loop, Z-loop; E is a tree
  // edge (trivial loop). phi: golden on the w-loops, identity on vertices.
  Word vu;
  vu.start = 0;
  Word vw;
  vw.start = 0;
  vw.syls.push_back({0, Int(0)});
  return build_map(g, 0, {"u^1", "w^1"}, {"", "Y Z", "Y"}, {"u^1", "w^1"},
                   {"", "Z", "~Z Y"}, {vu, vw});
}

// Translation by the vertex generator on BS(2,3): a one-edge group; the
// transition matrix is the 1x1 identity.
inline TrainTrackMap bs23_translation() {
  GraphOfGroups g = bs_graph(2, 3);
  Word a = w_vertex(0, 1);
  Marking m = Marking::bfs(g, 0);
  // f is the translation x -> a x, which is equivariant for conjugation by a.
  std::vector<Word> vi{m.vertex_loop(g, 0, Int(1))};
  Word t = m.edge_loop(g, 0);
  auto conj = [&](long long s) {
    return reduce_word(
        g, concat(g, concat(g, w_vertex(0, s), t), w_vertex(0, -s)));
  };
  std::vector<Word> ei{conj(1), inverse(g, conj(1))};
  std::vector<Word> ei_inv{conj(-1), inverse(g, conj(-1))};
  Automorphism phi(g, m, vi, ei);
  Automorphism phi_inv(g, m, vi, ei_inv);
  std::vector<CoverPoint> vimgs{base_point(g, 0)};
  std::map<int, CoverPath> eimgs;
  eimgs[0] = CoverPath{base_point(g, 0),
                       {make_edge(g, base_word(g), 0, Int(1))}};
  return TrainTrackMap(g, m, phi, phi_inv, vimgs, eimgs);
}

}  // namespace gbs::test

#endif  // GBS_EXAMPLES_HPP
