#include "gbs/marking.hpp"

#include <queue>

namespace gbs {

Marking Marking::bfs(const GraphOfGroups& g, int basepoint) {
  Marking m;
  m.basepoint = basepoint;
  m.base_paths.assign(g.num_vertices(), Word{});
  std::vector<char> seen(g.num_vertices(), 0);
  Word root;
  root.start = basepoint;
  m.base_paths[basepoint] = root;
  seen[basepoint] = 1;
  std::queue<int> q;
  q.push(basepoint);
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int e : g.edges_at(v)) {
      int t = g.terminus(e);
      if (seen[t]) continue;
      seen[t] = 1;
      Word w = m.base_paths[v];
      w.syls.push_back({e, Int(0)});
      m.base_paths[t] = std::move(w);
      q.push(t);
    }
  }
  return m;
}

Word Marking::vertex_loop(const GraphOfGroups& g, int v, const Int& k) const {
  Word a;
  a.start = v;
  a.head = k;
  return reduce_word(
      g, concat(g, concat(g, base_paths.at(v), a), inverse(g, base_paths.at(v))));
}

Word Marking::edge_loop(const GraphOfGroups& g, int e) const {
  Word t;
  t.start = g.origin(e);
  t.syls.push_back({e, Int(0)});
  return reduce_word(
      g, concat(g, concat(g, base_paths.at(g.origin(e)), t),
                inverse(g, base_paths.at(g.terminus(e)))));
}

CoverPoint Marking::rep_vertex(const GraphOfGroups& g, int v) const {
  return make_point(g, base_paths.at(v));
}

CoverEdge Marking::rep_edge(const GraphOfGroups& g, int e) const {
  return make_edge(g, base_paths.at(g.origin(e)), e, Int(0));
}

void Marking::validate(const GraphOfGroups& g) const {
  if (basepoint < 0 || basepoint >= g.num_vertices())
    throw input_error("marking basepoint out of range");
  if (static_cast<int>(base_paths.size()) != g.num_vertices())
    throw input_error("marking needs one base path per vertex");
  for (int v = 0; v < g.num_vertices(); ++v) {
    check_path(g, base_paths[v]);
    if (base_paths[v].start != basepoint || end_vertex(g, base_paths[v]) != v)
      throw input_error("base path for vertex '" + g.vertex_id(v) +
                        "' does not run from the basepoint to it");
  }
  if (base_paths[basepoint].length() != 0)
    throw input_error("base path at the basepoint must be trivial");
}

Automorphism::EllipticImage parse_elliptic(const GraphOfGroups& g,
                                           const Word& loop) {
  if (!is_loop(g, loop))
    throw input_error("vertex generator image is not a loop");
  Word nf = normal_form(g, loop);
  int D = nf.length();
  // elliptic <=> the reduced square is no longer than the reduced element
  Word sq = reduce_word(g, concat(g, nf, nf));
  if (sq.length() > D || D % 2 != 0)
    throw input_error("vertex generator image is not elliptic");
  Automorphism::EllipticImage img;
  Word u;
  u.start = nf.start;
  u.head = nf.head;
  for (int i = 0; i < D / 2; ++i) u.syls.push_back(nf.syls[i]);
  if (!u.syls.empty()) u.syls.back().exp = 0;
  Word mid = reduce_word(
      g, concat(g, concat(g, inverse(g, u), nf), u));
  if (mid.length() != 0)
    throw input_error("vertex generator image is not elliptic (no fixed "
                      "point at the midpoint)");
  img.conj = u;
  img.vertex = end_vertex(g, u);
  img.mult = mid.head;
  if (img.mult == 0)
    throw input_error("vertex generator image is trivial; not an automorphism");
  return img;
}

Automorphism::Automorphism(const GraphOfGroups& g, const Marking& m,
                           std::vector<Word> vertex_images,
                           std::vector<Word> edge_images) {
  if (static_cast<int>(vertex_images.size()) != g.num_vertices() ||
      static_cast<int>(edge_images.size()) != g.num_edges())
    throw input_error("automorphism needs images for every vertex and edge");
  for (int v = 0; v < g.num_vertices(); ++v) {
    const Word& w = vertex_images[v];
    if (!is_loop(g, w) || w.start != m.basepoint)
      throw input_error("vertex image of '" + g.vertex_id(v) +
                        "' must be a based loop");
    vertex_images_.push_back(parse_elliptic(g, w));
  }
  for (int e = 0; e < g.num_edges(); ++e) {
    const Word& w = edge_images[e];
    if (!is_loop(g, w) || w.start != m.basepoint)
      throw input_error("edge image of '" + g.edge_id(e) +
                        "' must be a based loop");
    edge_images_.push_back(reduce_word(g, w));
  }
  // t_{ebar} = t_e^{-1} must be respected.
  for (int e = 0; e < g.num_edges(); ++e) {
    Word both = reduce_word(
        g, concat(g, edge_images_[e], edge_images_[g.reverse(e)]));
    if (!(both.length() == 0 && both.head == 0))
      throw input_error("edge images of '" + g.edge_id(e) + "' and '" +
                        g.edge_id(g.reverse(e)) + "' are not inverse");
  }
}

Automorphism Automorphism::identity(const GraphOfGroups& g, const Marking& m) {
  std::vector<Word> vi, ei;
  for (int v = 0; v < g.num_vertices(); ++v)
    vi.push_back(m.vertex_loop(g, v, Int(1)));
  for (int e = 0; e < g.num_edges(); ++e) ei.push_back(m.edge_loop(g, e));
  return Automorphism(g, m, std::move(vi), std::move(ei));
}

Word Automorphism::vertex_power_image(const GraphOfGroups& g, int v,
                                      const Int& k) const {
  const EllipticImage& img = vertex_images_.at(v);
  Word a;
  a.start = img.vertex;
  a.head = img.mult * k;
  return reduce_word(
      g, concat(g, concat(g, img.conj, a), inverse(g, img.conj)));
}

Word Automorphism::apply(const GraphOfGroups& g, const Word& loop) const {
  Word r;
  r.start = loop.start;
  if (loop.head != 0)
    r = concat(g, r, vertex_power_image(g, loop.start, loop.head));
  for (const Syllable& s : loop.syls) {
    r = concat(g, r, edge_images_.at(s.edge));
    if (s.exp != 0)
      r = concat(g, r, vertex_power_image(g, g.terminus(s.edge), s.exp));
    r = reduce_word(g, r);
  }
  return reduce_word(g, r);
}

Word Automorphism::apply_iter(const GraphOfGroups& g, const Word& loop,
                              int n) const {
  Word r = loop;
  for (int i = 0; i < n; ++i) r = apply(g, r);
  return r;
}

void Automorphism::check_relations(const GraphOfGroups& g,
                                   const Marking& m) const {
  for (int e : g.unoriented_reps()) {
    Word lhs = vertex_power_image(g, g.origin(e), Int(g.label(e)));
    Word rhs = concat(
        g,
        concat(g, edge_images_.at(e),
               vertex_power_image(g, g.terminus(e),
                                  Int(g.label(g.reverse(e))))),
        edge_images_.at(g.reverse(e)));
    if (!is_trivial(g, concat(g, lhs, inverse(g, rhs))))
      throw input_error("automorphism violates the Bass relation of edge '" +
                        g.edge_id(e) + "'");
  }
  (void)m;
}

void check_inverse_pair(const GraphOfGroups& g, const Marking& m,
                        const Automorphism& phi, const Automorphism& psi) {
  for (int v = 0; v < g.num_vertices(); ++v) {
    Word w = phi.apply(g, psi.apply(g, m.vertex_loop(g, v, Int(1))));
    if (!is_trivial(g, concat(g, w, inverse(g, m.vertex_loop(g, v, Int(1))))))
      throw input_error("phi_inverse is not inverse to phi on vertex '" +
                        g.vertex_id(v) + "'");
  }
  for (int e : g.unoriented_reps()) {
    Word w = phi.apply(g, psi.apply(g, m.edge_loop(g, e)));
    if (!is_trivial(g, concat(g, w, inverse(g, m.edge_loop(g, e)))))
      throw input_error("phi_inverse is not inverse to phi on edge '" +
                        g.edge_id(e) + "'");
  }
}

}  // namespace gbs
