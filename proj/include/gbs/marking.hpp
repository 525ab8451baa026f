#ifndef GBS_MARKING_HPP
#define GBS_MARKING_HPP

#include <map>
#include <vector>

#include "gbs/cover.hpp"
#include "gbs/word.hpp"

namespace gbs {

// Basepoint and a path p_v from it to every vertex. Fixes the generating set
// of the fundamental group: loops p_v a_v p_v^{-1} and p_{o(e)} t_e
// p_{t(e)}^{-1}, into which any based loop telescopes letter by letter.
struct Marking {
  int basepoint = 0;
  std::vector<Word> base_paths;

  static Marking bfs(const GraphOfGroups& g, int basepoint);

  // p_v a_v^k p_v^{-1}, reduced.
  Word vertex_loop(const GraphOfGroups& g, int v, const Int& k) const;
  // p_{o(e)} t_e p_{t(e)}^{-1}, reduced.
  Word edge_loop(const GraphOfGroups& g, int e) const;

  CoverPoint rep_vertex(const GraphOfGroups& g, int v) const;
  // Rep cover edge over oriented e: germ 0 at the rep vertex of o(e).
  CoverEdge rep_edge(const GraphOfGroups& g, int e) const;

  void validate(const GraphOfGroups& g) const;
};

// An automorphism, stored by its values on the marking generators. Vertex
// generators map to elliptic elements, kept in the closed form
// u a_w^m u^{-1} so that arbitrary-precision powers stay closed.
class Automorphism {
 public:
  struct EllipticImage {
    Word conj;   // path from the basepoint to the fixed point
    int vertex;  // quotient vertex of the fixed point
    Int mult;    // a_v -> conj a_vertex^{mult} conj^{-1}
  };

  Automorphism(const GraphOfGroups& g, const Marking& m,
               std::vector<Word> vertex_images, std::vector<Word> edge_images);

  static Automorphism identity(const GraphOfGroups& g, const Marking& m);

  // Image of a loop based at the marking basepoint; reduced.
  Word apply(const GraphOfGroups& g, const Word& loop) const;
  // phi^n for small n >= 1 applied to a loop.
  Word apply_iter(const GraphOfGroups& g, const Word& loop, int n) const;

  // phi(p_v a_v^k p_v^{-1}) in closed form.
  Word vertex_power_image(const GraphOfGroups& g, int v, const Int& k) const;
  const Word& edge_letter_image(int e) const { return edge_images_.at(e); }
  const EllipticImage& elliptic_image(int v) const {
    return vertex_images_.at(v);
  }

  // Bass relation compatibility of the stored images; throws input_error.
  void check_relations(const GraphOfGroups& g, const Marking& m) const;

 private:
  std::vector<EllipticImage> vertex_images_;
  std::vector<Word> edge_images_;  // one per oriented edge
};

// Parse a loop known to be elliptic into the closed form; rejects
// non-elliptic input.
Automorphism::EllipticImage parse_elliptic(const GraphOfGroups& g,
                                           const Word& loop);

// phi(psi(s)) = s for every marking generator s.
void check_inverse_pair(const GraphOfGroups& g, const Marking& m,
                        const Automorphism& phi, const Automorphism& psi);

}  // namespace gbs

#endif  // GBS_MARKING_HPP
