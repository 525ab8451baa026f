#ifndef GBS_LAMINATION_HPP
#define GBS_LAMINATION_HPP

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "gbs/traintrack.hpp"

namespace gbs {

// Whitehead graph of the stable lamination at one vertex orbit: nodes are
// the germs at the representative cover vertex, links the turns crossed by
// leaf translates. Invariant under the vertex-group germ rotation.
struct WhiteheadGraph {
  int vertex = -1;
  std::vector<std::pair<int, long long>> nodes;  // (oriented edge, residue)
  std::set<std::pair<int, int>> links;           // node index pairs, i < j
  std::vector<int> component_of;                 // per node
  int component_count = 0;
  bool connected() const { return component_count <= 1; }
  int node_index(int edge, long long residue) const;
};

struct LaminationData {
  std::vector<TurnOrbit> turns;  // stabilized set of lamination turn orbits
  int rounds = 0;
  int cap = 0;  // the n+1+K bound from the saturation lemma
  int positivity = 0;  // n with A^n > 0
  std::map<int, WhiteheadGraph> graphs;  // per quotient vertex
};

// Turn saturation seeded at one edge orbit: first-type turns of the edges
// crossed by iterated images, closed under the induced turn map; stops when
// a full round adds nothing, capped at n+1+K.
LaminationData whitehead_graphs(const TrainTrackMap& f, int seed_orbit = 0,
                                int max_rounds = 256);

// Allowed bi-elliptic subgroups, per vertex, as divisor sets I_v. With no
// file given the unrestricted space is assumed and every component counts.
struct FamilyA {
  bool unrestricted = true;
  std::map<int, std::vector<long long>> divisors;  // vertex -> I_v
};

struct ComponentWitness {
  std::vector<int> germs;  // node indices of the component
  long long index = 1;     // i(C) = [G_v : stab(C)] = germ-rotation orbit size
  bool in_family = false;
  long long matched_divisor = 0;  // when in_family and restricted
};

std::vector<ComponentWitness> component_analysis(const GraphOfGroups& g,
                                                 const WhiteheadGraph& w,
                                                 const FamilyA& fam);

struct IwipCertificate {
  int vertex;
  std::vector<ComponentWitness> components;
  int witness_component;  // index with in_family
};

struct IwipVerdict {
  bool fully_irreducible;
  std::map<int, bool> connected;  // per vertex
  std::optional<IwipCertificate> certificate;
  LaminationData lamination;
};

// Theorem criterion: connected Whitehead graphs everywhere give fully
// irreducible; a disconnected graph with a component stabilizer in the
// family gives a reducibility certificate; disconnected but no component in
// the family still gives fully irreducible. The caller is responsible for
// the pseudo-atoroidal gate.
IwipVerdict decide_fully_irreducible(const TrainTrackMap& f,
                                     const FamilyA& fam, int max_rounds = 256);

}  // namespace gbs

#endif  // GBS_LAMINATION_HPP
