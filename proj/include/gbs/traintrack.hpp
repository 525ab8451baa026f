#ifndef GBS_TRAINTRACK_HPP
#define GBS_TRAINTRACK_HPP

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "gbs/cover.hpp"
#include "gbs/marking.hpp"
#include "gbs/matrix.hpp"

namespace gbs {

// G-orbit of an unordered pair of germs at a cover vertex, canonicalized
// over the diagonal vertex-group action on residues. Some of these turns are
// invisible in the quotient graph; the residues carry that information.
struct TurnOrbit {
  int vertex = -1;
  int e1 = -1;
  long long r1 = 0;
  int e2 = -1;
  long long r2 = 0;

  bool operator==(const TurnOrbit& o) const {
    return vertex == o.vertex && e1 == o.e1 && r1 == o.r1 && e2 == o.e2 &&
           r2 == o.r2;
  }
  bool operator<(const TurnOrbit& o) const {
    if (vertex != o.vertex) return vertex < o.vertex;
    if (e1 != o.e1) return e1 < o.e1;
    if (r1 != o.r1) return r1 < o.r1;
    if (e2 != o.e2) return e2 < o.e2;
    return r2 < o.r2;
  }
  bool degenerate() const { return e1 == e2 && r1 == r2; }
  std::string str(const GraphOfGroups& g) const;
};

struct TurnInfo {
  TurnOrbit turn;
  // Df collapses the two germs in one step; such a turn is illegal outright.
  bool image_degenerate = false;
  int induced = -1;  // index of the induced turn orbit when not degenerate
  bool legal = false;
};

// Legality status and induced map for every orbit class of turns; legality
// is decided by cycle detection on this finite set.
class TurnTable {
 public:
  const std::vector<TurnInfo>& turns() const { return turns_; }
  int size() const { return static_cast<int>(turns_.size()); }
  int index_of(const TurnOrbit& t) const;
  bool legal(const TurnOrbit& t) const { return turns_[index_of(t)].legal; }

 private:
  friend class TrainTrackMap;
  std::vector<TurnInfo> turns_;
  std::map<TurnOrbit, int> index_;
};

// A phi-equivariant self-map of the cover, given by images of one
// representative vertex per orbit and one representative edge per unoriented
// orbit. Immutable after construction.
class TrainTrackMap {
 public:
  TrainTrackMap(GraphOfGroups graph, Marking marking, Automorphism phi,
                Automorphism phi_inverse, std::vector<CoverPoint> vertex_images,
                std::map<int, CoverPath> edge_images_by_oriented_rep);

  TrainTrackMap(const TrainTrackMap& o);
  TrainTrackMap& operator=(const TrainTrackMap& o);

  const GraphOfGroups& graph() const { return *graph_; }
  const Marking& marking() const { return marking_; }
  const Automorphism& phi() const { return phi_; }
  const Automorphism& phi_inverse() const { return phi_inv_; }

  const CoverPoint& vertex_image(int v) const { return vertex_images_.at(v); }
  const CoverPath& edge_image(int e) const { return edge_images_.at(e); }

  // g with g x = rep vertex of the quotient vertex of x.
  Word transporter_to_rep(const CoverPoint& x) const;

  CoverPoint map_point(const CoverPoint& x) const;
  CoverPath map_edge(const CoverEdge& d) const;
  // Concatenated edge images; not tightened.
  CoverPath map_path(const CoverPath& p) const;
  CoverPath map_path_tight(const CoverPath& p) const;
  // Df: the first edge of f(d).
  CoverEdge direction(const CoverEdge& d) const;

  TurnOrbit canonical_turn(const CoverEdge& d1, const CoverEdge& d2) const;
  // Turns crossed by a tight path, one per interior vertex.
  std::vector<TurnOrbit> turns_of_path(const CoverPath& p) const;

  const TurnTable& turn_table() const { return turn_table_; }
  const IntMatrix& transition_matrix() const { return transition_; }

  std::string path_orbit_key(const CoverPath& p) const {
    return gbs::path_orbit_key(*graph_, marking_.base_paths, p);
  }

  // g with d = g * rep_edge(quotient edge of d).
  Word edge_transporter(const CoverEdge& d) const;

 private:
  std::shared_ptr<const GraphOfGroups> graph_;
  Marking marking_;
  Automorphism phi_;
  Automorphism phi_inv_;
  std::vector<CoverPoint> vertex_images_;
  std::vector<CoverPath> edge_images_;  // all oriented edges
  TurnTable turn_table_;
  IntMatrix transition_;
  // canonical-form cache; guarded so concurrent readers see stable results
  mutable std::mutex cache_mu_;
  mutable std::map<std::string, CoverPath> map_edge_cache_;

  void build_turn_table();
  void build_transition();
};

IntMatrix transition_matrix(const TrainTrackMap& f);

struct VerifyFailure {
  std::string what;
  std::optional<std::string> edge;      // offending edge orbit
  std::optional<TurnOrbit> turn;        // offending turn
};

// Checks edge images are nonempty tight legal paths and spot-checks
// phi-equivariance on pseudorandom samples.
std::optional<VerifyFailure> verify_train_track(const TrainTrackMap& f,
                                                int equivariance_samples = 8,
                                                unsigned seed = 0xC0FFEE);

struct ReducibilityCertificate {
  enum class Kind {
    invariant_essential_subforest,  // Lemma: invariant forest not collapsible
    pf_eigenvalue_one,              // irreducible permutation matrix
    periodic_partition,             // irreducible, not primitive
    one_edge_group,                 // BS(p,q) / Z*_Z Z: out of scope for iwip
  };
  Kind kind;
  std::vector<std::string> subforest_edges;
  int period = 1;
  std::string detail;
  std::string kind_str() const;
};

struct CollapseResult {
  // The map at the point of decision: the primitive representative when
  // primitive_found, otherwise the map the certificate talks about.
  std::optional<TrainTrackMap> final_map;
  bool primitive_found = false;
  bool one_edge_group = false;  // meaningful on the primitive branch
  std::optional<ReducibilityCertificate> certificate;
  std::vector<std::string> log;
};

// Collapse invariant collapsible subforests until the transition matrix is
// irreducible, then settle primitivity; emits either a primitive map or a
// reducibility certificate.
CollapseResult collapse_to_irreducible(const TrainTrackMap& f);

// Collapsibility of the subgraph spanned by the given unoriented orbit
// indices, by the peeling rule. On success the peel order is returned
// (oriented edge, each with its leaf at the origin).
std::optional<std::vector<int>> peel_collapsible(const GraphOfGroups& g,
                                                 const std::vector<int>& J);

// Contract the (collapsible) subgraph spanned by J and induce the map.
TrainTrackMap collapse_subgraph(const TrainTrackMap& f,
                                const std::vector<int>& J);

// Re-validation used by --recheck.
bool recheck_certificate(const TrainTrackMap& f,
                         const ReducibilityCertificate& c);

}  // namespace gbs

#endif  // GBS_TRAINTRACK_HPP
