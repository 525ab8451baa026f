#ifndef GBS_GRAPH_HPP
#define GBS_GRAPH_HPP

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "gbs/errors.hpp"
#include "gbs/numeric.hpp"

#include "json.hpp"

namespace gbs {

// Finite graph of infinite cyclic groups. Oriented edges come in reverse
// pairs; the label lambda(e) sits at the origin of e and describes the
// inclusion of the edge group into G_{o(e)}: a_e -> a_{o(e)}^{lambda(e)}.
// The Bass relation for every oriented edge e with p = lambda(e),
// q = lambda(ebar) is  a_{o(e)}^p = t_e a_{t(e)}^q t_e^{-1}.
class GraphOfGroups {
 public:
  struct Edge {
    std::string id;
    int reverse;
    int origin;
    int terminus;
    long long label;
  };

  GraphOfGroups(std::vector<std::string> vertex_ids, std::vector<Edge> edges);

  static GraphOfGroups from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  // e and reverse(e) count once.
  int num_unoriented_edges() const { return num_edges() / 2; }

  const std::string& vertex_id(int v) const { return vertices_.at(v); }
  const Edge& edge(int e) const { return edges_.at(e); }
  const std::string& edge_id(int e) const { return edges_.at(e).id; }
  int reverse(int e) const { return edges_.at(e).reverse; }
  int origin(int e) const { return edges_.at(e).origin; }
  int terminus(int e) const { return edges_.at(e).terminus; }
  long long label(int e) const { return edges_.at(e).label; }
  long long label_abs(int e) const {
    long long l = edges_.at(e).label;
    return l < 0 ? -l : l;
  }

  int vertex_index(const std::string& id) const;
  int edge_index(const std::string& id) const;

  // Oriented edges with the given origin, in construction order.
  const std::vector<int>& edges_at(int v) const { return at_vertex_.at(v); }

  // Sum of |lambda(e)| over e with o(e) = v: the degree of every cover
  // vertex above v.
  Int cover_degree(int v) const;

  // For each reverse pair, the lower index of the two. Gives the indexing of
  // transition matrices.
  const std::vector<int>& unoriented_reps() const { return unoriented_reps_; }
  int unoriented_index(int e) const { return unoriented_index_.at(e); }

  bool operator==(const GraphOfGroups& o) const;

 private:
  std::vector<std::string> vertices_;
  std::vector<Edge> edges_;
  std::map<std::string, int> vertex_by_id_;
  std::map<std::string, int> edge_by_id_;
  std::vector<std::vector<int>> at_vertex_;
  std::vector<int> unoriented_reps_;
  std::vector<int> unoriented_index_;

  void check_invariants() const;
};

// Outcome of the solvability certification run by validate_graph.
struct GraphDiagnosis {
  bool ok = false;
  // Shape of the graph after contracting segments with a +-1 end; 0, 1 or 2
  // means "the group is Z / one-edge (BS(p,q) or amalgam) / bigger".
  int reduced_edge_count = 0;
  bool reduced_to_loop = false;
  std::string rejection;  // empty when ok
};

// Confirms structural invariants and rejects the solvable shapes the
// certification can see: Z, Z^2, Klein bottle (both one-edge splittings),
// BS(1,n). Exotic presentations of solvable groups are the caller's burden.
GraphDiagnosis validate_graph(const GraphOfGroups& g);

}  // namespace gbs

#endif  // GBS_GRAPH_HPP
