#include "gbs/graph.hpp"

#include <algorithm>
#include <queue>
#include <set>

namespace gbs {

GraphOfGroups::GraphOfGroups(std::vector<std::string> vertex_ids,
                             std::vector<Edge> edges)
    : vertices_(std::move(vertex_ids)), edges_(std::move(edges)) {
  for (int v = 0; v < num_vertices(); ++v) {
    if (!vertex_by_id_.emplace(vertices_[v], v).second)
      throw input_error("duplicate vertex id '" + vertices_[v] + "'");
  }
  for (int e = 0; e < num_edges(); ++e) {
    if (!edge_by_id_.emplace(edges_[e].id, e).second)
      throw input_error("duplicate edge id '" + edges_[e].id + "'");
  }
  check_invariants();
  at_vertex_.assign(num_vertices(), {});
  for (int e = 0; e < num_edges(); ++e)
    at_vertex_[edges_[e].origin].push_back(e);
  unoriented_index_.assign(num_edges(), -1);
  for (int e = 0; e < num_edges(); ++e) {
    int r = edges_[e].reverse;
    if (e < r) {
      unoriented_index_[e] = static_cast<int>(unoriented_reps_.size());
      unoriented_index_[r] = unoriented_index_[e];
      unoriented_reps_.push_back(e);
    }
  }
}

void GraphOfGroups::check_invariants() const {
  if (vertices_.empty()) throw input_error("graph has no vertices");
  for (int e = 0; e < num_edges(); ++e) {
    const Edge& ed = edges_[e];
    if (ed.label == 0)
      throw input_error("edge '" + ed.id + "' has label 0");
    if (ed.reverse < 0 || ed.reverse >= num_edges())
      throw input_error("edge '" + ed.id + "' has out-of-range reverse");
    if (ed.reverse == e)
      throw input_error("edge '" + ed.id + "' is its own reverse");
    const Edge& rev = edges_[ed.reverse];
    if (rev.reverse != e)
      throw input_error("reversal is not an involution at edge '" + ed.id +
                        "'");
    if (rev.origin != ed.terminus || rev.terminus != ed.origin)
      throw input_error("reverse of edge '" + ed.id +
                        "' has inconsistent endpoints");
    if (ed.origin < 0 || ed.origin >= num_vertices() || ed.terminus < 0 ||
        ed.terminus >= num_vertices())
      throw input_error("edge '" + ed.id + "' has out-of-range endpoint");
  }
  // connectivity
  std::vector<char> seen(num_vertices(), 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int e = 0; e < num_edges(); ++e) {
      if (edges_[e].origin == v && !seen[edges_[e].terminus]) {
        seen[edges_[e].terminus] = 1;
        q.push(edges_[e].terminus);
      }
    }
  }
  for (int v = 0; v < num_vertices(); ++v)
    if (!seen[v])
      throw input_error("graph is not connected (vertex '" + vertices_[v] +
                        "' unreachable)");
}

int GraphOfGroups::vertex_index(const std::string& id) const {
  auto it = vertex_by_id_.find(id);
  if (it == vertex_by_id_.end())
    throw input_error("unknown vertex '" + id + "'");
  return it->second;
}

int GraphOfGroups::edge_index(const std::string& id) const {
  auto it = edge_by_id_.find(id);
  if (it == edge_by_id_.end()) throw input_error("unknown edge '" + id + "'");
  return it->second;
}

Int GraphOfGroups::cover_degree(int v) const {
  Int d = 0;
  for (int e : at_vertex_.at(v)) d += label_abs(e);
  return d;
}

bool GraphOfGroups::operator==(const GraphOfGroups& o) const {
  if (vertices_ != o.vertices_ || num_edges() != o.num_edges()) return false;
  for (int e = 0; e < num_edges(); ++e) {
    const Edge &a = edges_[e], &b = o.edges_[e];
    if (a.id != b.id || a.reverse != b.reverse || a.origin != b.origin ||
        a.terminus != b.terminus || a.label != b.label)
      return false;
  }
  return true;
}

GraphOfGroups GraphOfGroups::from_json(const nlohmann::json& j) {
  if (!j.contains("vertices") || !j.contains("edges"))
    throw input_error("graph json needs 'vertices' and 'edges'");
  std::vector<std::string> verts;
  for (const auto& v : j.at("vertices")) verts.push_back(v.get<std::string>());
  std::map<std::string, int> vidx;
  for (int i = 0; i < static_cast<int>(verts.size()); ++i) vidx[verts[i]] = i;
  std::map<std::string, int> eidx;
  const auto& je = j.at("edges");
  for (int i = 0; i < static_cast<int>(je.size()); ++i)
    eidx[je[i].at("id").get<std::string>()] = i;
  std::vector<Edge> edges;
  for (const auto& e : je) {
    Edge ed;
    ed.id = e.at("id").get<std::string>();
    std::string rev = e.at("reverse").get<std::string>();
    if (!eidx.count(rev))
      throw input_error("edge '" + ed.id + "' reverses unknown edge '" + rev +
                        "'");
    ed.reverse = eidx[rev];
    std::string o = e.at("origin").get<std::string>();
    std::string t = e.at("terminus").get<std::string>();
    if (!vidx.count(o) || !vidx.count(t))
      throw input_error("edge '" + ed.id + "' has unknown endpoint");
    ed.origin = vidx[o];
    ed.terminus = vidx[t];
    ed.label = e.at("label").get<long long>();
    edges.push_back(ed);
  }
  return GraphOfGroups(std::move(verts), std::move(edges));
}

nlohmann::json GraphOfGroups::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["vertices"] = vertices_;
  nlohmann::ordered_json edges = nlohmann::json::array();
  for (const Edge& e : edges_) {
    nlohmann::ordered_json je;
    je["id"] = e.id;
    je["reverse"] = edges_[e.reverse].id;
    je["origin"] = vertices_[e.origin];
    je["terminus"] = vertices_[e.terminus];
    je["label"] = e.label;
    edges.push_back(je);
  }
  j["edges"] = edges;
  return j;
}

namespace {

// Scratch copy used by the solvability certification. Contracting a segment
// whose label at one end is +-1 is a deformation; the reduced shape exposes
// the one-edge presentations named in the introduction.
struct ScratchGraph {
  struct E {
    int rev, org, ter;
    long long label;
    bool alive = true;
  };
  std::vector<E> edges;
  std::vector<char> vertex_alive;

  explicit ScratchGraph(const GraphOfGroups& g) {
    vertex_alive.assign(g.num_vertices(), 1);
    edges.resize(g.num_edges());
    for (int e = 0; e < g.num_edges(); ++e)
      edges[e] = {g.reverse(e), g.origin(e), g.terminus(e), g.label(e), true};
  }

  int alive_edge_pairs() const {
    int n = 0;
    for (size_t e = 0; e < edges.size(); ++e)
      if (edges[e].alive && static_cast<int>(e) < edges[e].rev) ++n;
    return n;
  }

  // Contract edge e (a segment, label(e) = +-1 at o(e)); o(e) dies into t(e).
  void contract(int e) {
    int x = edges[e].org, y = edges[e].ter;
    long long eps = edges[e].label;            // +-1
    long long q = edges[edges[e].rev].label;   // other end
    edges[e].alive = edges[edges[e].rev].alive = false;
    vertex_alive[x] = 0;
    for (auto& f : edges) {
      if (!f.alive) continue;
      if (f.org == x) {
        f.org = y;
        f.label *= eps * q;  // a_x = a_y^{eps*q} after the contraction
      }
      if (f.ter == x) f.ter = y;
    }
  }

  bool contract_once() {
    for (size_t e = 0; e < edges.size(); ++e) {
      auto& ed = edges[e];
      if (ed.alive && ed.org != ed.ter && (ed.label == 1 || ed.label == -1)) {
        contract(static_cast<int>(e));
        return true;
      }
    }
    return false;
  }
};

}  // namespace

GraphDiagnosis validate_graph(const GraphOfGroups& g) {
  GraphDiagnosis d;
  // The Bass-Serre tree must be minimal: a valence-1 vertex whose edge
  // carries label +-1 at that end spans a strippable invariant subtree.
  for (int v = 0; v < g.num_vertices(); ++v) {
    const auto& out = g.edges_at(v);
    if (out.size() == 1 && g.label_abs(out[0]) == 1 &&
        g.terminus(out[0]) != v) {
      d.rejection = "graph is not reduced: leaf vertex '" + g.vertex_id(v) +
                    "' carries label +-1; collapse its edge first";
      return d;
    }
  }
  ScratchGraph s(g);
  while (s.contract_once()) {}
  d.reduced_edge_count = s.alive_edge_pairs();

  if (d.reduced_edge_count == 0) {
    d.rejection = "group is Z (graph contracts to a point)";
    return d;
  }
  if (d.reduced_edge_count == 1) {
    int e = -1;
    for (size_t i = 0; i < s.edges.size(); ++i)
      if (s.edges[i].alive) { e = static_cast<int>(i); break; }
    long long p = s.edges[e].label;
    long long q = s.edges[s.edges[e].rev].label;
    long long ap = p < 0 ? -p : p, aq = q < 0 ? -q : q;
    if (s.edges[e].org == s.edges[e].ter) {
      d.reduced_to_loop = true;
      if (ap == 1 && aq == 1) {
        d.rejection = (p * q == 1) ? "group is Z^2 (loop with labels +-1,+-1)"
                                   : "group is the Klein bottle group (loop "
                                     "with labels 1,-1)";
        return d;
      }
      if (ap == 1 || aq == 1) {
        d.rejection = "group is the solvable group BS(1," +
                      std::to_string(ap == 1 ? q : p) + ")";
        return d;
      }
      // BS(p,q), |p|,|q| >= 2: non-solvable.
    } else {
      if (ap == 2 && aq == 2) {
        d.rejection =
            "group is the Klein bottle group (amalgam a^2 = b^2)";
        return d;
      }
      // Z *_Z Z with min label >= 2 (reduction removed any +-1 end).
    }
  }
  d.ok = true;
  return d;
}

}  // namespace gbs
