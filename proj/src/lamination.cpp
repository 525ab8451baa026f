#include "gbs/lamination.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

namespace gbs {

int WhiteheadGraph::node_index(int edge, long long residue) const {
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].first == edge && nodes[i].second == residue)
      return static_cast<int>(i);
  throw internal_error("whitehead graph: unknown germ");
}

LaminationData whitehead_graphs(const TrainTrackMap& f, int seed_orbit,
                                int max_rounds) {
  const GraphOfGroups& g = f.graph();
  LaminationData out;
  auto pos = positivity_exponent(f.transition_matrix());
  if (!pos)
    throw precondition_error(
        "whitehead_graphs: transition matrix is not primitive");
  out.positivity = *pos;
  int K = f.turn_table().size();
  out.cap = *pos + 1 + K;

  // Round r of the saturation carries exactly the turn orbits of f^r(seed):
  // first-type turns of all crossed edge orbits, plus induced images of the
  // previous round's turns.
  std::set<int> crossed;  // unoriented orbit indices
  crossed.insert(seed_orbit);
  std::set<TurnOrbit> turns;
  auto first_type = [&](int orbit) {
    int e = g.unoriented_reps()[orbit];
    return f.turns_of_path(f.edge_image(e));
  };
  int rounds = 0;
  for (int r = 1; r <= max_rounds; ++r) {
    size_t nt = turns.size(), nc = crossed.size();
    // induced images of current turns
    std::vector<TurnOrbit> add;
    for (const TurnOrbit& t : turns) {
      const TurnInfo& info = f.turn_table().turns()[f.turn_table().index_of(t)];
      if (info.image_degenerate)
        throw internal_error("lamination crossed an illegal turn");
      add.push_back(f.turn_table().turns()[info.induced].turn);
    }
    // first-type turns of the currently crossed orbits, and the expansion
    // of the crossed set
    std::set<int> next_crossed;
    for (int orbit : crossed) {
      for (const TurnOrbit& t : first_type(orbit)) add.push_back(t);
      int e = g.unoriented_reps()[orbit];
      for (const CoverEdge& d : f.edge_image(e).edges)
        next_crossed.insert(g.unoriented_index(d.edge));
    }
    for (const TurnOrbit& t : add) turns.insert(t);
    for (int c : next_crossed) crossed.insert(c);
    rounds = r;
    if (turns.size() == nt && crossed.size() == nc) break;
    if (r == out.cap) break;  // the lemma's bound: everything has appeared
  }
  out.rounds = rounds;
  out.turns.assign(turns.begin(), turns.end());

  // assemble per-vertex graphs
  for (int v = 0; v < g.num_vertices(); ++v) {
    WhiteheadGraph w;
    w.vertex = v;
    for (int e : g.edges_at(v))
      for (long long i = 0; i < g.label_abs(e); ++i) w.nodes.push_back({e, i});
    out.graphs.emplace(v, std::move(w));
  }
  for (const TurnOrbit& t : out.turns) {
    WhiteheadGraph& w = out.graphs.at(t.vertex);
    long long l1 = g.label_abs(t.e1), l2 = g.label_abs(t.e2);
    long long period = std::lcm(l1, l2);
    for (long long s = 0; s < period; ++s) {
      int a = w.node_index(t.e1, (t.r1 + s) % l1);
      int b = w.node_index(t.e2, (t.r2 + s) % l2);
      if (a == b) continue;
      w.links.insert({std::min(a, b), std::max(a, b)});
    }
  }
  // connected components per graph
  for (auto& [v, w] : out.graphs) {
    int n = static_cast<int>(w.nodes.size());
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (auto& [a, b] : w.links) parent[find(a)] = find(b);
    std::map<int, int> root_id;
    w.component_of.assign(n, -1);
    for (int i = 0; i < n; ++i) {
      int r = find(i);
      auto it = root_id.emplace(r, static_cast<int>(root_id.size()));
      w.component_of[i] = it.first->second;
    }
    w.component_count = static_cast<int>(root_id.size());
  }
  return out;
}

std::vector<ComponentWitness> component_analysis(const GraphOfGroups& g,
                                                 const WhiteheadGraph& w,
                                                 const FamilyA& fam) {
  int n = static_cast<int>(w.nodes.size());
  // germ rotation by the vertex generator: (e, i) -> (e, i+1 mod |lambda|)
  std::vector<int> rotate(n);
  for (int i = 0; i < n; ++i) {
    auto [e, r] = w.nodes[i];
    rotate[i] = w.node_index(e, (r + 1) % g.label_abs(e));
  }
  // induced permutation on components
  std::vector<int> comp_image(w.component_count, -1);
  for (int i = 0; i < n; ++i) {
    int c = w.component_of[i];
    int ci = w.component_of[rotate[i]];
    if (comp_image[c] >= 0 && comp_image[c] != ci)
      throw internal_error("germ rotation does not permute components");
    comp_image[c] = ci;
  }
  std::vector<ComponentWitness> out(w.component_count);
  for (int i = 0; i < n; ++i) out[w.component_of[i]].germs.push_back(i);
  std::vector<char> seen(w.component_count, 0);
  for (int c = 0; c < w.component_count; ++c) {
    if (seen[c]) continue;
    // orbit of c under the cyclic action: i(C) = orbit size, since the
    // action of the infinite cyclic G_v factors through a finite rotation
    std::vector<int> orbit;
    int cur = c;
    do {
      orbit.push_back(cur);
      seen[cur] = 1;
      cur = comp_image[cur];
    } while (cur != c);
    long long idx = static_cast<long long>(orbit.size());
    for (int m : orbit) {
      out[m].index = idx;
      if (fam.unrestricted) {
        out[m].in_family = true;
        out[m].matched_divisor = 1;
      } else {
        auto it = fam.divisors.find(w.vertex);
        if (it != fam.divisors.end()) {
          for (long long d : it->second)
            if (d != 0 && idx % d == 0) {
              out[m].in_family = true;
              out[m].matched_divisor = d;
              break;
            }
        }
      }
    }
  }
  return out;
}

IwipVerdict decide_fully_irreducible(const TrainTrackMap& f,
                                     const FamilyA& fam, int max_rounds) {
  const GraphOfGroups& g = f.graph();
  IwipVerdict out;
  out.lamination = whitehead_graphs(f, 0, max_rounds);
  out.fully_irreducible = true;
  for (auto& [v, w] : out.lamination.graphs) {
    out.connected[v] = w.connected();
    if (w.connected()) continue;
    std::vector<ComponentWitness> comps = component_analysis(g, w, fam);
    for (size_t c = 0; c < comps.size(); ++c) {
      if (comps[c].in_family) {
        // a component stabilizer lies in the family: reducible
        out.fully_irreducible = false;
        if (!out.certificate) {
          IwipCertificate cert;
          cert.vertex = v;
          cert.components = comps;
          cert.witness_component = static_cast<int>(c);
          out.certificate = cert;
        }
        break;
      }
    }
    // disconnected but no component stabilizer in the family: the leaf is
    // carried by no special factor of the restricted space, so this vertex
    // does not obstruct full irreducibility
  }
  return out;
}

}  // namespace gbs
