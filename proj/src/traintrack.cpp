#include "gbs/traintrack.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <sstream>

namespace gbs {

std::string TurnOrbit::str(const GraphOfGroups& g) const {
  std::ostringstream os;
  os << g.vertex_id(vertex) << ":{" << g.edge_id(e1) << "+" << r1 << ","
     << g.edge_id(e2) << "+" << r2 << "}";
  return os.str();
}

int TurnTable::index_of(const TurnOrbit& t) const {
  auto it = index_.find(t);
  if (it == index_.end())
    throw internal_error("turn orbit missing from table: vertex " +
                         std::to_string(t.vertex));
  return it->second;
}

TrainTrackMap::TrainTrackMap(GraphOfGroups graph, Marking marking,
                             Automorphism phi, Automorphism phi_inverse,
                             std::vector<CoverPoint> vertex_images,
                             std::map<int, CoverPath> edge_images_by_rep)
    : graph_(std::make_shared<GraphOfGroups>(std::move(graph))),
      marking_(std::move(marking)),
      phi_(std::move(phi)),
      phi_inv_(std::move(phi_inverse)),
      vertex_images_(std::move(vertex_images)) {
  const GraphOfGroups& g = *graph_;
  marking_.validate(g);
  if (static_cast<int>(vertex_images_.size()) != g.num_vertices())
    throw input_error("need one vertex image per vertex orbit");
  edge_images_.resize(g.num_edges());
  std::vector<char> have(g.num_edges(), 0);
  for (auto& [e, path] : edge_images_by_rep) {
    if (e < 0 || e >= g.num_edges())
      throw input_error("edge image for unknown edge index");
    if (path.edges.empty())
      throw input_error("edge image of '" + g.edge_id(e) +
                        "' is a point; edges must map to nonempty paths");
    if (path.start != vertex_images_.at(g.origin(e)))
      throw input_error("edge image of '" + g.edge_id(e) +
                        "' does not start at the image of its origin");
    edge_images_[e] = path;
    have[e] = 1;
  }
  for (int e = 0; e < g.num_edges(); ++e) {
    if (have[e]) continue;
    int r = g.reverse(e);
    if (!have[r])
      throw input_error("no image given for edge orbit '" + g.edge_id(e) +
                        "'");
    // rep_edge(e) = h^{-1} * reverse(rep_edge(r)) for the transporter h of
    // reverse(rep_edge(r)); equivariance gives the image below.
    CoverEdge rev = edge_reverse(g, marking_.rep_edge(g, r));
    Word h = edge_transporter(rev);
    CoverPath img = act(g, phi_.apply(g, inverse(g, h)),
                        path_reverse(g, edge_images_[r]));
    edge_images_[e] = std::move(img);
    have[e] = 1;
  }
  // Endpoint consistency: f(endpoint of rep edge) must close up.
  for (int e = 0; e < g.num_edges(); ++e) {
    CoverPoint want = map_point(edge_endpoint(g, marking_.rep_edge(g, e)));
    if (path_endpoint(g, edge_images_[e]) != want)
      throw input_error("edge image of '" + g.edge_id(e) +
                        "' does not end at the image of its endpoint");
  }
  build_transition();
  build_turn_table();
}

TrainTrackMap::TrainTrackMap(const TrainTrackMap& o)
    : graph_(o.graph_),
      marking_(o.marking_),
      phi_(o.phi_),
      phi_inv_(o.phi_inv_),
      vertex_images_(o.vertex_images_),
      edge_images_(o.edge_images_),
      turn_table_(o.turn_table_),
      transition_(o.transition_) {
  std::lock_guard<std::mutex> lock(o.cache_mu_);
  map_edge_cache_ = o.map_edge_cache_;
}

TrainTrackMap& TrainTrackMap::operator=(const TrainTrackMap& o) {
  if (this == &o) return *this;
  graph_ = o.graph_;
  marking_ = o.marking_;
  phi_ = o.phi_;
  phi_inv_ = o.phi_inv_;
  vertex_images_ = o.vertex_images_;
  edge_images_ = o.edge_images_;
  turn_table_ = o.turn_table_;
  transition_ = o.transition_;
  std::scoped_lock lock(cache_mu_, o.cache_mu_);
  map_edge_cache_ = o.map_edge_cache_;
  return *this;
}

Word TrainTrackMap::transporter_to_rep(const CoverPoint& x) const {
  const GraphOfGroups& g = *graph_;
  int v = quotient_vertex(g, x);
  return reduce_word(
      g, concat(g, marking_.base_paths.at(v), inverse(g, x.path)));
}

Word TrainTrackMap::edge_transporter(const CoverEdge& d) const {
  const GraphOfGroups& g = *graph_;
  Word w = d.origin.path;
  if (w.syls.empty())
    w.head += d.germ;
  else
    w.syls.back().exp += d.germ;
  return reduce_word(
      g, concat(g, w, inverse(g, marking_.base_paths.at(g.origin(d.edge)))));
}

CoverPoint TrainTrackMap::map_point(const CoverPoint& x) const {
  const GraphOfGroups& g = *graph_;
  Word h = transporter_to_rep(x);  // h x = rep
  // x = h^{-1} rep, so f(x) = phi(h^{-1}) f(rep).
  return act(g, phi_.apply(g, inverse(g, h)),
             vertex_images_.at(quotient_vertex(g, x)));
}

CoverPath TrainTrackMap::map_edge(const CoverEdge& d) const {
  const GraphOfGroups& g = *graph_;
  std::string key = edge_key(g, d);
  {
    std::lock_guard<std::mutex> lock(cache_mu_);
    auto it = map_edge_cache_.find(key);
    if (it != map_edge_cache_.end()) return it->second;
  }
  Word h = edge_transporter(d);
  CoverPath out = act(g, phi_.apply(g, h), edge_images_.at(d.edge));
  std::lock_guard<std::mutex> lock(cache_mu_);
  return map_edge_cache_.emplace(std::move(key), std::move(out))
      .first->second;
}

CoverPath TrainTrackMap::map_path(const CoverPath& p) const {
  const GraphOfGroups& g = *graph_;
  CoverPath r;
  r.start = map_point(p.start);
  for (const CoverEdge& d : p.edges) {
    CoverPath img = map_edge(d);
    if (r.edges.empty()) {
      if (img.start != r.start)
        throw internal_error("map_path: inconsistent image start");
    } else if (img.start != edge_endpoint(g, r.edges.back())) {
      throw internal_error("map_path: image edges do not concatenate");
    }
    r.edges.insert(r.edges.end(), img.edges.begin(), img.edges.end());
  }
  return r;
}

CoverPath TrainTrackMap::map_path_tight(const CoverPath& p) const {
  return tighten(*graph_, map_path(p));
}

CoverEdge TrainTrackMap::direction(const CoverEdge& d) const {
  return map_edge(d).edges.front();
}

TurnOrbit TrainTrackMap::canonical_turn(const CoverEdge& d1,
                                        const CoverEdge& d2) const {
  const GraphOfGroups& g = *graph_;
  if (d1.origin != d2.origin)
    throw precondition_error("canonical_turn: germs at different vertices");
  int v = quotient_vertex(g, d1.origin);
  Word h = transporter_to_rep(d1.origin);
  CoverEdge a = act(g, h, d1), b = act(g, h, d2);
  long long la = g.label_abs(a.edge), lb = g.label_abs(b.edge);
  long long ra = static_cast<long long>(a.germ);
  long long rb = static_cast<long long>(b.germ);
  long long step = std::lcm(la, lb);
  if (step > (1 << 20))
    throw bound_exhausted("turn canonicalization sweep too large");
  TurnOrbit best;
  for (long long s = 0; s < step; ++s) {
    long long xa = (ra + s) % la, xb = (rb + s) % lb;
    TurnOrbit cand;
    cand.vertex = v;
    if (std::make_pair(a.edge, xa) <= std::make_pair(b.edge, xb)) {
      cand.e1 = a.edge;
      cand.r1 = xa;
      cand.e2 = b.edge;
      cand.r2 = xb;
    } else {
      cand.e1 = b.edge;
      cand.r1 = xb;
      cand.e2 = a.edge;
      cand.r2 = xa;
    }
    if (best.vertex < 0 || cand < best) best = cand;
  }
  return best;
}

std::vector<TurnOrbit> TrainTrackMap::turns_of_path(const CoverPath& p) const {
  const GraphOfGroups& g = *graph_;
  std::vector<TurnOrbit> out;
  for (size_t i = 0; i + 1 < p.edges.size(); ++i) {
    CoverEdge back = edge_reverse(g, p.edges[i]);
    out.push_back(canonical_turn(back, p.edges[i + 1]));
  }
  return out;
}

void TrainTrackMap::build_transition() {
  const GraphOfGroups& g = *graph_;
  int n = g.num_unoriented_edges();
  transition_ = IntMatrix::zero(n);
  for (int k = 0; k < n; ++k) {
    int e = g.unoriented_reps()[k];
    for (const CoverEdge& d : edge_images_[e].edges)
      transition_.at(g.unoriented_index(d.edge), k) += 1;
  }
}

void TrainTrackMap::build_turn_table() {
  const GraphOfGroups& g = *graph_;
  // Enumerate every orbit class of turns: pairs of germ families with
  // residues, canonicalized over the diagonal vertex-group shift.
  std::set<TurnOrbit> orbits;
  for (int v = 0; v < g.num_vertices(); ++v) {
    CoverPoint rep = marking_.rep_vertex(g, v);
    std::vector<CoverEdge> germs = germs_at(g, rep);
    for (size_t i = 0; i < germs.size(); ++i)
      for (size_t j = i + 1; j < germs.size(); ++j)
        orbits.insert(canonical_turn(germs[i], germs[j]));
  }
  turn_table_.turns_.clear();
  turn_table_.index_.clear();
  for (const TurnOrbit& t : orbits) {
    turn_table_.index_[t] = static_cast<int>(turn_table_.turns_.size());
    turn_table_.turns_.push_back(TurnInfo{t, false, -1, false});
  }
  // Induced map on orbit classes.
  for (TurnInfo& info : turn_table_.turns_) {
    CoverPoint rep = marking_.rep_vertex(g, info.turn.vertex);
    CoverEdge d1{rep, info.turn.e1, Int(info.turn.r1)};
    CoverEdge d2{rep, info.turn.e2, Int(info.turn.r2)};
    CoverEdge i1 = direction(d1), i2 = direction(d2);
    if (i1 == i2) {
      info.image_degenerate = true;
    } else {
      info.induced = turn_table_.index_of(canonical_turn(i1, i2));
    }
  }
  // Legality by cycle detection: a chain that meets a degenerate image is
  // illegal end to end; a chain that closes into a cycle is legal.
  int n = turn_table_.size();
  std::vector<int> status(n, -1);  // -1 unknown, 0 illegal, 1 legal
  for (int s = 0; s < n; ++s) {
    if (status[s] != -1) continue;
    std::vector<int> chain;
    std::vector<char> on_chain(n, 0);
    int cur = s;
    int verdict = -1;
    while (true) {
      if (status[cur] != -1) {
        verdict = status[cur];
        break;
      }
      if (on_chain[cur]) {
        verdict = 1;  // closed a non-degenerate cycle
        break;
      }
      on_chain[cur] = 1;
      chain.push_back(cur);
      if (turn_table_.turns_[cur].image_degenerate) {
        verdict = 0;
        break;
      }
      cur = turn_table_.turns_[cur].induced;
    }
    for (int t : chain) status[t] = verdict;
  }
  for (int t = 0; t < n; ++t) turn_table_.turns_[t].legal = status[t] == 1;
}

IntMatrix transition_matrix(const TrainTrackMap& f) {
  return f.transition_matrix();
}

namespace {

Word random_loop(const GraphOfGroups& g, int base, std::mt19937_64& rng,
                 int max_len, int max_exp) {
  std::uniform_int_distribution<int> len_dist(0, max_len);
  std::uniform_int_distribution<int> exp_dist(-max_exp, max_exp);
  for (int attempt = 0; attempt < 64; ++attempt) {
    Word w;
    w.start = base;
    w.head = exp_dist(rng);
    int at = base;
    int len = len_dist(rng);
    bool ok = true;
    for (int i = 0; i < len; ++i) {
      const auto& out = g.edges_at(at);
      if (out.empty()) {
        ok = false;
        break;
      }
      int e = out[std::uniform_int_distribution<size_t>(0, out.size() - 1)(
          rng)];
      w.syls.push_back({e, Int(exp_dist(rng))});
      at = g.terminus(e);
    }
    if (!ok || at != base) continue;
    return w;
  }
  Word w;
  w.start = base;
  return w;
}

}  // namespace

std::optional<VerifyFailure> verify_train_track(const TrainTrackMap& f,
                                                int equivariance_samples,
                                                unsigned seed) {
  const GraphOfGroups& g = f.graph();
  try {
    f.phi().check_relations(g, f.marking());
    f.phi_inverse().check_relations(g, f.marking());
    check_inverse_pair(g, f.marking(), f.phi(), f.phi_inverse());
  } catch (const input_error& err) {
    return VerifyFailure{std::string("marking data inconsistent: ") +
                             err.what(),
                         std::nullopt, std::nullopt};
  }
  for (int k = 0; k < g.num_unoriented_edges(); ++k) {
    int e = g.unoriented_reps()[k];
    const CoverPath& img = f.edge_image(e);
    if (img.edges.empty())
      return VerifyFailure{"edge image is a point", g.edge_id(e),
                           std::nullopt};
    if (!is_tight(g, img))
      return VerifyFailure{"edge image backtracks", g.edge_id(e),
                           std::nullopt};
    for (const TurnOrbit& t : f.turns_of_path(img)) {
      if (!f.turn_table().legal(t))
        return VerifyFailure{"edge image crosses an illegal turn",
                             g.edge_id(e), t};
    }
  }
  // phi-equivariance spot checks on pseudorandom points and edges.
  std::mt19937_64 rng(seed);
  int base = f.marking().basepoint;
  for (int s = 0; s < equivariance_samples; ++s) {
    Word gw = random_loop(g, base, rng, 4, 3);
    Word pw = random_loop(g, base, rng, 3, 2);  // loop; prefix gives a point
    CoverPoint x = make_point(g, pw);
    CoverPoint lhs = f.map_point(act(g, gw, x));
    CoverPoint rhs = act(g, f.phi().apply(g, gw), f.map_point(x));
    if (lhs != rhs)
      return VerifyFailure{"phi-equivariance fails on a sampled point",
                           std::nullopt, std::nullopt};
    for (const CoverEdge& d : germs_at(g, x)) {
      CoverPath l = f.map_edge(act(g, gw, d));
      CoverPath r = act(g, f.phi().apply(g, gw), f.map_edge(d));
      if (!(l == r))
        return VerifyFailure{"phi-equivariance fails on a sampled edge",
                             std::nullopt, std::nullopt};
      break;  // one germ per sample point is plenty
    }
  }
  return std::nullopt;
}

std::string ReducibilityCertificate::kind_str() const {
  switch (kind) {
    case Kind::invariant_essential_subforest:
      return "invariant-essential-subforest";
    case Kind::pf_eigenvalue_one:
      return "pf-eigenvalue-one";
    case Kind::periodic_partition:
      return "periodic-partition";
    case Kind::one_edge_group:
      return "one-edge-group";
  }
  return "?";
}

std::optional<std::vector<int>> peel_collapsible(const GraphOfGroups& g,
                                                 const std::vector<int>& J) {
  std::set<int> alive(J.begin(), J.end());
  std::vector<int> order;
  bool progress = true;
  while (progress && !alive.empty()) {
    progress = false;
    for (int u : std::vector<int>(alive.begin(), alive.end())) {
      int e = g.unoriented_reps()[u];
      for (int cand : {e, g.reverse(e)}) {
        int x = g.origin(cand);
        // valence of x within the remaining subgraph, germs not counted
        int valence = 0;
        for (int d : g.edges_at(x))
          if (alive.count(g.unoriented_index(d))) ++valence;
        // a loop at x contributes two oriented edges at x
        if (valence != 1) continue;
        if (g.label_abs(cand) != 1) continue;
        order.push_back(cand);
        alive.erase(u);
        progress = true;
        break;
      }
      if (progress) break;
    }
  }
  if (!alive.empty()) return std::nullopt;
  return order;
}

namespace {

struct Contraction {
  GraphOfGroups graph;
  WordMap fwd;  // old -> new
  WordMap bwd;  // new -> old
  std::vector<int> vertex_map;  // old vertex -> new vertex
  std::vector<int> edge_map;    // old edge -> new edge (-1 for contracted)
};

Contraction contract_edge(const GraphOfGroups& g, int c) {
  int x = g.origin(c), y = g.terminus(c);
  if (x == y) throw precondition_error("contract_edge: loop edge");
  long long eps = g.label(c);
  if (eps != 1 && eps != -1)
    throw precondition_error("contract_edge: label at dying end not +-1");
  long long q = g.label(g.reverse(c));

  std::vector<std::string> verts;
  std::vector<int> vmap(g.num_vertices(), -1);
  for (int v = 0; v < g.num_vertices(); ++v) {
    if (v == x) continue;
    vmap[v] = static_cast<int>(verts.size());
    verts.push_back(g.vertex_id(v));
  }
  vmap[x] = vmap[y];

  std::vector<GraphOfGroups::Edge> edges;
  std::vector<int> emap(g.num_edges(), -1);
  for (int e = 0; e < g.num_edges(); ++e) {
    if (e == c || e == g.reverse(c)) continue;
    emap[e] = static_cast<int>(edges.size());
    GraphOfGroups::Edge ed = g.edge(e);
    if (ed.origin == x) ed.label *= eps * q;  // a_x = a_y^{eps q}
    ed.origin = vmap[ed.origin == x ? y : ed.origin];
    ed.terminus = vmap[ed.terminus == x ? y : ed.terminus];
    edges.push_back(ed);
  }
  for (auto& ed : edges) {
    int old_rev = g.reverse(g.edge_index(ed.id));
    ed.reverse = emap[old_rev];
  }
  GraphOfGroups ng(verts, edges);

  WordMap fwd, bwd;
  fwd.vertex_to.resize(g.num_vertices());
  for (int v = 0; v < g.num_vertices(); ++v)
    fwd.vertex_to[v] = {vmap[v], v == x ? Int(eps * q) : Int(1)};
  fwd.edge_to.resize(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) {
    Word w;
    if (e == c || e == g.reverse(c)) {
      w.start = vmap[y];  // empty connector at the merged vertex
    } else {
      w.start = vmap[g.origin(e) == x ? y : g.origin(e)];
      w.syls.push_back({emap[e], Int(0)});
    }
    fwd.edge_to[e] = w;
  }
  bwd.vertex_to.resize(ng.num_vertices());
  for (int v = 0; v < g.num_vertices(); ++v)
    if (v != x) bwd.vertex_to[vmap[v]] = {v, Int(1)};
  bwd.edge_to.resize(ng.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) {
    if (e == c || e == g.reverse(c)) continue;
    Word w;
    w.start = g.origin(e) == x ? y : g.origin(e);
    if (g.origin(e) == x) w.syls.push_back({g.reverse(c), Int(0)});
    w.syls.push_back({e, Int(0)});
    if (g.terminus(e) == x) w.syls.push_back({c, Int(0)});
    bwd.edge_to[emap[e]] = w;
  }
  return Contraction{std::move(ng), std::move(fwd), std::move(bwd), vmap,
                     emap};
}

// Rebase the marking (and transported data) at a new basepoint.
TrainTrackMap rebase(const TrainTrackMap& f, int new_base) {
  const GraphOfGroups& g = f.graph();
  if (new_base == f.marking().basepoint) return f;
  Marking nm = Marking::bfs(g, new_base);
  Word p = f.marking().base_paths.at(new_base);  // old path to the new base
  Word pinv = inverse(g, p);
  auto conj = [&](const Word& loop_at_new) {
    return reduce_word(g, concat(g, concat(g, p, loop_at_new), pinv));
  };
  auto unconj = [&](const Word& loop_at_old) {
    return reduce_word(g, concat(g, concat(g, pinv, loop_at_old), p));
  };
  std::vector<Word> vi, ei, vii, eii;
  for (int v = 0; v < g.num_vertices(); ++v) {
    vi.push_back(unconj(f.phi().apply(g, conj(nm.vertex_loop(g, v, Int(1))))));
    vii.push_back(
        unconj(f.phi_inverse().apply(g, conj(nm.vertex_loop(g, v, Int(1))))));
  }
  for (int e = 0; e < g.num_edges(); ++e) {
    ei.push_back(unconj(f.phi().apply(g, conj(nm.edge_loop(g, e)))));
    eii.push_back(
        unconj(f.phi_inverse().apply(g, conj(nm.edge_loop(g, e)))));
  }
  Automorphism phi2(g, nm, vi, ei), phi2i(g, nm, vii, eii);
  // Points as words from the new base: W* = p^{-1} W.
  auto restar_point = [&](const CoverPoint& xs) {
    return make_point(g, concat(g, pinv, xs.path));
  };
  std::vector<CoverPoint> vimgs;
  for (int v = 0; v < g.num_vertices(); ++v) {
    CoverPoint old_rep = make_point(g, concat(g, p, nm.base_paths[v]));
    vimgs.push_back(restar_point(f.map_point(old_rep)));
  }
  std::map<int, CoverPath> eimgs;
  for (int e : g.unoriented_reps()) {
    CoverPath rep_path{nm.rep_vertex(g, g.origin(e)), {nm.rep_edge(g, e)}};
    CoverEdge rep_old = edge_from_word(g, concat(g, p, word_of_path(g, rep_path)));
    CoverPath img = f.map_edge(rep_old);
    CoverPath starred = path_from_point_and_word(g, restar_point(img.start),
                                                 germ_word_of_path(g, img));
    eimgs[e] = starred;
  }
  return TrainTrackMap(g, nm, phi2, phi2i, vimgs, eimgs);
}

}  // namespace

TrainTrackMap collapse_subgraph(const TrainTrackMap& f0,
                                const std::vector<int>& J) {
  auto order = peel_collapsible(f0.graph(), J);
  if (!order)
    throw precondition_error("collapse_subgraph: subgraph is not collapsible");
  // The basepoint must survive every contraction.
  std::set<int> dying;
  for (int c : *order) dying.insert(f0.graph().origin(c));
  TrainTrackMap f = f0;
  if (dying.count(f.marking().basepoint)) {
    int nb = -1;
    for (int v = 0; v < f.graph().num_vertices(); ++v)
      if (!dying.count(v)) {
        nb = v;
        break;
      }
    if (nb < 0) throw internal_error("collapse would kill every vertex");
    f = rebase(f, nb);
  }

  const GraphOfGroups& g0 = f.graph();
  std::vector<Contraction> steps;
  {
    const GraphOfGroups* cur = &g0;
    std::vector<int> cur_edge_ids;  // map original oriented edge -> current
    cur_edge_ids.resize(g0.num_edges());
    for (int e = 0; e < g0.num_edges(); ++e) cur_edge_ids[e] = e;
    for (int c : *order) {
      int cc = cur_edge_ids[c];
      if (cc < 0) throw internal_error("collapse: edge already contracted");
      steps.push_back(contract_edge(*cur, cc));
      const Contraction& st = steps.back();
      for (int e = 0; e < g0.num_edges(); ++e)
        if (cur_edge_ids[e] >= 0) cur_edge_ids[e] = st.edge_map[cur_edge_ids[e]];
      cur = &steps.back().graph;
    }
  }
  const GraphOfGroups& gf = steps.back().graph;

  auto fwd_word = [&](Word w) {
    const GraphOfGroups* cur = &g0;
    for (const Contraction& st : steps) {
      w = st.fwd.apply(*cur, st.graph, w);
      cur = &st.graph;
    }
    return w;
  };
  auto bwd_word = [&](Word w) {
    for (int i = static_cast<int>(steps.size()) - 1; i >= 0; --i) {
      const GraphOfGroups& src = steps[i].graph;
      const GraphOfGroups& dst = i == 0 ? g0 : steps[i - 1].graph;
      w = steps[i].bwd.apply(src, dst, w);
    }
    return w;
  };

  int base = f.marking().basepoint;
  int base_new = base;
  {
    for (const Contraction& st : steps) base_new = st.vertex_map[base_new];
  }
  Marking nm = Marking::bfs(gf, base_new);
  std::vector<Word> vi, ei, vii, eii;
  for (int v = 0; v < gf.num_vertices(); ++v) {
    Word lv = nm.vertex_loop(gf, v, Int(1));
    vi.push_back(reduce_word(gf, fwd_word(f.phi().apply(g0, bwd_word(lv)))));
    vii.push_back(
        reduce_word(gf, fwd_word(f.phi_inverse().apply(g0, bwd_word(lv)))));
  }
  for (int e = 0; e < gf.num_edges(); ++e) {
    Word le = nm.edge_loop(gf, e);
    ei.push_back(reduce_word(gf, fwd_word(f.phi().apply(g0, bwd_word(le)))));
    eii.push_back(
        reduce_word(gf, fwd_word(f.phi_inverse().apply(g0, bwd_word(le)))));
  }
  Automorphism phi2(gf, nm, vi, ei), phi2i(gf, nm, vii, eii);

  std::vector<CoverPoint> vimgs;
  for (int v = 0; v < gf.num_vertices(); ++v) {
    CoverPoint x_old = make_point(g0, bwd_word(nm.base_paths[v]));
    CoverPoint y_old = f.map_point(x_old);
    vimgs.push_back(make_point(gf, fwd_word(y_old.path)));
  }
  std::map<int, CoverPath> eimgs;
  for (int e : gf.unoriented_reps()) {
    Word we = word_of_path(
        gf, CoverPath{nm.rep_vertex(gf, gf.origin(e)), {nm.rep_edge(gf, e)}});
    // The unrewritten word may end with a connector through the collapsed
    // part; the old counterpart is the unique edge with the surviving id.
    CoverPath back = path_from_word(g0, bwd_word(we));
    int old_e = g0.edge_index(gf.edge_id(e));
    CoverEdge d_old;
    bool found = false;
    for (const CoverEdge& d : back.edges)
      if (d.edge == old_e) {
        d_old = d;
        found = true;
      }
    if (!found)
      throw internal_error("collapse: lost track of a surviving edge");
    CoverPath p_old = f.map_edge(d_old);
    CoverPoint start_new = make_point(gf, fwd_word(p_old.start.path));
    CoverPath p_new = path_from_point_and_word(
        gf, start_new, fwd_word(germ_word_of_path(g0, p_old)));
    // Collapse sends tight paths to tight paths.
    if (!is_tight(gf, p_new))
      throw internal_error("collapse produced a backtracking edge image");
    eimgs[e] = p_new;
  }
  return TrainTrackMap(gf, nm, phi2, phi2i, vimgs, eimgs);
}

CollapseResult collapse_to_irreducible(const TrainTrackMap& f0) {
  CollapseResult out;
  TrainTrackMap f = f0;
  for (int round = 0; round < 1 + f0.graph().num_edges(); ++round) {
    const IntMatrix& A = f.transition_matrix();
    auto irr = is_irreducible(A);
    const GraphOfGroups& g = f.graph();
    if (!irr.irreducible) {
      std::vector<int> J = irr.invariant_block;
      std::vector<std::string> ids;
      for (int u : J) ids.push_back(g.edge_id(g.unoriented_reps()[u]));
      auto peel = peel_collapsible(g, J);
      if (!peel) {
        ReducibilityCertificate c;
        c.kind = ReducibilityCertificate::Kind::invariant_essential_subforest;
        c.subforest_edges = ids;
        c.detail =
            "transition matrix is reducible and the invariant subgraph is "
            "essential (not collapsible)";
        out.certificate = c;
        out.final_map = f;
        return out;
      }
      std::string lg = "collapse invariant subforest {";
      for (size_t i = 0; i < ids.size(); ++i)
        lg += (i ? "," : "") + ids[i];
      lg += "}";
      out.log.push_back(lg);
      f = collapse_subgraph(f, J);
      auto fail = verify_train_track(f);
      if (fail)
        throw internal_error(
            "collapsed map lost the train track property: " + fail->what);
      continue;
    }
    // Irreducible. lambda_PF = 1 exactly for permutation matrices.
    GraphDiagnosis diag = validate_graph(g);
    if (pf_is_one(A)) {
      ReducibilityCertificate c;
      if (diag.reduced_edge_count >= 2) {
        c.kind = ReducibilityCertificate::Kind::pf_eigenvalue_one;
        c.detail =
            "transition matrix is a permutation matrix, so f is an isometry "
            "and preserves a proper subgraph";
      } else {
        c.kind = ReducibilityCertificate::Kind::one_edge_group;
        c.detail =
            "group is BS(p,q) or an amalgam Z*_Z Z; such groups are outside "
            "the scope of irreducibility decisions";
      }
      for (int u = 0; u < A.n; ++u)
        c.subforest_edges.push_back(g.edge_id(g.unoriented_reps()[u]));
      out.certificate = c;
      out.final_map = f;
      return out;
    }
    if (!is_primitive(A)) {
      // Irreducible non-primitive: f permutes the classes of a partition of
      // the edge orbits; some class spans an essential subforest invariant
      // under the corresponding power.
      int n = A.n;
      std::vector<long long> level(n, -1);
      std::queue<int> q;
      level[0] = 0;
      q.push(0);
      while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v2 = 0; v2 < n; ++v2)
          if (A.a[v2][u] > 0 && level[v2] < 0) {
            level[v2] = level[u] + 1;
            q.push(v2);
          }
      }
      long long h = 0;
      for (int u = 0; u < n; ++u)
        for (int v2 = 0; v2 < n; ++v2)
          if (A.a[v2][u] > 0) h = std::gcd(h, level[u] + 1 - level[v2]);
      ReducibilityCertificate c;
      c.kind = ReducibilityCertificate::Kind::periodic_partition;
      c.period = static_cast<int>(h);
      for (long long r = 0; r < h; ++r) {
        std::vector<int> cls;
        for (int u = 0; u < n; ++u)
          if (mod_nonneg(Int(level[u]), Int(h)) == r) cls.push_back(u);
        if (!peel_collapsible(g, cls)) {
          for (int u : cls)
            c.subforest_edges.push_back(g.edge_id(g.unoriented_reps()[u]));
          break;
        }
      }
      c.detail =
          "transition matrix is irreducible but periodic; the listed class "
          "spans an essential subforest invariant under f^period";
      out.certificate = c;
      out.final_map = f;
      return out;
    }
    out.final_map = f;
    out.primitive_found = true;
    out.one_edge_group = diag.reduced_edge_count == 1;
    return out;
  }
  throw internal_error("collapse_to_irreducible did not terminate");
}

bool recheck_certificate(const TrainTrackMap& f,
                         const ReducibilityCertificate& c) {
  const GraphOfGroups& g = f.graph();
  const IntMatrix& A = f.transition_matrix();
  std::vector<int> J;
  for (const std::string& id : c.subforest_edges)
    J.push_back(g.unoriented_index(g.edge_index(id)));
  switch (c.kind) {
    case ReducibilityCertificate::Kind::invariant_essential_subforest: {
      std::set<int> js(J.begin(), J.end());
      for (int j : J)
        for (int i = 0; i < A.n; ++i)
          if (A.a[i][j] > 0 && !js.count(i)) return false;
      if (js.size() == static_cast<size_t>(A.n)) return false;
      return !peel_collapsible(g, J).has_value();
    }
    case ReducibilityCertificate::Kind::pf_eigenvalue_one: {
      auto irr = is_irreducible(A);
      return irr.irreducible && pf_is_one(A) &&
             validate_graph(g).reduced_edge_count >= 2;
    }
    case ReducibilityCertificate::Kind::periodic_partition: {
      if (!is_irreducible(A).irreducible || is_primitive(A)) return false;
      // invariance of the class under A^period
      IntMatrix P = A;
      for (int i = 1; i < c.period; ++i) P = matmul(P, A);
      std::set<int> js(J.begin(), J.end());
      for (int j : J)
        for (int i = 0; i < P.n; ++i)
          if (P.a[i][j] > 0 && !js.count(i)) return false;
      return !peel_collapsible(g, J).has_value();
    }
    case ReducibilityCertificate::Kind::one_edge_group:
      return validate_graph(g).reduced_edge_count == 1;
  }
  return false;
}

}  // namespace gbs
