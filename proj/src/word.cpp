#include "gbs/word.hpp"

#include <set>
#include <sstream>

namespace gbs {

bool Word::operator<(const Word& o) const {
  if (start != o.start) return start < o.start;
  if (head != o.head) return head < o.head;
  if (syls.size() != o.syls.size()) return syls.size() < o.syls.size();
  for (size_t i = 0; i < syls.size(); ++i) {
    if (syls[i].edge != o.syls[i].edge) return syls[i].edge < o.syls[i].edge;
    if (syls[i].exp != o.syls[i].exp) return syls[i].exp < o.syls[i].exp;
  }
  return false;
}

void check_path(const GraphOfGroups& g, const Word& w) {
  if (w.start < 0 || w.start >= g.num_vertices())
    throw precondition_error("word start vertex out of range");
  int at = w.start;
  for (const Syllable& s : w.syls) {
    if (s.edge < 0 || s.edge >= g.num_edges())
      throw precondition_error("word edge out of range");
    if (g.origin(s.edge) != at)
      throw precondition_error("path condition violated at edge '" +
                               g.edge_id(s.edge) + "'");
    at = g.terminus(s.edge);
  }
}

int end_vertex(const GraphOfGroups& g, const Word& w) {
  return w.syls.empty() ? w.start : g.terminus(w.syls.back().edge);
}

bool is_loop(const GraphOfGroups& g, const Word& w) {
  return end_vertex(g, w) == w.start;
}

Word concat(const GraphOfGroups& g, const Word& a, const Word& b) {
  if (end_vertex(g, a) != b.start)
    throw precondition_error("concat: path endpoints do not match");
  Word r = a;
  if (r.syls.empty())
    r.head += b.head;
  else
    r.syls.back().exp += b.head;
  r.syls.insert(r.syls.end(), b.syls.begin(), b.syls.end());
  return r;
}

Word inverse(const GraphOfGroups& g, const Word& w) {
  Word r;
  r.start = end_vertex(g, w);
  r.head = w.syls.empty() ? -w.head : -w.syls.back().exp;
  r.syls.reserve(w.syls.size());
  for (int i = w.length() - 1; i >= 0; --i) {
    Int prev = i == 0 ? w.head : w.syls[i - 1].exp;
    r.syls.push_back({g.reverse(w.syls[i].edge), -prev});
  }
  return r;
}

Word power(const GraphOfGroups& g, const Word& w, long long n) {
  if (n < 0) return power(g, inverse(g, w), -n);
  if (n >= 2 && !is_loop(g, w))
    throw precondition_error("power: base is not a loop");
  Word r;
  r.start = w.start;
  for (long long i = 0; i < n; ++i) r = concat(g, r, w);
  return r;
}

Word reduce_word(const GraphOfGroups& g, const Word& w) {
  Word r;
  r.start = w.start;
  r.head = w.head;
  r.syls.reserve(w.syls.size());
  for (const Syllable& s : w.syls) {
    if (!r.syls.empty() && s.edge == g.reverse(r.syls.back().edge) &&
        divides(g.label(s.edge), r.syls.back().exp)) {
      // t_f a^{m} t_{fbar} = a^{lambda(f) * m / lambda(fbar)}
      int f = r.syls.back().edge;
      Int m = r.syls.back().exp;
      r.syls.pop_back();
      Int add = m / g.label(s.edge) * g.label(f) + s.exp;
      if (r.syls.empty())
        r.head += add;
      else
        r.syls.back().exp += add;
    } else {
      r.syls.push_back(s);
    }
  }
  return r;
}

bool is_reduced(const GraphOfGroups& g, const Word& w) {
  for (int i = 0; i + 1 < w.length(); ++i)
    if (w.syls[i + 1].edge == g.reverse(w.syls[i].edge) &&
        divides(g.label(w.syls[i + 1].edge), w.syls[i].exp))
      return false;
  return true;
}

Word normal_form(const GraphOfGroups& g, const Word& w) {
  Word r = reduce_word(g, w);
  for (int i = 0; i < r.length(); ++i) {
    Int& before = i == 0 ? r.head : r.syls[i - 1].exp;
    int e = r.syls[i].edge;
    long long pa = g.label_abs(e);
    if (before >= 0 && before < pa) continue;  // already in germ range
    Int p(g.label(e)), q(g.label(g.reverse(e)));
    Int rem = mod_nonneg(before, p);
    Int s = (before - rem) / p;
    if (s != 0) {
      before = rem;
      r.syls[i].exp += q * s;  // a^{p s} t_e = t_e a^{q s}
    }
  }
  return r;
}

bool is_trivial(const GraphOfGroups& g, const Word& w) {
  if (!is_loop(g, w)) throw precondition_error("is_trivial: not a loop");
  Word r = reduce_word(g, w);
  return r.syls.empty() && r.head == 0;
}

Rational modulus(const GraphOfGroups& g, const Word& w) {
  if (!is_loop(g, w)) throw precondition_error("modulus: not a loop");
  Rational m;
  for (const Syllable& s : w.syls)
    m = m * Rational(Int(g.label(s.edge)), Int(g.label(g.reverse(s.edge))));
  return m;
}

std::string word_str(const GraphOfGroups& g, const Word& w) {
  std::ostringstream os;
  os << "[" << g.vertex_id(w.start) << "]";
  if (w.head != 0) os << " a^" << w.head.str();
  for (const Syllable& s : w.syls) {
    os << " " << g.edge_id(s.edge);
    if (s.exp != 0) os << " a^" << s.exp.str();
  }
  return os.str();
}

namespace {

Int int_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return Int(j.get<long long>());
  if (j.is_string()) return Int(j.get<std::string>());
  throw input_error("exponent must be an integer or a decimal string");
}

}  // namespace

Word word_from_json(const GraphOfGroups& g, const nlohmann::json& j,
                    int start_vertex) {
  if (!j.is_array()) throw input_error("word must be an array of letters");
  Word w;
  w.start = start_vertex;
  int at = start_vertex;
  for (const auto& letter : j) {
    if (letter.contains("vertex")) {
      int v = g.vertex_index(letter.at("vertex").get<std::string>());
      if (v != at)
        throw input_error("vertex letter '" + g.vertex_id(v) +
                          "' does not match current path position '" +
                          g.vertex_id(at) + "'");
      Int e = letter.contains("exp") ? int_from_json(letter.at("exp")) : Int(1);
      if (w.syls.empty())
        w.head += e;
      else
        w.syls.back().exp += e;
    } else if (letter.contains("edge")) {
      int e = g.edge_index(letter.at("edge").get<std::string>());
      if (g.origin(e) != at)
        throw input_error("edge letter '" + g.edge_id(e) +
                          "' does not start at current path position '" +
                          g.vertex_id(at) + "'");
      w.syls.push_back({e, Int(0)});
      at = g.terminus(e);
    } else {
      throw input_error("word letter must have 'vertex' or 'edge'");
    }
  }
  return w;
}

nlohmann::json word_to_json(const GraphOfGroups& g, const Word& w) {
  nlohmann::ordered_json arr = nlohmann::json::array();
  auto emit_exp = [&](const Int& e, int vertex) {
    if (e == 0) return;
    nlohmann::ordered_json l;
    l["vertex"] = g.vertex_id(vertex);
    if (e >= std::numeric_limits<long long>::min() &&
        e <= std::numeric_limits<long long>::max())
      l["exp"] = static_cast<long long>(e);
    else
      l["exp"] = e.str();
    arr.push_back(l);
  };
  emit_exp(w.head, w.start);
  for (const Syllable& s : w.syls) {
    nlohmann::ordered_json l;
    l["edge"] = g.edge_id(s.edge);
    arr.push_back(l);
    emit_exp(s.exp, g.terminus(s.edge));
  }
  return arr;
}

Word WordMap::apply(const GraphOfGroups& src, const GraphOfGroups& dst,
                    const Word& w) const {
  Word r;
  const VertexImage& sv = vertex_to.at(w.start);
  r.start = sv.vertex;
  r.head = sv.mult * w.head;
  for (const Syllable& s : w.syls) {
    r = concat(dst, r, edge_to.at(s.edge));
    const VertexImage& ti = vertex_to.at(src.terminus(s.edge));
    if (r.syls.empty())
      r.head += ti.mult * s.exp;
    else
      r.syls.back().exp += ti.mult * s.exp;
  }
  return r;
}

Subdivision subdivide_edge(const GraphOfGroups& g, int e, int interior_count) {
  if (e < 0 || e >= g.num_edges())
    throw precondition_error("subdivide_edge: unknown edge");
  if (interior_count < 1)
    throw precondition_error("subdivide_edge: need at least one new vertex");
  int ebar = g.reverse(e);
  int r = interior_count;

  std::set<std::string> vertex_ids, edge_ids;
  for (int v = 0; v < g.num_vertices(); ++v) vertex_ids.insert(g.vertex_id(v));
  for (int d = 0; d < g.num_edges(); ++d) edge_ids.insert(g.edge_id(d));
  auto fresh = [](std::set<std::string>& used, std::string base) {
    while (used.count(base)) base += "'";
    used.insert(base);
    return base;
  };

  std::vector<std::string> verts;
  for (int v = 0; v < g.num_vertices(); ++v) verts.push_back(g.vertex_id(v));
  std::vector<int> new_vertices;
  for (int i = 1; i <= r; ++i) {
    new_vertices.push_back(static_cast<int>(verts.size()));
    verts.push_back(fresh(vertex_ids, g.edge_id(e) + "@" + std::to_string(i)));
  }

  // Surviving edges keep their relative order; the chain is appended.
  std::vector<GraphOfGroups::Edge> edges;
  std::vector<int> old_to_new(g.num_edges(), -1);
  for (int d = 0; d < g.num_edges(); ++d) {
    if (d == e || d == ebar) continue;
    old_to_new[d] = static_cast<int>(edges.size());
    edges.push_back(g.edge(d));
  }
  for (auto& ed : edges) ed.reverse = old_to_new[ed.reverse];

  int base = static_cast<int>(edges.size());
  std::vector<int> fwd, bwd;
  for (int i = 0; i < r + 1; ++i) {
    fwd.push_back(base + 2 * i);
    bwd.push_back(base + 2 * i + 1);
  }
  for (int i = 0; i < r + 1; ++i) {
    int o = i == 0 ? g.origin(e) : new_vertices[i - 1];
    int t = i == r ? g.terminus(e) : new_vertices[i];
    GraphOfGroups::Edge f, b;
    f.id = fresh(edge_ids, g.edge_id(e) + "#" + std::to_string(i + 1));
    b.id = fresh(edge_ids, g.edge_id(ebar) + "#" + std::to_string(i + 1));
    f.reverse = bwd[i];
    b.reverse = fwd[i];
    f.origin = o;
    f.terminus = t;
    b.origin = t;
    b.terminus = o;
    f.label = i == 0 ? g.label(e) : 1;
    b.label = i == r ? g.label(ebar) : 1;
    edges.push_back(f);
    edges.push_back(b);
  }

  GraphOfGroups ng(verts, edges);

  WordMap rw, uw;
  rw.vertex_to.resize(g.num_vertices());
  for (int v = 0; v < g.num_vertices(); ++v) rw.vertex_to[v] = {v, Int(1)};
  rw.edge_to.resize(g.num_edges());
  for (int d = 0; d < g.num_edges(); ++d) {
    if (d == e || d == ebar) continue;
    Word wd;
    wd.start = g.origin(d);
    wd.syls.push_back({old_to_new[d], Int(0)});
    rw.edge_to[d] = wd;
  }
  Word chain_fwd, chain_bwd;
  chain_fwd.start = g.origin(e);
  for (int i = 0; i <= r; ++i) chain_fwd.syls.push_back({fwd[i], Int(0)});
  chain_bwd.start = g.terminus(e);
  for (int i = r; i >= 0; --i) chain_bwd.syls.push_back({bwd[i], Int(0)});
  rw.edge_to[e] = chain_fwd;
  rw.edge_to[ebar] = chain_bwd;

  uw.vertex_to.resize(ng.num_vertices());
  for (int v = 0; v < g.num_vertices(); ++v) uw.vertex_to[v] = {v, Int(1)};
  // Interior vertex groups are the edge group: a_{w_i} = a_{t(e)}^{lambda(ebar)}
  // in the original Bass group.
  for (int i = 0; i < r; ++i)
    uw.vertex_to[new_vertices[i]] = {g.terminus(e), Int(g.label(ebar))};
  uw.edge_to.resize(ng.num_edges());
  for (int d = 0; d < g.num_edges(); ++d) {
    if (d == e || d == ebar) continue;
    Word wd;
    wd.start = g.origin(d);
    wd.syls.push_back({d, Int(0)});
    uw.edge_to[old_to_new[d]] = wd;
  }
  for (int i = 0; i <= r; ++i) {
    Word wf, wb;
    if (i == 0) {
      wf.start = g.origin(e);
      wf.syls.push_back({e, Int(0)});
      wb.start = g.terminus(e);
      wb.syls.push_back({ebar, Int(0)});
    } else {
      wf.start = g.terminus(e);  // empty word at the merged image vertex
      wb.start = g.terminus(e);
    }
    uw.edge_to[fwd[i]] = wf;
    uw.edge_to[bwd[i]] = wb;
  }

  Subdivision out{std::move(ng), std::move(rw), std::move(uw),
                  std::move(new_vertices), std::move(fwd)};
  return out;
}

}  // namespace gbs
