#include "gbs/pipeline.hpp"

#include <chrono>
#include <sstream>

namespace gbs {

namespace {

using ordered = nlohmann::ordered_json;

std::string tool_version() { return "1.0.0"; }

ordered word_json(const GraphOfGroups& g, const Word& w) {
  return word_to_json(g, w);
}

ordered path_json(const GraphOfGroups& g, const CoverPath& p) {
  ordered j;
  j["start"] = word_json(g, p.start.path);
  ordered letters = nlohmann::json::array();
  for (const CoverEdge& d : p.edges) {
    ordered l;
    l["edge"] = g.edge_id(d.edge);
    if (d.germ >= std::numeric_limits<long long>::min() &&
        d.germ <= std::numeric_limits<long long>::max())
      l["germ"] = static_cast<long long>(d.germ);
    else
      l["germ"] = d.germ.str();
    letters.push_back(l);
  }
  j["edges"] = letters;
  return j;
}

}  // namespace

Mode mode_from_string(const std::string& s) {
  if (s == "validate") return Mode::validate;
  if (s == "atoroidal") return Mode::atoroidal;
  if (s == "iwip") return Mode::iwip;
  if (s == "all") return Mode::all;
  throw input_error("unknown mode '" + s + "'");
}

std::string mode_to_string(Mode m) {
  switch (m) {
    case Mode::validate: return "validate";
    case Mode::atoroidal: return "atoroidal";
    case Mode::iwip: return "iwip";
    case Mode::all: return "all";
  }
  return "?";
}

TrainTrackMap parse_map(const GraphOfGroups& g, const nlohmann::json& j) {
  if (!j.contains("basepoint")) throw input_error("map json needs 'basepoint'");
  int base = g.vertex_index(j.at("basepoint").get<std::string>());
  Marking m;
  if (j.contains("base_paths")) {
    m.basepoint = base;
    m.base_paths.assign(g.num_vertices(), Word{});
    Word root;
    root.start = base;
    m.base_paths[base] = root;
    for (auto& [vid, wj] : j.at("base_paths").items()) {
      int v = g.vertex_index(vid);
      m.base_paths[v] = word_from_json(g, wj, base);
    }
    for (int v = 0; v < g.num_vertices(); ++v)
      if (v != base && m.base_paths[v] == Word{} && g.num_vertices() > 1) {
        // fill any omitted path from the BFS default
        Marking d = Marking::bfs(g, base);
        for (int u = 0; u < g.num_vertices(); ++u)
          if (m.base_paths[u].syls.empty() && u != base)
            m.base_paths[u] = d.base_paths[u];
        break;
      }
  } else {
    m = Marking::bfs(g, base);
  }
  m.validate(g);

  auto parse_auto = [&](const nlohmann::json& a) {
    std::vector<Word> vi(g.num_vertices()), ei(g.num_edges());
    std::vector<char> have_v(g.num_vertices(), 0), have_e(g.num_edges(), 0);
    if (!a.contains("vertices"))
      throw input_error("automorphism json needs 'vertices'");
    for (auto& [vid, wj] : a.at("vertices").items()) {
      int v = g.vertex_index(vid);
      vi[v] = word_from_json(g, wj, base);
      have_v[v] = 1;
    }
    for (int v = 0; v < g.num_vertices(); ++v)
      if (!have_v[v])
        throw input_error("automorphism misses vertex '" + g.vertex_id(v) +
                          "'");
    if (a.contains("edges"))
      for (auto& [eid, wj] : a.at("edges").items()) {
        int e = g.edge_index(eid);
        ei[e] = word_from_json(g, wj, base);
        have_e[e] = 1;
      }
    for (int e = 0; e < g.num_edges(); ++e) {
      if (have_e[e]) continue;
      if (have_e[g.reverse(e)]) {
        ei[e] = inverse(g, ei[g.reverse(e)]);
      } else {
        // omitted: the trivial loop; valid exactly for marking tree edges,
        // checked by the relation validation below
        Word w;
        w.start = base;
        ei[e] = w;
      }
      have_e[e] = 1;
    }
    return Automorphism(g, m, vi, ei);
  };
  if (!j.contains("phi") || !j.contains("phi_inverse"))
    throw input_error("map json needs 'phi' and 'phi_inverse'");
  Automorphism phi = parse_auto(j.at("phi"));
  Automorphism phi_inv = parse_auto(j.at("phi_inverse"));
  phi.check_relations(g, m);
  phi_inv.check_relations(g, m);
  check_inverse_pair(g, m, phi, phi_inv);

  if (!j.contains("vertex_images"))
    throw input_error("map json needs 'vertex_images'");
  std::vector<CoverPoint> vimgs(g.num_vertices());
  std::vector<char> have(g.num_vertices(), 0);
  for (auto& [vid, wj] : j.at("vertex_images").items()) {
    int v = g.vertex_index(vid);
    vimgs[v] = make_point(g, word_from_json(g, wj, base));
    have[v] = 1;
  }
  for (int v = 0; v < g.num_vertices(); ++v)
    if (!have[v])
      throw input_error("vertex image missing for '" + g.vertex_id(v) + "'");

  // point image from phi and the vertex images only
  auto point_image = [&](const CoverPoint& x) {
    int v = quotient_vertex(g, x);
    Word h = reduce_word(g, concat(g, m.base_paths[v], inverse(g, x.path)));
    return act(g, phi.apply(g, inverse(g, h)), vimgs[v]);
  };

  std::map<int, CoverPath> eimgs;
  std::set<int> given;
  if (j.contains("edge_images")) {
    for (auto& [eid, wj] : j.at("edge_images").items()) {
      int e = g.edge_index(eid);
      Word rel = word_from_json(g, wj, quotient_vertex(g, vimgs[g.origin(e)]));
      CoverPath p = path_from_point_and_word(g, vimgs[g.origin(e)], rel);
      eimgs[e] = p;
      given.insert(g.unoriented_index(e));
    }
  }
  for (int e : g.unoriented_reps()) {
    if (given.count(g.unoriented_index(e))) continue;
    CoverPath geo = geodesic(g, vimgs[g.origin(e)],
                             point_image(edge_endpoint(g, m.rep_edge(g, e))));
    if (geo.edges.empty())
      throw input_error("edge '" + g.edge_id(e) +
                        "' has a point image; not a valid train track map");
    eimgs[e] = geo;
  }
  return TrainTrackMap(g, m, phi, phi_inv, vimgs, eimgs);
}

ordered map_to_json(const TrainTrackMap& f) {
  const GraphOfGroups& g = f.graph();
  const Marking& m = f.marking();
  ordered j;
  j["schema_version"] = 1;
  j["basepoint"] = g.vertex_id(m.basepoint);
  ordered bp;
  for (int v = 0; v < g.num_vertices(); ++v)
    if (v != m.basepoint) bp[g.vertex_id(v)] = word_json(g, m.base_paths[v]);
  j["base_paths"] = bp;
  auto auto_json = [&](const Automorphism& a) {
    ordered out;
    ordered vs, es;
    for (int v = 0; v < g.num_vertices(); ++v) {
      Word img = a.vertex_power_image(g, v, Int(1));
      vs[g.vertex_id(v)] = word_json(g, img);
    }
    for (int e : g.unoriented_reps())
      es[g.edge_id(e)] = word_json(g, a.edge_letter_image(e));
    out["vertices"] = vs;
    out["edges"] = es;
    return out;
  };
  // phi_inverse serialized from the stored automorphism pair
  j["phi"] = auto_json(f.phi());
  j["phi_inverse"] = auto_json(f.phi_inverse());
  ordered vi;
  for (int v = 0; v < g.num_vertices(); ++v)
    vi[g.vertex_id(v)] = word_json(g, f.vertex_image(v).path);
  j["vertex_images"] = vi;
  ordered ei;
  for (int e : g.unoriented_reps())
    ei[g.edge_id(e)] = word_json(g, germ_word_of_path(g, f.edge_image(e)));
  j["edge_images"] = ei;
  return j;
}

FamilyA parse_family(const GraphOfGroups& g, const nlohmann::json& j) {
  FamilyA fam;
  fam.unrestricted = false;
  if (!j.contains("family"))
    throw input_error("family json needs a 'family' object");
  for (auto& [vid, arr] : j.at("family").items()) {
    int v = g.vertex_index(vid);
    std::vector<long long> ds;
    for (auto& d : arr) ds.push_back(d.get<long long>());
    fam.divisors[v] = ds;
  }
  return fam;
}

namespace {

ordered certificate_json(const GraphOfGroups& g,
                         const ReducibilityCertificate& c) {
  (void)g;
  ordered j;
  j["kind"] = c.kind_str();
  j["invariant_edges"] = c.subforest_edges;
  j["period"] = c.period;
  j["detail"] = c.detail;
  return j;
}

struct StageClock {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  long long ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - t0)
        .count();
  }
};

}  // namespace

RunResult run(const JobSpec& job) {
  RunResult out;
  ordered& rep = out.report;
  rep["schema_version"] = 1;
  rep["tool"] = {{"name", "gbsdecide"}, {"version", tool_version()}};
  rep["mode"] = mode_to_string(job.mode);
  rep["stages"] = nlohmann::json::array();
  ordered timing;
  StageClock total;

  auto add_stage = [&](const std::string& name, const std::string& status,
                       ordered detail = ordered::object()) {
    ordered s;
    s["stage"] = name;
    s["status"] = status;
    if (!detail.empty()) s["detail"] = detail;
    rep["stages"].push_back(s);
  };
  auto fail = [&](const std::string& stage, const std::string& what,
                  int code) {
    add_stage(stage, "error", ordered{{"message", what}});
    timing["total_ms"] = total.ms();
    rep["timing"] = timing;
    out.exit_code = code;
    return out;
  };

  // ---- validate ----
  std::optional<GraphOfGroups> graph;
  std::optional<TrainTrackMap> map;
  FamilyA fam;
  try {
    StageClock c;
    graph.emplace(GraphOfGroups::from_json(job.graph));
    GraphDiagnosis diag = validate_graph(*graph);
    if (!diag.ok) {
      add_stage("validate", "rejected", ordered{{"reason", diag.rejection}});
      timing["total_ms"] = total.ms();
      rep["timing"] = timing;
      out.exit_code = 2;
      return out;
    }
    map.emplace(parse_map(*graph, job.map));
    if (job.family) fam = parse_family(*graph, *job.family);
    ordered d;
    d["vertices"] = graph->num_vertices();
    d["edge_orbits"] = graph->num_unoriented_edges();
    d["reduced_edge_count"] = diag.reduced_edge_count;
    d["family"] = fam.unrestricted ? "unrestricted" : "restricted";
    timing["validate_ms"] = c.ms();
    add_stage("validate", "ok", d);
  } catch (const input_error& e) {
    return fail("validate", e.what(), 2);
  } catch (const precondition_error& e) {
    return fail("validate", e.what(), 2);
  }
  if (job.mode == Mode::validate) {
    timing["total_ms"] = total.ms();
    rep["timing"] = timing;
    return out;
  }

  // ---- verify train track ----
  try {
    StageClock c;
    auto bad = verify_train_track(*map);
    if (bad) {
      ordered d;
      d["message"] = bad->what;
      if (bad->edge) d["edge"] = *bad->edge;
      if (bad->turn) d["turn"] = bad->turn->str(map->graph());
      add_stage("verify-train-track", "failed", d);
      timing["total_ms"] = total.ms();
      rep["timing"] = timing;
      out.exit_code = 2;
      return out;
    }
    timing["verify_ms"] = c.ms();
    add_stage("verify-train-track", "ok");
  } catch (const std::exception& e) {
    return fail("verify-train-track", e.what(), 2);
  }

  // ---- collapse to a primitive representative ----
  std::optional<TrainTrackMap> prim;
  bool one_edge_group = false;
  try {
    StageClock c;
    CollapseResult cr = collapse_to_irreducible(*map);
    ordered d;
    d["collapses"] = cr.log;
    if (cr.certificate) {
      d["certificate"] = certificate_json(map->graph(), *cr.certificate);
      if (job.recheck)
        d["recheck"] =
            recheck_certificate(*cr.final_map, *cr.certificate) ? "ok"
                                                                : "FAILED";
      add_stage("collapse", "reducible", d);
      ordered verdicts;
      verdicts["reducible_at_collapse"] = true;
      rep["verdicts"] = verdicts;
      timing["collapse_ms"] = c.ms();
      timing["total_ms"] = total.ms();
      rep["timing"] = timing;
      return out;  // decided: reducible (or out of scope for one-edge groups)
    }
    prim = std::move(cr.final_map);
    one_edge_group = cr.one_edge_group;
    d["edge_orbits"] = prim->graph().num_unoriented_edges();
    d["one_edge_group"] = one_edge_group;
    timing["collapse_ms"] = c.ms();
    add_stage("collapse", "primitive", d);
  } catch (const bound_exhausted& e) {
    return fail("collapse", e.what(), 3);
  } catch (const std::exception& e) {
    return fail("collapse", e.what(), 2);
  }

  ordered verdicts;
  bool need_atoroidal = job.mode == Mode::atoroidal || job.mode == Mode::all ||
                        (job.mode == Mode::iwip && !job.assume_no_simple_pp);
  std::optional<AtoroidalVerdict> av;
  std::optional<NielsenAnalysis> na;
  if (need_atoroidal) {
    try {
      StageClock c;
      na.emplace(nielsen_analysis(*prim, job.max_length, job.max_rounds));
      ordered d;
      d["terminal_length"] = na->terminal_length;
      d["pinp_orbits"] = static_cast<int>(na->pinps.size());
      d["subdivided"] = na->subdivided;
      d["common_period"] = na->common_period;
      ordered pl = nlohmann::json::array();
      for (const EdgePinp& ep : na->pinps) {
        ordered pj;
        pj["path"] = path_json(na->map.graph(), ep.path);
        pj["period"] = ep.period;
        pj["twist"] = word_json(na->map.graph(), ep.twist);
        pj["reversed"] = ep.reversed;
        if (job.recheck) {
          // independent re-verification of the Nielsen identity by cover
          // arithmetic
          CoverPath it = ep.path;
          for (int m2 = 0; m2 < ep.period; ++m2)
            it = na->map.map_path_tight(it);
          CoverPath want =
              act(na->map.graph(), ep.twist,
                  ep.reversed ? path_reverse(na->map.graph(), ep.path)
                              : ep.path);
          pj["recheck"] = it == want ? "ok" : "FAILED";
        }
        pl.push_back(pj);
      }
      d["pinps"] = pl;
      timing["nielsen_ms"] = c.ms();
      add_stage("nielsen-paths", "ok", d);
    } catch (const bound_exhausted& e) {
      return fail("nielsen-paths", e.what(), 3);
    } catch (const std::exception& e) {
      return fail("nielsen-paths", e.what(), 2);
    }
    try {
      StageClock c;
      av.emplace(decide_pseudo_atoroidal(*na, job.max_rounds));
      ordered d;
      ordered classes = nlohmann::json::array();
      for (size_t i = 0; i < av->classes.size(); ++i) {
        const NielsenClass& nc = av->classes[i];
        const EllipticCheck& ec = av->checks[i];
        ordered cj;
        cj["seed"] = nc.seed;
        cj["vy_reps"] = static_cast<int>(nc.vy_reps.size());
        cj["ey_reps"] = static_cast<int>(nc.ey_reps.size());
        ordered gens = nlohmann::json::array();
        for (const Word& w : nc.stabilizer_generators)
          gens.push_back(word_json(na->map.graph(), w));
        cj["generators"] = gens;
        cj["elliptic"] = ec.elliptic;
        if (!ec.elliptic)
          cj["loxodromic_witness"] = word_json(na->map.graph(), *ec.witness);
        if (job.recheck) {
          const GraphOfGroups& gm = na->map.graph();
          bool ok = true;
          // every generator must keep the seed endpoint inside VY
          for (const Word& w : nc.stabilizer_generators) {
            CoverPoint target =
                act(gm, w, na->pinps[nc.seed].path.start);
            if (!reconnects_to_vy(na->map, na->pinps, nc.seed, target,
                                  nc.rounds + 4)) {
              ok = false;
              break;
            }
          }
          // Serre data re-derived directly from translation lengths
          EllipticCheck again = is_elliptic_subgroup(
              gm, na->map.marking().basepoint, nc.stabilizer_generators);
          ok = ok && again.elliptic == ec.elliptic;
          if (!ec.elliptic && ec.witness) {
            // boundedness of the witness class under iteration
            Word w = *ec.witness;
            auto td0 = translation_length(gm, w, na->map.marking().basepoint);
            ok = ok && td0.kind == IsometryKind::loxodromic;
            Word it = w;
            for (int n2 = 1; n2 <= 6; ++n2) {
              it = na->map.phi().apply(gm, it);
              auto td = translation_length(gm, it,
                                           na->map.marking().basepoint);
              ok = ok && td.length == td0.length;
            }
          }
          cj["recheck"] = ok ? "ok" : "FAILED";
        }
        classes.push_back(cj);
      }
      d["classes"] = classes;
      verdicts["atoroidal"] = av->atoroidal;
      if (!av->atoroidal) {
        verdicts["pseudo_periodic_witness"] =
            word_json(na->map.graph(), *av->witness);
        verdicts["pseudo_periodic_class"] = *av->witness_class;
      }
      timing["atoroidal_ms"] = c.ms();
      add_stage("pseudo-atoroidal", "ok", d);
    } catch (const bound_exhausted& e) {
      return fail("pseudo-atoroidal", e.what(), 3);
    } catch (const std::exception& e) {
      return fail("pseudo-atoroidal", e.what(), 2);
    }
  }

  bool want_iwip = job.mode == Mode::iwip || job.mode == Mode::all;
  if (want_iwip) {
    bool gate_open =
        job.assume_no_simple_pp || (av.has_value() && av->atoroidal);
    if (one_edge_group) {
      add_stage("whitehead", "rejected",
                ordered{{"reason",
                         "one-edge group (BS(p,q) or Z*_Z Z): irreducibility "
                         "decisions are out of scope for these groups"}});
      verdicts["fully_irreducible"] = nullptr;
    } else if (!gate_open) {
      add_stage(
          "whitehead", "blocked",
          ordered{{"reason",
                   "the irreducibility criterion needs no simple "
                   "pseudo-periodic class; the automorphism is not "
                   "pseudo-atoroidal and no --assume-no-simple-pp was given"}});
      verdicts["fully_irreducible"] = nullptr;
    } else {
      try {
        StageClock c;
        IwipVerdict iv = decide_fully_irreducible(*prim, fam, job.max_rounds);
        ordered d;
        d["turn_orbits"] = static_cast<int>(iv.lamination.turns.size());
        d["saturation_rounds"] = iv.lamination.rounds;
        d["round_cap"] = iv.lamination.cap;
        ordered conn;
        for (auto& [v, ok] : iv.connected)
          conn[prim->graph().vertex_id(v)] = ok;
        d["connected"] = conn;
        if (iv.certificate) {
          ordered cj;
          cj["vertex"] = prim->graph().vertex_id(iv.certificate->vertex);
          ordered comps = nlohmann::json::array();
          for (const ComponentWitness& cw : iv.certificate->components) {
            ordered cc;
            ordered germs = nlohmann::json::array();
            const WhiteheadGraph& w =
                iv.lamination.graphs.at(iv.certificate->vertex);
            for (int n2 : cw.germs) {
              ordered gj;
              gj["edge"] = prim->graph().edge_id(w.nodes[n2].first);
              gj["residue"] = w.nodes[n2].second;
              germs.push_back(gj);
            }
            cc["germs"] = germs;
            cc["index"] = cw.index;
            cc["in_family"] = cw.in_family;
            if (cw.in_family) cc["divisor"] = cw.matched_divisor;
            comps.push_back(cc);
          }
          cj["components"] = comps;
          cj["witness_component"] = iv.certificate->witness_component;
          d["certificate"] = cj;
        }
        if (job.recheck) {
          // seed independence: recompute the turn saturation from every
          // other edge orbit and require identical graphs
          bool ok = true;
          for (int s2 = 1; s2 < prim->graph().num_unoriented_edges(); ++s2) {
            LaminationData other =
                whitehead_graphs(*prim, s2, job.max_rounds);
            ok = ok && other.turns == iv.lamination.turns;
          }
          d["recheck"] = ok ? "ok" : "FAILED";
        }
        verdicts["fully_irreducible"] = iv.fully_irreducible;
        timing["whitehead_ms"] = c.ms();
        add_stage("whitehead", "ok", d);
      } catch (const bound_exhausted& e) {
        return fail("whitehead", e.what(), 3);
      } catch (const std::exception& e) {
        return fail("whitehead", e.what(), 2);
      }
    }
  }

  rep["verdicts"] = verdicts;
  timing["total_ms"] = total.ms();
  rep["timing"] = timing;
  return out;
}

std::string explain(const ordered& rep) {
  std::ostringstream os;
  os << "gbsdecide " << rep.at("tool").at("version").get<std::string>()
     << " -- mode " << rep.at("mode").get<std::string>() << "\n";
  for (const auto& s : rep.at("stages")) {
    os << "[" << s.at("stage").get<std::string>() << "] "
       << s.at("status").get<std::string>() << "\n";
    if (!s.contains("detail")) continue;
    const auto& d = s.at("detail");
    if (d.contains("reason"))
      os << "    " << d.at("reason").get<std::string>() << "\n";
    if (d.contains("message"))
      os << "    " << d.at("message").get<std::string>() << "\n";
    if (d.contains("certificate")) {
      const auto& c = d.at("certificate");
      if (c.contains("kind")) {
        os << "    reducibility certificate: "
           << c.at("kind").get<std::string>() << "\n";
        os << "    invariant edge orbits:";
        for (const auto& e : c.at("invariant_edges"))
          os << " " << e.get<std::string>();
        os << "\n    " << c.at("detail").get<std::string>() << "\n";
      } else if (c.contains("vertex")) {
        os << "    disconnected Whitehead graph at vertex '"
           << c.at("vertex").get<std::string>()
           << "'; a component stabilizer lies in the family\n";
        for (const auto& comp : c.at("components")) {
          os << "      component (i(C) = " << comp.at("index")
             << (comp.at("in_family").get<bool>() ? ", in family" : "")
             << "):";
          for (const auto& germ : comp.at("germs"))
            os << " " << germ.at("edge").get<std::string>() << "+"
               << germ.at("residue");
          os << "\n";
        }
      }
    }
    if (d.contains("pinp_orbits"))
      os << "    pINP orbits: " << d.at("pinp_orbits")
         << " (search settled at L = " << d.at("terminal_length") << ")\n";
    if (d.contains("classes")) {
      for (const auto& c : d.at("classes")) {
        os << "    Nielsen class of pINP #" << c.at("seed") << ": "
           << (c.at("elliptic").get<bool>()
                   ? "stabilizer elliptic"
                   : "stabilizer contains a loxodromic element")
           << " (" << c.at("generators").size() << " generators)\n";
      }
    }
    if (d.contains("connected")) {
      os << "    Whitehead graph connectivity:";
      for (const auto& [v, ok] : d.at("connected").items())
        os << " " << v << (ok.get<bool>() ? ":connected" : ":disconnected");
      os << "\n";
    }
  }
  if (rep.contains("verdicts")) {
    const auto& v = rep.at("verdicts");
    if (v.contains("reducible_at_collapse"))
      os << "verdict: reducible (collapse stage certificate)\n";
    if (v.contains("atoroidal"))
      os << "verdict: pseudo-atoroidal = "
         << (v.at("atoroidal").get<bool>() ? "true" : "false") << "\n";
    if (v.contains("fully_irreducible")) {
      if (v.at("fully_irreducible").is_null())
        os << "verdict: fully irreducible = undecided (gate closed)\n";
      else
        os << "verdict: fully irreducible = "
           << (v.at("fully_irreducible").get<bool>() ? "true" : "false")
           << "\n";
    }
  }
  return os.str();
}

}  // namespace gbs
