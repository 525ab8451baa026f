#include "gbs/pseudoperiodic.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace gbs {

namespace {

std::string instance_key(const GraphOfGroups& g, const CoverPath& p) {
  std::string a = path_key(g, p);
  std::string b = path_key(g, path_reverse(g, p));
  return a < b ? a : b;
}

// g with g * a = b as ordered point pairs, allowing the reversing match.
std::optional<Word> match_pinp(const GraphOfGroups& g, const CoverPath& a,
                               const CoverPath& b) {
  CoverPoint a0 = a.start, a1 = path_endpoint(g, a);
  CoverPoint b0 = b.start, b1 = path_endpoint(g, b);
  if (auto w = pair_same_orbit(g, a0, a1, b0, b1)) return w;
  return pair_same_orbit(g, a1, a0, b0, b1);
}

struct Saturation {
  // concrete pINP instances by key
  std::map<std::string, std::pair<CoverPath, int>> instances;  // + orbit id
  std::vector<std::string> discovery;  // keys in discovery order
  std::set<std::string> vy_keys;
  std::vector<CoverPoint> vy_points;
  int rounds = 0;
  bool stable = false;
};

// Breadth-first closure of pINP concatenations from the seed; rounds stop
// once a full round adds no new pINP orbit (the stopping rule is on orbits,
// not on the infinite translate count).
Saturation saturate(const TrainTrackMap& f, const std::vector<EdgePinp>& pinps,
                    int seed, int max_rounds,
                    const CoverPoint* stop_when_found = nullptr) {
  const GraphOfGroups& g = f.graph();
  Saturation sat;
  auto add_point = [&](const CoverPoint& x) {
    std::string k = point_key(g, x);
    if (sat.vy_keys.insert(k).second) {
      sat.vy_points.push_back(x);
      return true;
    }
    return false;
  };
  std::vector<CoverPoint> frontier;
  {
    const CoverPath& p = pinps.at(seed).path;
    sat.instances.emplace(instance_key(g, p), std::make_pair(p, seed));
    sat.discovery.push_back(instance_key(g, p));
    add_point(p.start);
    add_point(path_endpoint(g, p));
    frontier.push_back(p.start);
    frontier.push_back(path_endpoint(g, p));
  }
  std::set<int> orbit_set{seed};
  for (int round = 1; round <= max_rounds; ++round) {
    std::vector<CoverPoint> next;
    size_t orbits_before = orbit_set.size();
    size_t instances_before = sat.instances.size();
    for (const CoverPoint& x : frontier) {
      for (size_t r = 0; r < pinps.size(); ++r) {
        const CoverPath& rep = pinps[r].path;
        for (int side = 0; side < 2; ++side) {
          CoverPath oriented = side == 0 ? rep : path_reverse(g, rep);
          auto g0 = same_orbit(g, oriented.start, x);
          if (!g0) continue;
          CoverPath inst0 = act(g, *g0, oriented);
          Word a = point_stabilizer_generator(g, x);
          CoverPath cur = inst0;
          for (long long j = 0; j < (1 << 20); ++j) {
            std::string k = instance_key(g, cur);
            if (!sat.instances.count(k)) {
              sat.instances.emplace(k,
                                    std::make_pair(cur, static_cast<int>(r)));
              sat.discovery.push_back(k);
              orbit_set.insert(static_cast<int>(r));
              CoverPoint far = path_endpoint(g, cur);
              if (add_point(far)) next.push_back(far);
            }
            cur = act(g, a, cur);
            if (cur == inst0) break;
          }
        }
      }
      if (stop_when_found && sat.vy_keys.count(point_key(g, *stop_when_found)))
        return sat;
    }
    sat.rounds = round;
    if (stop_when_found && sat.vy_keys.count(point_key(g, *stop_when_found)))
      return sat;
    bool no_new_orbit = orbit_set.size() == orbits_before;
    if (no_new_orbit && round > 1) {
      sat.stable = true;
      // one more round of concrete data is already present: the loop above
      // expanded every frontier point before we compared
      break;
    }
    if (sat.instances.size() == instances_before) {
      sat.stable = true;
      break;
    }
    frontier = std::move(next);
  }
  return sat;
}

}  // namespace

NielsenClass compute_nielsen_class(const TrainTrackMap& f,
                                   const std::vector<EdgePinp>& pinps,
                                   int seed, int max_rounds) {
  const GraphOfGroups& g = f.graph();
  if (seed < 0 || seed >= static_cast<int>(pinps.size()))
    throw precondition_error("compute_nielsen_class: unknown seed pINP");
  Saturation sat = saturate(f, pinps, seed, max_rounds);
  if (!sat.stable)
    throw bound_exhausted(
        "compute_nielsen_class: saturation did not stabilize within "
        "max_rounds");

  NielsenClass nc;
  nc.seed = seed;
  nc.rounds = sat.rounds;

  // representatives: first discovered instance of each orbit; the seed is
  // the representative of its own orbit by construction
  std::map<int, std::string> rep_of_orbit;
  for (const std::string& k : sat.discovery) {
    int orbit = sat.instances.at(k).second;
    rep_of_orbit.emplace(orbit, k);
  }
  for (auto& [orbit, k] : rep_of_orbit)
    nc.ey_reps.push_back(sat.instances.at(k).first);

  std::set<std::string> gen_keys;
  auto add_gen = [&](const Word& w0) {
    Word w = normal_form(g, w0);
    if (w.length() == 0 && w.head == 0) return;
    std::string k = point_key(g, CoverPoint{w});  // serialized normal form
    Word winv = normal_form(g, inverse(g, w));
    std::string ki = point_key(g, CoverPoint{winv});
    if (gen_keys.count(k) || gen_keys.count(ki)) return;
    gen_keys.insert(k);
    nc.stabilizer_generators.push_back(w);
  };

  // connecting elements: every concrete pINP maps onto its orbit rep
  for (const std::string& k : sat.discovery) {
    auto& [path, orbit] = sat.instances.at(k);
    if (rep_of_orbit.at(orbit) == k) continue;
    const CoverPath& rep = sat.instances.at(rep_of_orbit.at(orbit)).first;
    auto w = match_pinp(g, path, rep);
    if (!w)
      throw internal_error("saturation instance does not match its orbit rep");
    add_gen(*w);
  }
  // setwise stabilizer of the seed: the pointwise generator, plus a
  // reverser when the seed is symmetric
  {
    const CoverPath& p = pinps[seed].path;
    CoverPoint a = p.start, b = path_endpoint(g, p);
    Word a0 = point_stabilizer_generator(g, a);
    long long per = stabilizer_period(g, a, b);
    add_gen(power(g, a0, per));
    if (auto rev = pair_same_orbit(g, a, b, b, a)) add_gen(*rev);
  }
  // VY representatives: endpoints of the orbit representatives
  std::set<std::string> vy_seen;
  for (const CoverPath& p : nc.ey_reps) {
    for (const CoverPoint& x : {p.start, path_endpoint(g, p)}) {
      std::string k = point_key(g, x);
      if (vy_seen.insert(k).second) nc.vy_reps.push_back(x);
    }
  }
  return nc;
}

EllipticCheck is_elliptic_subgroup(const GraphOfGroups& g, int base_vertex,
                                   const std::vector<Word>& generators) {
  for (const Word& s : generators) {
    if (translation_length(g, s, base_vertex).kind ==
        IsometryKind::loxodromic)
      return {false, s};
  }
  for (const Word& s : generators)
    for (const Word& t : generators) {
      Word st = reduce_word(g, concat(g, s, t));
      if (translation_length(g, st, base_vertex).kind ==
          IsometryKind::loxodromic)
        return {false, st};
    }
  return {true, std::nullopt};
}

AtoroidalVerdict decide_pseudo_atoroidal(const NielsenAnalysis& na,
                                         int max_rounds) {
  const TrainTrackMap& f = na.map;
  const GraphOfGroups& g = f.graph();
  AtoroidalVerdict out;
  out.atoroidal = true;
  // No pINPs: pseudo-periodic axes decompose into pINPs, so none exist.
  for (size_t i = 0; i < na.pinps.size(); ++i) {
    NielsenClass nc =
        compute_nielsen_class(f, na.pinps, static_cast<int>(i), max_rounds);
    EllipticCheck ec = is_elliptic_subgroup(g, f.marking().basepoint,
                                            nc.stabilizer_generators);
    if (!ec.elliptic && out.atoroidal) {
      out.atoroidal = false;
      out.witness_class = static_cast<int>(i);
      out.witness = ec.witness;
    }
    out.classes.push_back(std::move(nc));
    out.checks.push_back(std::move(ec));
  }
  return out;
}

bool reconnects_to_vy(const TrainTrackMap& f,
                      const std::vector<EdgePinp>& pinps, int seed,
                      const CoverPoint& target, int budget) {
  Saturation sat = saturate(f, pinps, seed, budget, &target);
  return sat.vy_keys.count(point_key(f.graph(), target)) > 0;
}

}  // namespace gbs
