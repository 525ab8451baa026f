#ifndef GBS_PSEUDOPERIODIC_HPP
#define GBS_PSEUDOPERIODIC_HPP

#include <optional>
#include <vector>

#include "gbs/nielsen.hpp"

namespace gbs {

// The Nielsen class of a seed pINP: representatives for the stab-orbits of
// its points and pINPs, and a finite generating set for stab(VY(eta)).
struct NielsenClass {
  int seed;  // index into the pINP orbit list
  std::vector<CoverPoint> vy_reps;
  std::vector<CoverPath> ey_reps;
  std::vector<Word> stabilizer_generators;
  int rounds;  // saturation rounds until the orbit set stabilized
};

NielsenClass compute_nielsen_class(const TrainTrackMap& f,
                                   const std::vector<EdgePinp>& pinps,
                                   int seed, int max_rounds = 64);

// Serre's lemma data: the generated group is elliptic iff every generator
// and every pairwise product is elliptic.
struct EllipticCheck {
  bool elliptic;
  std::optional<Word> witness;  // a loxodromic generator or product
};

EllipticCheck is_elliptic_subgroup(const GraphOfGroups& g, int base_vertex,
                                   const std::vector<Word>& generators);

struct AtoroidalVerdict {
  bool atoroidal;
  std::vector<NielsenClass> classes;       // one per pINP orbit
  std::vector<EllipticCheck> checks;       // parallel to classes
  std::optional<int> witness_class;
  std::optional<Word> witness;             // loxodromic stabilizer element
};

// Pseudo-periodic conjugacy classes exist iff some Nielsen class stabilizer
// contains a loxodromic element; no pINPs at all means atoroidal outright.
AtoroidalVerdict decide_pseudo_atoroidal(const NielsenAnalysis& na,
                                         int max_rounds = 64);

// Re-verification: w * (endpoint of the seed) reconnects to VY(eta) by a
// concatenation of pINPs found within the given round budget.
bool reconnects_to_vy(const TrainTrackMap& f,
                      const std::vector<EdgePinp>& pinps, int seed,
                      const CoverPoint& target, int budget);

}  // namespace gbs

#endif  // GBS_PSEUDOPERIODIC_HPP
