#ifndef GBS_NIELSEN_HPP
#define GBS_NIELSEN_HPP

#include <map>
#include <optional>
#include <vector>

#include "gbs/traintrack.hpp"

namespace gbs {

// A tight path with exactly one illegal turn, kept as its two legal
// branches, both oriented away from the turn point.
struct OneTurnPath {
  CoverPath left;
  CoverPath right;
  const CoverPoint& turn_point() const { return left.start; }
};

CoverPath full_path(const GraphOfGroups& g, const OneTurnPath& p);
OneTurnPath branches_of(const TrainTrackMap& f, const CoverPath& p);

// [f(gamma)] in branch form: apply f to both branches and cancel the common
// prefix at the turn. Either branch may become empty.
struct BranchImage {
  CoverPath left;
  CoverPath right;
  int cancelled;  // length of the cancelled common prefix
};
BranchImage branch_image(const TrainTrackMap& f, const CoverPath& left,
                         const CoverPath& right);

// gamma subset g * [f^m(gamma)], Definition of pseudo-pINPs.
struct PinpWitness {
  int period;
  Word twist;      // gamma subset twist * [f^period(gamma)]
  bool swapped;    // the containment matches branches crosswise
};

// Shared memo for the orbit-keyed caches; results are deterministic.
struct NielsenMemo {
  std::map<std::string, int> classify_case;
  // orbit key -> (max period tested, found period or 0)
  std::map<std::string, std::pair<int, int>> pseudo_pinp;
};

// Test whether eta is a pseudo-pINP with period at most pmax, by computing
// the iterates [f^m(eta)] and searching for an aligned translate.
std::optional<PinpWitness> pseudo_pinp_witness(const TrainTrackMap& f,
                                               const OneTurnPath& eta,
                                               int pmax,
                                               NielsenMemo* memo = nullptr);

enum class GammaCase {
  legal_split = 1,   // image becomes legal, neither branch swallowed
  contained = 2,     // some branch image contains the other
  has_pinp = 3,      // gamma itself contains a pseudo-pINP
  image_has_pinp = 4 // only some iterate does
};

struct ClassifyResult {
  GammaCase kind;
  int rounds;          // iterations used
  int period = 0;      // case 3/4: the pseudo-pINP period found
  std::optional<PinpWitness> witness;  // case 3: witness for a contained one
};

ClassifyResult classify(const TrainTrackMap& f, const OneTurnPath& gamma,
                        int max_rounds, NielsenMemo* memo = nullptr);

// A minimal pseudo-pINP orbit representative with its straight witness.
struct PseudoPinp {
  OneTurnPath hull;
  int period;    // straight period: hull subset twist * [f^period(hull)]
  Word twist;
  bool left_end_at_vertex;
  bool right_end_at_vertex;
};

struct PinpSearch {
  std::vector<PseudoPinp> minimal;  // orbit representatives
  int terminal_length;              // the L at which the search settled
};

// The L-loop of the paper: enumerate one-illegal-turn candidates with legal
// branches of length <= L from every illegal turn orbit, classify, and grow
// L while a frontier candidate is in the swallowing case.
PinpSearch find_all_pinps(const TrainTrackMap& f, int max_length = 12,
                          int max_rounds = 64);

// A pINP realized as an edge path after subdivision, with its exact Nielsen
// identity [f^period(path)] = twist * path (or the reverse when `reversed`).
struct EdgePinp {
  CoverPath path;
  int period;
  Word twist;
  bool reversed;
};

struct NielsenAnalysis {
  TrainTrackMap map;             // the subdivided train track map
  std::vector<EdgePinp> pinps;   // orbit representatives
  int terminal_length;
  int common_period;             // lcm of the straight periods
  bool subdivided;               // false when no interior endpoints exist
};

// Subdivide the tree at all interior pINP endpoints and re-express every
// pINP orbit as a genuine edge path satisfying the exact Nielsen identity.
NielsenAnalysis subdivide_at_pinps(const TrainTrackMap& f,
                                   const PinpSearch& search,
                                   int max_rounds = 64);

// Convenience: find_all_pinps + subdivide_at_pinps.
NielsenAnalysis nielsen_analysis(const TrainTrackMap& f, int max_length = 12,
                                 int max_rounds = 64);

}  // namespace gbs

#endif  // GBS_NIELSEN_HPP
