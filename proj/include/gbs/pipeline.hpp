#ifndef GBS_PIPELINE_HPP
#define GBS_PIPELINE_HPP

#include <optional>
#include <string>

#include "gbs/lamination.hpp"
#include "gbs/nielsen.hpp"
#include "gbs/pseudoperiodic.hpp"
#include "gbs/traintrack.hpp"

namespace gbs {

enum class Mode { validate, atoroidal, iwip, all };

Mode mode_from_string(const std::string& s);
std::string mode_to_string(Mode m);

struct JobSpec {
  nlohmann::json graph;
  nlohmann::json map;
  std::optional<nlohmann::json> family;
  Mode mode = Mode::all;
  int max_length = 12;   // the L safety valve of the pINP search
  int max_rounds = 64;   // iteration/saturation safety valve
  bool recheck = false;
  // Gate override: run the irreducibility criterion without a
  // pseudo-atoroidal verdict (the caller asserts there is no simple
  // pseudo-periodic class, which is not decidable here).
  bool assume_no_simple_pp = false;
};

struct RunResult {
  nlohmann::ordered_json report;
  int exit_code = 0;  // 0 decided, 2 input error, 3 bound exhausted
};

// Parse a train track map from its JSON description against a graph.
TrainTrackMap parse_map(const GraphOfGroups& g, const nlohmann::json& j);
// Serialize a map back into the input schema.
nlohmann::ordered_json map_to_json(const TrainTrackMap& f);

FamilyA parse_family(const GraphOfGroups& g, const nlohmann::json& j);

RunResult run(const JobSpec& job);

// Human-readable rendering of a report.
std::string explain(const nlohmann::ordered_json& report);

}  // namespace gbs

#endif  // GBS_PIPELINE_HPP
