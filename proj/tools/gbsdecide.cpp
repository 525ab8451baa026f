// Command line driver: decides pseudo-atoroidality and full irreducibility
// for an outer automorphism of a GBS group given with a train track map.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "gbs/pipeline.hpp"

namespace {

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gbs::input_error("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw gbs::input_error("parse error in '" + path + "': " + e.what());
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "gbsdecide: pseudo-atoroidality and full irreducibility of GBS "
      "automorphisms from a train track representative"};

  std::string graph_path, map_path, family_path, out_path;
  std::string mode = "all", format = "json";
  gbs::JobSpec job;

  app.add_option("--graph", graph_path, "graph of groups (json)")->required();
  app.add_option("--map", map_path, "train track map (json)")->required();
  app.add_option("--family", family_path,
                 "allowed bi-elliptic family as divisor sets I_v (json)");
  app.add_option("--mode", mode, "validate | atoroidal | iwip | all")
      ->capture_default_str();
  app.add_option("--max-l", job.max_length,
                 "cap for the Nielsen path search window L")
      ->capture_default_str();
  app.add_option("--max-rounds", job.max_rounds,
                 "cap for iteration and saturation loops")
      ->capture_default_str();
  app.add_flag("--recheck", job.recheck,
               "re-verify every witness and certificate by cover arithmetic");
  app.add_flag("--assume-no-simple-pp", job.assume_no_simple_pp,
               "caller asserts no simple pseudo-periodic class; opens the "
               "irreducibility gate without a pseudo-atoroidal verdict");
  app.add_option("--out", out_path, "write the report here instead of stdout");
  app.add_option("--format", format, "json | text")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    job.graph = load_json(graph_path);
    job.map = load_json(map_path);
    if (!family_path.empty()) job.family = load_json(family_path);
    job.mode = gbs::mode_from_string(mode);
    if (format != "json" && format != "text")
      throw gbs::input_error("unknown format '" + format + "'");
    if (job.max_length <= 0 || job.max_rounds <= 0)
      throw gbs::input_error("bounds must be positive");

    gbs::RunResult res = gbs::run(job);
    std::string payload = format == "json" ? res.report.dump(2) + "\n"
                                           : gbs::explain(res.report);
    if (out_path.empty()) {
      std::cout << payload;
    } else {
      std::ofstream out(out_path);
      if (!out) throw gbs::input_error("cannot write '" + out_path + "'");
      out << payload;
    }
    return res.exit_code;
  } catch (const gbs::input_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const gbs::bound_exhausted& e) {
    std::cerr << "bound exhausted: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
