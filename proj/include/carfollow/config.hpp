#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "carfollow/convergence.hpp"
#include "carfollow/integrator.hpp"
#include "carfollow/scenario.hpp"

namespace carfollow {

/// Everything a study needs: the scenario, which schemes and steps to run,
/// and where to write. Built from a JSON document; see README for the schema.
struct StudyConfig {
  std::string name;  // prefix for output files
  ScenarioSpec scenario;
  std::vector<Scheme> schemes{std::begin(kAllSchemes), std::end(kAllSchemes)};
  std::vector<double> steps = default_step_sizes();
  std::string output_dir = ".";
  double reference_step = kReferenceStep;
};

/// Parses and validates a JSON config. Errors are Error(kConfig) naming the
/// source, the line and column for syntax errors, or the offending field.
StudyConfig parse_config(std::string_view text,
                         const std::string& source = "<config>");
StudyConfig load_config(const std::string& path);

/// Built-in studies: smooth, stop, creep, idm_plus, modified_idm, ovm, fvdm,
/// external_leader, cut_in.
std::vector<std::string> preset_names();
std::string preset_json(std::string_view name);
StudyConfig preset_config(std::string_view name);

}  // namespace carfollow
