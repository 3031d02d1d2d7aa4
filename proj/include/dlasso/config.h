#pragma once

#include <string>

#include "dlasso/sim_harness.h"

namespace dlasso {

/// INI-style text: `[section]` headers and `key = value` lines, `#` or `;`
/// comments. Sections: instance, experiment, lambda, beta0, class, audit.
/// Unknown sections or keys are rejected with ParseError.
ExperimentConfig parse_config_string(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

}  // namespace dlasso
