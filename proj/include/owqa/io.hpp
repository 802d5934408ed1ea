// Line-oriented rule/fact/query language and JSON report emission.
//
//   rel NAME/ARITY [side]
//   tgd ATOM {, ATOM} -> ATOM {, ATOM}     identifiers are variables,
//                                          'name is a constant,
//                                          head-only variables existential
//   fact ATOM                              bare identifiers are constants
//   query ATOM {, ATOM}
//
// '#' starts a comment; blank lines ignored.
#pragma once

#include <json.hpp>

#include "owqa/core.hpp"

namespace owqa {

Program parse_program(const std::string& text);
std::string render_program(const Program& p);

// Standard report shape: {answers, statistics, timings_ms[, certificate]}.
nlohmann::json make_report(const std::vector<bool>& answers, const nlohmann::json& statistics,
                           const nlohmann::json& timings, const nlohmann::json* certificate);

}  // namespace owqa
