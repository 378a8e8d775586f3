#pragma once

// JSON forms of the domain types, shared by the journal and the HTTP API.

#include <json.hpp>

#include "ethos/learner.hpp"
#include "ethos/solver.hpp"

namespace ethos::codec {

using Json = nlohmann::ordered_json;

Json toJson(const learn::ExampleWindow& w);
/// Accepts `polarity` per conclusion, or the table encoding `not_unethical(x)`
/// when it is absent. Throws InvalidWindowError.
learn::ExampleWindow windowFromJson(const Json& j);

Json toJson(const learn::Hypothesis& h);
learn::Hypothesis hypothesisFromJson(const Json& j);

Json toJson(const logic::Program& p);
logic::Program programFromJson(const Json& j);

Json toJson(const learn::ModeSet& m);
learn::ModeSet modesFromJson(const Json& j);

/// Structured AST of a rule, for clients without a parser.
Json ruleAst(const logic::Rule& r);
Json toJson(const logic::Substitution& theta);
Json toJson(const solver::Derivation& d);

}  // namespace ethos::codec
