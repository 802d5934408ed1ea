// Input normalization: multi-head splitting, constant elimination, and the
// strong-obedience rewrite (principal twins + homomorphism closure).
#pragma once

#include "owqa/core.hpp"

namespace owqa {

struct NormalizationTrace {
    std::vector<std::pair<std::string, std::string>> splitRelations;   // (new rel, reason)
    std::vector<std::pair<std::string, std::string>> constantRelations;  // (rel, constant)
    std::vector<std::pair<std::string, std::string>> twins;  // (side rel, principal twin)
    int redirectedHeads = 0;
    int guardTwinBodies = 0;
    int twinInstanceFacts = 0;
    int closureAdded = 0;  // rules added by exported-variable identification
};

struct NormalizedProgram {
    Program prog;
    NormalizationTrace trace;
    SignatureStats stats;
};

// Splits every rule with more than one head atom through a fresh principal
// relation: body -> exists y. P(frontier, y); P(frontier, y) -> each head atom.
void split_multiheads(Program& p, NormalizationTrace& trace);

// Replaces constants in rule bodies and queries by a fresh variable plus a
// unary side atom P_c(x_c), with fact P_c(c). Constants in rule heads are
// rejected with Diag("HeadConstant"). Facts keep their constants.
void eliminate_constants(Program& p, NormalizationTrace& trace);

// Adds homomorphic images of rules under identification of exported
// variables (deduplicated up to renaming). Returns the number added.
int homomorphism_closure(Program& p);

// Demand-driven principal-twin construction; afterwards every rule has
// exactly one principal guard and every non-full rule a principal head.
// Validates guardedness/obedience first (Diag "NotGuarded"/"SideViolation").
void enforce_strong_obedience(Program& p, NormalizationTrace& trace);

// Full pipeline: split, eliminate constants, enforce strong obedience
// (including homomorphism closure), compute statistics.
NormalizedProgram preprocess(const Program& p);

}  // namespace owqa
