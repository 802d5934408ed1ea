// Fact saturation: closes the instance under all entailed facts over its
// active domain, via root firing of full rules and closure rules plus
// one-level children for non-full rules (closure rules fired inside the
// child, results over the instance domain propagated back).
#pragma once

#include "owqa/chase.hpp"
#include "owqa/core.hpp"
#include "owqa/saturate.hpp"

namespace owqa {

struct FactClosure {
    FactSet facts;       // saturated root instance
    bool changed = false;
    size_t childrenExplored = 0;
    // Present when recording: a replayable run. Step rule ids index
    // `rulesUsed`, which is the program's rules followed by the closure rules
    // that actually fired.
    std::vector<StepRecord> steps;
    std::vector<TGD> rulesUsed;
    size_t sigmaRuleCount = 0;
};

FactClosure fact_saturate(const Program& normalized, Saturation& sat, bool record = false);

bool is_fact_saturated(const Program& normalized, Saturation& sat);

}  // namespace owqa
