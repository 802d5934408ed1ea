// End-to-end orchestration: preprocess -> saturate -> fact-saturate ->
// linearize -> linear decision, with optional certification that rebuilds a
// checkable run over the input rules, plus fuzzing and benchmark helpers.
#pragma once

#include <memory>
#include <random>

#include "owqa/fact_closure.hpp"
#include "owqa/io.hpp"
#include "owqa/linear_engine.hpp"
#include "owqa/linearize.hpp"
#include "owqa/preprocess.hpp"

namespace owqa {

struct PipelineOptions {
    LinearEngine engine = LinearEngine::Both;
    bool certify = false;
    size_t rewriteCap = 20000;
    size_t nodeCap = 100000;
};

struct QueryAnswer {
    bool yes = false;
    std::string engine;
    bool agreement = true;
    bool tightBudgetExhausted = false;
    size_t disjuncts = 0;
    // certification (certify option, yes answers only)
    bool certified = false;
    std::string certifyReason;
    std::vector<StepRecord> proof;        // over PipelineResult::proofRules
    std::vector<TGD> proofRules;
    Subst match;
};

struct PipelineResult {
    NormalizedProgram normalized;
    std::shared_ptr<Saturation> sat;
    uint64_t suitableBound = 0;
    size_t satRuleCount = 0;      // closure rules touched so far
    FactClosure closure;
    Linearization lin;
    SemiWidthResult semiWidth;
    std::vector<QueryAnswer> answers;
    std::map<std::string, double> timingsMs;
    nlohmann::json report;
};

PipelineResult run_pipeline(const Program& input, const PipelineOptions& opt = {});

// ---------------------------------------------------------------------------
// Certification: rebuild the linear witness as a run over the normalized
// rules plus closure rules and have check_proof replay it.

struct Certification {
    bool ok = false;
    std::string reason;
    std::vector<StepRecord> steps;
    std::vector<TGD> rules;
    Subst match;
};

// `recorded` must come from fact_saturate(..., record=true); `chase` must be
// an answered tight-chase run over the linearization.
Certification delinearize(const NormalizedProgram& np, Saturation& sat,
                          const FactClosure& recorded, const Linearization& lin,
                          const TightChaseResult& chase, const Query& q);

// ---------------------------------------------------------------------------
// Fuzzing and differential testing

struct FuzzScale {
    int maxRelations = 4;
    int maxArity = 3;
    int maxSideArity = 1;
    int maxWidth = 2;
    int maxRules = 5;
    int maxFacts = 6;
    int maxQueryAtoms = 3;
};

// Side-obeying guarded program within the scale limits: principal guards,
// side atoms over guard variables only.
Program fuzz_program(std::mt19937_64& rng, const FuzzScale& scale = {});

struct DifferentialOutcome {
    bool failed = false;       // soundness or certification violation
    bool unresolved = false;   // oracle budget out, pipeline says no
    std::string reason;
    std::vector<bool> oracleEntailed;   // per query (budget permitting)
    std::vector<bool> pipelineYes;
};

DifferentialOutcome differential_case(const Program& prog, size_t oracleBudget,
                                      bool requireCertified = true);

// ---------------------------------------------------------------------------
// Benchmark helpers

// R/2 principal, U/1 side, a transitive side-transfer rule and a
// child-spawning rule, over a chain of `nFacts` facts.
Program scaling_program(size_t nFacts);

// Least-squares slope of log(y) against log(x); r2 receives the fit quality.
double loglog_slope(const std::vector<std::pair<double, double>>& points, double* r2);

}  // namespace owqa
