// Tree-like chase variants, the bounded entailment oracle, and the
// independent proof checker that replays recorded runs.
#pragma once

#include "owqa/core.hpp"
#include "owqa/factset.hpp"

namespace owqa {

enum class Strategy { Tree, OnePass, PrincipalExempt, Shortcut };

struct StepRecord {
    enum class Kind { Full, NonFull, Relaxed, Propagation };
    Kind kind = Kind::Full;
    int node = -1;              // node holding the trigger (Full: fact lands here)
    int child = -1;             // node created by NonFull/Relaxed
    int ruleId = -1;            // index into the rule list the run is checked against
    Subst trigger;              // assignment of the rule's body variables
    Atom created;               // derived fact / new node's principal fact
    std::vector<Atom> inherited;  // facts copied into the new node
    std::vector<Atom> moved;      // Propagation payload
    int from = -1, to = -1;       // Propagation endpoints
};

struct ChaseRun {
    std::vector<int> parent;          // parent[0] == -1
    std::vector<FactSet> nodeFacts;
    std::vector<StepRecord> steps;
    FactSet allFacts;                 // union over all nodes
    bool budgetExhausted = false;
};

// Runs the selected strategy to quiescence or until `budget` recorded steps.
// Shortcut requires `saturation` (the full rules fired in the per-node
// saturation phase); other strategies ignore it.
ChaseRun run_chase(const Program& p, Strategy strat, const std::vector<TGD>* saturation,
                   size_t budget);

struct OracleResult {
    bool entailed = false;
    Subst match;   // query variables -> values, valid when entailed
    ChaseRun run;
};

// Fair tree chase with early exit on query match. Sound and, given enough
// budget, complete; soundness of a positive verdict is re-checkable via
// check_proof on the returned run.
OracleResult bounded_entailment_oracle(const Program& p, const Query& q, size_t budget);

struct ProofCheck {
    bool ok = false;
    int firstBad = -1;   // index of the first illegal step, -1 if all legal
    std::string reason;
};

// Replays `steps` from `instance` under `rules`, validating every step, then
// checks that `match` embeds the query into the union of node facts.
ProofCheck check_proof(const Signature& sig, const std::vector<TGD>& rules,
                       const std::vector<Atom>& instance, const std::vector<StepRecord>& steps,
                       const Subst& match, const Query& query);

}  // namespace owqa
