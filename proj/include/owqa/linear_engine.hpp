// Decision procedures for linear (single-body-atom) programs: semi-width
// verification, UCQ rewriting, and a depth-bounded tight chase with
// provenance for witness extraction.
#pragma once

#include "owqa/factset.hpp"

#include <unordered_map>

namespace owqa {

// ---------------------------------------------------------------------------
// Semi-width

// Decomposes the program as Sigma1 (rules of width <= w) plus Sigma2 (the
// rest) and checks that the basic position graph of Sigma2 is acyclic. The
// graph has an edge from body position (R,i) to head position (S,j) whenever
// some Sigma2 rule carries an exported variable from the one to the other.
struct SemiWidthResult {
    bool ok = false;
    int w = 0;
    std::vector<int> sigma2;                   // rule indices with width > w
    std::vector<std::pair<int, int>> cycle;    // (rel, pos) witness when !ok
};

SemiWidthResult check_semi_width(const Program& prog, int w);

// ---------------------------------------------------------------------------
// Depth bounds (saturating)

// k * |Sigma| * (m + w)^w, k the query size and m the maximum arity
uint64_t depth_bound(uint64_t k, uint64_t ruleCount, uint64_t m, uint64_t w);
// k * max(|Sigma|^2, |Sigma2| * |Sigma|) * (m + w)^w
uint64_t depth_bound_semi(uint64_t k, uint64_t ruleCount, uint64_t sigma2Count, uint64_t m,
                          uint64_t w);

// ---------------------------------------------------------------------------
// UCQ rewriting

struct Rewriting {
    std::vector<Query> disjuncts;  // includes the original query
    bool capped = false;           // cap reached; the union is incomplete
    size_t generated = 0;
};

// Backward rewriting by single-atom resolution against the (linear, single
// head) rules, up to `cap` distinct disjuncts.
Rewriting ucq_rewrite(const Program& prog, const Query& q, size_t cap = 20000);

// Does some disjunct map homomorphically into the instance?
bool rewriting_answers(const Rewriting& rw, const FactSet& instance);

// ---------------------------------------------------------------------------
// Tight chase

struct ChaseNode {
    Atom fact;
    int parent = -1;   // -1 for instance facts
    int ruleId = -1;
    Subst trigger;     // body match producing this fact
    uint64_t depth = 0;
};

struct TightChaseResult {
    bool answered = false;
    bool budgetExhausted = false;  // node cap hit with work remaining
    std::vector<ChaseNode> nodes;
    std::unordered_map<Atom, int, AtomHash> index;  // fact -> node id
    Subst match;                                    // query match when answered
};

// Depth-bounded chase of a linear program. Each derivation whose fact repeats
// the relation/equality pattern and instance values of an ancestor on its own
// branch is pruned (the subtree would be isomorphic). Throws
// Diag("NotLinear") on rules with more than one body atom.
TightChaseResult tight_chase(const Program& prog, const FactSet& instance, const Query& q,
                             uint64_t depthBound, size_t nodeCap = 100000);

// ---------------------------------------------------------------------------
// Combined decision

enum class LinearEngine { Rewrite, TightChase, Both };

struct LinearDecision {
    bool yes = false;
    std::string engine;       // "rewrite", "chase", or "rewrite+chase"
    bool agreement = true;    // Both mode: engines agreed (or chase ran out of budget)
    bool tightBudgetExhausted = false;
    TightChaseResult chase;   // populated when the chase ran
    Rewriting rewriting;      // populated when the rewriting ran
};

LinearDecision decide_linear(const Program& prog, const FactSet& instance, const Query& q,
                             LinearEngine engine, uint64_t depthBound,
                             size_t rewriteCap = 20000, size_t nodeCap = 100000);

}  // namespace owqa
