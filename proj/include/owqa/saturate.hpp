// Childish saturation: the closure of suitable full rules under
// (Transitivity) and (Principal+Transitivity).
//
// The closure is computed as a tabled fixpoint over canonical bodies
// (GuardedSet keys). Bodies are created on demand; the premise rule of both
// inference steps ranges over the input rules, with previously derived rules
// entering through the per-body head set and, for (P+T), through a recursive
// query of the premise body (tracked as a dependency, re-stepped on growth).
#pragma once

#include <deque>

#include "owqa/childish.hpp"
#include "owqa/core.hpp"
#include "owqa/factset.hpp"

namespace owqa {

struct FullRule {
    GuardedSet body;
    Atom head;  // over the body's canonical variables
};

struct SuitableCheck {
    bool suitable = false;
    std::string reason;  // first failing condition, empty when suitable
};

// Suitability of a full rule: exactly one principal guard, head and guard
// compatible with sigma's head patterns (or side), width and breadth at most
// stats.wPrime.
SuitableCheck is_suitable(const TGD& rule, const Program& sigma, const SignatureStats& stats);

// |Σ|^2 * (a+1)^(3w) * 2^(n' * w^a'), saturating at ULLONG_MAX.
unsigned long long suitable_count_bound(const SignatureStats& stats);

class Saturation;

// Closes `node` under the closure rules (fixpoint), anchoring at each
// principal fact with every side-fact subset over at most wPrime of its
// values. `onDerive(body, head, trigger, fact)` is invoked per new fact.
void close_under_saturation(
    Saturation& sat, FactSet& node,
    const std::function<void(const GuardedSet&, const Atom&, const Subst&, const Atom&)>&
        onDerive = {});

class Saturation {
public:
    Saturation(const Program& normalized, const SignatureStats& stats);

    // All suitable closure heads derivable for this canonical body
    // (empty for bodies that cannot carry a suitable rule).
    const std::set<Atom>& heads(const GuardedSet& body);

    // Membership of a full rule in the closure.
    bool contains(const TGD& rule);

    // Enumerates the complete body space (guard patterns x side subsets) and
    // saturates it. Throws Diag("BodySpaceTooLarge") past the cap.
    void materialize_all(size_t bodyCap = 200000);

    // Every closure rule in the table so far (complete after materialize_all).
    std::vector<FullRule> rules() const;
    size_t rule_count() const;
    size_t body_count() const { return entries_.size(); }

    bool compatible(const Atom& a) const;  // side atom or iso to a head of sigma
    const Program& program() const { return prog_; }
    const SignatureStats& stats() const { return stats_; }

    // Trivial-rule bodies for one guard pattern (side subsets over <= wPrime
    // elements); exposed for tests and the CLI.
    std::vector<GuardedSet> bodies_for_guard(const Atom& guardPattern, size_t cap) const;

private:
    struct BodyEntry {
        GuardedSet body;
        bool valid = false;  // can carry suitable rules at all
        std::set<Atom> derived;
        std::set<Atom> sideSet;  // body.side for membership tests
        std::set<int> dependents;
    };

    // Precomputed pieces of the input rules.
    struct RulePieces {
        Atom guard;
        std::vector<Atom> sides;
        Atom head;
        bool full = false;
        bool principalHead = false;
        std::set<Term> exported;
    };

    int ensure(const GuardedSet& body);
    void run();                 // drain the worklist
    void step(int id);
    bool try_add(int id, const Atom& head);
    bool in_bh(const BodyEntry& e, const Atom& a) const;
    bool suitable_head(const Atom& head) const;
    Atom freeze(const Atom& a, std::vector<Term>* varOfCanon = nullptr) const;

    Program prog_;
    SignatureStats stats_;
    std::vector<RulePieces> pieces_;
    std::set<Atom> headPatterns_;          // frozen head atoms of sigma
    std::map<GuardedSet, std::set<Atom>> seeds_;  // suitable sigma rules by body
    std::map<GuardedSet, int> idOf_;
    std::vector<BodyEntry> entries_;
    std::deque<int> worklist_;
    std::vector<bool> queued_;
};

}  // namespace owqa
