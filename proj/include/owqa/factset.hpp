// Indexed fact storage plus homomorphism enumeration.
#pragma once

#include <unordered_map>
#include <unordered_set>

#include "owqa/core.hpp"

namespace owqa {

// A deduplicated, insertion-ordered set of atoms with a (rel,pos,term) index.
// "Facts" here may contain canonical variables when the set models a childish
// type; nothing below requires groundness.
class FactSet {
public:
    FactSet() = default;

    bool add(const Atom& a);               // true if newly inserted
    bool contains(const Atom& a) const { return index_.count(a) != 0; }
    size_t size() const { return facts_.size(); }
    const std::vector<Atom>& all() const { return facts_; }
    const Atom& at(size_t i) const { return facts_[i]; }

    const std::vector<int>& by_relation(int rel) const;
    // facts with term t at position pos of relation rel
    const std::vector<int>& by_position(int rel, int pos, Term t) const;
    // facts mentioning term t anywhere
    const std::vector<int>& containing(Term t) const;

    std::set<Term> adom() const;

private:
    std::vector<Atom> facts_;
    std::unordered_set<Atom, AtomHash> index_;
    std::unordered_map<int, std::vector<int>> byRel_;
    std::unordered_map<uint64_t, std::vector<int>> byPos_;
    std::unordered_map<Term, std::vector<int>, TermHash> byValue_;
    static const std::vector<int> empty_;

    static uint64_t pos_key(int rel, int pos, Term t) {
        uint64_t h = (uint64_t(uint32_t(rel)) << 40) ^ (uint64_t(uint32_t(pos)) << 34);
        return h ^ (uint64_t(uint8_t(t.kind)) << 32) ^ uint32_t(t.id);
    }
};

// Enumerates homomorphisms from `pattern` into `target` extending `seed`.
// Deterministic: atoms are matched in order, candidate facts in insertion
// order. The callback returns false to stop enumeration early.
// Returns true if enumeration was stopped by the callback.
bool find_homomorphisms(const std::vector<Atom>& pattern, const FactSet& target,
                        const Subst& seed, const std::function<bool(const Subst&)>& cb);

// Single-atom matcher: extend `s` so subst(s, pattern) == fact.
bool match_atom(const Atom& pattern, const Atom& fact, Subst& s);

}  // namespace owqa
