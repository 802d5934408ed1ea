// Canonical guarded sets: a single principal atom plus side atoms over its
// elements, renamed to canonical variables e1,e2,... by first occurrence in
// the principal atom's argument list. Used both as childish-instance types
// (catalog keys) and as canonical rule bodies (saturation keys).
#pragma once

#include "owqa/core.hpp"

namespace owqa {

struct GuardedSet {
    Atom principal;            // over canonical variables
    std::vector<Atom> side;    // sorted, deduplicated, over canonical variables

    bool operator==(const GuardedSet& o) const {
        return principal == o.principal && side == o.side;
    }
    bool operator<(const GuardedSet& o) const {
        if (!(principal == o.principal)) return principal < o.principal;
        return side < o.side;
    }
    // Distinct canonical variables, in order e1..ek.
    std::vector<Term> elements() const;
    // Canonical variables carrying at least one side atom.
    std::vector<Term> side_elements() const;
};

// The i-th canonical element variable (1-based display name "e<i>").
Term canonical_var(int i);

// Canonicalizes a principal fact with side facts guarded by it. The inputs
// may use any terms (values or variables); repeated terms map to the same
// canonical variable. Throws Diag("UnguardedFact") when a side fact uses a
// term that does not occur in the principal fact, and
// Diag("SidePrincipalMix") when a non-side atom is passed as a side fact.
GuardedSet canonicalize_guarded_set(const Atom& principal, const std::vector<Atom>& side,
                                    const Signature& sig);

// The substitution sending canonical variables back to the original terms of
// `principal` (inverse of the canonical renaming).
Subst decanonicalize_map(const GuardedSet& gs, const Atom& principal);

std::string guarded_set_to_string(const Signature& sig, const GuardedSet& gs);

}  // namespace owqa
