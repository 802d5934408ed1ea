#include "owqa/childish.hpp"

#include <algorithm>
#include <sstream>

namespace owqa {

Term canonical_var(int i) {
    static std::vector<Term> cache;
    while (int(cache.size()) <= i)
        cache.push_back(make_var("e" + std::to_string(cache.size() + 1)));
    return cache[size_t(i)];
}

std::vector<Term> GuardedSet::elements() const {
    std::vector<Term> out;
    for (Term t : principal.args)
        if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    return out;
}

std::vector<Term> GuardedSet::side_elements() const {
    std::vector<Term> out;
    for (const Atom& a : side)
        for (Term t : a.args)
            if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    std::sort(out.begin(), out.end());
    return out;
}

GuardedSet canonicalize_guarded_set(const Atom& principal, const std::vector<Atom>& side,
                                    const Signature& sig) {
    std::map<Term, Term> toCanon;
    GuardedSet gs;
    gs.principal.rel = principal.rel;
    for (Term t : principal.args) {
        auto it = toCanon.find(t);
        if (it == toCanon.end())
            it = toCanon.emplace(t, canonical_var(int(toCanon.size()))).first;
        gs.principal.args.push_back(it->second);
    }
    for (const Atom& a : side) {
        if (!sig.is_side(a.rel))
            throw Diag("SidePrincipalMix",
                       "atom " + atom_to_string(sig, a) + " is not on a side relation");
        Atom c;
        c.rel = a.rel;
        for (Term t : a.args) {
            auto it = toCanon.find(t);
            if (it == toCanon.end())
                throw Diag("UnguardedFact", "side fact " + atom_to_string(sig, a) +
                                                " uses a value absent from the principal fact");
            c.args.push_back(it->second);
        }
        gs.side.push_back(c);
    }
    std::sort(gs.side.begin(), gs.side.end());
    gs.side.erase(std::unique(gs.side.begin(), gs.side.end()), gs.side.end());
    return gs;
}

Subst decanonicalize_map(const GuardedSet& gs, const Atom& principal) {
    Subst s;
    for (size_t i = 0; i < gs.principal.args.size(); ++i)
        s.emplace(gs.principal.args[i].id, principal.args[i]);
    return s;
}

std::string guarded_set_to_string(const Signature& sig, const GuardedSet& gs) {
    std::ostringstream os;
    os << "{" << atom_to_string(sig, gs.principal);
    for (const Atom& a : gs.side) os << "; " << atom_to_string(sig, a);
    os << "}";
    return os.str();
}

}  // namespace owqa
