#include "owqa/factset.hpp"

namespace owqa {

const std::vector<int> FactSet::empty_;

bool FactSet::add(const Atom& a) {
    if (index_.count(a)) return false;
    int id = int(facts_.size());
    facts_.push_back(a);
    index_.insert(a);
    byRel_[a.rel].push_back(id);
    for (size_t p = 0; p < a.args.size(); ++p)
        byPos_[pos_key(a.rel, int(p), a.args[p])].push_back(id);
    std::set<Term> distinct(a.args.begin(), a.args.end());
    for (Term t : distinct) byValue_[t].push_back(id);
    return true;
}

const std::vector<int>& FactSet::containing(Term t) const {
    auto it = byValue_.find(t);
    return it == byValue_.end() ? empty_ : it->second;
}

const std::vector<int>& FactSet::by_relation(int rel) const {
    auto it = byRel_.find(rel);
    return it == byRel_.end() ? empty_ : it->second;
}

const std::vector<int>& FactSet::by_position(int rel, int pos, Term t) const {
    auto it = byPos_.find(pos_key(rel, pos, t));
    return it == byPos_.end() ? empty_ : it->second;
}

std::set<Term> FactSet::adom() const {
    std::set<Term> d;
    for (const Atom& a : facts_)
        for (Term t : a.args) d.insert(t);
    return d;
}

bool match_atom(const Atom& pattern, const Atom& fact, Subst& s) {
    if (pattern.rel != fact.rel || pattern.args.size() != fact.args.size()) return false;
    std::vector<std::pair<int32_t, bool>> added;  // (var id, inserted) for rollback
    for (size_t i = 0; i < pattern.args.size(); ++i) {
        Term p = pattern.args[i];
        Term f = fact.args[i];
        if (!p.is_var()) {
            if (p != f) goto fail;
            continue;
        }
        {
            auto it = s.find(p.id);
            if (it != s.end()) {
                if (it->second != f) goto fail;
            } else {
                s.emplace(p.id, f);
                added.emplace_back(p.id, true);
            }
        }
    }
    return true;
fail:
    for (auto& [id, ins] : added)
        if (ins) s.erase(id);
    return false;
}

namespace {

bool search(const std::vector<Atom>& pattern, size_t i, const FactSet& target, Subst& s,
            const std::function<bool(const Subst&)>& cb, bool& stopped) {
    if (i == pattern.size()) {
        if (!cb(s)) { stopped = true; return false; }
        return true;
    }
    const Atom& pat = pattern[i];
    // Pick candidates through the most selective bound position, if any.
    const std::vector<int>* cands = &target.by_relation(pat.rel);
    for (size_t p = 0; p < pat.args.size(); ++p) {
        Term t = subst(s, pat.args[p]);
        if (!t.is_var()) {
            const std::vector<int>& v = target.by_position(pat.rel, int(p), t);
            if (v.size() < cands->size()) cands = &v;
        }
    }
    Atom bound = subst(s, pat);
    for (int fid : *cands) {
        Subst saved = s;
        if (match_atom(bound, target.at(size_t(fid)), s)) {
            if (!search(pattern, i + 1, target, s, cb, stopped)) return false;
        }
        s = saved;
    }
    return true;
}

}  // namespace

bool find_homomorphisms(const std::vector<Atom>& pattern, const FactSet& target,
                        const Subst& seed, const std::function<bool(const Subst&)>& cb) {
    Subst s = seed;
    bool stopped = false;
    search(pattern, 0, target, s, cb, stopped);
    return stopped;
}

}  // namespace owqa
