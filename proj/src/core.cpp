#include "owqa/core.hpp"

#include <atomic>
#include <mutex>
#include <sstream>
#include <unordered_map>

namespace owqa {

namespace {

struct NameTable {
    std::vector<std::string> names;
    std::unordered_map<std::string, int32_t> ids;
    std::mutex mu;

    int32_t intern(const std::string& s) {
        std::lock_guard<std::mutex> lock(mu);
        auto it = ids.find(s);
        if (it != ids.end()) return it->second;
        int32_t id = int32_t(names.size());
        names.push_back(s);
        ids.emplace(s, id);
        return id;
    }
    const std::string& name(int32_t id) {
        std::lock_guard<std::mutex> lock(mu);
        return names.at(size_t(id));
    }
};

NameTable& var_table() { static NameTable t; return t; }
NameTable& const_table() { static NameTable t; return t; }
std::atomic<int32_t>& null_counter() { static std::atomic<int32_t> c{0}; return c; }
std::atomic<uint64_t>& fresh_counter() { static std::atomic<uint64_t> c{0}; return c; }

}  // namespace

Term make_var(const std::string& name) { return Term{TermKind::Var, var_table().intern(name)}; }
Term make_const(const std::string& name) { return Term{TermKind::Const, const_table().intern(name)}; }

Term fresh_var(const std::string& prefix) {
    uint64_t n = fresh_counter()++;
    return make_var(prefix + std::to_string(n));
}

Term fresh_null() { return Term{TermKind::Null, null_counter()++}; }

const std::string& var_name(Term t) { return var_table().name(t.id); }
const std::string& const_name(Term t) { return const_table().name(t.id); }

std::string term_to_string(Term t) {
    switch (t.kind) {
        case TermKind::Var: return var_name(t);
        case TermKind::Const: return const_name(t);
        case TermKind::Null: return "n" + std::to_string(t.id);
    }
    return "?";
}

int Signature::add(const std::string& name, int arity, bool side, const std::string& origin) {
    auto it = byName_.find(name);
    if (it != byName_.end())
        throw Diag("DuplicateRelation", "relation '" + name + "' declared twice");
    int id = int(rels_.size());
    rels_.push_back(RelationSymbol{name, arity, side, origin});
    byName_.emplace(name, id);
    return id;
}

int Signature::find(const std::string& name) const {
    auto it = byName_.find(name);
    return it == byName_.end() ? -1 : it->second;
}

std::string atom_to_string(const Signature& sig, const Atom& a) {
    std::ostringstream os;
    os << sig.at(a.rel).name << "(";
    for (size_t i = 0; i < a.args.size(); ++i) {
        if (i) os << ",";
        os << term_to_string(a.args[i]);
    }
    os << ")";
    return os.str();
}

Term subst(const Subst& s, Term t) {
    if (!t.is_var()) return t;
    auto it = s.find(t.id);
    return it == s.end() ? t : it->second;
}

Atom subst(const Subst& s, const Atom& a) {
    Atom out;
    out.rel = a.rel;
    out.args.reserve(a.args.size());
    for (Term t : a.args) out.args.push_back(subst(s, t));
    return out;
}

std::vector<Atom> subst(const Subst& s, const std::vector<Atom>& atoms) {
    std::vector<Atom> out;
    out.reserve(atoms.size());
    for (const Atom& a : atoms) out.push_back(subst(s, a));
    return out;
}

std::set<Term> vars_of(const Atom& a) {
    std::set<Term> vs;
    for (Term t : a.args)
        if (t.is_var()) vs.insert(t);
    return vs;
}

std::set<Term> vars_of(const std::vector<Atom>& atoms) {
    std::set<Term> vs;
    for (const Atom& a : atoms)
        for (Term t : a.args)
            if (t.is_var()) vs.insert(t);
    return vs;
}

RuleInfo analyze_rule(const TGD& rule, const Signature& sig) {
    RuleInfo info;
    std::set<Term> bodyVars = vars_of(rule.body);
    std::set<Term> headVars = vars_of(rule.head);

    for (Term v : headVars) {
        if (bodyVars.count(v)) info.exported.insert(v);
        else info.existential.insert(v);
    }
    info.isFull = info.existential.empty();
    info.width = int(info.exported.size());

    auto guards = [&](const Atom& a) {
        std::set<Term> av = vars_of(a);
        for (Term v : bodyVars)
            if (!av.count(v)) return false;
        return true;
    };

    int firstSideGuard = -1;
    int principalGuard = -1;
    for (size_t i = 0; i < rule.body.size(); ++i) {
        const Atom& a = rule.body[i];
        bool isSide = sig.is_side(a.rel);
        if (!isSide) ++info.principalCount;
        if (guards(a)) {
            info.guarded = true;
            if (isSide) {
                // deterministic tie-break: lexicographically first rendering
                if (firstSideGuard < 0 ||
                    atom_to_string(sig, a) < atom_to_string(sig, rule.body[size_t(firstSideGuard)]))
                    firstSideGuard = int(i);
            } else if (principalGuard < 0) {
                principalGuard = int(i);
            }
        }
    }

    // Obedience: some guard such that every *other* body atom is side.
    // With >1 principal atoms no choice works (identical duplicates aside).
    auto othersAreSide = [&](int g) {
        for (size_t i = 0; i < rule.body.size(); ++i) {
            if (int(i) == g) continue;
            if (!sig.is_side(rule.body[i].rel) && rule.body[i] != rule.body[size_t(g)])
                return false;
        }
        return true;
    };
    if (principalGuard >= 0 && othersAreSide(principalGuard)) {
        info.obeysSide = true;
        info.guardIndex = principalGuard;
    } else if (info.principalCount == 0 && firstSideGuard >= 0) {
        info.obeysSide = true;
        info.guardIndex = firstSideGuard;
    } else if (principalGuard >= 0) {
        info.guardIndex = principalGuard;
    } else {
        info.guardIndex = firstSideGuard;
    }

    if (info.guardIndex >= 0) {
        std::set<Term> touched;
        for (size_t i = 0; i < rule.body.size(); ++i) {
            if (int(i) == info.guardIndex) continue;
            for (Term v : vars_of(rule.body[i])) touched.insert(v);
        }
        info.breadth = int(touched.size());
    }
    return info;
}

std::string rule_to_string(const Signature& sig, const TGD& r) {
    std::ostringstream os;
    for (size_t i = 0; i < r.body.size(); ++i) {
        if (i) os << ", ";
        os << atom_to_string(sig, r.body[i]);
    }
    os << " -> ";
    for (size_t i = 0; i < r.head.size(); ++i) {
        if (i) os << ", ";
        os << atom_to_string(sig, r.head[i]);
    }
    return os.str();
}

SignatureStats compute_stats(const Signature& sig, const std::vector<TGD>& rules) {
    SignatureStats st;
    st.relationCount = sig.size();
    for (const RelationSymbol& r : sig.all()) {
        st.maxArity = std::max(st.maxArity, r.arity);
        if (r.side) {
            ++st.sideCount;
            st.sideMaxArity = std::max(st.sideMaxArity, r.arity);
        }
    }
    for (const TGD& r : rules) {
        RuleInfo info = analyze_rule(r, sig);
        st.width = std::max(st.width, info.width);
        st.maxBreadth = std::max(st.maxBreadth, info.breadth);
    }
    st.wPrime = std::max(st.width, st.sideMaxArity);
    st.ruleCount = int(rules.size());
    return st;
}

}  // namespace owqa
