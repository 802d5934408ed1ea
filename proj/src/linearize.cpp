#include "owqa/linearize.hpp"

#include <algorithm>
#include <unordered_set>

namespace owqa {

namespace {

std::string canonical_rule_key(const Signature& sig, const TGD& r) {
    TGD cur = r;
    Subst ren;
    int next = 0;
    auto visit = [&](std::vector<Atom>& atoms) {
        for (Atom& a : atoms)
            for (Term& t : a.args)
                if (t.is_var()) {
                    auto it = ren.find(t.id);
                    if (it == ren.end())
                        it = ren.emplace(t.id, make_var("k" + std::to_string(next++))).first;
                    t = it->second;
                }
    };
    visit(cur.body);
    visit(cur.head);
    return rule_to_string(sig, cur);
}

int register_type(Linearization& lin, const Signature& baseSig, const GuardedSet& s) {
    auto it = lin.typeIndex.find(s);
    if (it != lin.typeIndex.end()) return it->second;
    int id = int(lin.types.size());
    std::string base = "t" + std::to_string(id) + "_" + baseSig.at(s.principal.rel).name;
    while (lin.sig.find(base) >= 0) base += "_";
    int rel = lin.sig.add(base, int(s.principal.args.size()), false, "childish-type");
    lin.types.push_back(s);
    lin.typeRel.push_back(rel);
    lin.typeIndex.emplace(s, id);
    return id;
}

// side facts of `fs` whose arguments all lie in V
std::vector<Atom> side_facts_over(const FactSet& fs, const Signature& sig,
                                  const std::set<Term>& V) {
    std::vector<Atom> out;
    std::set<int> seen;
    for (Term v : V)
        for (int fid : fs.containing(v)) {
            if (!seen.insert(fid).second) continue;
            const Atom& f = fs.at(size_t(fid));
            if (!sig.is_side(f.rel)) continue;
            bool within = true;
            for (Term t : f.args)
                if (!V.count(t)) { within = false; break; }
            if (within) out.push_back(f);
        }
    return out;
}

}  // namespace

int Linearization::type_of_relation(int rel) const {
    for (size_t i = 0; i < typeRel.size(); ++i)
        if (typeRel[i] == rel) return int(i);
    return -1;
}

void linearize_instance(const FactSet& saturated, Saturation& sat, Linearization& lin) {
    const Signature& sig = sat.program().sig;
    FactSet typeFacts;
    for (const Atom& P : saturated.all()) {
        if (sig.is_side(P.rel)) continue;
        size_t arity = P.args.size();
        for (uint64_t mask = 0; mask < (1ULL << arity); ++mask) {
            std::set<Term> V;
            int bits = 0;
            for (size_t i = 0; i < arity; ++i)
                if (mask & (1ULL << i)) {
                    V.insert(P.args[i]);
                    ++bits;
                }
            if (bits > sat.stats().wPrime) continue;
            GuardedSet S =
                canonicalize_guarded_set(P, side_facts_over(saturated, sig, V), sig);
            int id = register_type(lin, sig, S);
            Atom tf;
            tf.rel = lin.typeRel[size_t(id)];
            tf.args = P.args;
            typeFacts.add(tf);
        }
    }
    for (const Atom& f : saturated.all()) lin.instance.push_back(f);
    for (const Atom& f : typeFacts.all()) lin.instance.push_back(f);
}

Linearization linearize(const Program& normalized, Saturation& sat, const FactSet& saturated) {
    Linearization lin;
    lin.sig = normalized.sig;

    // non-full input rules, variables renamed apart from canonical variables
    std::vector<TGD> nonFull;
    std::vector<RuleInfo> nfInfo;
    std::vector<int> nfIndex;
    for (size_t rid = 0; rid < normalized.rules.size(); ++rid) {
        RuleInfo info = analyze_rule(normalized.rules[rid], normalized.sig);
        if (info.isFull) continue;
        TGD r = normalized.rules[rid];
        Subst ren;
        auto visit = [&](std::vector<Atom>& atoms) {
            for (Atom& a : atoms)
                for (Term& t : a.args)
                    if (t.is_var()) {
                        auto it = ren.find(t.id);
                        if (it == ren.end()) it = ren.emplace(t.id, fresh_var("d")).first;
                        t = it->second;
                    }
        };
        visit(r.body);
        visit(r.head);
        nonFull.push_back(std::move(r));
        nfInfo.push_back(analyze_rule(nonFull.back(), normalized.sig));
        nfIndex.push_back(int(rid));
    }

    linearize_instance(saturated, sat, lin);

    std::unordered_set<std::string> ruleKeys;
    auto emit = [&](TGD rule, LinearRuleMeta m) {
        std::string key = canonical_rule_key(lin.sig, rule);
        if (!ruleKeys.insert(key).second) return;
        lin.rules.push_back(std::move(rule));
        lin.meta.push_back(m);
    };

    for (size_t typeId = 0; typeId < lin.types.size(); ++typeId) {
        const GuardedSet S = lin.types[typeId];  // copy; types grows below
        std::vector<Term> sideElems = S.side_elements();
        size_t k = sideElems.size();
        std::vector<size_t> pick(k, 0);
        // all endomorphisms of the side-carrying elements (identity included)
        while (true) {
            Subst h;
            for (size_t i = 0; i < k; ++i) h.emplace(sideElems[i].id, sideElems[pick[i]]);

            FactSet F;
            Atom hPrincipal = subst(h, S.principal);
            F.add(hPrincipal);
            for (const Atom& a : S.side) F.add(subst(h, a));
            close_under_saturation(sat, F);

            Atom bodyAtom;
            bodyAtom.rel = lin.typeRel[typeId];
            bodyAtom.args = hPrincipal.args;

            // (Instantiate): the type relation derives every closed-off fact.
            for (const Atom& A : F.all()) {
                TGD r;
                r.body = {bodyAtom};
                r.head = {A};
                emit(std::move(r),
                     LinearRuleMeta{LinearRuleMeta::Kind::Instantiate, int(typeId), -1, -1});
            }

            // (Lift): non-full rule firings inside the closed type step to
            // the successor type.
            for (size_t d = 0; d < nonFull.size(); ++d) {
                const TGD& delta = nonFull[d];
                const RuleInfo& di = nfInfo[d];
                std::vector<Subst> matches;
                find_homomorphisms(delta.body, F, {}, [&](const Subst& m) {
                    matches.push_back(m);
                    return true;
                });
                for (const Subst& m : matches) {
                    Subst full = m;
                    for (Term v : di.existential) full.emplace(v.id, fresh_var("lw"));
                    Atom headFact = subst(full, delta.head[0]);
                    std::set<Term> exportedVals;
                    for (Term v : di.exported) exportedVals.insert(subst(m, v));
                    GuardedSet S2 = canonicalize_guarded_set(
                        headFact, side_facts_over(F, normalized.sig, exportedVals),
                        normalized.sig);
                    int toId = register_type(lin, normalized.sig, S2);
                    Atom headAtom;
                    headAtom.rel = lin.typeRel[size_t(toId)];
                    headAtom.args = headFact.args;  // markers become existentials
                    TGD r;
                    r.body = {bodyAtom};
                    r.head = {headAtom};
                    emit(std::move(r), LinearRuleMeta{LinearRuleMeta::Kind::Lift, int(typeId),
                                                      toId, nfIndex[size_t(d)]});
                }
            }

            size_t i = 0;
            for (; i < k; ++i) {
                if (++pick[i] < k) break;
                pick[i] = 0;
            }
            if (i == k || k == 0) break;
        }
    }
    return lin;
}

}  // namespace owqa
