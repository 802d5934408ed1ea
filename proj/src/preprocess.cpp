#include "owqa/preprocess.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

namespace owqa {

namespace {

std::string unique_rel_name(const Signature& sig, std::string base) {
    while (sig.find(base) >= 0) base += "_";
    return base;
}

// Canonical string for deduplicating rules up to variable renaming: rename
// variables by first occurrence, sort body atoms, rename again.
std::string rule_key(const TGD& r, const Signature& sig) {
    TGD cur = r;
    for (int round = 0; round < 2; ++round) {
        Subst ren;
        int next = 0;
        auto visit = [&](std::vector<Atom>& atoms) {
            for (Atom& a : atoms)
                for (Term& t : a.args)
                    if (t.is_var()) {
                        auto it = ren.find(t.id);
                        if (it == ren.end())
                            it = ren.emplace(t.id, make_var("r" + std::to_string(next++))).first;
                        t = it->second;
                    }
        };
        visit(cur.body);
        visit(cur.head);
        std::sort(cur.body.begin(), cur.body.end());
        cur.body.erase(std::unique(cur.body.begin(), cur.body.end()), cur.body.end());
    }
    return rule_to_string(sig, cur);
}

// Enumerate all set partitions of `items` via restricted growth strings.
void partitions(size_t n, const std::function<void(const std::vector<int>&)>& cb) {
    std::vector<int> rgs(n, 0);
    std::function<void(size_t, int)> rec = [&](size_t i, int maxBlock) {
        if (i == n) { cb(rgs); return; }
        for (int b = 0; b <= maxBlock + 1; ++b) {
            rgs[i] = b;
            rec(i + 1, std::max(maxBlock, b));
        }
    };
    if (n == 0) cb(rgs);
    else rec(0, -1);
}

}  // namespace

void split_multiheads(Program& p, NormalizationTrace& trace) {
    std::vector<TGD> out;
    int counter = 0;
    for (const TGD& r : p.rules) {
        if (r.head.size() <= 1) {
            out.push_back(r);
            continue;
        }
        RuleInfo info = analyze_rule(r, p.sig);
        std::vector<Term> frontier(info.exported.begin(), info.exported.end());
        std::vector<Term> exist(info.existential.begin(), info.existential.end());
        std::string name = unique_rel_name(p.sig, "mh" + std::to_string(counter++));
        int rel = p.sig.add(name, int(frontier.size() + exist.size()), false, "multihead-split");
        trace.splitRelations.emplace_back(name, rule_to_string(p.sig, r));
        Atom bridge;
        bridge.rel = rel;
        bridge.args = frontier;
        bridge.args.insert(bridge.args.end(), exist.begin(), exist.end());
        TGD first;
        first.body = r.body;
        first.head = {bridge};
        out.push_back(std::move(first));
        for (const Atom& h : r.head) {
            TGD proj;
            proj.body = {bridge};
            proj.head = {h};
            out.push_back(std::move(proj));
        }
    }
    p.rules = std::move(out);
}

void eliminate_constants(Program& p, NormalizationTrace& trace) {
    // Head constants are not supported by the construction.
    for (const TGD& r : p.rules)
        for (const Atom& h : r.head)
            for (Term t : h.args)
                if (t.is_const())
                    throw Diag("HeadConstant",
                               "constant '" + const_name(t) + "' in rule head is not supported");

    std::map<Term, int> relOf;  // constant -> side relation id
    auto rel_for = [&](Term c) {
        auto it = relOf.find(c);
        if (it != relOf.end()) return it->second;
        std::string name = unique_rel_name(p.sig, "is_" + const_name(c));
        int rel = p.sig.add(name, 1, true, "constant-elimination");
        trace.constantRelations.emplace_back(name, const_name(c));
        p.facts.push_back(Atom{rel, {c}});
        relOf.emplace(c, rel);
        return rel;
    };
    auto rewrite = [&](std::vector<Atom>& atoms) {
        std::map<Term, Term> varOf;  // per rule/query: constant -> variable
        std::vector<Atom> extra;
        for (Atom& a : atoms)
            for (Term& t : a.args)
                if (t.is_const()) {
                    auto it = varOf.find(t);
                    if (it == varOf.end()) {
                        Term v = fresh_var("xc");
                        extra.push_back(Atom{rel_for(t), {v}});
                        it = varOf.emplace(t, v).first;
                    }
                    t = it->second;
                }
        atoms.insert(atoms.end(), extra.begin(), extra.end());
    };
    for (TGD& r : p.rules) rewrite(r.body);
    for (Query& q : p.queries) rewrite(q.atoms);
}

int homomorphism_closure(Program& p) {
    std::unordered_set<std::string> seen;
    for (const TGD& r : p.rules) seen.insert(rule_key(r, p.sig));
    std::vector<TGD> added;
    // One pass suffices: identifying exported variables of an identified rule
    // equals identifying under a coarser partition of the original.
    for (const TGD& r : p.rules) {
        RuleInfo info = analyze_rule(r, p.sig);
        std::vector<Term> ex(info.exported.begin(), info.exported.end());
        if (ex.size() < 2) continue;
        partitions(ex.size(), [&](const std::vector<int>& rgs) {
            Subst s;
            std::map<int, Term> repr;
            bool nontrivial = false;
            for (size_t i = 0; i < ex.size(); ++i) {
                auto it = repr.find(rgs[i]);
                if (it == repr.end()) repr.emplace(rgs[i], ex[i]);
                else { s.emplace(ex[i].id, it->second); nontrivial = true; }
            }
            if (!nontrivial) return;
            TGD img;
            img.body = subst(s, r.body);
            img.head = subst(s, r.head);
            std::string key = rule_key(img, p.sig);
            if (seen.insert(key).second) added.push_back(std::move(img));
        });
    }
    for (TGD& r : added) p.rules.push_back(std::move(r));
    return int(added.size());
}

void enforce_strong_obedience(Program& p, NormalizationTrace& trace) {
    for (const TGD& r : p.rules) {
        RuleInfo info = analyze_rule(r, p.sig);
        if (!info.guarded)
            throw Diag("NotGuarded", "rule is not guarded: " + rule_to_string(p.sig, r));
        if (!info.obeysSide)
            throw Diag("SideViolation",
                       "rule does not obey the side signature: " + rule_to_string(p.sig, r));
    }

    // Which side relations need a principal twin: relations heading a
    // non-full rule, plus the chosen side guard of rules with no principal
    // body atom.
    std::set<int> needTwin;
    for (const TGD& r : p.rules) {
        RuleInfo info = analyze_rule(r, p.sig);
        if (!info.isFull)
            for (const Atom& h : r.head)
                if (p.sig.is_side(h.rel)) needTwin.insert(h.rel);
        if (info.principalCount == 0) needTwin.insert(r.body[size_t(info.guardIndex)].rel);
    }

    std::map<int, int> twinOf;
    for (int rel : needTwin) {
        std::string name = unique_rel_name(p.sig, p.sig.at(rel).name + "_t");
        int twin = p.sig.add(name, p.sig.at(rel).arity, false, "principal-twin");
        twinOf.emplace(rel, twin);
        trace.twins.emplace_back(p.sig.at(rel).name, name);
    }

    for (TGD& r : p.rules) {
        RuleInfo info = analyze_rule(r, p.sig);
        if (info.principalCount == 0) {
            // Guard twin: duplicate the chosen side guard on its principal twin.
            Atom twin = r.body[size_t(info.guardIndex)];
            twin.rel = twinOf.at(twin.rel);
            r.body.insert(r.body.begin(), twin);
            ++trace.guardTwinBodies;
        }
        for (Atom& h : r.head) {
            auto it = twinOf.find(h.rel);
            if (it != twinOf.end()) {
                h.rel = it->second;
                ++trace.redirectedHeads;
            }
        }
    }

    // Twin-to-original rules and instance gains.
    for (auto& [rel, twin] : twinOf) {
        TGD back;
        Atom b;
        b.rel = twin;
        for (int i = 0; i < p.sig.at(rel).arity; ++i)
            b.args.push_back(make_var("u" + std::to_string(i + 1)));
        Atom h = b;
        h.rel = rel;
        back.body = {b};
        back.head = {h};
        p.rules.push_back(std::move(back));
    }
    std::vector<Atom> gained;
    for (const Atom& f : p.facts) {
        auto it = twinOf.find(f.rel);
        if (it != twinOf.end()) {
            Atom g = f;
            g.rel = it->second;
            gained.push_back(std::move(g));
        }
    }
    trace.twinInstanceFacts = int(gained.size());
    p.facts.insert(p.facts.end(), gained.begin(), gained.end());

    trace.closureAdded = homomorphism_closure(p);
}

NormalizedProgram preprocess(const Program& p) {
    NormalizedProgram np;
    np.prog = p;
    split_multiheads(np.prog, np.trace);
    eliminate_constants(np.prog, np.trace);
    enforce_strong_obedience(np.prog, np.trace);
    np.stats = compute_stats(np.prog.sig, np.prog.rules);
    return np;
}

}  // namespace owqa
