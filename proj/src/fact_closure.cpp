#include "owqa/fact_closure.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <unordered_set>

namespace owqa {

namespace {

struct Closer {
    const Program& p;
    Saturation& sat;
    bool record;
    FactClosure out;
    std::vector<RuleInfo> info;
    std::set<Term> adomI;  // active domain of the input instance (fixed)
    std::map<std::pair<GuardedSet, Atom>, int> closureRuleId;
    std::unordered_set<std::string> childMemo;
    int nextNode = 1;

    Closer(const Program& prog, Saturation& s, bool rec) : p(prog), sat(s), record(rec) {
        for (const TGD& r : p.rules) info.push_back(analyze_rule(r, p.sig));
        if (record) {
            out.rulesUsed = p.rules;
            out.sigmaRuleCount = p.rules.size();
        }
        for (const Atom& f : p.facts) {
            out.facts.add(f);
            for (Term t : f.args) adomI.insert(t);
        }
    }

    int rule_id(const GuardedSet& body, const Atom& head) {
        auto key = std::make_pair(body, head);
        auto it = closureRuleId.find(key);
        if (it != closureRuleId.end()) return it->second;
        TGD r;
        r.body.push_back(body.principal);
        r.body.insert(r.body.end(), body.side.begin(), body.side.end());
        r.head.push_back(head);
        int id = int(out.rulesUsed.size());
        out.rulesUsed.push_back(std::move(r));
        closureRuleId.emplace(key, id);
        return id;
    }

    // Closure rules anchored at principal fact P of `node`: derived facts for
    // every side-fact subset over at most wPrime of P's values.
    // P by value: adding facts to `node` may reallocate its storage
    void closure_at(FactSet& node, int nodeId, const Atom P,
                    const std::function<void(const Atom&)>& onNew) {
        std::vector<Term> dom;
        for (Term t : P.args)
            if (std::find(dom.begin(), dom.end(), t) == dom.end()) dom.push_back(t);
        size_t n = dom.size();
        for (uint64_t mask = 0; mask < (1ULL << n); ++mask) {
            std::set<Term> X;
            for (size_t i = 0; i < n; ++i)
                if (mask & (1ULL << i)) X.insert(dom[i]);
            if (int(X.size()) > sat.stats().wPrime) continue;
            // side facts of the node over X
            std::vector<Atom> sides;
            std::set<int> seen;
            for (Term v : X)
                for (int fid : node.containing(v)) {
                    if (!seen.insert(fid).second) continue;
                    const Atom& f = node.at(size_t(fid));
                    if (!p.sig.is_side(f.rel)) continue;
                    bool within = true;
                    for (Term t : f.args)
                        if (!X.count(t)) { within = false; break; }
                    if (within) sides.push_back(f);
                }
            GuardedSet body = canonicalize_guarded_set(P, sides, p.sig);
            Subst back = decanonicalize_map(body, P);
            for (const Atom& h : sat.heads(body)) {
                Atom fact = subst(back, h);
                if (node.contains(fact)) continue;
                node.add(fact);
                if (record) {
                    StepRecord rec;
                    rec.kind = StepRecord::Kind::Full;
                    rec.node = nodeId;
                    rec.ruleId = rule_id(body, h);
                    rec.trigger = back;
                    rec.created = fact;
                    out.steps.push_back(std::move(rec));
                }
                onNew(fact);
            }
        }
    }

    std::deque<int> rootWork;  // fact ids pending processing at the root

    // Root closure: full input rules plus closure rules, fact-driven.
    void drain_root() {
        std::deque<int>& work = rootWork;
        auto push_new = [&](const Atom&) { work.push_back(int(out.facts.size()) - 1); };
        while (!work.empty()) {
            Atom f = out.facts.at(size_t(work.front()));
            work.pop_front();
            // full input rules with a body atom matching f
            for (size_t rid = 0; rid < p.rules.size(); ++rid) {
                if (!info[rid].isFull) continue;
                const TGD& r = p.rules[rid];
                for (size_t j = 0; j < r.body.size(); ++j) {
                    if (r.body[j].rel != f.rel) continue;
                    Subst seed;
                    if (!match_atom(r.body[j], f, seed)) continue;
                    find_homomorphisms(r.body, out.facts, seed, [&](const Subst& s) {
                        Atom derived = subst(s, r.head[0]);
                        if (!out.facts.contains(derived)) {
                            out.facts.add(derived);
                            if (record) {
                                StepRecord rec;
                                rec.kind = StepRecord::Kind::Full;
                                rec.node = 0;
                                rec.ruleId = int(rid);
                                rec.trigger = s;
                                rec.created = derived;
                                out.steps.push_back(std::move(rec));
                            }
                            work.push_back(int(out.facts.size()) - 1);
                        }
                        return true;
                    });
                }
            }
            // closure rules anchored at affected principal facts
            if (!p.sig.is_side(f.rel)) {
                closure_at(out.facts, 0, f, push_new);
            } else {
                std::set<Term> fv(f.args.begin(), f.args.end());
                std::set<int> anchors;
                for (Term v : f.args)
                    for (int fid : out.facts.containing(v)) anchors.insert(fid);
                for (int fid : anchors) {
                    const Atom& P = out.facts.at(size_t(fid));
                    if (p.sig.is_side(P.rel)) continue;
                    std::set<Term> pv(P.args.begin(), P.args.end());
                    bool covers = true;
                    for (Term v : fv)
                        if (!pv.count(v)) { covers = false; break; }
                    if (covers) closure_at(out.facts, 0, P, push_new);
                }
            }
        }
    }

    // One round of children; returns true if the root gained facts.
    bool spawn_children() {
        bool gained = false;
        for (size_t rid = 0; rid < p.rules.size(); ++rid) {
            if (info[rid].isFull) continue;
            const TGD& r = p.rules[rid];
            std::vector<Subst> triggers;
            find_homomorphisms(r.body, out.facts, {}, [&](const Subst& s) {
                triggers.push_back(s);
                return true;
            });
            for (const Subst& s : triggers) {
                // exported values + inherited side facts determine the child
                std::set<Term> exportedVals;
                for (Term v : info[rid].exported) exportedVals.insert(subst(s, v));
                std::vector<Atom> inherited;
                for (const Atom& f : out.facts.all()) {
                    if (!p.sig.is_side(f.rel)) continue;
                    bool within = true;
                    for (Term t : f.args)
                        if (!exportedVals.count(t)) { within = false; break; }
                    if (within) inherited.push_back(f);
                }
                std::ostringstream key;
                key << rid << "|";
                for (Term v : exportedVals) key << int(v.kind) << ":" << v.id << ",";
                key << "|";
                for (const Atom& a : inherited) key << AtomHash()(a) << ",";
                if (!childMemo.insert(key.str()).second) continue;

                Subst full;
                Atom F = [&] {
                    Subst t = s;
                    for (Term v : info[rid].existential) t.emplace(v.id, fresh_null());
                    full = t;
                    return subst(t, r.head[0]);
                }();
                int childId = nextNode++;
                ++out.childrenExplored;
                if (record) {
                    StepRecord rec;
                    rec.kind = StepRecord::Kind::NonFull;
                    rec.node = 0;
                    rec.child = childId;
                    rec.ruleId = int(rid);
                    rec.trigger = s;
                    rec.created = F;
                    rec.inherited = inherited;
                    out.steps.push_back(std::move(rec));
                }
                FactSet child;
                child.add(F);
                for (const Atom& f : inherited) child.add(f);
                // closure fixpoint inside the child
                close_under_saturation(
                    sat, child,
                    [&](const GuardedSet& body, const Atom& h, const Subst& back,
                        const Atom& fact) {
                        if (!record) return;
                        StepRecord rec;
                        rec.kind = StepRecord::Kind::Full;
                        rec.node = childId;
                        rec.ruleId = rule_id(body, h);
                        rec.trigger = back;
                        rec.created = fact;
                        out.steps.push_back(std::move(rec));
                    });
                // propagate child facts over the instance domain to the root
                std::vector<Atom> moved;
                for (const Atom& f : child.all()) {
                    if (out.facts.contains(f)) continue;
                    bool within = true;
                    for (Term t : f.args)
                        if (!adomI.count(t)) { within = false; break; }
                    if (within) moved.push_back(f);
                }
                if (!moved.empty()) {
                    if (record) {
                        StepRecord rec;
                        rec.kind = StepRecord::Kind::Propagation;
                        rec.from = childId;
                        rec.to = 0;
                        rec.moved = moved;
                        out.steps.push_back(std::move(rec));
                    }
                    size_t before = out.facts.size();
                    for (const Atom& f : moved)
                        if (out.facts.add(f)) rootWork.push_back(int(out.facts.size()) - 1);
                    if (out.facts.size() > before) {
                        gained = true;
                        drain_root();
                    }
                }
            }
        }
        return gained;
    }

    void close() {
        size_t initial = out.facts.size();
        for (size_t i = 0; i < out.facts.size(); ++i) rootWork.push_back(int(i));
        drain_root();
        while (spawn_children()) {}
        out.changed = out.facts.size() != initial;
    }
};

}  // namespace

FactClosure fact_saturate(const Program& normalized, Saturation& sat, bool record) {
    Closer c(normalized, sat, record);
    c.close();
    return std::move(c.out);
}

bool is_fact_saturated(const Program& normalized, Saturation& sat) {
    FactClosure fc = fact_saturate(normalized, sat, false);
    std::set<Atom> in(normalized.facts.begin(), normalized.facts.end());
    return fc.facts.size() == in.size();
}

}  // namespace owqa
