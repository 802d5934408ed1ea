#include "owqa/chase.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <unordered_set>

namespace owqa {

namespace {

std::string subst_key(const Subst& s) {
    std::ostringstream os;
    for (auto& [v, t] : s) os << v << "=" << int(t.kind) << ":" << t.id << ";";
    return os.str();
}

std::set<Term> atom_values(const Atom& a) { return {a.args.begin(), a.args.end()}; }

bool guarded_by(const Atom& fact, const std::set<Term>& dom) {
    for (Term t : fact.args)
        if (!dom.count(t)) return false;
    return true;
}

struct Engine {
    const Program& p;
    const std::vector<TGD>* saturation;
    size_t budget;
    ChaseRun run;
    std::vector<RuleInfo> info;
    std::vector<std::set<Term>> nodeAdom;
    std::unordered_set<std::string> firedNonFull;  // (node, rule, trigger) memo
    // optional early-exit query check
    const Query* query = nullptr;
    Subst match;
    bool matched = false;

    Engine(const Program& prog, const std::vector<TGD>* sat, size_t b)
        : p(prog), saturation(sat), budget(b) {
        for (const TGD& r : p.rules) info.push_back(analyze_rule(r, p.sig));
        run.parent.push_back(-1);
        run.nodeFacts.emplace_back();
        nodeAdom.emplace_back();
        for (const Atom& f : p.facts) add_fact(0, f);
    }

    bool record(StepRecord rec) {
        run.steps.push_back(std::move(rec));
        if (run.steps.size() >= budget) {
            run.budgetExhausted = true;
            return false;
        }
        return true;
    }

    void add_fact(int node, const Atom& f) {
        if (run.nodeFacts[size_t(node)].add(f))
            for (Term t : f.args) nodeAdom[size_t(node)].insert(t);
        run.allFacts.add(f);
        if (query && !matched && f.rel >= 0) {
            find_homomorphisms(query->atoms, run.allFacts, {}, [&](const Subst& s) {
                matched = true;
                match = s;
                return false;
            });
        }
    }

    int new_node(int parent) {
        run.parent.push_back(parent);
        run.nodeFacts.emplace_back();
        nodeAdom.emplace_back();
        return int(run.parent.size()) - 1;
    }

    // Non-full trigger is active if no extension satisfies the head in-node.
    bool active(int node, int ruleId, const Subst& s) {
        const TGD& r = p.rules[size_t(ruleId)];
        Subst seed;
        for (Term v : info[size_t(ruleId)].exported) seed.emplace(v.id, subst(s, v));
        bool satisfied =
            find_homomorphisms(r.head, run.nodeFacts[size_t(node)], seed,
                               [&](const Subst&) { return false; });
        return !satisfied;
    }

    Atom instantiate_head(int ruleId, const Subst& s, Subst* withNulls = nullptr) {
        const TGD& r = p.rules[size_t(ruleId)];
        Subst full = s;
        for (Term v : info[size_t(ruleId)].existential)
            full.emplace(v.id, fresh_null());
        if (withNulls) *withNulls = full;
        return subst(full, r.head[0]);
    }

    std::vector<Atom> guarded_facts(int node, const Atom& headFact, bool sideOnly) {
        std::vector<Atom> out;
        std::set<Term> dom = atom_values(headFact);
        for (const Atom& f : run.nodeFacts[size_t(node)].all()) {
            if (sideOnly && !p.sig.is_side(f.rel)) continue;
            if (f != headFact && guarded_by(f, dom)) out.push_back(f);
        }
        return out;
    }

    // --- Tree strategy -----------------------------------------------------

    // Adds a derived fact to `node` and copies it into every node where it
    // is guarded (eager propagation keeps the global skip-check sound).
    bool add_and_propagate(int node, const Atom& f, int ruleId, const Subst& s) {
        StepRecord rec;
        rec.kind = StepRecord::Kind::Full;
        rec.node = node;
        rec.ruleId = ruleId;
        rec.trigger = s;
        rec.created = f;
        add_fact(node, f);
        if (!record(std::move(rec))) return false;
        for (size_t v = 0; v < run.nodeFacts.size(); ++v) {
            if (int(v) == node) continue;
            if (run.nodeFacts[v].contains(f)) continue;
            if (!guarded_by(f, nodeAdom[v])) continue;
            StepRecord prop;
            prop.kind = StepRecord::Kind::Propagation;
            prop.from = node;
            prop.to = int(v);
            prop.moved = {f};
            add_fact(int(v), f);
            if (!record(std::move(prop))) return false;
        }
        return true;
    }

    void run_tree() {
        bool progress = true;
        while (progress && !run.budgetExhausted) {
            progress = false;
            // full phase: fixpoint of full rules across all nodes
            bool fullProgress = true;
            while (fullProgress && !run.budgetExhausted) {
                fullProgress = false;
                for (size_t v = 0; v < run.nodeFacts.size() && !run.budgetExhausted; ++v) {
                    for (size_t rid = 0; rid < p.rules.size(); ++rid) {
                        if (!info[rid].isFull) continue;
                        std::vector<Subst> triggers;
                        find_homomorphisms(p.rules[rid].body, run.nodeFacts[v], {},
                                           [&](const Subst& s) {
                                               triggers.push_back(s);
                                               return true;
                                           });
                        for (const Subst& s : triggers) {
                            Atom f = subst(s, p.rules[rid].head[0]);
                            if (run.allFacts.contains(f)) {
                                // ensure the owning node has it (eager propagation
                                // already placed it wherever guarded)
                                continue;
                            }
                            fullProgress = progress = true;
                            if (!add_and_propagate(int(v), f, int(rid), s)) return;
                        }
                        if (run.budgetExhausted) return;
                    }
                }
            }
            if (run.budgetExhausted) return;
            if (query && matched) return;
            // one non-full step, FIFO over (node, rule, trigger)
            for (size_t v = 0; v < run.nodeFacts.size() && !progress; ++v) {
                for (size_t rid = 0; rid < p.rules.size() && !progress; ++rid) {
                    if (info[rid].isFull) continue;
                    std::vector<Subst> triggers;
                    find_homomorphisms(p.rules[rid].body, run.nodeFacts[v], {},
                                       [&](const Subst& s) {
                                           triggers.push_back(s);
                                           return true;
                                       });
                    for (const Subst& s : triggers) {
                        std::string key =
                            std::to_string(v) + "/" + std::to_string(rid) + "/" + subst_key(s);
                        if (firedNonFull.count(key)) continue;
                        if (!active(int(v), int(rid), s)) continue;
                        firedNonFull.insert(key);
                        Atom head = instantiate_head(int(rid), s);
                        int child = new_node(int(v));
                        StepRecord rec;
                        rec.kind = StepRecord::Kind::NonFull;
                        rec.node = int(v);
                        rec.child = child;
                        rec.ruleId = int(rid);
                        rec.trigger = s;
                        rec.created = head;
                        rec.inherited = guarded_facts(int(v), head, /*sideOnly=*/false);
                        add_fact(child, head);
                        for (const Atom& f : rec.inherited) add_fact(child, f);
                        progress = true;
                        if (!record(std::move(rec))) return;
                        break;
                    }
                }
            }
        }
    }

    // --- One-pass and principal-exempt strategies --------------------------

    void run_one_pass(bool principalExempt) {
        int recent = 0;
        while (!run.budgetExhausted) {
            // propagation first: one fact, to the parent only
            int par = run.parent[size_t(recent)];
            if (par >= 0) {
                const Atom* pick = nullptr;
                for (const Atom& f : run.nodeFacts[size_t(recent)].all()) {
                    if (principalExempt && !p.sig.is_side(f.rel)) continue;
                    if (run.nodeFacts[size_t(par)].contains(f)) continue;
                    if (!guarded_by(f, nodeAdom[size_t(par)])) continue;
                    pick = &f;
                    break;
                }
                if (pick) {
                    StepRecord rec;
                    rec.kind = StepRecord::Kind::Propagation;
                    rec.from = recent;
                    rec.to = par;
                    rec.moved = {*pick};
                    add_fact(par, *pick);
                    if (!record(std::move(rec))) return;
                    recent = par;
                    continue;
                }
            }
            // chase step on the recently updated node
            bool stepped = false;
            for (size_t rid = 0; rid < p.rules.size() && !stepped; ++rid) {
                bool relaxed = principalExempt && info[rid].isFull &&
                               !p.sig.is_side(p.rules[rid].head[0].rel);
                std::vector<Subst> triggers;
                find_homomorphisms(p.rules[rid].body, run.nodeFacts[size_t(recent)], {},
                                   [&](const Subst& s) {
                                       triggers.push_back(s);
                                       return true;
                                   });
                for (const Subst& s : triggers) {
                    if (info[rid].isFull && !relaxed) {
                        Atom f = subst(s, p.rules[rid].head[0]);
                        if (run.nodeFacts[size_t(recent)].contains(f)) continue;
                        StepRecord rec;
                        rec.kind = StepRecord::Kind::Full;
                        rec.node = recent;
                        rec.ruleId = int(rid);
                        rec.trigger = s;
                        rec.created = f;
                        add_fact(recent, f);
                        stepped = true;
                        if (!record(std::move(rec))) return;
                        break;
                    }
                    std::string key = std::to_string(recent) + "/" + std::to_string(rid) + "/" +
                                      subst_key(s);
                    if (firedNonFull.count(key)) continue;
                    if (!relaxed && !active(recent, int(rid), s)) continue;
                    firedNonFull.insert(key);
                    Atom head = relaxed ? subst(s, p.rules[rid].head[0])
                                        : instantiate_head(int(rid), s);
                    int child = new_node(recent);
                    StepRecord rec;
                    rec.kind = relaxed ? StepRecord::Kind::Relaxed : StepRecord::Kind::NonFull;
                    rec.node = recent;
                    rec.child = child;
                    rec.ruleId = int(rid);
                    rec.trigger = s;
                    rec.created = head;
                    rec.inherited = guarded_facts(recent, head, principalExempt);
                    add_fact(child, head);
                    for (const Atom& f : rec.inherited) add_fact(child, f);
                    stepped = true;
                    if (!record(std::move(rec))) return;
                    recent = child;
                    break;
                }
            }
            if (!stepped) return;  // nothing applies at the recent node
        }
    }

    // --- Shortcut strategy --------------------------------------------------

    void run_shortcut() {
        if (!saturation)
            throw Diag("MissingSaturation", "shortcut chase requires a saturation");
        std::vector<RuleInfo> satInfo;
        for (const TGD& r : *saturation) satInfo.push_back(analyze_rule(r, p.sig));
        std::deque<int> pending{0};
        while (!pending.empty() && !run.budgetExhausted) {
            int v = pending.front();
            pending.pop_front();
            // single saturation phase for this node
            bool more = true;
            while (more && !run.budgetExhausted) {
                more = false;
                for (size_t rid = 0; rid < saturation->size(); ++rid) {
                    if (!satInfo[rid].isFull) continue;
                    std::vector<Subst> triggers;
                    find_homomorphisms((*saturation)[rid].body, run.nodeFacts[size_t(v)], {},
                                       [&](const Subst& s) {
                                           triggers.push_back(s);
                                           return true;
                                       });
                    for (const Subst& s : triggers) {
                        Atom f = subst(s, (*saturation)[rid].head[0]);
                        if (run.nodeFacts[size_t(v)].contains(f)) continue;
                        StepRecord rec;
                        rec.kind = StepRecord::Kind::Full;
                        rec.node = v;
                        rec.ruleId = int(rid);  // index into the saturation list
                        rec.trigger = s;
                        rec.created = f;
                        add_fact(v, f);
                        more = true;
                        if (!record(std::move(rec))) return;
                    }
                }
            }
            // non-full steps of the input rules; children queued for their
            // own (single) saturation phase
            for (size_t rid = 0; rid < p.rules.size() && !run.budgetExhausted; ++rid) {
                if (info[rid].isFull) continue;
                std::vector<Subst> triggers;
                find_homomorphisms(p.rules[rid].body, run.nodeFacts[size_t(v)], {},
                                   [&](const Subst& s) {
                                       triggers.push_back(s);
                                       return true;
                                   });
                for (const Subst& s : triggers) {
                    std::string key =
                        std::to_string(v) + "/" + std::to_string(rid) + "/" + subst_key(s);
                    if (firedNonFull.count(key)) continue;
                    if (!active(v, int(rid), s)) continue;
                    firedNonFull.insert(key);
                    Atom head = instantiate_head(int(rid), s);
                    int child = new_node(v);
                    StepRecord rec;
                    rec.kind = StepRecord::Kind::NonFull;
                    rec.node = v;
                    rec.child = child;
                    rec.ruleId = int(rid);
                    rec.trigger = s;
                    rec.created = head;
                    rec.inherited = guarded_facts(v, head, /*sideOnly=*/false);
                    add_fact(child, head);
                    for (const Atom& f : rec.inherited) add_fact(child, f);
                    pending.push_back(child);
                    if (!record(std::move(rec))) return;
                }
            }
        }
    }
};

}  // namespace

ChaseRun run_chase(const Program& p, Strategy strat, const std::vector<TGD>* saturation,
                   size_t budget) {
    Engine e(p, saturation, budget);
    switch (strat) {
        case Strategy::Tree: e.run_tree(); break;
        case Strategy::OnePass: e.run_one_pass(false); break;
        case Strategy::PrincipalExempt: e.run_one_pass(true); break;
        case Strategy::Shortcut: e.run_shortcut(); break;
    }
    return std::move(e.run);
}

OracleResult bounded_entailment_oracle(const Program& p, const Query& q, size_t budget) {
    Engine e(p, nullptr, budget);
    e.query = &q;
    // the instance itself may already satisfy the query
    find_homomorphisms(q.atoms, e.run.allFacts, {}, [&](const Subst& s) {
        e.matched = true;
        e.match = s;
        return false;
    });
    if (!e.matched) e.run_tree();
    OracleResult res;
    res.entailed = e.matched;
    res.match = e.match;
    res.run = std::move(e.run);
    return res;
}

ProofCheck check_proof(const Signature& sig, const std::vector<TGD>& rules,
                       const std::vector<Atom>& instance, const std::vector<StepRecord>& steps,
                       const Subst& match, const Query& query) {
    ProofCheck out;
    std::vector<FactSet> nodes(1);
    std::vector<std::set<Term>> adom(1);
    std::set<Term> seen;
    FactSet all;
    auto put = [&](size_t v, const Atom& f) {
        nodes[v].add(f);
        all.add(f);
        for (Term t : f.args) {
            adom[v].insert(t);
            seen.insert(t);
        }
    };
    for (const Atom& f : instance) put(0, f);

    auto fail = [&](int i, const std::string& why) {
        out.ok = false;
        out.firstBad = i;
        out.reason = why;
        return out;
    };

    for (size_t i = 0; i < steps.size(); ++i) {
        const StepRecord& st = steps[i];
        int idx = int(i);
        if (st.kind == StepRecord::Kind::Propagation) {
            if (st.from < 0 || st.from >= int(nodes.size()) || st.to < 0 ||
                st.to >= int(nodes.size()))
                return fail(idx, "propagation endpoints out of range");
            bool anyNew = false;
            for (const Atom& f : st.moved) {
                if (!nodes[size_t(st.from)].contains(f))
                    return fail(idx, "propagated fact missing at source");
                if (!guarded_by(f, adom[size_t(st.to)]))
                    return fail(idx, "propagated fact not guarded at target");
                if (!nodes[size_t(st.to)].contains(f)) anyNew = true;
            }
            if (!anyNew) return fail(idx, "propagation adds nothing");
            for (const Atom& f : st.moved) put(size_t(st.to), f);
            continue;
        }
        if (st.ruleId < 0 || st.ruleId >= int(rules.size()))
            return fail(idx, "rule id out of range");
        if (st.node < 0 || st.node >= int(nodes.size()))
            return fail(idx, "node id out of range");
        const TGD& r = rules[size_t(st.ruleId)];
        RuleInfo info = analyze_rule(r, sig);
        // trigger must bind all body variables and map the body into the node
        for (const Atom& a : r.body) {
            Atom img = subst(st.trigger, a);
            if (!img.is_ground()) return fail(idx, "trigger leaves body variables unbound");
            if (!nodes[size_t(st.node)].contains(img))
                return fail(idx, "trigger body atom missing in node");
        }
        if (r.head.size() != 1) return fail(idx, "rule must have a single head atom");
        if (st.kind == StepRecord::Kind::Full) {
            if (!info.isFull) return fail(idx, "full step with non-full rule");
            Atom f = subst(st.trigger, r.head[0]);
            if (f != st.created) return fail(idx, "created fact does not match rule head");
            if (nodes[size_t(st.node)].contains(f))
                return fail(idx, "full step derives a fact already present");
            put(size_t(st.node), f);
            continue;
        }
        // NonFull / Relaxed: a child node is created
        if (st.child != int(nodes.size())) return fail(idx, "child id not sequential");
        Subst full = st.trigger;
        if (st.kind == StepRecord::Kind::Relaxed) {
            if (!info.isFull) return fail(idx, "relaxed step with non-full rule");
        } else {
            if (info.isFull) return fail(idx, "non-full step with full rule");
            // bind existential variables from the created fact; values must
            // be fresh nulls, pairwise distinct across variables
            const Atom& h = r.head[0];
            if (st.created.rel != h.rel || st.created.args.size() != h.args.size())
                return fail(idx, "created fact shape mismatch");
            std::set<Term> newNulls;
            for (size_t k = 0; k < h.args.size(); ++k) {
                Term v = h.args[k];
                if (!v.is_var()) return fail(idx, "constant in head");
                if (info.existential.count(v)) {
                    Term val = st.created.args[k];
                    auto it = full.find(v.id);
                    if (it != full.end()) {
                        if (it->second != val) return fail(idx, "inconsistent null binding");
                    } else {
                        if (!val.is_null() || seen.count(val) || newNulls.count(val))
                            return fail(idx, "existential value not a fresh null");
                        newNulls.insert(val);
                        full.emplace(v.id, val);
                    }
                }
            }
        }
        Atom headFact = subst(full, r.head[0]);
        if (headFact != st.created) return fail(idx, "created fact does not match rule head");
        std::set<Term> dom = atom_values(headFact);
        for (const Atom& f : st.inherited) {
            if (!nodes[size_t(st.node)].contains(f))
                return fail(idx, "inherited fact missing in parent");
            if (!guarded_by(f, dom)) return fail(idx, "inherited fact not guarded by new fact");
        }
        nodes.emplace_back();
        adom.emplace_back();
        put(nodes.size() - 1, headFact);
        for (const Atom& f : st.inherited) put(nodes.size() - 1, f);
    }

    for (const Atom& a : query.atoms) {
        Atom img = subst(match, a);
        if (!img.is_ground()) return fail(int(steps.size()), "match leaves query variables free");
        if (!all.contains(img)) return fail(int(steps.size()), "query atom not satisfied");
    }
    out.ok = true;
    return out;
}

}  // namespace owqa
