#include "owqa/saturate.hpp"

#include <algorithm>
#include <climits>

namespace owqa {

namespace {

unsigned long long sat_mul(unsigned long long a, unsigned long long b) {
    if (a == 0 || b == 0) return 0;
    if (a > ULLONG_MAX / b) return ULLONG_MAX;
    return a * b;
}

unsigned long long sat_pow(unsigned long long base, unsigned long long exp) {
    unsigned long long r = 1;
    while (exp--) {
        r = sat_mul(r, base);
        if (r == ULLONG_MAX) return r;
    }
    return r;
}

Atom freeze_atom(const Atom& a, std::vector<Term>* varOfCanon) {
    std::map<Term, Term> toCanon;
    Atom out;
    out.rel = a.rel;
    for (Term t : a.args) {
        auto it = toCanon.find(t);
        if (it == toCanon.end()) {
            it = toCanon.emplace(t, canonical_var(int(toCanon.size()))).first;
            if (varOfCanon) varOfCanon->push_back(t);
        }
        out.args.push_back(it->second);
    }
    return out;
}

std::set<Atom> head_patterns(const Program& sigma) {
    std::set<Atom> pats;
    for (const TGD& r : sigma.rules)
        for (const Atom& h : r.head) pats.insert(freeze_atom(h, nullptr));
    return pats;
}

int distinct_vars(const Atom& a) { return int(vars_of(a).size()); }

}  // namespace

unsigned long long suitable_count_bound(const SignatureStats& st) {
    unsigned long long sz = (unsigned long long)(st.ruleCount);
    unsigned long long w = (unsigned long long)(st.wPrime);
    unsigned long long inner = sat_pow(w, (unsigned long long)(st.sideMaxArity));
    unsigned long long exp = sat_mul((unsigned long long)(st.sideCount), inner);
    unsigned long long r = sat_mul(sz, sz);
    r = sat_mul(r, sat_pow((unsigned long long)(st.maxArity) + 1, 3 * w));
    if (exp >= 64) return ULLONG_MAX;
    return sat_mul(r, 1ULL << exp);
}

SuitableCheck is_suitable(const TGD& rule, const Program& sigma, const SignatureStats& stats) {
    SuitableCheck c;
    RuleInfo info = analyze_rule(rule, sigma.sig);
    if (!info.isFull) { c.reason = "not full"; return c; }
    if (rule.head.size() != 1) { c.reason = "multiple head atoms"; return c; }
    if (info.principalCount != 1 || !info.obeysSide || info.guardIndex < 0 ||
        sigma.sig.is_side(rule.body[size_t(info.guardIndex)].rel)) {
        c.reason = "body lacks exactly one principal guard";
        return c;
    }
    std::set<Atom> pats = head_patterns(sigma);
    auto compat = [&](const Atom& a) {
        return sigma.sig.is_side(a.rel) || pats.count(freeze_atom(a, nullptr)) != 0;
    };
    if (!compat(rule.body[size_t(info.guardIndex)])) {
        c.reason = "guard not compatible with any head pattern";
        return c;
    }
    if (!compat(rule.head[0])) { c.reason = "head not compatible"; return c; }
    if (info.width > stats.wPrime) { c.reason = "width exceeds bound"; return c; }
    if (info.breadth > stats.wPrime) { c.reason = "breadth exceeds bound"; return c; }
    c.suitable = true;
    return c;
}

Saturation::Saturation(const Program& normalized, const SignatureStats& stats)
    : prog_(normalized), stats_(stats) {
    headPatterns_ = head_patterns(prog_);
    for (const TGD& r : prog_.rules) {
        RuleInfo info = analyze_rule(r, prog_.sig);
        if (info.guardIndex < 0) continue;  // defensive; normalized input is guarded
        for (const Atom& h : r.head) {
            RulePieces p;
            p.guard = r.body[size_t(info.guardIndex)];
            for (size_t i = 0; i < r.body.size(); ++i)
                if (int(i) != info.guardIndex) p.sides.push_back(r.body[i]);
            p.head = h;
            p.full = info.isFull;
            p.principalHead = !prog_.sig.is_side(h.rel);
            p.exported = info.exported;
            pieces_.push_back(std::move(p));
        }
        // Seed suitable input rules at their own canonical body.
        SuitableCheck sc = is_suitable(r, prog_, stats_);
        if (sc.suitable) {
            const Atom& g = r.body[size_t(info.guardIndex)];
            std::vector<Atom> sides;
            for (size_t i = 0; i < r.body.size(); ++i)
                if (int(i) != info.guardIndex && prog_.sig.is_side(r.body[i].rel))
                    sides.push_back(r.body[i]);
            std::map<Term, Term> toCanon;
            GuardedSet body = canonicalize_guarded_set(g, sides, prog_.sig);
            Subst toC;
            for (size_t i = 0; i < g.args.size(); ++i)
                toC.emplace(g.args[i].id, body.principal.args[i]);
            seeds_[body].insert(subst(toC, r.head[0]));
        }
    }
}

bool Saturation::compatible(const Atom& a) const {
    return prog_.sig.is_side(a.rel) || headPatterns_.count(freeze_atom(a, nullptr)) != 0;
}

Atom Saturation::freeze(const Atom& a, std::vector<Term>* varOfCanon) const {
    return freeze_atom(a, varOfCanon);
}

bool Saturation::suitable_head(const Atom& head) const {
    return compatible(head) && distinct_vars(head) <= stats_.wPrime;
}

bool Saturation::in_bh(const BodyEntry& e, const Atom& a) const {
    return a == e.body.principal || e.sideSet.count(a) != 0 || e.derived.count(a) != 0;
}

int Saturation::ensure(const GuardedSet& body) {
    auto it = idOf_.find(body);
    if (it != idOf_.end()) return it->second;
    int id = int(entries_.size());
    idOf_.emplace(body, id);
    BodyEntry e;
    e.body = body;
    e.sideSet.insert(body.side.begin(), body.side.end());
    std::set<Term> sideVars;
    for (const Atom& a : body.side)
        for (Term t : a.args) sideVars.insert(t);
    e.valid = compatible(body.principal) && int(sideVars.size()) <= stats_.wPrime;
    if (e.valid) {
        if (suitable_head(body.principal)) e.derived.insert(body.principal);  // trivial rule
        auto sit = seeds_.find(body);
        if (sit != seeds_.end())
            for (const Atom& h : sit->second)
                if (suitable_head(h)) e.derived.insert(h);
    }
    entries_.push_back(std::move(e));
    queued_.push_back(false);
    if (entries_[size_t(id)].valid) {
        worklist_.push_back(id);
        queued_[size_t(id)] = true;
    }
    return id;
}

bool Saturation::try_add(int id, const Atom& head) {
    BodyEntry& e = entries_[size_t(id)];
    if (!e.valid || e.derived.count(head) || !suitable_head(head)) return false;
    e.derived.insert(head);
    auto enqueue = [&](int b) {
        if (!queued_[size_t(b)]) {
            worklist_.push_back(b);
            queued_[size_t(b)] = true;
        }
    };
    enqueue(id);
    for (int d : e.dependents) enqueue(d);
    return true;
}

void Saturation::step(int id) {
    // Snapshot: entries_ may grow (and relocate) while we run.
    GuardedSet body = entries_[size_t(id)].body;
    std::set<Atom> derived = entries_[size_t(id)].derived;

    std::vector<Atom> anchors;  // principal atoms of body+heads
    anchors.push_back(body.principal);
    for (const Atom& d : derived)
        if (!prog_.sig.is_side(d.rel)) anchors.push_back(d);

    auto membership = [&](const Atom& a) { return in_bh(entries_[size_t(id)], a); };

    std::vector<Atom> candidates;

    auto unify_guard = [&](const Atom& g, const Atom& anchor, Subst& s) {
        for (size_t i = 0; i < g.args.size(); ++i) {
            Term v = g.args[i];
            auto it = s.find(v.id);
            if (it != s.end()) {
                if (it->second != anchor.args[i]) return false;
            } else {
                s.emplace(v.id, anchor.args[i]);
            }
        }
        return true;
    };

    for (const RulePieces& rp : pieces_) {
        // (Transitivity): premise is a full input rule mapped into body+heads.
        if (rp.full) {
            for (const Atom& anchor : anchors) {
                if (anchor.rel != rp.guard.rel) continue;
                Subst s;
                if (!unify_guard(rp.guard, anchor, s)) continue;
                bool ok = true;
                for (const Atom& a : rp.sides)
                    if (!membership(subst(s, a))) { ok = false; break; }
                if (ok) candidates.push_back(subst(s, rp.head));
            }
        }
        // (Principal+Transitivity): principal input rule composed with the
        // closure rules whose guard matches its head.
        if (rp.principalHead) {
            for (const Atom& anchor : anchors) {
                if (anchor.rel != rp.guard.rel) continue;
                Subst s;
                if (!unify_guard(rp.guard, anchor, s)) continue;
                bool ok = true;
                for (const Atom& a : rp.sides)
                    if (!membership(subst(s, a))) { ok = false; break; }
                if (!ok) continue;

                std::vector<Term> varOf;  // canonical index -> head term
                Atom G = freeze(rp.head, &varOf);
                std::set<Term> allowed;  // canonical vars at exported positions
                Subst translate;         // canonical var -> term over this body
                for (size_t i = 0; i < varOf.size(); ++i) {
                    Term orig = varOf[i];
                    if (orig.is_var() && rp.exported.count(orig)) {
                        Term cv = canonical_var(int(i));
                        allowed.insert(cv);
                        translate.emplace(cv.id, subst(s, orig));
                    }
                }
                // Maximal premise body: every side atom over allowed
                // canonical variables whose translation is available here.
                std::vector<Term> evars(allowed.begin(), allowed.end());
                std::vector<Atom> premiseSides;
                for (int rel = 0; rel < prog_.sig.size(); ++rel) {
                    if (!prog_.sig.is_side(rel)) continue;
                    int ar = prog_.sig.at(rel).arity;
                    if (evars.empty() && ar > 0) continue;
                    std::vector<size_t> idx(size_t(ar), 0);
                    while (true) {
                        Atom a;
                        a.rel = rel;
                        for (int k = 0; k < ar; ++k) a.args.push_back(evars[idx[size_t(k)]]);
                        if (membership(subst(translate, a))) premiseSides.push_back(a);
                        int k = ar - 1;
                        for (; k >= 0; --k) {
                            if (++idx[size_t(k)] < evars.size()) break;
                            idx[size_t(k)] = 0;
                        }
                        if (k < 0 || ar == 0) break;
                    }
                }
                GuardedSet premise;
                premise.principal = G;
                premise.side = premiseSides;
                std::sort(premise.side.begin(), premise.side.end());
                premise.side.erase(std::unique(premise.side.begin(), premise.side.end()),
                                   premise.side.end());
                int bid = ensure(premise);
                entries_[size_t(bid)].dependents.insert(id);
                std::set<Atom> pHeads = entries_[size_t(bid)].derived;
                for (const Atom& h : pHeads) {
                    bool inAllowed = true;
                    for (Term t : h.args)
                        if (!allowed.count(t)) { inAllowed = false; break; }
                    if (inAllowed) candidates.push_back(subst(translate, h));
                }
            }
        }
    }

    for (const Atom& c : candidates) try_add(id, c);
}

void Saturation::run() {
    while (!worklist_.empty()) {
        int id = worklist_.front();
        worklist_.pop_front();
        queued_[size_t(id)] = false;
        if (entries_[size_t(id)].valid) step(id);
    }
}

const std::set<Atom>& Saturation::heads(const GuardedSet& body) {
    int id = ensure(body);
    run();
    return entries_[size_t(id)].derived;
}

bool Saturation::contains(const TGD& rule) {
    RuleInfo info = analyze_rule(rule, prog_.sig);
    if (!info.isFull || rule.head.size() != 1 || info.guardIndex < 0) return false;
    const Atom& g = rule.body[size_t(info.guardIndex)];
    if (prog_.sig.is_side(g.rel)) return false;
    std::vector<Atom> sides;
    for (size_t i = 0; i < rule.body.size(); ++i)
        if (int(i) != info.guardIndex && prog_.sig.is_side(rule.body[i].rel))
            sides.push_back(rule.body[i]);
    GuardedSet body = canonicalize_guarded_set(g, sides, prog_.sig);
    Subst toC;
    for (size_t i = 0; i < g.args.size(); ++i) toC.emplace(g.args[i].id, body.principal.args[i]);
    Atom want = subst(toC, rule.head[0]);
    return heads(body).count(want) != 0;
}

std::vector<GuardedSet> Saturation::bodies_for_guard(const Atom& guardPattern, size_t cap) const {
    std::vector<GuardedSet> out;
    std::vector<Term> V;
    for (Term t : guardPattern.args)
        if (std::find(V.begin(), V.end(), t) == V.end()) V.push_back(t);
    size_t n = V.size();
    // Subsets X of the guard elements, |X| <= wPrime; side atoms spanning exactly X.
    for (uint64_t mask = 0; mask < (1ULL << n); ++mask) {
        std::vector<Term> X;
        for (size_t i = 0; i < n; ++i)
            if (mask & (1ULL << i)) X.push_back(V[i]);
        if (int(X.size()) > stats_.wPrime) continue;
        std::vector<Atom> universe;
        for (int rel = 0; rel < prog_.sig.size(); ++rel) {
            if (!prog_.sig.is_side(rel)) continue;
            int ar = prog_.sig.at(rel).arity;
            if (ar > 0 && X.empty()) continue;
            std::vector<size_t> idx(size_t(ar), 0);
            while (true) {
                Atom a;
                a.rel = rel;
                for (int k = 0; k < ar; ++k) a.args.push_back(X[idx[size_t(k)]]);
                universe.push_back(a);
                int k = ar - 1;
                for (; k >= 0; --k) {
                    if (++idx[size_t(k)] < X.size()) break;
                    idx[size_t(k)] = 0;
                }
                if (k < 0 || ar == 0) break;
            }
        }
        if (universe.size() > 24)
            throw Diag("BodySpaceTooLarge", "side-atom universe too large to enumerate");
        for (uint64_t sub = 0; sub < (1ULL << universe.size()); ++sub) {
            std::set<Term> span;
            std::vector<Atom> side;
            for (size_t i = 0; i < universe.size(); ++i)
                if (sub & (1ULL << i)) {
                    side.push_back(universe[i]);
                    for (Term t : universe[i].args) span.insert(t);
                }
            if (span.size() != X.size()) continue;  // counted under its exact span
            GuardedSet gs;
            gs.principal = guardPattern;
            gs.side = std::move(side);
            std::sort(gs.side.begin(), gs.side.end());
            out.push_back(std::move(gs));
            if (out.size() > cap)
                throw Diag("BodySpaceTooLarge", "body space exceeds cap");
        }
    }
    return out;
}

void Saturation::materialize_all(size_t bodyCap) {
    size_t total = 0;
    for (const Atom& pat : headPatterns_) {
        if (prog_.sig.is_side(pat.rel)) continue;
        std::vector<GuardedSet> bodies = bodies_for_guard(pat, bodyCap - total);
        total += bodies.size();
        if (total > bodyCap) throw Diag("BodySpaceTooLarge", "body space exceeds cap");
        for (const GuardedSet& b : bodies) ensure(b);
    }
    run();
}

std::vector<FullRule> Saturation::rules() const {
    std::vector<FullRule> out;
    for (const BodyEntry& e : entries_)
        for (const Atom& h : e.derived) out.push_back(FullRule{e.body, h});
    return out;
}

size_t Saturation::rule_count() const {
    size_t n = 0;
    for (const BodyEntry& e : entries_) n += e.derived.size();
    return n;
}

void close_under_saturation(
    Saturation& sat, FactSet& node,
    const std::function<void(const GuardedSet&, const Atom&, const Subst&, const Atom&)>&
        onDerive) {
    const Signature& sig = sat.program().sig;
    bool change = true;
    while (change) {
        change = false;
        // snapshot: new principal facts join the next round
        std::vector<Atom> principals;
        for (const Atom& f : node.all())
            if (!sig.is_side(f.rel)) principals.push_back(f);
        for (const Atom& P : principals) {
            std::vector<Term> dom;
            for (Term t : P.args)
                if (std::find(dom.begin(), dom.end(), t) == dom.end()) dom.push_back(t);
            size_t n = dom.size();
            for (uint64_t mask = 0; mask < (1ULL << n); ++mask) {
                std::set<Term> X;
                for (size_t i = 0; i < n; ++i)
                    if (mask & (1ULL << i)) X.insert(dom[i]);
                if (int(X.size()) > sat.stats().wPrime) continue;
                std::vector<Atom> sides;
                for (const Atom& f : node.all()) {
                    if (!sig.is_side(f.rel)) continue;
                    bool within = true;
                    for (Term t : f.args)
                        if (!X.count(t)) { within = false; break; }
                    if (within) sides.push_back(f);
                }
                GuardedSet body = canonicalize_guarded_set(P, sides, sig);
                Subst back = decanonicalize_map(body, P);
                for (const Atom& h : sat.heads(body)) {
                    Atom fact = subst(back, h);
                    if (node.contains(fact)) continue;
                    node.add(fact);
                    change = true;
                    if (onDerive) onDerive(body, h, back, fact);
                }
            }
        }
    }
}

}  // namespace owqa
