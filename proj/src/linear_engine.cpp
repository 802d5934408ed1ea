#include "owqa/linear_engine.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <unordered_set>

namespace owqa {

// ---------------------------------------------------------------------------
// Semi-width

SemiWidthResult check_semi_width(const Program& prog, int w) {
    SemiWidthResult res;
    res.w = w;
    for (size_t i = 0; i < prog.rules.size(); ++i) {
        RuleInfo info = analyze_rule(prog.rules[i], prog.sig);
        if (info.width > w) res.sigma2.push_back(int(i));
    }

    // basic position graph of Sigma2
    using Pos = std::pair<int, int>;
    std::map<Pos, std::vector<Pos>> succ;
    for (int ri : res.sigma2) {
        const TGD& r = prog.rules[size_t(ri)];
        RuleInfo info = analyze_rule(r, prog.sig);
        for (Term x : info.exported) {
            std::vector<Pos> from, to;
            for (const Atom& a : r.body)
                for (size_t j = 0; j < a.args.size(); ++j)
                    if (a.args[j] == x) from.push_back({a.rel, int(j)});
            for (const Atom& a : r.head)
                for (size_t j = 0; j < a.args.size(); ++j)
                    if (a.args[j] == x) to.push_back({a.rel, int(j)});
            for (Pos f : from)
                for (Pos t : to) succ[f].push_back(t);
        }
    }

    // cycle detection, DFS with a path stack for the witness
    std::map<Pos, int> color;  // 0 white, 1 on stack, 2 done
    std::vector<Pos> path;
    std::function<bool(Pos)> dfs = [&](Pos u) {
        color[u] = 1;
        path.push_back(u);
        for (Pos v : succ[u]) {
            int c = color.count(v) ? color[v] : 0;
            if (c == 1) {
                auto it = std::find(path.begin(), path.end(), v);
                res.cycle.assign(it, path.end());
                res.cycle.push_back(v);
                return true;
            }
            if (c == 0 && dfs(v)) return true;
        }
        path.pop_back();
        color[u] = 2;
        return false;
    };
    for (const auto& [u, _] : succ) {
        int c = color.count(u) ? color[u] : 0;
        if (c == 0 && dfs(u)) {
            res.ok = false;
            return res;
        }
    }
    res.ok = true;
    return res;
}

// ---------------------------------------------------------------------------
// Depth bounds

namespace {

uint64_t sat_mul(uint64_t a, uint64_t b) {
    if (a != 0 && b > UINT64_MAX / a) return UINT64_MAX;
    return a * b;
}

uint64_t sat_pow(uint64_t base, uint64_t exp) {
    uint64_t r = 1;
    for (uint64_t i = 0; i < exp; ++i) r = sat_mul(r, base);
    return r;
}

}  // namespace

uint64_t depth_bound(uint64_t k, uint64_t ruleCount, uint64_t m, uint64_t w) {
    return sat_mul(sat_mul(k, ruleCount), sat_pow(m + w, w));
}

uint64_t depth_bound_semi(uint64_t k, uint64_t ruleCount, uint64_t sigma2Count, uint64_t m,
                          uint64_t w) {
    uint64_t c = std::max(sat_mul(ruleCount, ruleCount), sat_mul(sigma2Count, ruleCount));
    return sat_mul(sat_mul(k, c), sat_pow(m + w, w));
}

// ---------------------------------------------------------------------------
// UCQ rewriting

namespace {

// Union-find over terms; unions of two distinct non-variables fail.
struct Unifier {
    std::map<Term, Term> parent;

    Term find(Term t) {
        auto it = parent.find(t);
        if (it == parent.end() || it->second == t) return t;
        Term r = find(it->second);
        parent[t] = r;
        return r;
    }

    bool unite(Term a, Term b) {
        a = find(a);
        b = find(b);
        if (a == b) return true;
        if (!a.is_var() && !b.is_var()) return false;
        if (!a.is_var()) std::swap(a, b);  // a variable, demote it
        parent[a] = b;
        parent.emplace(b, b);
        return true;
    }

    std::map<Term, std::vector<Term>> classes() {
        std::map<Term, std::vector<Term>> out;
        for (const auto& [t, _] : parent) out[find(t)].push_back(t);
        return out;
    }
};

std::string query_key(const Signature& sig, const Query& q) {
    std::vector<std::string> raw;
    std::vector<size_t> order(q.atoms.size());
    for (const Atom& a : q.atoms) raw.push_back(atom_to_string(sig, a));
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return raw[a] < raw[b]; });
    Subst ren;
    int next = 0;
    std::vector<std::string> out;
    for (size_t i : order) {
        Atom a = q.atoms[i];
        for (Term& t : a.args)
            if (t.is_var()) {
                auto it = ren.find(t.id);
                if (it == ren.end())
                    it = ren.emplace(t.id, make_var("k" + std::to_string(next++))).first;
                t = it->second;
            }
        out.push_back(atom_to_string(sig, a));
    }
    std::sort(out.begin(), out.end());
    std::ostringstream os;
    for (const std::string& s : out) os << s << ";";
    return os.str();
}

}  // namespace

Rewriting ucq_rewrite(const Program& prog, const Query& q, size_t cap) {
    for (const TGD& r : prog.rules)
        if (r.body.size() != 1 || r.head.size() != 1)
            throw Diag("NotLinear", "rewriting requires single-body single-head rules");

    Rewriting rw;
    std::unordered_set<std::string> seen;
    std::deque<Query> work;
    auto push = [&](const Query& d) {
        if (!seen.insert(query_key(prog.sig, d)).second) return;
        rw.disjuncts.push_back(d);
        ++rw.generated;
        work.push_back(d);
    };
    push(q);

    while (!work.empty()) {
        if (rw.disjuncts.size() >= cap) {
            rw.capped = true;
            break;
        }
        Query cur = work.front();
        work.pop_front();

        for (const TGD& rule : prog.rules) {
            std::vector<size_t> cand;
            for (size_t j = 0; j < cur.atoms.size(); ++j)
                if (cur.atoms[j].rel == rule.head[0].rel) cand.push_back(j);
            if (cand.empty()) continue;

            // rename the rule apart from the disjunct
            TGD r = rule;
            Subst ren;
            auto visit = [&](std::vector<Atom>& atoms) {
                for (Atom& a : atoms)
                    for (Term& t : a.args)
                        if (t.is_var()) {
                            auto it = ren.find(t.id);
                            if (it == ren.end()) it = ren.emplace(t.id, fresh_var("p")).first;
                            t = it->second;
                        }
            };
            visit(r.body);
            visit(r.head);
            RuleInfo info = analyze_rule(r, prog.sig);

            // resolve every non-empty piece: a subset of same-relation atoms
            // all unified with the one head atom
            for (uint64_t mask = 1; mask < (1ULL << cand.size()); ++mask) {
                std::vector<size_t> piece;
                for (size_t b = 0; b < cand.size(); ++b)
                    if (mask & (1ULL << b)) piece.push_back(cand[b]);

                Unifier u;
                bool ok = true;
                for (size_t ai : piece)
                    for (size_t j = 0; j < r.head[0].args.size() && ok; ++j)
                        ok = u.unite(r.head[0].args[j], cur.atoms[ai].args[j]);
                if (!ok) continue;

                // a class absorbing an existential may contain nothing the
                // resolved piece does not own
                std::set<Term> outer;  // query vars occurring outside the piece
                for (size_t j = 0; j < cur.atoms.size(); ++j) {
                    if (std::find(piece.begin(), piece.end(), j) != piece.end()) continue;
                    for (Term t : cur.atoms[j].args)
                        if (t.is_var()) outer.insert(t);
                }
                auto classes = u.classes();
                bool valid = true;
                for (Term e : info.existential) {
                    Term rep = u.find(e);
                    for (Term m : classes[rep]) {
                        if (m == e) continue;
                        if (!m.is_var() || info.exported.count(m) || outer.count(m) ||
                            info.existential.count(m)) {
                            valid = false;
                            break;
                        }
                    }
                    if (!valid) break;
                }
                if (!valid) continue;

                auto resolve = [&](Atom a) {
                    for (Term& t : a.args) t = u.find(t);
                    return a;
                };
                Query next;
                next.atoms.push_back(resolve(r.body[0]));
                for (size_t j = 0; j < cur.atoms.size(); ++j)
                    if (std::find(piece.begin(), piece.end(), j) == piece.end())
                        next.atoms.push_back(resolve(cur.atoms[j]));
                push(next);
            }
            if (rw.disjuncts.size() >= cap) break;
        }
    }
    if (!work.empty()) rw.capped = true;
    return rw;
}

bool rewriting_answers(const Rewriting& rw, const FactSet& instance) {
    for (const Query& d : rw.disjuncts) {
        bool hit = find_homomorphisms(d.atoms, instance, {}, [](const Subst&) {
            return false;  // stop at the first match
        });
        if (hit) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Tight chase

namespace {

// relation plus, per position, either the concrete instance value or a
// first-occurrence null marker
std::string tight_key(const Atom& f, const std::set<Term>& adomI) {
    std::ostringstream os;
    os << f.rel << "(";
    std::map<Term, int> mark;
    for (Term t : f.args) {
        if (adomI.count(t)) {
            os << int(t.kind) << ":" << t.id;
        } else {
            auto it = mark.find(t);
            if (it == mark.end()) it = mark.emplace(t, int(mark.size())).first;
            os << "*" << it->second;
        }
        os << ",";
    }
    os << ")";
    return os.str();
}

}  // namespace

TightChaseResult tight_chase(const Program& prog, const FactSet& instance, const Query& q,
                             uint64_t depthBound, size_t nodeCap) {
    std::vector<RuleInfo> info;
    for (const TGD& r : prog.rules) {
        if (r.body.size() != 1 || r.head.size() != 1)
            throw Diag("NotLinear", "tight chase requires single-body single-head rules");
        info.push_back(analyze_rule(r, prog.sig));
    }

    TightChaseResult res;
    FactSet facts;
    std::set<Term> adomI = instance.adom();
    std::vector<std::string> keys;
    std::deque<int> work;

    std::set<int> queryRels;
    for (const Atom& a : q.atoms) queryRels.insert(a.rel);

    auto check_query = [&](const Atom& f) {
        if (res.answered || !queryRels.count(f.rel)) return;
        for (size_t qi = 0; qi < q.atoms.size() && !res.answered; ++qi) {
            if (q.atoms[qi].rel != f.rel) continue;
            Subst s;
            if (!match_atom(q.atoms[qi], f, s)) continue;
            std::vector<Atom> rest;
            for (size_t j = 0; j < q.atoms.size(); ++j)
                if (j != qi) rest.push_back(q.atoms[j]);
            find_homomorphisms(rest, facts, s, [&](const Subst& m) {
                res.answered = true;
                res.match = m;
                return false;
            });
        }
    };

    auto add_node = [&](const Atom& f, int parent, int ruleId, Subst trigger,
                        uint64_t depth) -> bool {
        if (facts.contains(f)) return false;
        int id = int(res.nodes.size());
        facts.add(f);
        res.nodes.push_back({f, parent, ruleId, std::move(trigger), depth});
        res.index.emplace(f, id);
        keys.push_back(tight_key(f, adomI));
        work.push_back(id);
        check_query(f);
        return true;
    };

    for (const Atom& f : instance.all()) add_node(f, -1, -1, {}, 0);

    while (!work.empty() && !res.answered) {
        int id = work.front();
        work.pop_front();
        if (res.nodes[size_t(id)].depth >= depthBound) continue;
        Atom fact = res.nodes[size_t(id)].fact;
        uint64_t depth = res.nodes[size_t(id)].depth;

        for (size_t ri = 0; ri < prog.rules.size() && !res.answered; ++ri) {
            const TGD& r = prog.rules[ri];
            Subst s;
            if (!match_atom(r.body[0], fact, s)) continue;
            Subst full = s;
            for (Term e : info[ri].existential) full.emplace(e.id, fresh_null());
            Atom head = subst(full, r.head[0]);
            if (facts.contains(head)) continue;

            // tightness: prune when the branch already carries this pattern
            std::string key = tight_key(head, adomI);
            bool pruned = false;
            for (int anc = id; anc != -1; anc = res.nodes[size_t(anc)].parent)
                if (keys[size_t(anc)] == key) {
                    pruned = true;
                    break;
                }
            if (pruned) continue;

            if (res.nodes.size() >= nodeCap) {
                res.budgetExhausted = true;
                return res;
            }
            add_node(head, id, int(ri), s, depth + 1);
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Combined decision

LinearDecision decide_linear(const Program& prog, const FactSet& instance, const Query& q,
                             LinearEngine engine, uint64_t depthBound, size_t rewriteCap,
                             size_t nodeCap) {
    LinearDecision d;
    if (engine == LinearEngine::Rewrite || engine == LinearEngine::Both) {
        d.rewriting = ucq_rewrite(prog, q, rewriteCap);
        d.engine = "rewrite";
        if (!d.rewriting.capped) d.yes = rewriting_answers(d.rewriting, instance);
    }
    bool needChase = engine == LinearEngine::TightChase || engine == LinearEngine::Both ||
                     (engine == LinearEngine::Rewrite && d.rewriting.capped);
    if (needChase) {
        d.chase = tight_chase(prog, instance, q, depthBound, nodeCap);
        d.tightBudgetExhausted = d.chase.budgetExhausted;
        if (engine == LinearEngine::Both && !d.rewriting.capped) {
            d.engine = "rewrite+chase";
            d.agreement = d.chase.budgetExhausted || (d.yes == d.chase.answered);
            if (d.chase.answered) d.yes = true;
        } else {
            d.engine = "chase";
            d.yes = d.chase.answered;
        }
    }
    return d;
}

}  // namespace owqa
