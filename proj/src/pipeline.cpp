#include "owqa/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

namespace owqa {

namespace {

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

}  // namespace

// ---------------------------------------------------------------------------
// Certification

Certification delinearize(const NormalizedProgram& np, Saturation& sat,
                          const FactClosure& recorded, const Linearization& lin,
                          const TightChaseResult& chase, const Query& q) {
    Certification c;
    c.rules = recorded.rulesUsed;
    c.steps = recorded.steps;
    c.match = chase.match;

    // closure rules already materialized by the recorded run, by rendering
    std::map<std::string, int> closureId;
    for (size_t i = recorded.sigmaRuleCount; i < c.rules.size(); ++i)
        closureId.emplace(rule_to_string(np.prog.sig, c.rules[i]), int(i));
    auto rule_id = [&](const GuardedSet& body, const Atom& head) {
        TGD r;
        r.body.push_back(body.principal);
        r.body.insert(r.body.end(), body.side.begin(), body.side.end());
        r.head.push_back(head);
        std::string key = rule_to_string(np.prog.sig, r);
        auto it = closureId.find(key);
        if (it != closureId.end()) return it->second;
        int id = int(c.rules.size());
        c.rules.push_back(std::move(r));
        closureId.emplace(key, id);
        return id;
    };

    int nextChild = 1;
    for (const StepRecord& s : recorded.steps)
        if (s.kind == StepRecord::Kind::NonFull || s.kind == StepRecord::Kind::Relaxed)
            ++nextChild;

    std::map<int, FactSet> nodeFacts;  // proof node -> current facts
    nodeFacts.emplace(0, recorded.facts);

    // proof node for each type-fact chase node, parents first
    std::map<int, int> memo;
    std::function<int(int)> ensure_node = [&](int nid) -> int {
        auto it = memo.find(nid);
        if (it != memo.end()) return it->second;
        const ChaseNode& n = chase.nodes[size_t(nid)];
        if (n.parent == -1) {
            memo.emplace(nid, 0);
            return 0;
        }
        const LinearRuleMeta& m = lin.meta[size_t(n.ruleId)];
        if (m.kind != LinearRuleMeta::Kind::Lift)
            throw Diag("CertificationFailure", "type fact not derived by a lift rule");
        int p = ensure_node(n.parent);
        const TGD& delta = np.prog.rules[size_t(m.sourceRule)];
        RuleInfo di = analyze_rule(delta, np.prog.sig);
        Atom groundHead;
        groundHead.rel = lin.types[size_t(m.toType)].principal.rel;
        groundHead.args = n.fact.args;

        // seed the body search from the head's frontier positions
        Subst seed, nulls;
        const Atom& h = delta.head[0];
        bool consistent = h.args.size() == groundHead.args.size();
        for (size_t j = 0; consistent && j < h.args.size(); ++j) {
            Term v = h.args[j];
            Term val = groundHead.args[j];
            Subst& tgt = di.existential.count(v) ? nulls : seed;
            auto prev = tgt.find(v.id);
            if (prev != tgt.end() && prev->second != val) consistent = false;
            tgt.emplace(v.id, val);
        }
        Subst trig;
        bool found = false;
        if (consistent)
            find_homomorphisms(delta.body, nodeFacts.at(p), seed, [&](const Subst& mm) {
                trig = mm;
                found = true;
                return false;
            });
        if (!found) throw Diag("CertificationFailure", "no trigger for lift step");

        std::set<Term> exportedVals;
        for (Term v : di.exported) exportedVals.insert(subst(trig, v));
        std::vector<Atom> inherited;
        for (const Atom& f : nodeFacts.at(p).all()) {
            if (!np.prog.sig.is_side(f.rel)) continue;
            bool within = true;
            for (Term t : f.args)
                if (!exportedVals.count(t)) { within = false; break; }
            if (within) inherited.push_back(f);
        }

        int childId = nextChild++;
        StepRecord rec;
        rec.kind = StepRecord::Kind::NonFull;
        rec.node = p;
        rec.child = childId;
        rec.ruleId = m.sourceRule;
        rec.trigger = trig;
        rec.created = groundHead;
        rec.inherited = inherited;
        c.steps.push_back(std::move(rec));

        FactSet child;
        child.add(groundHead);
        for (const Atom& f : inherited) child.add(f);
        close_under_saturation(sat, child,
                               [&](const GuardedSet& body, const Atom& hh, const Subst& back,
                                   const Atom& fact) {
                                   StepRecord r2;
                                   r2.kind = StepRecord::Kind::Full;
                                   r2.node = childId;
                                   r2.ruleId = rule_id(body, hh);
                                   r2.trigger = back;
                                   r2.created = fact;
                                   c.steps.push_back(std::move(r2));
                               });
        nodeFacts.emplace(childId, std::move(child));
        memo.emplace(nid, childId);
        return childId;
    };

    try {
        for (const Atom& a : q.atoms) {
            Atom g = subst(chase.match, a);
            auto it = chase.index.find(g);
            if (it == chase.index.end())
                throw Diag("CertificationFailure", "matched query fact missing in witness");
            const ChaseNode& n = chase.nodes[size_t(it->second)];
            if (n.parent == -1) {
                if (!nodeFacts.at(0).contains(g))
                    throw Diag("CertificationFailure", "matched fact missing at the root");
                continue;
            }
            int p = ensure_node(n.parent);
            if (!nodeFacts.at(p).contains(g))
                throw Diag("CertificationFailure", "matched fact missing in delinearized node");
        }
    } catch (const Diag& d) {
        c.ok = false;
        c.reason = d.what();
        return c;
    }
    c.ok = true;
    return c;
}

// ---------------------------------------------------------------------------
// Pipeline

PipelineResult run_pipeline(const Program& input, const PipelineOptions& opt) {
    PipelineResult res;
    auto t0 = std::chrono::steady_clock::now();
    res.normalized = preprocess(input);
    res.timingsMs["preprocess"] = ms_since(t0);

    res.sat = std::make_shared<Saturation>(res.normalized.prog, res.normalized.stats);
    res.suitableBound = suitable_count_bound(res.normalized.stats);

    t0 = std::chrono::steady_clock::now();
    res.closure = fact_saturate(res.normalized.prog, *res.sat, opt.certify);
    res.timingsMs["fact_saturate"] = ms_since(t0);

    t0 = std::chrono::steady_clock::now();
    res.lin = linearize(res.normalized.prog, *res.sat, res.closure.facts);
    res.timingsMs["linearize"] = ms_since(t0);

    Program linProg;
    linProg.sig = res.lin.sig;
    linProg.rules = res.lin.rules;
    FactSet linInstance;
    for (const Atom& f : res.lin.instance) linInstance.add(f);

    res.semiWidth = check_semi_width(linProg, res.normalized.stats.wPrime);

    t0 = std::chrono::steady_clock::now();
    double certifyMs = 0;
    for (const Query& q : res.normalized.prog.queries) {
        uint64_t k = std::max<uint64_t>(1, q.atoms.size());
        uint64_t m = uint64_t(std::max(1, res.normalized.stats.maxArity));
        uint64_t w = uint64_t(res.normalized.stats.wPrime);
        uint64_t bound =
            res.semiWidth.sigma2.empty()
                ? depth_bound(k, linProg.rules.size(), m, w)
                : depth_bound_semi(k, linProg.rules.size(), res.semiWidth.sigma2.size(), m, w);

        LinearDecision d =
            decide_linear(linProg, linInstance, q, opt.engine, bound, opt.rewriteCap, opt.nodeCap);
        QueryAnswer ans;
        ans.yes = d.yes;
        ans.engine = d.engine;
        ans.agreement = d.agreement;
        ans.tightBudgetExhausted = d.tightBudgetExhausted;
        ans.disjuncts = d.rewriting.disjuncts.size();

        if (opt.certify && ans.yes) {
            auto tc = std::chrono::steady_clock::now();
            TightChaseResult witness = d.chase.answered ? std::move(d.chase)
                                                        : tight_chase(linProg, linInstance, q,
                                                                      bound, opt.nodeCap);
            if (!witness.answered) {
                ans.certifyReason = "no chase witness for a positive answer";
            } else {
                Certification cert = delinearize(res.normalized, *res.sat, res.closure, res.lin,
                                                 witness, q);
                if (cert.ok) {
                    ProofCheck chk = check_proof(res.normalized.prog.sig, cert.rules,
                                                 res.normalized.prog.facts, cert.steps,
                                                 cert.match, q);
                    ans.certified = chk.ok;
                    ans.certifyReason = chk.ok ? "" : chk.reason;
                    ans.proof = std::move(cert.steps);
                    ans.proofRules = std::move(cert.rules);
                    ans.match = cert.match;
                } else {
                    ans.certifyReason = cert.reason;
                }
            }
            certifyMs += ms_since(tc);
        }
        res.answers.push_back(std::move(ans));
    }
    res.timingsMs["decide"] = ms_since(t0) - certifyMs;
    if (opt.certify) res.timingsMs["certify"] = certifyMs;
    res.satRuleCount = res.sat->rule_count();

    std::vector<bool> answers;
    for (const QueryAnswer& a : res.answers) answers.push_back(a.yes);
    nlohmann::json statistics{
        {"relations", res.normalized.stats.relationCount},
        {"rules", res.normalized.prog.rules.size()},
        {"wPrime", res.normalized.stats.wPrime},
        {"suitable_bound", res.suitableBound},
        {"closure_rules", res.satRuleCount},
        {"saturated_facts", res.closure.facts.size()},
        {"types", res.lin.types.size()},
        {"linear_rules", res.lin.rules.size()},
        {"semi_width_ok", res.semiWidth.ok},
    };
    nlohmann::json timings;
    for (const auto& [k, v] : res.timingsMs) timings[k] = v;
    nlohmann::json certificate = nlohmann::json::array();
    bool anyCert = false;
    for (size_t i = 0; i < res.answers.size(); ++i) {
        if (!opt.certify || !res.answers[i].yes) continue;
        anyCert = true;
        certificate.push_back({{"query", i},
                               {"certified", res.answers[i].certified},
                               {"steps", res.answers[i].proof.size()},
                               {"reason", res.answers[i].certifyReason}});
    }
    res.report = make_report(answers, statistics, timings, anyCert ? &certificate : nullptr);
    return res;
}

// ---------------------------------------------------------------------------
// Fuzzing

Program fuzz_program(std::mt19937_64& rng, const FuzzScale& scale) {
    auto pick = [&](int n) { return int(rng() % uint64_t(std::max(1, n))); };
    Program p;

    int nRel = std::min(scale.maxRelations, 2 + pick(scale.maxRelations - 1));
    int nSide = scale.maxSideArity > 0 ? pick(std::min(nRel, 3)) : 0;
    int nPrincipal = std::max(1, nRel - nSide);
    nSide = nRel - nPrincipal;
    std::vector<int> principals, sides;
    for (int i = 0; i < nPrincipal; ++i)
        principals.push_back(
            p.sig.add("P" + std::to_string(i), 1 + pick(scale.maxArity), false, "fuzz"));
    for (int i = 0; i < nSide; ++i)
        sides.push_back(
            p.sig.add("S" + std::to_string(i), 1 + pick(scale.maxSideArity), true, "fuzz"));

    std::vector<Term> consts;
    for (int i = 0; i < 4; ++i) consts.push_back(make_const("c" + std::to_string(i)));

    int nRules = 1 + pick(scale.maxRules);
    for (int r = 0; r < nRules; ++r) {
        TGD rule;
        int guard = principals[size_t(pick(nPrincipal))];
        int gar = p.sig.at(guard).arity;
        std::vector<Term> gargs;
        for (int i = 0; i < gar; ++i) {
            if (i > 0 && pick(5) == 0)
                gargs.push_back(gargs[size_t(pick(i))]);  // occasional repeats
            else
                gargs.push_back(make_var("v" + std::to_string(i)));
        }
        rule.body.push_back({guard, gargs});
        if (!sides.empty()) {
            int nSideAtoms = pick(3);
            for (int i = 0; i < nSideAtoms; ++i) {
                int sr = sides[size_t(pick(nSide))];
                std::vector<Term> sargs;
                for (int j = 0; j < p.sig.at(sr).arity; ++j)
                    sargs.push_back(gargs[size_t(pick(gar))]);
                rule.body.push_back({sr, sargs});
            }
        }
        // exported variables, at most maxWidth of them
        std::vector<Term> guardVars;
        for (Term t : gargs)
            if (std::find(guardVars.begin(), guardVars.end(), t) == guardVars.end())
                guardVars.push_back(t);
        std::vector<Term> exported = guardVars;
        std::shuffle(exported.begin(), exported.end(), rng);
        exported.resize(size_t(std::min<int>(pick(scale.maxWidth + 1), int(exported.size()))));

        int headRel = pick(nRel) < nPrincipal || sides.empty()
                          ? principals[size_t(pick(nPrincipal))]
                          : sides[size_t(pick(nSide))];
        std::vector<Term> ex = {make_var("z0"), make_var("z1")};
        std::vector<Term> hargs;
        for (int j = 0; j < p.sig.at(headRel).arity; ++j) {
            if (!exported.empty() && pick(3) != 0)
                hargs.push_back(exported[size_t(pick(int(exported.size())))]);
            else
                hargs.push_back(ex[size_t(pick(2))]);
        }
        rule.head.push_back({headRel, hargs});
        p.rules.push_back(std::move(rule));
    }

    int nFacts = 1 + pick(scale.maxFacts);
    for (int i = 0; i < nFacts; ++i) {
        int rel = pick(nRel) < nPrincipal || sides.empty() ? principals[size_t(pick(nPrincipal))]
                                                           : sides[size_t(pick(nSide))];
        std::vector<Term> args;
        for (int j = 0; j < p.sig.at(rel).arity; ++j) args.push_back(consts[size_t(pick(4))]);
        p.facts.push_back({rel, args});
    }

    int nQueries = 1 + pick(2);
    for (int qi = 0; qi < nQueries; ++qi) {
        Query q;
        std::vector<Term> qvars = {make_var("q0"), make_var("q1"), make_var("q2")};
        int nAtoms = 1 + pick(scale.maxQueryAtoms);
        for (int i = 0; i < nAtoms; ++i) {
            int rel = pick(nRel) < nPrincipal || sides.empty()
                          ? principals[size_t(pick(nPrincipal))]
                          : sides[size_t(pick(nSide))];
            std::vector<Term> args;
            for (int j = 0; j < p.sig.at(rel).arity; ++j) {
                if (pick(4) == 0)
                    args.push_back(consts[size_t(pick(4))]);
                else
                    args.push_back(qvars[size_t(pick(3))]);
            }
            q.atoms.push_back({rel, args});
        }
        p.queries.push_back(std::move(q));
    }
    return p;
}

DifferentialOutcome differential_case(const Program& prog, size_t oracleBudget,
                                      bool requireCertified) {
    DifferentialOutcome o;
    PipelineOptions opt;
    opt.certify = requireCertified;
    PipelineResult res;
    try {
        res = run_pipeline(prog, opt);
    } catch (const Diag& d) {
        o.failed = true;
        o.reason = std::string("pipeline diagnostic: ") + d.what();
        return o;
    }
    for (size_t i = 0; i < prog.queries.size(); ++i) {
        OracleResult orc = bounded_entailment_oracle(prog, prog.queries[i], oracleBudget);
        const QueryAnswer& a = res.answers[i];
        o.oracleEntailed.push_back(orc.entailed);
        o.pipelineYes.push_back(a.yes);
        if (orc.entailed && !a.yes) {
            o.failed = true;
            o.reason = "oracle entailed, pipeline answered no (query " + std::to_string(i) + ")";
            return o;
        }
        if (a.yes && requireCertified && !a.certified) {
            o.failed = true;
            o.reason = "positive answer without certificate (query " + std::to_string(i) +
                       "): " + a.certifyReason;
            return o;
        }
        if (!a.agreement) {
            o.failed = true;
            o.reason = "engine disagreement (query " + std::to_string(i) + ")";
            return o;
        }
        if (!a.yes && !orc.entailed && orc.run.budgetExhausted) o.unresolved = true;
    }
    return o;
}

// ---------------------------------------------------------------------------
// Benchmark helpers

Program scaling_program(size_t nFacts) {
    Program p;
    int R = p.sig.add("R", 2, false, "bench");
    int U = p.sig.add("U", 1, true, "bench");
    Term x = make_var("x"), y = make_var("y"), z = make_var("z");
    p.rules.push_back({{{R, {x, y}}, {U, {x}}}, {{U, {y}}}});
    p.rules.push_back({{{R, {x, y}}}, {{R, {y, z}}}});
    std::vector<Term> cs;
    for (size_t i = 0; i < nFacts; ++i) cs.push_back(make_const("b" + std::to_string(i)));
    p.facts.push_back({U, {cs[0]}});
    for (size_t i = 0; i + 1 < nFacts && p.facts.size() < nFacts; ++i)
        p.facts.push_back({R, {cs[i], cs[i + 1]}});
    return p;
}

double loglog_slope(const std::vector<std::pair<double, double>>& points, double* r2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    double n = double(points.size());
    for (auto [x, y] : points) {
        double lx = std::log(x), ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    if (r2) {
        double b = (sy - slope * sx) / n;
        double ssRes = 0, mean = sy / n, ssTot = 0;
        for (auto [x, y] : points) {
            double ly = std::log(y);
            double pred = slope * std::log(x) + b;
            ssRes += (ly - pred) * (ly - pred);
            ssTot += (ly - mean) * (ly - mean);
        }
        *r2 = ssTot > 0 ? 1.0 - ssRes / ssTot : 1.0;
    }
    return slope;
}

}  // namespace owqa
