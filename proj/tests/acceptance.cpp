// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on failure.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "owqa/chase.hpp"
#include "owqa/pipeline.hpp"

using namespace owqa;
using Clock = std::chrono::steady_clock;

static double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Gate {
    int failures = 0;
    void report(int idx, const char* what, bool ok, const std::string& detail) {
        std::printf("Criterion %d (%s): %s%s%s\n", idx, what, ok ? "PASS" : "FAIL",
                    detail.empty() ? "" : " — ", detail.c_str());
        if (!ok) ++failures;
    }
};

static const char* kWorked =
    "rel R/2\n"
    "rel U/1 side\n"
    "tgd R(x,y) -> R(y,z)\n"
    "tgd R(x,y), U(x) -> U(y)\n"
    "fact R(a,b)\n"
    "fact U(a)\n"
    "query R(q1,q2), R(q2,q3), U(q3)\n";

// ---------------------------------------------------------------------------
// 1. Worked-example linearization: exactly 3 childish types and the expected
//    linear rule shapes, under 1 second.

static void criterion1(Gate& g) {
    auto t0 = Clock::now();
    std::string detail;
    bool ok = true;
    try {
        PipelineOptions opt;
        opt.certify = true;
        PipelineResult pr = run_pipeline(parse_program(kWorked), opt);
        const Signature& sig = pr.normalized.prog.sig;
        int R = sig.find("R"), U = sig.find("U");
        const Linearization& lin = pr.lin;
        if (lin.types.size() != 3) {
            ok = false;
            detail = "expected 3 types, got " + std::to_string(lin.types.size());
        }
        Term e1 = canonical_var(1), e2 = canonical_var(2);
        GuardedSet bare = canonicalize_guarded_set(Atom{R, {e1, e2}}, {}, sig);
        GuardedSet i1 = canonicalize_guarded_set(Atom{R, {e1, e2}}, {Atom{U, {e1}}}, sig);
        GuardedSet i2 = canonicalize_guarded_set(Atom{R, {e1, e2}}, {Atom{U, {e2}}}, sig);
        int tBare = lin.typeIndex.count(bare) ? lin.typeIndex.at(bare) : -1;
        int t1 = lin.typeIndex.count(i1) ? lin.typeIndex.at(i1) : -1;
        int t2 = lin.typeIndex.count(i2) ? lin.typeIndex.at(i2) : -1;
        if (tBare < 0 || t1 < 0 || t2 < 0) {
            ok = false;
            detail = "missing an expected type";
        }
        bool sawU1 = false, sawR = false, sawLift = false;
        for (size_t i = 0; ok && i < lin.rules.size(); ++i) {
            const TGD& r = lin.rules[i];
            const LinearRuleMeta& m = lin.meta[i];
            if (m.fromType == t1 && m.kind == LinearRuleMeta::Kind::Instantiate) {
                if (r.head[0].rel == U && r.head[0].args[0] == r.body[0].args[0]) sawU1 = true;
                if (r.head[0].rel == R && r.head[0].args == r.body[0].args) sawR = true;
            }
            if (m.fromType == t2 && m.kind == LinearRuleMeta::Kind::Lift && m.toType == t1 &&
                r.head[0].args[0] == r.body[0].args[1])
                sawLift = true;
        }
        if (ok && !(sawU1 && sawR && sawLift)) {
            ok = false;
            detail = "missing an expected linear rule shape";
        }
        if (ok && !(pr.answers.size() == 1 && pr.answers[0].yes && pr.answers[0].certified)) {
            ok = false;
            detail = "query not answered true+certified";
        }
    } catch (const Diag& d) {
        ok = false;
        detail = std::string("diagnostic: ") + d.what();
    }
    double ms = ms_since(t0);
    if (ok && ms >= 1000.0) {
        ok = false;
        detail = "took " + std::to_string(ms) + " ms";
    }
    g.report(1, "worked-example linearization", ok, detail);
}

// ---------------------------------------------------------------------------
// 2. Saturation composites on the two hand-worked programs.

static void criterion2(Gate& g) {
    bool ok = true;
    std::string detail;
    auto t0 = Clock::now();
    try {
        Program p = parse_program(
            "rel P/5\nrel R/5\nrel S/1 side\nrel T/1 side\nrel U/1 side\n"
            "tgd P(x,y1,y2,y3,z) -> R(x,y1,y2,y3,z)\n"
            "tgd R(x,y1,y2,y3,z), S(x) -> T(y1)\n"
            "tgd R(x,y1,y2,y3,z), S(x) -> T(y2)\n"
            "tgd R(x,y1,y2,y3,z), S(x) -> T(y3)\n"
            "tgd R(x,y1,y2,y3,z), T(y1), T(y2), T(y3) -> U(z)\n");
        NormalizedProgram np = preprocess(p);
        Saturation sat(np.prog, np.stats);
        const Signature& sig = np.prog.sig;
        Term x = make_var("x"), y1 = make_var("y1"), y2 = make_var("y2"), y3 = make_var("y3"),
             z = make_var("z");
        TGD expect{{{sig.find("R"), {x, y1, y2, y3, z}}, {sig.find("S"), {x}}},
                   {{sig.find("U"), {z}}}};
        if (!sat.contains(expect)) {
            ok = false;
            detail = "transitivity composite missing";
        }
        double ms = ms_since(t0);
        if (ok && ms >= 2000.0) {
            ok = false;
            detail = "first example took " + std::to_string(ms) + " ms";
        }

        t0 = Clock::now();
        Program p2 = parse_program(
            "rel Pr/4\nrel R/4\nrel Rp/3\nrel S/1 side\nrel T/1 side\nrel U/2 side\n"
            "tgd Pr(x1,x2,y1,y2) -> R(x1,x2,y1,y2)\n"
            "tgd R(x1,x2,y1,y2), S(x1), S(x2) -> T(y1)\n"
            "tgd R(x1,x2,y1,y2), S(x1), S(x2) -> T(y2)\n"
            "tgd R(x1,x2,y1,y2), S(x1), S(x2) -> Rp(y1,y2,z)\n"
            "tgd Rp(y1,y2,z), T(y1), T(y2) -> U(y1,y2)\n");
        NormalizedProgram np2 = preprocess(p2);
        Saturation sat2(np2.prog, np2.stats);
        const Signature& sig2 = np2.prog.sig;
        Term x1 = make_var("x1"), x2 = make_var("x2");
        TGD expect2{{{sig2.find("R"), {x1, x2, y1, y2}},
                     {sig2.find("S"), {x1}},
                     {sig2.find("S"), {x2}}},
                    {{sig2.find("U"), {y1, y2}}}};
        if (ok && !sat2.contains(expect2)) {
            ok = false;
            detail = "principal+transitivity composite missing";
        }
        double ms2 = ms_since(t0);
        if (ok && ms2 >= 2000.0) {
            ok = false;
            detail = "second example took " + std::to_string(ms2) + " ms";
        }
    } catch (const Diag& d) {
        ok = false;
        detail = std::string("diagnostic: ") + d.what();
    }
    g.report(2, "saturation composites", ok, detail);
}

// ---------------------------------------------------------------------------
// Corpus pass: criteria 3, 5, 6, and 8 over one 500-program corpus.

struct CorpusStats {
    bool boundOk = true;
    std::string boundDetail;
    bool childishOk = true;
    std::string childishDetail;
    bool crossOk = true;
    std::string crossDetail;
    bool disciplineOk = true;
    std::string disciplineDetail;
};

static int primary_node(const StepRecord& st) {
    switch (st.kind) {
        case StepRecord::Kind::Full: return st.node;
        case StepRecord::Kind::NonFull:
        case StepRecord::Kind::Relaxed: return st.child;
        case StepRecord::Kind::Propagation: return st.to;
    }
    return -1;
}

static bool one_pass_contiguous(const ChaseRun& run) {
    auto inSubtree = [&](int node, int root) {
        for (int n = node; n != -1; n = run.parent[n])
            if (n == root) return true;
        return false;
    };
    for (size_t root = 1; root < run.parent.size(); ++root) {
        long first = -1, last = -1;
        for (size_t i = 0; i < run.steps.size(); ++i) {
            int n = primary_node(run.steps[i]);
            if (n >= 0 && inSubtree(n, int(root))) {
                if (first < 0) first = long(i);
                last = long(i);
            }
        }
        for (long i = first; first >= 0 && i <= last; ++i) {
            int n = primary_node(run.steps[i]);
            if (n >= 0 && inSubtree(n, int(root))) continue;
            const StepRecord& st = run.steps[i];
            if (st.kind == StepRecord::Kind::Propagation && inSubtree(st.from, int(root)))
                continue;  // upward copy out of the open subtree
            return false;
        }
    }
    return true;
}

// chase the frozen type under the input rules; every fact landing back on the
// frozen domain must already be in the closure of the type
static bool childish_complete(const NormalizedProgram& np, Saturation& sat, const GuardedSet& s,
                              std::string& detail) {
    Subst freeze;
    std::set<Term> domain;
    for (Term e : s.elements()) {
        Term c = make_const("frz" + std::to_string(freeze.size()));
        freeze.emplace(e.id, c);
        domain.insert(c);
    }
    FactSet node;
    node.add(subst(freeze, s.principal));
    for (const Atom& a : s.side) node.add(subst(freeze, a));
    close_under_saturation(sat, node);

    Program probe = np.prog;
    probe.facts.assign(node.all().begin(), node.all().end());
    ChaseRun run = run_chase(probe, Strategy::Tree, nullptr, 600);
    for (const Atom& f : run.allFacts.all()) {
        bool onDomain = true;
        for (Term t : f.args)
            if (!domain.count(t)) onDomain = false;
        if (onDomain && !node.contains(f)) {
            detail = "chase-derivable fact missing from closure: " +
                     atom_to_string(np.prog.sig, f);
            return false;
        }
    }
    return true;
}

static CorpusStats corpus_pass(const std::vector<Program>& corpus) {
    CorpusStats cs;
    for (size_t ci = 0; ci < corpus.size(); ++ci) {
        std::string tag = "case " + std::to_string(ci);
        try {
            NormalizedProgram np = preprocess(corpus[ci]);
            Saturation sat(np.prog, np.stats);
            sat.materialize_all();

            // 3. closure size bound
            if (cs.boundOk && sat.rule_count() > suitable_count_bound(np.stats)) {
                cs.boundOk = false;
                cs.boundDetail = tag + ": " + std::to_string(sat.rule_count()) + " > bound " +
                                 std::to_string(suitable_count_bound(np.stats));
            }

            FactClosure fc = fact_saturate(np.prog, sat);
            Linearization lin = linearize(np.prog, sat, fc.facts);

            // 6. semi-width of the linearizer output
            SemiWidthResult sw = check_semi_width(
                Program{lin.sig, lin.rules, lin.instance, {}}, np.stats.wPrime);
            if (cs.crossOk && !sw.ok) {
                cs.crossOk = false;
                cs.crossDetail = tag + ": linearization fails the semi-width check";
            }

            // 6. engine agreement on every query
            FactSet inst;
            for (const Atom& f : lin.instance) inst.add(f);
            uint64_t m = 0;
            for (const RelationSymbol& rs : lin.sig.all()) m = std::max(m, uint64_t(rs.arity));
            for (const Query& q : np.prog.queries) {
                uint64_t bound =
                    sw.sigma2.empty()
                        ? depth_bound(q.atoms.size(), lin.rules.size(), m, np.stats.wPrime)
                        : depth_bound_semi(q.atoms.size(), lin.rules.size(), sw.sigma2.size(),
                                           m, np.stats.wPrime);
                LinearDecision d =
                    decide_linear(Program{lin.sig, lin.rules, {}, {}}, inst, q,
                                  LinearEngine::Both, bound);
                if (cs.crossOk && !d.agreement) {
                    cs.crossOk = false;
                    cs.crossDetail = tag + ": rewrite and tight chase disagree";
                }
            }

            // 5. childish completeness per catalog type. Instance-seeded
            // types whose principal pattern matches no rule head are not
            // childish instances (the root handles them by direct full-rule
            // firing), so the closure-completeness claim excludes them.
            for (const GuardedSet& s : lin.types) {
                if (!sat.compatible(s.principal)) continue;
                std::string why;
                if (cs.childishOk && !childish_complete(np, sat, s, why)) {
                    cs.childishOk = false;
                    cs.childishDetail = tag + ": " + why;
                }
            }

            // 8. chase-strategy discipline
            Program noQuery = np.prog;
            noQuery.queries.clear();
            ChaseRun onePass = run_chase(noQuery, Strategy::OnePass, nullptr, 800);
            if (cs.disciplineOk && !one_pass_contiguous(onePass)) {
                cs.disciplineOk = false;
                cs.disciplineDetail = tag + ": one-pass run revisits a closed subtree";
            }
            std::vector<TGD> satRules;
            for (const FullRule& r : sat.rules()) {
                TGD t;
                t.body.push_back(r.body.principal);
                for (const Atom& a : r.body.side) t.body.push_back(a);
                t.head.push_back(r.head);
                satRules.push_back(t);
            }
            ChaseRun shortcut = run_chase(noQuery, Strategy::Shortcut, &satRules, 800);
            for (const StepRecord& st : shortcut.steps)
                if (cs.disciplineOk && st.kind == StepRecord::Kind::Propagation) {
                    cs.disciplineOk = false;
                    cs.disciplineDetail = tag + ": shortcut run propagates";
                }
        } catch (const Diag& d) {
            cs.boundOk = cs.childishOk = cs.crossOk = cs.disciplineOk = false;
            cs.boundDetail = cs.childishDetail = cs.crossDetail = cs.disciplineDetail =
                tag + ": diagnostic: " + d.what();
            break;
        }
    }
    return cs;
}

// ---------------------------------------------------------------------------
// 4. Differential soundness with certificates, under 120 seconds.

static void criterion4(Gate& g, const std::vector<Program>& corpus) {
    auto t0 = Clock::now();
    int failures = 0, unresolved = 0;
    std::string detail;
    for (size_t ci = 0; ci < corpus.size(); ++ci) {
        DifferentialOutcome out = differential_case(corpus[ci], 2000);
        if (out.failed) {
            ++failures;
            if (detail.empty()) detail = "case " + std::to_string(ci) + ": " + out.reason;
        }
        if (out.unresolved) ++unresolved;
    }
    double ms = ms_since(t0);
    bool ok = failures == 0 && ms < 120000.0;
    if (ok)
        detail = std::to_string(corpus.size()) + " cases, " + std::to_string(unresolved) +
                 " unresolved, " + std::to_string(int(ms)) + " ms";
    else if (failures == 0)
        detail = "took " + std::to_string(ms) + " ms";
    g.report(4, "differential soundness with certificates", ok, detail);
}

// ---------------------------------------------------------------------------
// 7. Fact-saturation scaling.

static void criterion7(Gate& g) {
    std::vector<std::pair<double, double>> pts;
    std::string detail;
    bool ok = true;
    try {
        for (size_t n : {size_t(10), size_t(100), size_t(1000), size_t(10000)}) {
            Program p = scaling_program(n);
            NormalizedProgram np = preprocess(p);
            Saturation sat(np.prog, np.stats);
            auto t0 = Clock::now();
            fact_saturate(np.prog, sat);
            pts.push_back({double(n), std::max(ms_since(t0), 0.01)});
        }
        double r2 = 0;
        double slope = loglog_slope(pts, &r2);
        char buf[128];
        std::snprintf(buf, sizeof buf, "slope %.2f, R^2 %.3f", slope, r2);
        detail = buf;
        ok = slope <= 3.5 && r2 >= 0.95;
    } catch (const Diag& d) {
        ok = false;
        detail = std::string("diagnostic: ") + d.what();
    }
    g.report(7, "polynomial fact-saturation scaling", ok, detail);
}

// ---------------------------------------------------------------------------

int main() {
    Gate g;
    criterion1(g);
    criterion2(g);

    std::mt19937_64 rng(1);
    std::vector<Program> corpus;
    for (int i = 0; i < 500; ++i) corpus.push_back(fuzz_program(rng));

    CorpusStats cs = corpus_pass(corpus);
    g.report(3, "closure size bound over the corpus", cs.boundOk, cs.boundDetail);
    criterion4(g, corpus);
    g.report(5, "childish-saturation completeness", cs.childishOk, cs.childishDetail);
    g.report(6, "engine cross-validation and semi-width", cs.crossOk, cs.crossDetail);
    criterion7(g);
    g.report(8, "chase-strategy discipline", cs.disciplineOk, cs.disciplineDetail);

    if (g.failures) {
        std::printf("%d criterion(s) failed\n", g.failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
