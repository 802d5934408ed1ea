#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "owqa/io.hpp"
#include "owqa/linear_engine.hpp"

using namespace owqa;

static FactSet facts_of(const Program& p) {
    FactSet fs;
    for (const Atom& f : p.facts) fs.add(f);
    return fs;
}

TEST_CASE("depth bounds match the closed formulas") {
    CHECK(depth_bound(3, 10, 3, 2) == 750);      // 3 * 10 * 5^2
    CHECK(depth_bound(1, 1, 2, 1) == 3);
    CHECK(depth_bound_semi(2, 4, 3, 2, 1) == 96);  // 2 * max(16,12) * 3
    CHECK(depth_bound(5, 0, 2, 1) == 0);
}

TEST_CASE("semi-width accepts an acyclic wide layer") {
    // Sigma2 = the width-2 copy rule; its position graph is a DAG
    Program p = parse_program(
        "rel A/2\n"
        "rel B/2\n"
        "rel C/1\n"
        "tgd A(x,y) -> B(x,y)\n"
        "tgd B(x,y) -> C(x)\n");
    SemiWidthResult r = check_semi_width(p, 1);
    CHECK(r.ok);
    CHECK(r.sigma2.size() == 1);
    CHECK(r.sigma2[0] == 0);
    CHECK(check_semi_width(p, 2).sigma2.empty());
}

TEST_CASE("semi-width rejects a cyclic wide layer with a witness") {
    Program p = parse_program(
        "rel A/2\n"
        "tgd A(x,y) -> A(y,x)\n");
    SemiWidthResult r = check_semi_width(p, 1);
    CHECK(!r.ok);
    CHECK(!r.cycle.empty());
    for (auto [rel, pos] : r.cycle) {
        CHECK(rel == 0);
        CHECK((pos == 0 || pos == 1));
    }
}

TEST_CASE("rewriting answers a chain query without chasing") {
    Program p = parse_program(
        "rel E/2\n"
        "rel S/1\n"
        "tgd S(x) -> E(x,y)\n"
        "tgd E(x,y) -> E(y,z)\n"
        "fact S(a)\n"
        "query E(u,v), E(v,w)\n");
    Rewriting rw = ucq_rewrite(p, p.queries[0]);
    CHECK(!rw.capped);
    CHECK(rw.disjuncts.size() > 1);
    CHECK(rewriting_answers(rw, facts_of(p)));
    // and the instance alone does not satisfy the original query
    FactSet fs = facts_of(p);
    bool direct = find_homomorphisms(p.queries[0].atoms, fs, {}, [](const Subst&) {
        return true;
    });
    CHECK(!direct);
}

TEST_CASE("rewriting handles a head atom covering two query atoms") {
    // P(z,z) must resolve the piece {P(u,v), P(v,u)} in one step
    Program p = parse_program(
        "rel S/1\n"
        "rel P/2\n"
        "tgd S(x) -> P(z,z)\n"
        "fact S(a)\n"
        "query P(u,v), P(v,u)\n");
    Rewriting rw = ucq_rewrite(p, p.queries[0]);
    CHECK(rewriting_answers(rw, facts_of(p)));
}

TEST_CASE("tight chase answers and refuses non-linear input") {
    Program p = parse_program(
        "rel E/2\n"
        "tgd E(x,y) -> E(y,z)\n"
        "fact E(a,b)\n"
        "query E(u,v), E(v,w), E(w,t)\n");
    TightChaseResult r = tight_chase(p, facts_of(p), p.queries[0], 100);
    CHECK(r.answered);
    CHECK(!r.budgetExhausted);
    // provenance chain walks back to the instance
    REQUIRE(!r.match.empty());
    for (const ChaseNode& n : r.nodes)
        if (n.parent >= 0) CHECK(n.parent < int(r.nodes.size()));

    Program bad = parse_program(
        "rel E/2\n"
        "rel F/2\n"
        "tgd E(x,y), F(y,z) -> E(x,z)\n"
        "fact E(a,b)\n");
    Query q{{Atom{bad.sig.find("E"), {make_var("u"), make_var("v")}}}};
    CHECK_THROWS_AS(tight_chase(bad, facts_of(bad), q, 100), Diag);
}

TEST_CASE("tight chase says no when nothing derives the query") {
    Program p = parse_program(
        "rel E/2\n"
        "rel Q/1\n"
        "tgd E(x,y) -> E(y,z)\n"
        "fact E(a,b)\n"
        "query Q(u)\n");
    TightChaseResult r = tight_chase(p, facts_of(p), p.queries[0], 50);
    CHECK(!r.answered);
    CHECK(!r.budgetExhausted);
}

TEST_CASE("ancestor pruning does not lose answers on a deep chain") {
    // pruning collapses isomorphic subtrees; the query is still found
    Program p = parse_program(
        "rel E/2\n"
        "rel M/1\n"
        "tgd E(x,y) -> E(y,z)\n"
        "tgd E(x,y) -> M(y)\n"
        "fact E(a,b)\n"
        "query M(u), E(u,v), M(v)\n");
    TightChaseResult r = tight_chase(p, facts_of(p), p.queries[0], 200);
    CHECK(r.answered);
}

TEST_CASE("both engines agree through decide_linear") {
    Program p = parse_program(
        "rel E/2\n"
        "rel S/1\n"
        "tgd S(x) -> E(x,y)\n"
        "tgd E(x,y) -> E(y,z)\n"
        "fact S(a)\n"
        "query E(u,v), E(v,w)\n");
    FactSet fs = facts_of(p);
    uint64_t bound = depth_bound(2, p.rules.size(), 2, 1);
    LinearDecision both = decide_linear(p, fs, p.queries[0], LinearEngine::Both, bound);
    CHECK(both.yes);
    CHECK(both.agreement);
    LinearDecision rw = decide_linear(p, fs, p.queries[0], LinearEngine::Rewrite, bound);
    LinearDecision ch = decide_linear(p, fs, p.queries[0], LinearEngine::TightChase, bound);
    CHECK(rw.yes == ch.yes);
    CHECK(rw.engine == "rewrite");
    CHECK(ch.engine == "chase");

    Query no{{Atom{p.sig.find("S"), {make_const("zz")}}}};
    LinearDecision neg = decide_linear(p, fs, no, LinearEngine::Both, bound);
    CHECK(!neg.yes);
    CHECK(neg.agreement);
}
