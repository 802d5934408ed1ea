#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "owqa/pipeline.hpp"

using namespace owqa;

static const char* kWorked =
    "rel R/2\n"
    "rel U/1 side\n"
    "tgd R(x,y) -> R(y,z)\n"
    "tgd R(x,y), U(x) -> U(y)\n"
    "fact R(a,b)\n"
    "fact U(a)\n"
    "query U(q)\n"
    "query R(q1,q2), U(q1), U(q2)\n";

TEST_CASE("worked example answers yes twice, certified") {
    PipelineOptions opt;
    opt.certify = true;
    PipelineResult pr = run_pipeline(parse_program(kWorked), opt);
    REQUIRE(pr.answers.size() == 2);
    for (const QueryAnswer& a : pr.answers) {
        CHECK(a.yes);
        CHECK(a.agreement);
        CHECK(a.certified);
        REQUIRE(!a.proof.empty());
        ProofCheck pc = check_proof(pr.normalized.prog.sig, a.proofRules,
                                    pr.normalized.prog.facts, a.proof, a.match,
                                    pr.normalized.prog.queries[&a - pr.answers.data()]);
        CHECK(pc.ok);
    }
    CHECK(pr.lin.types.size() == 3);
    CHECK(pr.semiWidth.ok);
}

TEST_CASE("a query unsupported by any rule answers no") {
    Program p = parse_program(
        "rel R/2\n"
        "rel U/1 side\n"
        "rel V/1 side\n"
        "tgd R(x,y), U(x) -> U(y)\n"
        "fact R(a,b)\n"
        "fact U(a)\n"
        "query V(q)\n");
    PipelineResult pr = run_pipeline(p);
    REQUIRE(pr.answers.size() == 1);
    CHECK(!pr.answers[0].yes);
    CHECK(pr.answers[0].agreement);
}

TEST_CASE("a query matched directly by the instance answers yes") {
    Program p = parse_program(
        "rel R/2\n"
        "fact R(a,b)\n"
        "query R(u,v)\n");
    PipelineOptions opt;
    opt.certify = true;
    PipelineResult pr = run_pipeline(p, opt);
    REQUIRE(pr.answers.size() == 1);
    CHECK(pr.answers[0].yes);
    CHECK(pr.answers[0].certified);
}

TEST_CASE("the report carries answers and statistics") {
    PipelineResult pr = run_pipeline(parse_program(kWorked));
    const nlohmann::json& rep = pr.report;
    REQUIRE(rep.contains("answers"));
    REQUIRE(rep.contains("statistics"));
    CHECK(rep["answers"].size() == 2);
    CHECK(rep["answers"][0] == true);
    CHECK(rep["statistics"]["types"] == 3);
    CHECK(rep["statistics"]["semi_width_ok"] == true);

    // determinism modulo timings
    PipelineResult pr2 = run_pipeline(parse_program(kWorked));
    nlohmann::json a = pr.report, b = pr2.report;
    a.erase("timings_ms");
    b.erase("timings_ms");
    CHECK(a == b);
}

TEST_CASE("engine choices agree on the worked example") {
    for (LinearEngine e : {LinearEngine::Rewrite, LinearEngine::TightChase, LinearEngine::Both}) {
        PipelineOptions opt;
        opt.engine = e;
        PipelineResult pr = run_pipeline(parse_program(kWorked), opt);
        CHECK(pr.answers[0].yes);
        CHECK(pr.answers[1].yes);
    }
}

TEST_CASE("differential fuzzing stays clean on a small sample") {
    std::mt19937_64 rng(5);
    int failures = 0, unresolved = 0;
    for (int tc = 0; tc < 40; ++tc) {
        Program p = fuzz_program(rng);
        DifferentialOutcome out = differential_case(p, 2000);
        if (out.failed) {
            ++failures;
            MESSAGE("case ", tc, ": ", out.reason);
        }
        if (out.unresolved) ++unresolved;
    }
    CHECK(failures == 0);
    CHECK(unresolved < 40);
}

TEST_CASE("log-log slope recovers a quadratic") {
    std::vector<std::pair<double, double>> pts;
    for (double x : {10.0, 100.0, 1000.0, 10000.0}) pts.push_back({x, 3.0 * x * x});
    double r2 = 0;
    double slope = loglog_slope(pts, &r2);
    CHECK(std::abs(slope - 2.0) < 1e-9);
    CHECK(r2 > 0.999);
}

TEST_CASE("scaling program saturates the whole chain") {
    Program p = scaling_program(50);
    PipelineResult pr = run_pipeline(p);
    const Signature& sig = pr.normalized.prog.sig;
    int U = sig.find("U");
    size_t uCount = 0;
    for (const Atom& f : pr.closure.facts.all())
        if (f.rel == U) ++uCount;
    CHECK(uCount >= 25);
}
