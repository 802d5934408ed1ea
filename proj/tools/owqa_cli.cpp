// owqa: open-world query answering for guarded rules with a side signature.
#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "owqa/chase.hpp"
#include "owqa/pipeline.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw owqa::Diag("IoError", "cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

owqa::LinearEngine parse_engine(const std::string& s) {
    if (s == "rewrite") return owqa::LinearEngine::Rewrite;
    if (s == "chase") return owqa::LinearEngine::TightChase;
    return owqa::LinearEngine::Both;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"open-world query answering under guarded rules with a side signature"};
    app.require_subcommand(1);

    std::string file, jsonPath, engine = "both", suite;
    bool certify = false;
    uint64_t budget = 2000, seed = 1, cases = 100;

    auto* cAnswer = app.add_subcommand("answer", "answer the program's queries");
    cAnswer->add_option("file", file)->required();
    cAnswer->add_option("--json", jsonPath, "write the JSON report here");
    cAnswer->add_flag("--certify", certify, "check a replayable proof for every yes");
    cAnswer->add_option("--engine", engine, "rewrite|chase|both");

    auto* cNorm = app.add_subcommand("normalize", "print the normalized program");
    cNorm->add_option("file", file)->required();

    auto* cSat = app.add_subcommand("saturate", "print the closure rules");
    cSat->add_option("file", file)->required();

    auto* cLin = app.add_subcommand("linearize", "print the type catalog and linear rules");
    cLin->add_option("file", file)->required();

    auto* cOracle = app.add_subcommand("oracle", "bounded chase oracle per query");
    cOracle->add_option("file", file)->required();
    cOracle->add_option("--budget", budget, "chase step budget");

    auto* cFuzz = app.add_subcommand("fuzz", "differential fuzzing against the oracle");
    cFuzz->add_option("--seed", seed);
    cFuzz->add_option("--cases", cases);
    cFuzz->add_option("--budget", budget, "oracle step budget per case");

    auto* cBench = app.add_subcommand("bench", "timing sweeps");
    cBench->add_option("suite", suite, "saturation-scaling|fact-closure-scaling|end-to-end")
        ->required();
    cBench->add_option("--json", jsonPath);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    using namespace owqa;
    try {
        if (*cAnswer) {
            Program p = parse_program(slurp(file));
            PipelineOptions opt;
            opt.certify = certify;
            opt.engine = parse_engine(engine);
            PipelineResult res = run_pipeline(p, opt);
            for (size_t i = 0; i < res.answers.size(); ++i) {
                const QueryAnswer& a = res.answers[i];
                std::cout << "query " << i << ": " << (a.yes ? "true" : "false") << " ["
                          << a.engine << "]";
                if (certify && a.yes)
                    std::cout << (a.certified ? " certified" : " NOT CERTIFIED: " +
                                                                   a.certifyReason);
                std::cout << "\n";
            }
            if (!jsonPath.empty()) write_json(jsonPath, res.report);
            return 0;
        }
        if (*cNorm) {
            Program p = parse_program(slurp(file));
            NormalizedProgram np = preprocess(p);
            std::cout << render_program(np.prog);
            return 0;
        }
        if (*cSat) {
            Program p = parse_program(slurp(file));
            NormalizedProgram np = preprocess(p);
            Saturation sat(np.prog, np.stats);
            sat.materialize_all();
            std::cout << "# bound " << suitable_count_bound(np.stats) << ", closure rules "
                      << sat.rule_count() << "\n";
            for (const FullRule& r : sat.rules()) {
                TGD t;
                t.body.push_back(r.body.principal);
                t.body.insert(t.body.end(), r.body.side.begin(), r.body.side.end());
                t.head.push_back(r.head);
                std::cout << rule_to_string(np.prog.sig, t) << "\n";
            }
            return 0;
        }
        if (*cLin) {
            Program p = parse_program(slurp(file));
            NormalizedProgram np = preprocess(p);
            Saturation sat(np.prog, np.stats);
            FactClosure fc = fact_saturate(np.prog, sat);
            Linearization lin = linearize(np.prog, sat, fc.facts);
            std::cout << "# " << lin.types.size() << " types, " << lin.rules.size()
                      << " linear rules\n";
            for (size_t i = 0; i < lin.types.size(); ++i)
                std::cout << "type " << lin.sig.at(lin.typeRel[i]).name << " = "
                          << guarded_set_to_string(np.prog.sig, lin.types[i]) << "\n";
            for (const TGD& r : lin.rules) std::cout << rule_to_string(lin.sig, r) << "\n";
            return 0;
        }
        if (*cOracle) {
            Program p = parse_program(slurp(file));
            for (size_t i = 0; i < p.queries.size(); ++i) {
                OracleResult r = bounded_entailment_oracle(p, p.queries[i], budget);
                std::cout << "query " << i << ": "
                          << (r.entailed ? "ENTAILED"
                                         : r.run.budgetExhausted ? "UNKNOWN" : "NOT_ENTAILED")
                          << "\n";
            }
            return 0;
        }
        if (*cFuzz) {
            std::mt19937_64 rng(seed);
            size_t failures = 0, unresolved = 0;
            for (uint64_t i = 0; i < cases; ++i) {
                Program p = fuzz_program(rng);
                DifferentialOutcome o = differential_case(p, budget);
                if (o.failed) {
                    ++failures;
                    std::cout << "case " << i << " FAILED: " << o.reason << "\n"
                              << render_program(p);
                }
                if (o.unresolved) ++unresolved;
            }
            std::cout << cases << " cases, " << failures << " failures, " << unresolved
                      << " unresolved\n";
            return failures == 0 ? 0 : 1;
        }
        if (*cBench) {
            nlohmann::json rows = nlohmann::json::array();
            if (suite == "fact-closure-scaling") {
                for (size_t n : {10, 100, 1000, 10000}) {
                    Program p = scaling_program(n);
                    NormalizedProgram np = preprocess(p);
                    Saturation sat(np.prog, np.stats);
                    auto t0 = std::chrono::steady_clock::now();
                    FactClosure fc = fact_saturate(np.prog, sat);
                    double ms = std::chrono::duration<double, std::milli>(
                                    std::chrono::steady_clock::now() - t0)
                                    .count();
                    rows.push_back({{"facts", n}, {"ms", ms}, {"closure", fc.facts.size()}});
                    std::cout << n << " facts: " << ms << " ms, closure " << fc.facts.size()
                              << "\n";
                }
            } else if (suite == "saturation-scaling") {
                for (int nSide : {0, 1, 2}) {
                    std::ostringstream prog;
                    prog << "rel R/3\n";
                    for (int i = 0; i < nSide; ++i) prog << "rel S" << i << "/1 side\n";
                    prog << "tgd R(x,y,z) -> R(y,z,x)\n";
                    if (nSide > 0) prog << "tgd R(x,y,z), S0(x) -> R(z,y,x)\n";
                    Program p = parse_program(prog.str());
                    NormalizedProgram np = preprocess(p);
                    Saturation sat(np.prog, np.stats);
                    auto t0 = std::chrono::steady_clock::now();
                    sat.materialize_all();
                    double ms = std::chrono::duration<double, std::milli>(
                                    std::chrono::steady_clock::now() - t0)
                                    .count();
                    unsigned long long bound = suitable_count_bound(np.stats);
                    if (sat.rule_count() > bound) {
                        std::cerr << "closure exceeds the size bound\n";
                        return 1;
                    }
                    rows.push_back(
                        {{"side", nSide}, {"ms", ms}, {"rules", sat.rule_count()}, {"bound", bound}});
                    std::cout << nSide << " side rels: " << ms << " ms, " << sat.rule_count()
                              << " rules (bound " << bound << ")\n";
                }
            } else if (suite == "end-to-end") {
                for (size_t n : {10, 100, 1000}) {
                    Program p = scaling_program(n);
                    p.queries.push_back({{{p.sig.find("U"), {make_var("q")}}}});
                    auto t0 = std::chrono::steady_clock::now();
                    PipelineResult res = run_pipeline(p, {});
                    double ms = std::chrono::duration<double, std::milli>(
                                    std::chrono::steady_clock::now() - t0)
                                    .count();
                    rows.push_back({{"facts", n}, {"ms", ms}, {"answer", res.answers[0].yes}});
                    std::cout << n << " facts: " << ms << " ms\n";
                }
            } else {
                std::cerr << "unknown suite: " << suite << "\n";
                return 1;
            }
            if (!jsonPath.empty()) write_json(jsonPath, rows);
            return 0;
        }
    } catch (const Diag& d) {
        std::cerr << "error: " << d.what() << "\n";
        return 2;
    }
    return 1;
}
