// Core term/atom/rule representation for the guarded-TGD pipeline.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace owqa {

// ---------------------------------------------------------------------------
// Diagnostics

struct Diag : std::runtime_error {
    std::string code;   // stable machine-readable tag, e.g. "ParseError"
    int line = 0;       // 1-based, 0 when not tied to input text
    Diag(std::string c, const std::string& msg, int ln = 0)
        : std::runtime_error(msg), code(std::move(c)), line(ln) {}
};

// ---------------------------------------------------------------------------
// Terms. Variables and constants are interned process-wide; nulls are drawn
// from a global counter so every chase run's fresh values are globally unique.

enum class TermKind : uint8_t { Var = 0, Const = 1, Null = 2 };

struct Term {
    TermKind kind = TermKind::Var;
    int32_t id = 0;

    bool operator==(const Term& o) const { return kind == o.kind && id == o.id; }
    bool operator!=(const Term& o) const { return !(*this == o); }
    bool operator<(const Term& o) const {
        if (kind != o.kind) return kind < o.kind;
        return id < o.id;
    }
    bool is_var() const { return kind == TermKind::Var; }
    bool is_const() const { return kind == TermKind::Const; }
    bool is_null() const { return kind == TermKind::Null; }
};

Term make_var(const std::string& name);
Term make_const(const std::string& name);
Term fresh_var(const std::string& prefix);  // new variable, name prefix + counter
Term fresh_null();                          // globally fresh labelled null
const std::string& var_name(Term t);
const std::string& const_name(Term t);
std::string term_to_string(Term t);

struct TermHash {
    size_t operator()(const Term& t) const {
        return std::hash<uint64_t>()((uint64_t(uint8_t(t.kind)) << 32) ^ uint32_t(t.id));
    }
};

// ---------------------------------------------------------------------------
// Signature

struct RelationSymbol {
    std::string name;
    int arity = 0;
    bool side = false;          // member of the side signature
    std::string origin;         // "", or how preprocessing introduced it
};

class Signature {
public:
    int add(const std::string& name, int arity, bool side, const std::string& origin = "");
    int find(const std::string& name) const;  // -1 when absent
    const RelationSymbol& at(int id) const { return rels_.at(size_t(id)); }
    int size() const { return int(rels_.size()); }
    bool is_side(int id) const { return at(id).side; }
    const std::vector<RelationSymbol>& all() const { return rels_; }

private:
    std::vector<RelationSymbol> rels_;
    std::map<std::string, int> byName_;
};

// ---------------------------------------------------------------------------
// Atoms

struct Atom {
    int rel = -1;
    std::vector<Term> args;

    bool operator==(const Atom& o) const { return rel == o.rel && args == o.args; }
    bool operator!=(const Atom& o) const { return !(*this == o); }
    bool operator<(const Atom& o) const {
        if (rel != o.rel) return rel < o.rel;
        return args < o.args;
    }
    bool is_ground() const {
        for (const Term& t : args)
            if (t.is_var()) return false;
        return true;
    }
};

struct AtomHash {
    size_t operator()(const Atom& a) const {
        size_t h = std::hash<int>()(a.rel);
        for (const Term& t : a.args) h = h * 1000003u + TermHash()(t);
        return h;
    }
};

std::string atom_to_string(const Signature& sig, const Atom& a);

// ---------------------------------------------------------------------------
// Substitutions (variable id -> term)

using Subst = std::map<int32_t, Term>;

Term subst(const Subst& s, Term t);
Atom subst(const Subst& s, const Atom& a);
std::vector<Atom> subst(const Subst& s, const std::vector<Atom>& atoms);

// ---------------------------------------------------------------------------
// Rules and queries

struct TGD {
    std::vector<Atom> body;
    std::vector<Atom> head;  // single atom after preprocessing
};

struct Query {
    std::vector<Atom> atoms;  // Boolean conjunctive query
};

std::set<Term> vars_of(const std::vector<Atom>& atoms);
std::set<Term> vars_of(const Atom& a);

struct RuleInfo {
    bool guarded = false;      // some body atom contains every body variable
    bool obeysSide = false;    // a guard exists with every other body atom side
    bool isFull = false;       // no existential head variables
    int guardIndex = -1;       // chosen guard: the unique principal atom, else
                               // the lexicographically first side guard
    int principalCount = 0;    // principal atoms in the body
    int width = 0;             // exported (frontier) variables
    int breadth = 0;           // distinct guard variables touched by non-guard body atoms
    std::set<Term> exported;
    std::set<Term> existential;
};

RuleInfo analyze_rule(const TGD& rule, const Signature& sig);

std::string rule_to_string(const Signature& sig, const TGD& r);

// ---------------------------------------------------------------------------
// Program

struct Program {
    Signature sig;
    std::vector<TGD> rules;
    std::vector<Atom> facts;
    std::vector<Query> queries;
};

// Signature/rule-set statistics used by the bounds and the saturation.
struct SignatureStats {
    int relationCount = 0;
    int sideCount = 0;      // n'
    int maxArity = 0;       // a
    int sideMaxArity = 0;   // a'
    int width = 0;          // w: max rule width
    int maxBreadth = 0;
    int wPrime = 0;         // max(w, a'): effective width for suitability/types
    int ruleCount = 0;
};

SignatureStats compute_stats(const Signature& sig, const std::vector<TGD>& rules);

}  // namespace owqa
