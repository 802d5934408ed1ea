#include "owqa/io.hpp"

#include <cctype>
#include <sstream>

namespace owqa {

namespace {

struct Cursor {
    const std::string& s;
    size_t i = 0;
    int line;

    void skip_ws() {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    }
    bool done() {
        skip_ws();
        return i >= s.size();
    }
    bool eat(char c) {
        skip_ws();
        if (i < s.size() && s[i] == c) { ++i; return true; }
        return false;
    }
    void expect(char c) {
        if (!eat(c))
            throw Diag("ParseError", std::string("expected '") + c + "'", line);
    }
    std::string ident() {
        skip_ws();
        size_t start = i;
        while (i < s.size() && (std::isalnum(uint8_t(s[i])) || s[i] == '_')) ++i;
        if (i == start) throw Diag("ParseError", "expected identifier", line);
        return s.substr(start, i - start);
    }
};

// groundMode: bare identifiers are constants (facts); otherwise variables.
Atom parse_atom(Cursor& c, const Program& p, bool groundMode) {
    std::string name = c.ident();
    int rel = p.sig.find(name);
    if (rel < 0) throw Diag("UnknownRelation", "relation '" + name + "' not declared", c.line);
    Atom a;
    a.rel = rel;
    c.expect('(');
    if (!c.eat(')')) {
        do {
            c.skip_ws();
            if (c.i < c.s.size() && c.s[c.i] == '\'') {
                ++c.i;
                a.args.push_back(make_const(c.ident()));
            } else {
                std::string id = c.ident();
                a.args.push_back(groundMode ? make_const(id) : make_var(id));
            }
        } while (c.eat(','));
        c.expect(')');
    }
    if (int(a.args.size()) != p.sig.at(rel).arity)
        throw Diag("ArityMismatch",
                   "relation '" + name + "' has arity " + std::to_string(p.sig.at(rel).arity) +
                       ", got " + std::to_string(a.args.size()),
                   c.line);
    return a;
}

std::vector<Atom> parse_atom_list(Cursor& c, const Program& p, bool groundMode) {
    std::vector<Atom> out;
    out.push_back(parse_atom(c, p, groundMode));
    while (c.eat(',')) out.push_back(parse_atom(c, p, groundMode));
    return out;
}

}  // namespace

Program parse_program(const std::string& text) {
    Program p;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        size_t hash = raw.find('#');
        std::string lineStr = hash == std::string::npos ? raw : raw.substr(0, hash);
        Cursor c{lineStr, 0, lineno};
        if (c.done()) continue;
        std::string kw = c.ident();
        if (kw == "rel") {
            std::string name = c.ident();
            c.expect('/');
            std::string arityStr = c.ident();
            int arity = 0;
            for (char ch : arityStr) {
                if (!std::isdigit(uint8_t(ch)))
                    throw Diag("ParseError", "arity must be a number", lineno);
                arity = arity * 10 + (ch - '0');
            }
            bool side = false;
            if (!c.done()) {
                std::string tag = c.ident();
                if (tag != "side") throw Diag("ParseError", "expected 'side'", lineno);
                side = true;
            }
            try {
                p.sig.add(name, arity, side);
            } catch (Diag& d) {
                throw Diag(d.code, d.what(), lineno);
            }
        } else if (kw == "tgd") {
            TGD r;
            r.body = parse_atom_list(c, p, false);
            c.expect('-');
            c.expect('>');
            r.head = parse_atom_list(c, p, false);
            if (!c.done()) throw Diag("ParseError", "trailing input after rule", lineno);
            p.rules.push_back(std::move(r));
        } else if (kw == "fact") {
            Atom a = parse_atom(c, p, true);
            if (!c.done()) throw Diag("ParseError", "trailing input after fact", lineno);
            p.facts.push_back(std::move(a));
        } else if (kw == "query") {
            Query q;
            q.atoms = parse_atom_list(c, p, false);
            if (!c.done()) throw Diag("ParseError", "trailing input after query", lineno);
            p.queries.push_back(std::move(q));
        } else {
            throw Diag("ParseError", "unknown directive '" + kw + "'", lineno);
        }
    }
    return p;
}

namespace {

std::string term_dsl(Term t, bool groundMode) {
    if (t.is_const()) return groundMode ? const_name(t) : "'" + const_name(t);
    return term_to_string(t);
}

std::string atom_dsl(const Signature& sig, const Atom& a, bool groundMode) {
    std::string out = sig.at(a.rel).name + "(";
    for (size_t i = 0; i < a.args.size(); ++i) {
        if (i) out += ",";
        out += term_dsl(a.args[i], groundMode);
    }
    return out + ")";
}

}  // namespace

std::string render_program(const Program& p) {
    std::ostringstream os;
    for (const RelationSymbol& r : p.sig.all()) {
        os << "rel " << r.name << "/" << r.arity;
        if (r.side) os << " side";
        os << "\n";
    }
    for (const TGD& r : p.rules) {
        os << "tgd ";
        for (size_t i = 0; i < r.body.size(); ++i)
            os << (i ? ", " : "") << atom_dsl(p.sig, r.body[i], false);
        os << " -> ";
        for (size_t i = 0; i < r.head.size(); ++i)
            os << (i ? ", " : "") << atom_dsl(p.sig, r.head[i], false);
        os << "\n";
    }
    for (const Atom& f : p.facts) os << "fact " << atom_dsl(p.sig, f, true) << "\n";
    for (const Query& q : p.queries) {
        os << "query ";
        for (size_t i = 0; i < q.atoms.size(); ++i)
            os << (i ? ", " : "") << atom_dsl(p.sig, q.atoms[i], false);
        os << "\n";
    }
    return os.str();
}

nlohmann::json make_report(const std::vector<bool>& answers, const nlohmann::json& statistics,
                           const nlohmann::json& timings, const nlohmann::json* certificate) {
    nlohmann::json rep;
    rep["answers"] = answers;
    rep["statistics"] = statistics;
    rep["timings_ms"] = timings;
    if (certificate) rep["certificate"] = *certificate;
    return rep;
}

}  // namespace owqa
