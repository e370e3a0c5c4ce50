#pragma once

// Text format for structural causal models and counterfactual queries.
//
// Grammar (EBNF, '#' starts a comment to end of line, whitespace free-form):
//
//   file     = { scm | query } ;
//   scm      = "scm" NAME "{" { stmt } "}" ;
//   stmt     = "exo" NAME "~" dist
//            | "var" NAME "=" expr
//            | "mixture" NAME "=" "tuple" "(" NAME { "," NAME } ")"
//            | "label" NAME "uses" "{" [ NAME { "," NAME } ] "}" "="
//              ( "bayes" "(" NAME ")" | expr ) ;
//   dist     = "bernoulli" "(" prob ")"
//            | "categorical" "(" prob { "," prob } ")" ;
//   prob     = INT [ "/" INT ] | DECIMAL ;
//   query    = "query" NAME "on" NAME "="
//              "P" "(" NAME "=" INT "|" "do" "(" assigns ")"
//              [ ";" "given" assigns ] ")" ;
//   assigns  = NAME "=" INT { "," NAME "=" INT } ;
//
//   expr     = orx ;                       (precedence, loosest first)
//   orx      = xorx { "|" xorx } ;
//   xorx     = andx { "^" andx } ;
//   andx     = cmp { "&" cmp } ;
//   cmp      = sum { ( "<" | ">" | "=" ) sum } ;
//   sum      = prod { ( "+" | "-" ) prod } ;
//   prod     = unary { "*" unary } ;
//   unary    = "!" unary | primary ;
//   primary  = INT | "true" | "false" | NAME
//            | "indicator" "(" expr ")" | "(" expr ")" ;
//
// Logical operators treat any nonzero value as true and yield 0/1, as do the
// comparisons and indicator(); +, -, * are plain integer arithmetic. There is
// no division, so every expression is total.
//
// Probabilities are exact rationals: "0.4", "1/18" and "1" all parse without
// rounding. Each scm block declares exactly one mixture and one label. A label
// either computes an expression over its declared feature set, computes an
// expression over the mixture components ("uses {X}"), or is a bayes(TARGET)
// classifier: argmax_y P(TARGET = y | features), ties toward the smaller y.
//
// Parsing validates everything: unknown references, duplicate declarations,
// cyclic var definitions (the cycle is named), probabilities outside [0,1] or
// not summing to 1, and query resolution against the scm blocks of the same
// file.

#include "rational.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace ascm {

class ParseError : public std::runtime_error {
  public:
    ParseError(int line, int col, const std::string& msg)
        : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
          line_(line), col_(col) {}
    int line() const { return line_; }
    int col() const { return col_; }

  private:
    int line_, col_;
};

// ---------------------------------------------------------------- expressions

enum class ExprKind {
    Constant, VarRef,
    Not, Indicator,
    And, Or, Xor,
    Add, Sub, Mul,
    Less, Greater, Equal,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    ExprKind kind;
    long long value = 0;  // Constant
    std::string name;     // VarRef
    ExprPtr a, b;         // operands; unary ops use a only
};

inline ExprPtr expr_const(long long v) {
    return std::make_shared<Expr>(Expr{ExprKind::Constant, v, {}, nullptr, nullptr});
}
inline ExprPtr expr_var(std::string name) {
    return std::make_shared<Expr>(Expr{ExprKind::VarRef, 0, std::move(name), nullptr, nullptr});
}
inline ExprPtr expr_unary(ExprKind k, ExprPtr a) {
    return std::make_shared<Expr>(Expr{k, 0, {}, std::move(a), nullptr});
}
inline ExprPtr expr_binary(ExprKind k, ExprPtr a, ExprPtr b) {
    return std::make_shared<Expr>(Expr{k, 0, {}, std::move(a), std::move(b)});
}

inline bool expr_equal(const ExprPtr& x, const ExprPtr& y) {
    if (!x || !y) return !x && !y;
    if (x->kind != y->kind) return false;
    switch (x->kind) {
        case ExprKind::Constant: return x->value == y->value;
        case ExprKind::VarRef: return x->name == y->name;
        default: return expr_equal(x->a, y->a) && expr_equal(x->b, y->b);
    }
}

inline void collect_var_refs(const ExprPtr& e, std::set<std::string>& out) {
    if (!e) return;
    if (e->kind == ExprKind::VarRef) out.insert(e->name);
    collect_var_refs(e->a, out);
    collect_var_refs(e->b, out);
}

// -------------------------------------------------------------- declarations

struct DistSpec {
    enum class Kind { Bernoulli, Categorical };
    Kind kind = Kind::Bernoulli;
    std::vector<Rat> probs;  // probs[i] = P(value = i); domain is 0..k-1
    int domain_size() const { return static_cast<int>(probs.size()); }
    bool operator==(const DistSpec&) const = default;
};

inline DistSpec bernoulli(const Rat& p) {
    return DistSpec{DistSpec::Kind::Bernoulli, {Rat(1) - p, p}};
}

struct ExoDecl {
    std::string name;
    DistSpec dist;
    bool operator==(const ExoDecl&) const = default;
};

struct VarDecl {
    std::string name;
    ExprPtr fn;
};
inline bool operator==(const VarDecl& x, const VarDecl& y) {
    return x.name == y.name && expr_equal(x.fn, y.fn);
}

struct MixtureDecl {
    std::string name;
    std::vector<std::string> components;
    bool operator==(const MixtureDecl&) const = default;
};

struct LabelDecl {
    std::string name;
    bool on_mixture = false;         // "uses {X}" where X is the mixture
    std::vector<std::string> uses;   // declared feature list ({mixture} if on_mixture)
    bool is_bayes = false;
    std::string bayes_target;
    ExprPtr fn;                      // null when is_bayes
};
inline bool operator==(const LabelDecl& x, const LabelDecl& y) {
    return x.name == y.name && x.on_mixture == y.on_mixture && x.uses == y.uses &&
           x.is_bayes == y.is_bayes && x.bayes_target == y.bayes_target && expr_equal(x.fn, y.fn);
}

struct ScmBlock {
    std::string name;
    std::vector<ExoDecl> exos;
    std::vector<VarDecl> vars;
    MixtureDecl mixture;
    LabelDecl label;
};
inline bool operator==(const ScmBlock& x, const ScmBlock& y) {
    return x.name == y.name && x.exos == y.exos && x.vars == y.vars &&
           x.mixture == y.mixture && x.label == y.label;
}

struct QueryBlock {
    std::string name;
    std::string scm_name;
    std::string label_name;
    long long outcome = 0;
    std::vector<std::pair<std::string, long long>> intervention;
    std::vector<std::pair<std::string, long long>> evidence;
    bool operator==(const QueryBlock&) const = default;
};

struct SourceFile {
    std::vector<ScmBlock> scms;
    std::vector<QueryBlock> queries;
};
inline bool operator==(const SourceFile& x, const SourceFile& y) {
    return x.scms == y.scms && x.queries == y.queries;
}

// A valid evaluation order for the var declarations of a block: declaration
// order refined to respect references. Throws ParseError naming a cycle.
inline std::vector<std::string> topological_var_order(const ScmBlock& block) {
    std::set<std::string> var_names;
    for (const auto& v : block.vars) var_names.insert(v.name);
    std::map<std::string, std::set<std::string>> deps;
    for (const auto& v : block.vars) {
        std::set<std::string> refs;
        collect_var_refs(v.fn, refs);
        for (const auto& r : refs)
            if (var_names.count(r)) deps[v.name].insert(r);
    }
    std::vector<std::string> order;
    std::set<std::string> done;
    while (order.size() < block.vars.size()) {
        bool progressed = false;
        for (const auto& v : block.vars) {
            if (done.count(v.name)) continue;
            bool ready = true;
            for (const auto& d : deps[v.name])
                if (!done.count(d)) { ready = false; break; }
            if (ready) {
                order.push_back(v.name);
                done.insert(v.name);
                progressed = true;
            }
        }
        if (!progressed) {
            // Walk unprocessed dependencies until a name repeats; that loop is
            // the reported cycle.
            std::string cur;
            for (const auto& v : block.vars)
                if (!done.count(v.name)) { cur = v.name; break; }
            std::vector<std::string> path;
            std::set<std::string> on_path;
            while (!on_path.count(cur)) {
                path.push_back(cur);
                on_path.insert(cur);
                for (const auto& d : deps[cur])
                    if (!done.count(d)) { cur = d; break; }
            }
            std::string msg = "cyclic definition: ";
            auto start = std::find(path.begin(), path.end(), cur);
            for (auto it = start; it != path.end(); ++it) msg += *it + " -> ";
            msg += cur;
            throw ParseError(0, 0, msg);
        }
    }
    return order;
}

// -------------------------------------------------------------------- lexing

namespace dsl_detail {

enum class Tok {
    Ident, Keyword, Int, Decimal,
    LBrace, RBrace, LParen, RParen,
    Comma, Semicolon, Assign, Tilde,
    Bar, Amp, Caret, Bang, Plus, Minus, Star, Less, Greater, Slash,
    End,
};

struct Token {
    Tok kind;
    std::string text;
    int line, col;
};

inline const std::set<std::string>& keywords() {
    static const std::set<std::string> kw = {
        "scm", "exo", "var", "mixture", "label", "uses", "query", "on",
        "tuple", "bernoulli", "categorical", "bayes", "indicator",
        "do", "given", "true", "false",
    };
    return kw;
}

inline std::vector<Token> lex(const std::string& text) {
    std::vector<Token> out;
    int line = 1, col = 1;
    size_t i = 0;
    auto push = [&](Tok k, std::string t, int l, int c) {
        out.push_back(Token{k, std::move(t), l, c});
    };
    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') { ++i; ++line; col = 1; continue; }
        if (c == ' ' || c == '\t' || c == '\r') { ++i; ++col; continue; }
        if (c == '#') {
            while (i < text.size() && text[i] != '\n') ++i;
            continue;
        }
        int l = line, co = col;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
                ++j;
            std::string word = text.substr(i, j - i);
            push(keywords().count(word) ? Tok::Keyword : Tok::Ident, word, l, co);
            col += static_cast<int>(j - i);
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            bool decimal = false;
            if (j + 1 < text.size() && text[j] == '.' &&
                std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
                decimal = true;
                ++j;
                while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            }
            push(decimal ? Tok::Decimal : Tok::Int, text.substr(i, j - i), l, co);
            col += static_cast<int>(j - i);
            i = j;
            continue;
        }
        Tok k;
        switch (c) {
            case '{': k = Tok::LBrace; break;
            case '}': k = Tok::RBrace; break;
            case '(': k = Tok::LParen; break;
            case ')': k = Tok::RParen; break;
            case ',': k = Tok::Comma; break;
            case ';': k = Tok::Semicolon; break;
            case '=': k = Tok::Assign; break;
            case '~': k = Tok::Tilde; break;
            case '|': k = Tok::Bar; break;
            case '&': k = Tok::Amp; break;
            case '^': k = Tok::Caret; break;
            case '!': k = Tok::Bang; break;
            case '+': k = Tok::Plus; break;
            case '-': k = Tok::Minus; break;
            case '*': k = Tok::Star; break;
            case '<': k = Tok::Less; break;
            case '>': k = Tok::Greater; break;
            case '/': k = Tok::Slash; break;
            default:
                throw ParseError(l, co, std::string("unexpected character '") + c + "'");
        }
        push(k, std::string(1, c), l, co);
        ++i;
        ++col;
    }
    out.push_back(Token{Tok::End, "", line, col});
    return out;
}

// ------------------------------------------------------------------- parsing

class Parser {
  public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    SourceFile parse_file() {
        SourceFile f;
        while (peek().kind != Tok::End) {
            if (at_keyword("scm")) {
                f.scms.push_back(parse_scm());
            } else if (at_keyword("query")) {
                f.queries.push_back(parse_query());
            } else {
                fail("expected 'scm' or 'query'");
            }
        }
        return f;
    }

  private:
    std::vector<Token> toks_;
    size_t pos_ = 0;

    const Token& peek(size_t ahead = 0) const {
        size_t p = pos_ + ahead;
        return p < toks_.size() ? toks_[p] : toks_.back();
    }
    const Token& advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    [[noreturn]] void fail(const std::string& msg) const {
        const Token& t = peek();
        std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
        throw ParseError(t.line, t.col, msg + ", got " + got);
    }
    bool at(Tok k) const { return peek().kind == k; }
    bool at_keyword(const std::string& w) const {
        return peek().kind == Tok::Keyword && peek().text == w;
    }
    const Token& expect(Tok k, const std::string& what) {
        if (!at(k)) fail("expected " + what);
        return advance();
    }
    void expect_keyword(const std::string& w) {
        if (!at_keyword(w)) fail("expected '" + w + "'");
        advance();
    }
    std::string expect_name() {
        if (peek().kind == Tok::Keyword) fail("reserved word used as a name");
        return expect(Tok::Ident, "a name").text;
    }
    long long expect_int() {
        const Token& t = expect(Tok::Int, "an integer");
        if (t.text.size() > 18) throw ParseError(t.line, t.col, "integer literal too large");
        return std::stoll(t.text);
    }

    Rat parse_prob() {
        const Token& start = peek();
        auto to_rat = [&](const std::string& text) {
            Rat p;
            try {
                p = parse_rational(text);
            } catch (const std::invalid_argument& e) {
                throw ParseError(start.line, start.col, e.what());
            }
            if (p > 1)
                throw ParseError(start.line, start.col,
                                 "probability out of range: " + fraction_string(p));
            return p;
        };
        if (at(Tok::Decimal)) return to_rat(advance().text);
        const Token& num = expect(Tok::Int, "a probability literal");
        if (at(Tok::Slash)) {
            advance();
            const Token& den = expect(Tok::Int, "a denominator");
            return to_rat(num.text + "/" + den.text);
        }
        return to_rat(num.text);
    }

    DistSpec parse_dist() {
        if (at_keyword("bernoulli")) {
            advance();
            expect(Tok::LParen, "'('");
            Rat p = parse_prob();
            expect(Tok::RParen, "')'");
            return bernoulli(p);
        }
        if (at_keyword("categorical")) {
            advance();
            expect(Tok::LParen, "'('");
            DistSpec d{DistSpec::Kind::Categorical, {}};
            d.probs.push_back(parse_prob());
            while (at(Tok::Comma)) {
                advance();
                d.probs.push_back(parse_prob());
            }
            expect(Tok::RParen, "')'");
            return d;
        }
        fail("expected 'bernoulli' or 'categorical'");
    }

    ScmBlock parse_scm() {
        expect_keyword("scm");
        ScmBlock b;
        b.name = expect_name();
        expect(Tok::LBrace, "'{'");
        bool have_mixture = false, have_label = false;
        while (!at(Tok::RBrace)) {
            if (at_keyword("exo")) {
                advance();
                ExoDecl e;
                e.name = expect_name();
                expect(Tok::Tilde, "'~'");
                e.dist = parse_dist();
                b.exos.push_back(std::move(e));
            } else if (at_keyword("var")) {
                advance();
                VarDecl v;
                v.name = expect_name();
                expect(Tok::Assign, "'='");
                v.fn = parse_expr();
                b.vars.push_back(std::move(v));
            } else if (at_keyword("mixture")) {
                if (have_mixture) fail("duplicate mixture declaration");
                advance();
                b.mixture.name = expect_name();
                expect(Tok::Assign, "'='");
                expect_keyword("tuple");
                expect(Tok::LParen, "'('");
                b.mixture.components.push_back(expect_name());
                while (at(Tok::Comma)) {
                    advance();
                    b.mixture.components.push_back(expect_name());
                }
                expect(Tok::RParen, "')'");
                have_mixture = true;
            } else if (at_keyword("label")) {
                if (have_label) fail("duplicate label declaration");
                advance();
                b.label.name = expect_name();
                expect_keyword("uses");
                expect(Tok::LBrace, "'{'");
                if (!at(Tok::RBrace)) {
                    b.label.uses.push_back(expect_name());
                    while (at(Tok::Comma)) {
                        advance();
                        b.label.uses.push_back(expect_name());
                    }
                }
                expect(Tok::RBrace, "'}'");
                expect(Tok::Assign, "'='");
                if (at_keyword("bayes")) {
                    advance();
                    expect(Tok::LParen, "'('");
                    b.label.is_bayes = true;
                    b.label.bayes_target = expect_name();
                    expect(Tok::RParen, "')'");
                } else {
                    b.label.fn = parse_expr();
                }
                have_label = true;
            } else {
                fail("expected 'exo', 'var', 'mixture', 'label' or '}'");
            }
        }
        advance();  // '}'
        if (!have_mixture) fail_block(b.name, "missing mixture declaration");
        if (!have_label) fail_block(b.name, "missing label declaration");
        return b;
    }

    [[noreturn]] void fail_block(const std::string& name, const std::string& msg) const {
        const Token& t = peek();
        throw ParseError(t.line, t.col, "scm '" + name + "': " + msg);
    }

    std::vector<std::pair<std::string, long long>> parse_assigns() {
        std::vector<std::pair<std::string, long long>> out;
        do {
            std::string n = expect_name();
            expect(Tok::Assign, "'='");
            out.emplace_back(std::move(n), expect_int());
        } while (at(Tok::Comma) && (advance(), true));
        return out;
    }

    QueryBlock parse_query() {
        expect_keyword("query");
        QueryBlock q;
        q.name = expect_name();
        expect_keyword("on");
        q.scm_name = expect_name();
        expect(Tok::Assign, "'='");
        if (!(peek().kind == Tok::Ident && peek().text == "P")) fail("expected 'P'");
        advance();
        expect(Tok::LParen, "'('");
        q.label_name = expect_name();
        expect(Tok::Assign, "'='");
        q.outcome = expect_int();
        expect(Tok::Bar, "'|'");
        expect_keyword("do");
        expect(Tok::LParen, "'('");
        q.intervention = parse_assigns();
        expect(Tok::RParen, "')'");
        if (at(Tok::Semicolon)) {
            advance();
            expect_keyword("given");
            q.evidence = parse_assigns();
        }
        expect(Tok::RParen, "')'");
        return q;
    }

    // Precedence climbing, loosest level first.
    ExprPtr parse_expr() { return parse_or(); }
    ExprPtr parse_or() {
        ExprPtr e = parse_xor();
        while (at(Tok::Bar)) { advance(); e = expr_binary(ExprKind::Or, e, parse_xor()); }
        return e;
    }
    ExprPtr parse_xor() {
        ExprPtr e = parse_and();
        while (at(Tok::Caret)) { advance(); e = expr_binary(ExprKind::Xor, e, parse_and()); }
        return e;
    }
    ExprPtr parse_and() {
        ExprPtr e = parse_cmp();
        while (at(Tok::Amp)) { advance(); e = expr_binary(ExprKind::And, e, parse_cmp()); }
        return e;
    }
    ExprPtr parse_cmp() {
        ExprPtr e = parse_sum();
        while (at(Tok::Less) || at(Tok::Greater) || at(Tok::Assign)) {
            ExprKind k = at(Tok::Less)      ? ExprKind::Less
                         : at(Tok::Greater) ? ExprKind::Greater
                                            : ExprKind::Equal;
            advance();
            e = expr_binary(k, e, parse_sum());
        }
        return e;
    }
    ExprPtr parse_sum() {
        ExprPtr e = parse_prod();
        while (at(Tok::Plus) || at(Tok::Minus)) {
            ExprKind k = at(Tok::Plus) ? ExprKind::Add : ExprKind::Sub;
            advance();
            e = expr_binary(k, e, parse_prod());
        }
        return e;
    }
    ExprPtr parse_prod() {
        ExprPtr e = parse_unary();
        while (at(Tok::Star)) { advance(); e = expr_binary(ExprKind::Mul, e, parse_unary()); }
        return e;
    }
    ExprPtr parse_unary() {
        if (at(Tok::Bang)) {
            advance();
            return expr_unary(ExprKind::Not, parse_unary());
        }
        return parse_primary();
    }
    ExprPtr parse_primary() {
        if (at(Tok::Int)) return expr_const(expect_int());
        if (at_keyword("true")) { advance(); return expr_const(1); }
        if (at_keyword("false")) { advance(); return expr_const(0); }
        if (at_keyword("indicator")) {
            advance();
            expect(Tok::LParen, "'('");
            ExprPtr e = parse_expr();
            expect(Tok::RParen, "')'");
            return expr_unary(ExprKind::Indicator, e);
        }
        if (at(Tok::Ident)) return expr_var(advance().text);
        if (at(Tok::LParen)) {
            advance();
            ExprPtr e = parse_expr();
            expect(Tok::RParen, "')'");
            return e;
        }
        fail("expected an expression");
    }
};

}  // namespace dsl_detail

// ---------------------------------------------------------------- validation

namespace dsl_detail {

inline void check_prob_range(const Rat& p) {
    if (p < 0 || p > 1)
        throw ParseError(0, 0, "probability out of range: " + fraction_string(p));
}

inline void validate_block(const ScmBlock& b) {
    auto err = [&](const std::string& msg) {
        throw ParseError(0, 0, "scm '" + b.name + "': " + msg);
    };

    std::set<std::string> declared;
    auto declare = [&](const std::string& n) {
        if (!declared.insert(n).second) err("duplicate declaration of '" + n + "'");
    };
    std::set<std::string> exo_names, var_names;
    for (const auto& e : b.exos) { declare(e.name); exo_names.insert(e.name); }
    for (const auto& v : b.vars) { declare(v.name); var_names.insert(v.name); }
    declare(b.mixture.name);
    declare(b.label.name);

    for (const auto& e : b.exos) {
        if (e.dist.probs.empty()) err("empty distribution for '" + e.name + "'");
        Rat sum = 0;
        for (const auto& p : e.dist.probs) { check_prob_range(p); sum += p; }
        if (e.dist.kind == DistSpec::Kind::Categorical && sum != 1)
            err("categorical probabilities for '" + e.name + "' sum to " +
                fraction_string(sum) + ", expected 1");
    }

    for (const auto& v : b.vars) {
        std::set<std::string> refs;
        collect_var_refs(v.fn, refs);
        for (const auto& r : refs)
            if (!exo_names.count(r) && !var_names.count(r))
                err("undeclared variable '" + r + "' in definition of '" + v.name + "'");
    }

    if (b.mixture.components.empty()) err("mixture has no components");
    std::set<std::string> comp_set;
    for (const auto& c : b.mixture.components) {
        if (!exo_names.count(c) && !var_names.count(c))
            err("mixture component '" + c + "' is not declared");
        if (!comp_set.insert(c).second) err("duplicate mixture component '" + c + "'");
    }

    const LabelDecl& lab = b.label;
    bool on_mixture = lab.uses.size() == 1 && lab.uses[0] == b.mixture.name;
    if (!on_mixture) {
        std::set<std::string> uses_set;
        for (const auto& u : lab.uses) {
            if (u == b.mixture.name)
                err("label may read the mixture only as its sole feature");
            if (!var_names.count(u))
                err("label feature '" + u + "' is not an endogenous variable");
            if (!uses_set.insert(u).second) err("duplicate label feature '" + u + "'");
        }
        if (lab.is_bayes) {
            if (!var_names.count(lab.bayes_target))
                err("bayes target '" + lab.bayes_target + "' is not an endogenous variable");
        } else {
            std::set<std::string> refs;
            collect_var_refs(lab.fn, refs);
            for (const auto& r : refs)
                if (!uses_set.count(r))
                    err("label expression references '" + r + "' outside its feature set");
        }
    } else {
        if (lab.is_bayes) err("bayes classifier cannot read the mixture");
        std::set<std::string> refs;
        collect_var_refs(lab.fn, refs);
        for (const auto& r : refs)
            if (!comp_set.count(r))
                err("label expression references '" + r + "', not a mixture component");
    }

    topological_var_order(b);  // throws on cycles
}

inline void validate_file(const SourceFile& f) {
    std::set<std::string> block_names;
    for (const auto& b : f.scms)
        if (!block_names.insert(b.name).second)
            throw ParseError(0, 0, "duplicate block name '" + b.name + "'");
    for (const auto& q : f.queries)
        if (!block_names.insert(q.name).second)
            throw ParseError(0, 0, "duplicate block name '" + q.name + "'");

    for (const auto& b : f.scms) validate_block(b);

    for (const auto& q : f.queries) {
        auto err = [&](const std::string& msg) {
            throw ParseError(0, 0, "query '" + q.name + "': " + msg);
        };
        const ScmBlock* scm = nullptr;
        for (const auto& b : f.scms)
            if (b.name == q.scm_name) { scm = &b; break; }
        if (!scm) err("unknown scm '" + q.scm_name + "'");
        if (q.label_name != scm->label.name)
            err("label '" + q.label_name + "' does not match scm label '" +
                scm->label.name + "'");
        std::set<std::string> var_names, observable;
        for (const auto& v : scm->vars) { var_names.insert(v.name); observable.insert(v.name); }
        for (const auto& c : scm->mixture.components) observable.insert(c);
        if (q.intervention.empty()) err("empty intervention");
        std::set<std::string> seen;
        for (const auto& [n, v] : q.intervention) {
            (void)v;
            if (!var_names.count(n)) err("intervention target '" + n + "' is not endogenous");
            if (!seen.insert(n).second) err("duplicate intervention target '" + n + "'");
        }
        seen.clear();
        for (const auto& [n, v] : q.evidence) {
            (void)v;
            if (!observable.count(n))
                err("evidence variable '" + n + "' is not endogenous or a mixture component");
            if (!seen.insert(n).second) err("duplicate evidence variable '" + n + "'");
        }
    }
}

}  // namespace dsl_detail

inline SourceFile parse_source(const std::string& text) {
    dsl_detail::Parser p(dsl_detail::lex(text));
    SourceFile f = p.parse_file();
    dsl_detail::validate_file(f);
    // Normalize the on_mixture flag from the uses list (the parser only
    // records names; whether they denote the mixture is a post-parse fact).
    for (auto& b : f.scms)
        b.label.on_mixture = b.label.uses.size() == 1 && b.label.uses[0] == b.mixture.name;
    return f;
}

// ------------------------------------------------------------------ rendering

namespace dsl_detail {

inline int expr_level(ExprKind k) {
    switch (k) {
        case ExprKind::Or: return 1;
        case ExprKind::Xor: return 2;
        case ExprKind::And: return 3;
        case ExprKind::Less:
        case ExprKind::Greater:
        case ExprKind::Equal: return 4;
        case ExprKind::Add:
        case ExprKind::Sub: return 5;
        case ExprKind::Mul: return 6;
        case ExprKind::Not: return 7;
        default: return 8;
    }
}

inline const char* op_text(ExprKind k) {
    switch (k) {
        case ExprKind::Or: return "|";
        case ExprKind::Xor: return "^";
        case ExprKind::And: return "&";
        case ExprKind::Less: return "<";
        case ExprKind::Greater: return ">";
        case ExprKind::Equal: return "=";
        case ExprKind::Add: return "+";
        case ExprKind::Sub: return "-";
        case ExprKind::Mul: return "*";
        default: return "?";
    }
}

inline std::string render_expr(const ExprPtr& e, int min_level) {
    int level = expr_level(e->kind);
    std::string body;
    switch (e->kind) {
        case ExprKind::Constant: body = std::to_string(e->value); break;
        case ExprKind::VarRef: body = e->name; break;
        case ExprKind::Indicator:
            body = "indicator(" + render_expr(e->a, 0) + ")";
            break;
        case ExprKind::Not:
            body = "!" + render_expr(e->a, 7);
            break;
        default:
            // Left-associative binaries: the right operand needs one level more.
            body = render_expr(e->a, level) + " " + op_text(e->kind) + " " +
                   render_expr(e->b, level + 1);
            break;
    }
    return level < min_level ? "(" + body + ")" : body;
}

inline std::string render_dist(const DistSpec& d) {
    if (d.kind == DistSpec::Kind::Bernoulli) return "bernoulli(" + fraction_string(d.probs[1]) + ")";
    std::string s = "categorical(";
    for (size_t i = 0; i < d.probs.size(); ++i)
        s += (i ? ", " : "") + fraction_string(d.probs[i]);
    return s + ")";
}

inline std::string render_assigns(const std::vector<std::pair<std::string, long long>>& as) {
    std::string s;
    for (size_t i = 0; i < as.size(); ++i)
        s += (i ? ", " : "") + as[i].first + " = " + std::to_string(as[i].second);
    return s;
}

}  // namespace dsl_detail

inline std::string render_source(const SourceFile& f) {
    using namespace dsl_detail;
    std::ostringstream out;
    bool first = true;
    for (const auto& b : f.scms) {
        if (!first) out << "\n";
        first = false;
        out << "scm " << b.name << " {\n";
        for (const auto& e : b.exos)
            out << "  exo " << e.name << " ~ " << render_dist(e.dist) << "\n";
        for (const auto& v : b.vars)
            out << "  var " << v.name << " = " << render_expr(v.fn, 0) << "\n";
        out << "  mixture " << b.mixture.name << " = tuple(";
        for (size_t i = 0; i < b.mixture.components.size(); ++i)
            out << (i ? ", " : "") << b.mixture.components[i];
        out << ")\n";
        out << "  label " << b.label.name << " uses {";
        for (size_t i = 0; i < b.label.uses.size(); ++i)
            out << (i ? ", " : "") << b.label.uses[i];
        out << "} = ";
        if (b.label.is_bayes)
            out << "bayes(" << b.label.bayes_target << ")";
        else
            out << render_expr(b.label.fn, 0);
        out << "\n}\n";
    }
    for (const auto& q : f.queries) {
        if (!first) out << "\n";
        first = false;
        out << "query " << q.name << " on " << q.scm_name << " = P(" << q.label_name
            << " = " << q.outcome << " | do(" << render_assigns(q.intervention) << ")";
        if (!q.evidence.empty()) out << " ; given " << render_assigns(q.evidence);
        out << ")\n";
    }
    return out.str();
}

}  // namespace ascm
