#ifndef PFAFFKIT_DSL_HPP
#define PFAFFKIT_DSL_HPP

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "cohomology.hpp"
#include "group_action.hpp"
#include "variational.hpp"

namespace pfaffkit::dsl {

// ---------------------------------------------------------------------------
// Diagnostics

struct ParseError : Error {
    size_t line;
    size_t column;
    std::string reason;
    std::vector<std::string> expected;

    ParseError(size_t l, size_t c, std::string what, std::vector<std::string> exp = {})
        : Error(format(l, c, what, exp)),
          line(l),
          column(c),
          reason(std::move(what)),
          expected(std::move(exp)) {}

    static std::string format(size_t l, size_t c, const std::string& what,
                              const std::vector<std::string>& exp) {
        std::ostringstream os;
        os << "line " << l << ", column " << c << ": " << what;
        if (!exp.empty()) {
            os << " (expected ";
            for (size_t i = 0; i < exp.size(); ++i) os << (i ? " | " : "") << exp[i];
            os << ")";
        }
        return os.str();
    }
};

// ---------------------------------------------------------------------------
// Lexer

enum class TokenKind { Ident, Integer, Punct, End };

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;
    size_t line = 1;
    size_t column = 1;
};

inline std::vector<Token> lex(const std::string& src) {
    std::vector<Token> out;
    size_t line = 1, col = 1, i = 0;
    const size_t n = src.size();
    auto bump = [&](size_t k) {
        for (size_t j = 0; j < k; ++j, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < n) {
        const char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            bump(1);
            continue;
        }
        if (c == '#') {  // comment to end of line
            while (i < n && src[i] != '\n') bump(1);
            continue;
        }
        const size_t tl = line, tc = col;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < n && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            out.push_back({TokenKind::Ident, src.substr(i, j - i), tl, tc});
            bump(j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < n && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            out.push_back({TokenKind::Integer, src.substr(i, j - i), tl, tc});
            bump(j - i);
            continue;
        }
        // the wedge sign U+2227 is an alias for '^'
        if (static_cast<unsigned char>(c) == 0xE2 && i + 2 < n &&
            static_cast<unsigned char>(src[i + 1]) == 0x88 &&
            static_cast<unsigned char>(src[i + 2]) == 0xA7) {
            out.push_back({TokenKind::Punct, "^", tl, tc});
            bump(3);
            continue;
        }
        if (std::string("()[]=+-*/^,").find(c) != std::string::npos) {
            out.push_back({TokenKind::Punct, std::string(1, c), tl, tc});
            bump(1);
            continue;
        }
        throw ParseError(tl, tc, "unrecognized character '" + std::string(1, c) + "'");
    }
    out.push_back({TokenKind::End, "", line, col});
    return out;
}

// ---------------------------------------------------------------------------
// Session specification

struct SessionSpec {
    ChartPtr chart;
    std::string chart_name;

    enum class Kind { Scalar, Form, Field, System, Algebra, Action };
    struct Binding {
        Kind kind;
        std::string name;
    };
    std::vector<Binding> order;  // declaration order, for printing

    std::map<std::string, ScalarExpr> scalars;
    std::map<std::string, DifferentialForm> forms;
    std::map<std::string, VectorField> fields;
    std::map<std::string, PfaffianSystem> systems;
    std::map<std::string, LieAlgebraSpec> algebras;
    struct ActionBinding {
        std::string algebra;
        std::string system;
        ActionSpec spec;
    };
    std::map<std::string, ActionBinding> actions;

    std::optional<Truncation> truncation;

    struct Command {
        std::string name;                // e.g. "check-integrable", "cohomology vertical"
        std::vector<std::string> args;   // bound names
        size_t line = 0;
    };
    std::vector<Command> commands;

    bool is_bound(const std::string& n) const {
        return scalars.count(n) || forms.count(n) || fields.count(n) || systems.count(n) ||
               algebras.count(n) || actions.count(n);
    }
};

// ---------------------------------------------------------------------------
// Parser

namespace detail {

inline const std::set<std::string>& keywords() {
    static const std::set<std::string> kw = {
        "chart",      "scalar",    "form",        "field",     "system",   "algebra",
        "action",     "truncate",  "degree",      "freq",      "bracket",  "of",
        "on",         "with",      "denominators","against",   "flat",     "periodic",
        "sin",        "cos",       "check",       "integrable","invariant","cartan",
        "basis",      "cohomology","vertical",    "equivariant","ce",      "euler",
        "compare",    "theorem1",  "scan",        "obstructions","relative","invariance"};
    return kw;
}

}  // namespace detail

class Parser {
public:
    explicit Parser(const std::string& source) : toks_(lex(source)) {}

    SessionSpec parse() {
        SessionSpec spec;
        while (peek().kind != TokenKind::End) statement(spec);
        return spec;
    }

private:
    using Value = std::variant<ScalarExpr, DifferentialForm, VectorField>;

    const Token& peek(size_t ahead = 0) const {
        const size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const Token& advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    [[noreturn]] void fail(const Token& t, const std::string& what,
                           std::vector<std::string> expected = {}) const {
        std::string got = t.kind == TokenKind::End ? "end of input" : "'" + t.text + "'";
        throw ParseError(t.line, t.column, what + " at " + got, std::move(expected));
    }

    Token expect_punct(const std::string& p) {
        if (peek().kind == TokenKind::Punct && peek().text == p) return advance();
        fail(peek(), "unexpected token", {"'" + p + "'"});
    }
    Token expect_keyword(const std::string& k) {
        if (peek().kind == TokenKind::Ident && peek().text == k) return advance();
        fail(peek(), "unexpected token", {"'" + k + "'"});
    }
    Token expect_name(const std::string& role) {
        if (peek().kind != TokenKind::Ident)
            fail(peek(), "unexpected token", {role});
        if (detail::keywords().count(peek().text))
            fail(peek(), "'" + peek().text + "' is a reserved word and cannot name a " + role);
        return advance();
    }
    unsigned expect_integer(const std::string& role) {
        if (peek().kind != TokenKind::Integer) fail(peek(), "unexpected token", {role});
        return unsigned(std::stoul(advance().text));
    }

    void require_chart(const SessionSpec& spec, const Token& at) const {
        if (!spec.chart) fail(at, "a chart must be declared before any other statement");
    }
    void require_fresh(const SessionSpec& spec, const Token& name) const {
        if (spec.is_bound(name.text)) fail(name, "name '" + name.text + "' is already bound");
    }

    // ---- statements -------------------------------------------------------

    void statement(SessionSpec& spec) {
        const Token& t = peek();
        if (t.kind != TokenKind::Ident)
            fail(t, "unexpected token",
                 {"chart", "scalar", "form", "field", "system", "algebra", "action", "truncate",
                  "check", "cartan", "cohomology", "euler", "compare", "scan", "relative"});
        const std::string& k = t.text;
        if (k == "chart") return chart_stmt(spec);
        if (k == "scalar" || k == "form" || k == "field") return binding_stmt(spec);
        if (k == "system") return system_stmt(spec);
        if (k == "algebra") return algebra_stmt(spec);
        if (k == "action") return action_stmt(spec);
        if (k == "truncate") return truncate_stmt(spec);
        if (k == "check" || k == "cartan" || k == "cohomology" || k == "euler" ||
            k == "compare" || k == "scan" || k == "relative")
            return command_stmt(spec);
        fail(t, "unexpected token",
             {"chart", "scalar", "form", "field", "system", "algebra", "action", "truncate",
              "check", "cartan", "cohomology", "euler", "compare", "scan", "relative"});
    }

    void chart_stmt(SessionSpec& spec) {
        const Token at = advance();  // chart
        if (spec.chart)
            fail(at,
                 "only one chart per session is supported; multi-chart gluing "
                 "(global manifolds) is out of scope");
        const Token name = expect_name("chart name");
        expect_punct("(");
        std::vector<Coord> coords;
        while (true) {
            const Token& kindTok = peek();
            CoordKind kind;
            if (kindTok.kind == TokenKind::Ident && kindTok.text == "flat")
                kind = CoordKind::Flat;
            else if (kindTok.kind == TokenKind::Ident && kindTok.text == "periodic")
                kind = CoordKind::Periodic;
            else
                fail(kindTok, "unexpected token", {"flat", "periodic"});
            advance();
            const Token cname = expect_name("coordinate name");
            coords.push_back({cname.text, kind});
            if (peek().kind == TokenKind::Punct && peek().text == ",") {
                advance();
                continue;
            }
            break;
        }
        expect_punct(")");
        spec.chart = Chart::make(name.text, std::move(coords));
        spec.chart_name = name.text;
        if (peek().kind == TokenKind::Ident && peek().text == "denominators") {
            advance();
            std::vector<ScalarExpr> dens;
            while (true) {
                dens.push_back(scalar_expr(spec, "denominator"));
                if (peek().kind == TokenKind::Punct && peek().text == ",") {
                    advance();
                    continue;
                }
                break;
            }
            spec.chart = localized(spec.chart, dens);
        }
    }

    void binding_stmt(SessionSpec& spec) {
        const Token at = advance();  // scalar | form | field
        require_chart(spec, at);
        const Token name = expect_name(at.text + " name");
        require_fresh(spec, name);
        expect_punct("=");
        const Token vat = peek();
        Value v = expr(spec);
        if (at.text == "scalar") {
            if (!std::holds_alternative<ScalarExpr>(v))
                fail(vat, "expression bound to a scalar is not a scalar");
            spec.scalars.emplace(name.text, std::get<ScalarExpr>(std::move(v)));
            spec.order.push_back({SessionSpec::Kind::Scalar, name.text});
        } else if (at.text == "form") {
            DifferentialForm w = as_form(std::move(v), vat);
            spec.forms.emplace(name.text, std::move(w));
            spec.order.push_back({SessionSpec::Kind::Form, name.text});
        } else {
            if (!std::holds_alternative<VectorField>(v))
                fail(vat, "expression bound to a field is not a vector field");
            spec.fields.emplace(name.text, std::get<VectorField>(std::move(v)));
            spec.order.push_back({SessionSpec::Kind::Field, name.text});
        }
    }

    void system_stmt(SessionSpec& spec) {
        const Token at = advance();
        require_chart(spec, at);
        const Token name = expect_name("system name");
        require_fresh(spec, name);
        expect_punct("=");
        std::vector<DifferentialForm> gens;
        while (true) {
            const Token vat = peek();
            gens.push_back(as_form(expr(spec), vat));
            if (peek().kind == TokenKind::Punct && peek().text == ",") {
                advance();
                continue;
            }
            break;
        }
        try {
            spec.systems.emplace(name.text, PfaffianSystem(spec.chart, std::move(gens)));
        } catch (const Error& e) {
            fail(at, std::string("invalid system: ") + e.what());
        }
        spec.order.push_back({SessionSpec::Kind::System, name.text});
    }

    void algebra_stmt(SessionSpec& spec) {
        const Token at = advance();
        require_chart(spec, at);
        const Token name = expect_name("algebra name");
        require_fresh(spec, name);
        expect_punct("(");
        std::vector<std::string> basis;
        std::map<std::string, size_t> basis_index;
        while (true) {
            const Token b = expect_name("basis element name");
            if (basis_index.count(b.text)) fail(b, "duplicate basis element '" + b.text + "'");
            basis_index[b.text] = basis.size();
            basis.push_back(b.text);
            if (peek().kind == TokenKind::Punct && peek().text == ",") {
                advance();
                continue;
            }
            break;
        }
        expect_punct(")");
        const size_t q = basis.size();
        std::vector constants(q, std::vector(q, std::vector<Rational>(q, 0)));
        while (peek().kind == TokenKind::Ident && peek().text == "bracket") {
            advance();
            expect_punct("[");
            const Token a = expect_name("basis element name");
            expect_punct(",");
            const Token b = expect_name("basis element name");
            expect_punct("]");
            auto ia = basis_index.find(a.text);
            auto ib = basis_index.find(b.text);
            if (ia == basis_index.end()) fail(a, "unknown basis element '" + a.text + "'");
            if (ib == basis_index.end()) fail(b, "unknown basis element '" + b.text + "'");
            expect_punct("=");
            std::vector<Rational> rhs(q, 0);
            bracket_rhs(rhs, basis_index);
            for (size_t k = 0; k < q; ++k) {
                constants[ia->second][ib->second][k] = rhs[k];
                constants[ib->second][ia->second][k] = -rhs[k];
            }
        }
        try {
            spec.algebras.emplace(name.text, LieAlgebraSpec(std::move(basis), std::move(constants)));
        } catch (const Error& e) {
            fail(at, std::string("invalid algebra: ") + e.what());
        }
        spec.order.push_back({SessionSpec::Kind::Algebra, name.text});
    }

    /// linear combination `2*e1 - e2 + 1/3*e3`, or a literal `0`
    void bracket_rhs(std::vector<Rational>& rhs, const std::map<std::string, size_t>& index) {
        bool first = true;
        while (true) {
            Rational sign = 1;
            if (peek().kind == TokenKind::Punct && (peek().text == "+" || peek().text == "-")) {
                if (peek().text == "-") sign = -1;
                advance();
            } else if (!first) {
                break;
            }
            first = false;
            Rational coef = 1;
            if (peek().kind == TokenKind::Integer) {
                coef = Rational(advance().text);
                if (peek().kind == TokenKind::Punct && peek().text == "/") {
                    advance();
                    coef /= Rational(expect_integer("denominator"));
                }
                if (coef == 0 && !(peek().kind == TokenKind::Punct && peek().text == "*")) continue;
                expect_punct("*");
            }
            const Token e = expect_name("basis element name");
            auto it = index.find(e.text);
            if (it == index.end()) fail(e, "unknown basis element '" + e.text + "'");
            rhs[it->second] += sign * coef;
        }
    }

    void action_stmt(SessionSpec& spec) {
        const Token at = advance();
        require_chart(spec, at);
        const Token name = expect_name("action name");
        require_fresh(spec, name);
        expect_keyword("of");
        const Token alg = expect_name("algebra name");
        auto ai = spec.algebras.find(alg.text);
        if (ai == spec.algebras.end()) fail(alg, "unknown algebra '" + alg.text + "'");
        expect_keyword("on");
        const Token sys = expect_name("system name");
        auto si = spec.systems.find(sys.text);
        if (si == spec.systems.end()) fail(sys, "unknown system '" + sys.text + "'");
        expect_keyword("with");
        const auto& basis = ai->second.basis();
        std::map<std::string, VectorField> assigned;
        while (true) {
            const Token e = expect_name("basis element name");
            if (std::find(basis.begin(), basis.end(), e.text) == basis.end())
                fail(e, "'" + e.text + "' is not a basis element of " + alg.text);
            if (assigned.count(e.text)) fail(e, "basis element '" + e.text + "' assigned twice");
            expect_punct("=");
            const Token vat = peek();
            Value v = expr(spec);
            if (!std::holds_alternative<VectorField>(v))
                fail(vat, "action clause must bind a vector field");
            assigned.emplace(e.text, std::get<VectorField>(std::move(v)));
            if (peek().kind == TokenKind::Punct && peek().text == ",") {
                advance();
                continue;
            }
            break;
        }
        std::vector<VectorField> flds;
        for (const auto& b : basis) {
            auto it = assigned.find(b);
            if (it == assigned.end()) fail(at, "no field assigned to basis element '" + b + "'");
            flds.push_back(it->second);
        }
        try {
            spec.actions.emplace(
                name.text,
                SessionSpec::ActionBinding{alg.text, sys.text,
                                           ActionSpec(ai->second, std::move(flds), si->second)});
        } catch (const Error& e) {
            fail(at, std::string("invalid action: ") + e.what());
        }
        spec.order.push_back({SessionSpec::Kind::Action, name.text});
    }

    void truncate_stmt(SessionSpec& spec) {
        advance();
        expect_keyword("degree");
        const Token dat = peek();
        const unsigned d = expect_integer("degree bound");
        expect_keyword("freq");
        const Token kat = peek();
        const unsigned k = expect_integer("frequency bound");
        if (d == 0) fail(dat, "truncation degree must be positive");
        if (k == 0) fail(kat, "truncation frequency must be positive");
        spec.truncation = Truncation{d, k};
    }

    // ---- commands ---------------------------------------------------------

    std::string bound_arg(const SessionSpec& spec, SessionSpec::Kind kind,
                          const std::string& role) {
        const Token t = expect_name(role);
        const bool ok = (kind == SessionSpec::Kind::Scalar && spec.scalars.count(t.text)) ||
                        (kind == SessionSpec::Kind::Form && spec.forms.count(t.text)) ||
                        (kind == SessionSpec::Kind::Field && spec.fields.count(t.text)) ||
                        (kind == SessionSpec::Kind::System && spec.systems.count(t.text)) ||
                        (kind == SessionSpec::Kind::Algebra && spec.algebras.count(t.text)) ||
                        (kind == SessionSpec::Kind::Action && spec.actions.count(t.text));
        if (!ok) fail(t, "'" + t.text + "' is not a bound " + role);
        return t.text;
    }

    void command_stmt(SessionSpec& spec) {
        const Token head = advance();
        require_chart(spec, head);
        SessionSpec::Command cmd;
        cmd.line = head.line;
        auto dash_word = [&](std::vector<std::string> options) {
            expect_punct("-");
            if (peek().kind != TokenKind::Ident ||
                std::find(options.begin(), options.end(), peek().text) == options.end())
                fail(peek(), "unexpected token", std::move(options));
            return advance().text;
        };
        if (head.text == "check") {
            const std::string what = dash_word({"integrable", "invariant", "action"});
            cmd.name = "check-" + what;
            if (what == "integrable") {
                cmd.args.push_back(bound_arg(spec, SessionSpec::Kind::System, "system"));
            } else if (what == "invariant") {
                cmd.args.push_back(bound_arg(spec, SessionSpec::Kind::Form, "form"));
                cmd.args.push_back(bound_arg(spec, SessionSpec::Kind::System, "system"));
            } else {
                cmd.args.push_back(bound_arg(spec, SessionSpec::Kind::Action, "action"));
            }
        } else if (head.text == "cartan") {
            dash_word({"basis"});
            cmd.name = "cartan-basis";
            cmd.args.push_back(bound_arg(spec, SessionSpec::Kind::Action, "action"));
        } else if (head.text == "cohomology") {
            static const std::vector<std::string> modes = {"vertical", "invariant", "equivariant",
                                                           "ce"};
            if (peek().kind != TokenKind::Ident ||
                std::find(modes.begin(), modes.end(), peek().text) == modes.end())
                fail(peek(), "unexpected token", modes);
            const std::string mode = advance().text;
            cmd.name = "cohomology " + mode;
            if (mode == "invariant")
                cmd.args.push_back(bound_arg(spec, SessionSpec::Kind::System, "system"));
            else if (mode == "ce")
                cmd.args.push_back(bound_arg(spec, SessionSpec::Kind::Algebra, "algebra"));
            else
                cmd.args.push_back(bound_arg(spec, SessionSpec::Kind::Action, "action"));
        } else if (head.text == "euler") {
            cmd.name = "euler";
            cmd.args.push_back(bound_arg(spec, SessionSpec::Kind::Form, "form"));
            cmd.args.push_back(bound_arg(spec, SessionSpec::Kind::Action, "action"));
        } else if (head.text == "compare") {
            dash_word({"theorem1"});
            cmd.name = "compare-theorem1";
            cmd.args.push_back(bound_arg(spec, SessionSpec::Kind::Action, "action"));
        } else if (head.text == "scan") {
            dash_word({"obstructions"});
            cmd.name = "scan-obstructions";
            const Token src = expect_name("system or action");
            if (!spec.systems.count(src.text) && !spec.actions.count(src.text))
                fail(src, "'" + src.text + "' is not a bound system or action");
            cmd.args.push_back(src.text);
            expect_keyword("against");
            while (true) {
                cmd.args.push_back(bound_arg(spec, SessionSpec::Kind::Algebra, "algebra"));
                if (peek().kind == TokenKind::Punct && peek().text == ",") {
                    advance();
                    continue;
                }
                break;
            }
        } else {  // relative
            dash_word({"invariance"});
            cmd.name = "relative-invariance";
            cmd.args.push_back(bound_arg(spec, SessionSpec::Kind::Form, "form"));
            cmd.args.push_back(bound_arg(spec, SessionSpec::Kind::System, "system"));
        }
        spec.commands.push_back(std::move(cmd));
    }

    // ---- expressions ------------------------------------------------------

    ScalarExpr scalar_expr(SessionSpec& spec, const std::string& role) {
        const Token at = peek();
        Value v = expr(spec);
        if (!std::holds_alternative<ScalarExpr>(v))
            fail(at, role + " must be a scalar expression");
        return std::get<ScalarExpr>(std::move(v));
    }

    DifferentialForm as_form(Value v, const Token& at) {
        if (std::holds_alternative<ScalarExpr>(v))
            return DifferentialForm::from_scalar(std::get<ScalarExpr>(v));
        if (std::holds_alternative<DifferentialForm>(v))
            return std::get<DifferentialForm>(std::move(v));
        fail(at, "expression is a vector field, not a form");
    }

    Value expr(SessionSpec& spec) {
        Value lhs = term(spec);
        while (peek().kind == TokenKind::Punct && (peek().text == "+" || peek().text == "-")) {
            const Token op = advance();
            Value rhs = term(spec);
            lhs = add(std::move(lhs), std::move(rhs), op);
        }
        return lhs;
    }

    Value term(SessionSpec& spec) {
        Value lhs = unary(spec);
        while (peek().kind == TokenKind::Punct && (peek().text == "*" || peek().text == "/")) {
            const Token op = advance();
            Value rhs = unary(spec);
            lhs = op.text == "*" ? mul(std::move(lhs), std::move(rhs), op)
                                 : divide(std::move(lhs), std::move(rhs), op);
        }
        return lhs;
    }

    Value unary(SessionSpec& spec) {
        if (peek().kind == TokenKind::Punct && peek().text == "-") {
            const Token op = advance();
            Value v = unary(spec);
            const ScalarExpr minus_one = ScalarExpr::constant(spec.chart, -1);
            if (auto* s = std::get_if<ScalarExpr>(&v)) return -*s;
            if (auto* w = std::get_if<DifferentialForm>(&v)) return minus_one * *w;
            return minus_one * std::get<VectorField>(v);
        }
        return power(spec);
    }

    Value power(SessionSpec& spec) {
        Value base = atom(spec);
        if (!(peek().kind == TokenKind::Punct && peek().text == "^")) return base;
        const Token op = advance();
        // scalar ^ literal integer is a power; everything else is a wedge
        if (std::holds_alternative<ScalarExpr>(base) && peek().kind == TokenKind::Integer) {
            const unsigned e = expect_integer("exponent");
            return std::get<ScalarExpr>(base).pow(e);
        }
        Value rhs = power(spec);  // right-associative chain of wedges
        if (std::holds_alternative<VectorField>(base) || std::holds_alternative<VectorField>(rhs))
            fail(op, "'^' does not apply to vector fields");
        return wedge(as_form(std::move(base), op), as_form(std::move(rhs), op));
    }

    Value atom(SessionSpec& spec) {
        const Token& t = peek();
        if (t.kind == TokenKind::Integer) {
            advance();
            return ScalarExpr::constant(spec.chart, Rational(t.text));
        }
        if (t.kind == TokenKind::Punct && t.text == "(") {
            advance();
            Value v = expr(spec);
            expect_punct(")");
            return v;
        }
        if (t.kind == TokenKind::Ident && (t.text == "sin" || t.text == "cos")) {
            const bool is_sin = t.text == "sin";
            advance();
            expect_punct("(");
            unsigned freq = 1;
            if (peek().kind == TokenKind::Integer) {
                freq = expect_integer("frequency");
                expect_punct("*");
            }
            const Token cname = expect_name("periodic coordinate");
            if (!spec.chart->has_coord(cname.text))
                fail(cname, "unknown coordinate '" + cname.text + "'");
            if (spec.chart->coord(spec.chart->coord_index(cname.text)).kind != CoordKind::Periodic)
                fail(cname, "'" + cname.text + "' is not a periodic coordinate");
            expect_punct(")");
            return ScalarExpr::trig(spec.chart, cname.text, freq, is_sin);
        }
        if (t.kind == TokenKind::Ident) {
            if (detail::keywords().count(t.text))
                fail(t, "unexpected token", {"an expression atom"});
            // coordinate field d/d<coord>
            if (t.text == "d" && peek(1).kind == TokenKind::Punct && peek(1).text == "/") {
                advance();
                advance();
                const Token dt = peek();
                if (dt.kind != TokenKind::Ident || dt.text.size() < 2 || dt.text[0] != 'd' ||
                    !spec.chart->has_coord(dt.text.substr(1)))
                    fail(dt, "unexpected token", {"d<coordinate>"});
                advance();
                return VectorField::coordinate_field(spec.chart, dt.text.substr(1));
            }
            advance();
            if (auto it = spec.scalars.find(t.text); it != spec.scalars.end()) return it->second;
            if (auto it = spec.forms.find(t.text); it != spec.forms.end()) return it->second;
            if (auto it = spec.fields.find(t.text); it != spec.fields.end()) return it->second;
            if (spec.chart->has_coord(t.text)) {
                if (spec.chart->coord(spec.chart->coord_index(t.text)).kind == CoordKind::Periodic)
                    fail(t, "periodic coordinate '" + t.text +
                               "' enters expressions only through sin/cos");
                return ScalarExpr::coordinate(spec.chart, t.text);
            }
            if (t.text.size() >= 2 && t.text[0] == 'd' && spec.chart->has_coord(t.text.substr(1)))
                return DifferentialForm::coordinate_differential(spec.chart, t.text.substr(1));
            fail(t, "unknown name '" + t.text + "'");
        }
        fail(t, "unexpected token",
             {"a number", "'('", "'-'", "sin", "cos", "a coordinate", "a differential d<coord>",
              "a bound name"});
    }

    Value add(Value a, Value b, const Token& op) {
        // degree-0 forms and scalars mix freely
        if (std::holds_alternative<ScalarExpr>(a) && std::holds_alternative<ScalarExpr>(b)) {
            const auto& x = std::get<ScalarExpr>(a);
            const auto& y = std::get<ScalarExpr>(b);
            return op.text == "+" ? x + y : x - y;
        }
        if (std::holds_alternative<VectorField>(a) && std::holds_alternative<VectorField>(b)) {
            const auto& x = std::get<VectorField>(a);
            const auto& y = std::get<VectorField>(b);
            return op.text == "+" ? x + y : x - y;
        }
        if (std::holds_alternative<VectorField>(a) || std::holds_alternative<VectorField>(b))
            fail(op, "cannot combine a vector field with a non-field operand");
        DifferentialForm x = as_form(std::move(a), op);
        DifferentialForm y = as_form(std::move(b), op);
        if (!x.is_zero() && !y.is_zero() && x.degree() != y.degree())
            fail(op, "cannot add forms of different degrees");
        if (op.text == "-") y = ScalarExpr::constant(y.chart(), -1) * y;
        return x + y;
    }

    Value mul(Value a, Value b, const Token& op) {
        if (std::holds_alternative<ScalarExpr>(a) && std::holds_alternative<ScalarExpr>(b))
            return std::get<ScalarExpr>(a) * std::get<ScalarExpr>(b);
        if (std::holds_alternative<ScalarExpr>(a)) {
            const auto& f = std::get<ScalarExpr>(a);
            if (auto* w = std::get_if<DifferentialForm>(&b)) return f * *w;
            return f * std::get<VectorField>(b);
        }
        if (std::holds_alternative<ScalarExpr>(b)) {
            const auto& f = std::get<ScalarExpr>(b);
            if (auto* w = std::get_if<DifferentialForm>(&a)) return f * *w;
            return f * std::get<VectorField>(a);
        }
        fail(op, "'*' multiplies by scalars; use '^' to wedge forms");
    }

    Value divide(Value a, Value b, const Token& op) {
        if (!std::holds_alternative<ScalarExpr>(b))
            fail(op, "division is only by scalar units of the ring");
        const auto& den = std::get<ScalarExpr>(b);
        auto inv = den.try_inverse();
        if (!inv)
            fail(op, "'" + den.str() +
                         "' is not a unit of the localized ring; declare it as a chart "
                         "denominator to divide by it");
        return mul(std::move(a), *inv, op);
    }

    std::vector<Token> toks_;
    size_t pos_ = 0;
};

inline SessionSpec parse(const std::string& source) { return Parser(source).parse(); }

// ---------------------------------------------------------------------------
// Canonical pretty-printer (parse -> print -> parse is a fixpoint)

namespace detail {

inline std::string rational_str(const Rational& r) { return r.str(); }

/// One normal-form monomial as `coef*x^2*sin(3*y)`; the sign is returned
/// separately so sums can join terms with ` + ` / ` - `.
inline std::pair<bool, std::string> term_str(const ChartPtr& chart, const TermKey& key,
                                             const Rational& coef) {
    std::vector<std::string> factors;
    for (size_t i = 0; i < chart->dimension(); ++i) {
        const auto& name = chart->coord(i).name;
        if (key.exp[i] == 1)
            factors.push_back(name);
        else if (key.exp[i] > 1)
            factors.push_back(name + "^" + std::to_string(key.exp[i]));
        if (key.trig[i].freq > 0) {
            std::string f = key.trig[i].is_sin ? "sin(" : "cos(";
            if (key.trig[i].freq != 1) f += std::to_string(key.trig[i].freq) + "*";
            factors.push_back(f + name + ")");
        }
    }
    const bool negative = coef < 0;
    const Rational mag = negative ? Rational(-coef) : coef;
    std::string out;
    if (mag != 1 || factors.empty()) out = rational_str(mag);
    for (const auto& f : factors) {
        if (!out.empty()) out += "*";
        out += f;
    }
    return {negative, out};
}

inline std::string polytrig_str(const ChartPtr& chart, const PolyTrig& p) {
    if (p.empty()) return "0";
    std::string out;
    for (const auto& [key, coef] : p) {
        auto [neg, s] = term_str(chart, key, coef);
        if (out.empty())
            out = (neg ? "-" : "") + s;
        else
            out += (neg ? " - " : " + ") + s;
    }
    return out;
}

}  // namespace detail

inline std::string print(const ScalarExpr& f) {
    const auto& chart = f.chart();
    std::string out = detail::polytrig_str(chart, f.numerator());
    const auto& den = f.denominator_exponents();
    bool any_den = false;
    for (unsigned e : den) any_den |= (e != 0);
    if (!any_den) return out;
    if (f.numerator().size() > 1) out = "(" + out + ")";
    for (size_t j = 0; j < den.size(); ++j) {
        if (den[j] == 0) continue;
        out += "/(" + detail::polytrig_str(chart, chart->denominators()[j]) + ")";
        if (den[j] > 1) out += "^" + std::to_string(den[j]);
    }
    return out;
}

inline std::string print(const DifferentialForm& w) {
    if (w.is_zero()) return "0";
    const auto& chart = w.chart();
    if (w.degree() == 0) return print(w.terms().begin()->second);
    std::string out;
    for (const auto& [idx, coef] : w.terms()) {
        std::string basis;
        for (unsigned i : idx) {
            if (!basis.empty()) basis += "^";
            basis += "d" + chart->coord(i).name;
        }
        std::string cs = print(coef);
        bool neg = false;
        if (coef.numerator().size() > 1) {
            cs = "(" + cs + ")*";
        } else if (cs == "1") {
            cs = "";
        } else if (cs == "-1") {
            cs = "";
            neg = true;
        } else {
            if (!cs.empty() && cs[0] == '-') {
                neg = true;
                cs = cs.substr(1);
            }
            cs += "*";
        }
        const std::string term = cs + basis;
        if (out.empty())
            out = (neg ? "-" : "") + term;
        else
            out += (neg ? " - " : " + ") + term;
    }
    return out;
}

inline std::string print(const VectorField& v) {
    if (v.is_zero()) return "0*d/d" + v.chart()->coord(0).name;
    const auto& chart = v.chart();
    std::string out;
    for (size_t i = 0; i < chart->dimension(); ++i) {
        const auto& c = v.component(i);
        if (c.is_zero()) continue;
        std::string cs = print(c);
        bool neg = false;
        if (c.numerator().size() > 1) {
            cs = "(" + cs + ")*";
        } else if (cs == "1") {
            cs = "";
        } else if (cs == "-1") {
            cs = "";
            neg = true;
        } else {
            if (!cs.empty() && cs[0] == '-') {
                neg = true;
                cs = cs.substr(1);
            }
            cs += "*";
        }
        const std::string term = cs + "d/d" + chart->coord(i).name;
        if (out.empty())
            out = (neg ? "-" : "") + term;
        else
            out += (neg ? " - " : " + ") + term;
    }
    return out;
}

inline std::string print(const SessionSpec& spec) {
    std::ostringstream os;
    const auto& chart = spec.chart;
    os << "chart " << spec.chart_name << " (";
    for (size_t i = 0; i < chart->dimension(); ++i) {
        if (i) os << ", ";
        os << (chart->coord(i).kind == CoordKind::Periodic ? "periodic " : "flat ")
           << chart->coord(i).name;
    }
    os << ")";
    if (!chart->denominators().empty()) {
        os << " denominators ";
        for (size_t j = 0; j < chart->denominators().size(); ++j) {
            if (j) os << ", ";
            os << detail::polytrig_str(chart, chart->denominators()[j]);
        }
    }
    os << "\n";
    for (const auto& b : spec.order) {
        switch (b.kind) {
            case SessionSpec::Kind::Scalar:
                os << "scalar " << b.name << " = " << print(spec.scalars.at(b.name)) << "\n";
                break;
            case SessionSpec::Kind::Form:
                os << "form " << b.name << " = " << print(spec.forms.at(b.name)) << "\n";
                break;
            case SessionSpec::Kind::Field:
                os << "field " << b.name << " = " << print(spec.fields.at(b.name)) << "\n";
                break;
            case SessionSpec::Kind::System: {
                os << "system " << b.name << " = ";
                const auto& gens = spec.systems.at(b.name).generators();
                for (size_t i = 0; i < gens.size(); ++i) os << (i ? ", " : "") << print(gens[i]);
                os << "\n";
                break;
            }
            case SessionSpec::Kind::Algebra: {
                const auto& g = spec.algebras.at(b.name);
                os << "algebra " << b.name << " (";
                for (size_t i = 0; i < g.dimension(); ++i) os << (i ? ", " : "") << g.basis()[i];
                os << ")";
                for (size_t i = 0; i < g.dimension(); ++i)
                    for (size_t j = i + 1; j < g.dimension(); ++j) {
                        bool nonzero = false;
                        for (size_t k = 0; k < g.dimension(); ++k) nonzero |= (g.c(i, j, k) != 0);
                        if (!nonzero) continue;
                        os << " bracket [" << g.basis()[i] << ", " << g.basis()[j] << "] = ";
                        bool first = true;
                        for (size_t k = 0; k < g.dimension(); ++k) {
                            const Rational& c = g.c(i, j, k);
                            if (c == 0) continue;
                            const bool neg = c < 0;
                            const Rational mag = neg ? Rational(-c) : c;
                            if (first)
                                os << (neg ? "-" : "");
                            else
                                os << (neg ? " - " : " + ");
                            first = false;
                            if (mag != 1) os << detail::rational_str(mag) << "*";
                            os << g.basis()[k];
                        }
                        if (first) os << "0";
                    }
                os << "\n";
                break;
            }
            case SessionSpec::Kind::Action: {
                const auto& a = spec.actions.at(b.name);
                os << "action " << b.name << " of " << a.algebra << " on " << a.system << " with ";
                const auto& basis = a.spec.algebra.basis();
                for (size_t i = 0; i < basis.size(); ++i)
                    os << (i ? ", " : "") << basis[i] << " = " << print(a.spec.fields[i]);
                os << "\n";
                break;
            }
        }
    }
    if (spec.truncation)
        os << "truncate degree " << spec.truncation->degree << " freq " << spec.truncation->freq
           << "\n";
    for (const auto& c : spec.commands) {
        if (c.name == "scan-obstructions") {
            os << c.name << " " << c.args[0] << " against ";
            for (size_t i = 1; i < c.args.size(); ++i) os << (i > 1 ? ", " : "") << c.args[i];
        } else {
            os << c.name;
            for (const auto& a : c.args) os << " " << a;
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace pfaffkit::dsl

#endif
