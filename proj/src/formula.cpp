#include "fo2/formula.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace fo2 {

const char* order_sym_name(OrderSym s) {
    switch (s) {
        case OrderSym::suc: return "suc";
        case OrderSym::lt: return "<";
        case OrderSym::suc1: return "suc1";
        case OrderSym::lt1: return "<1";
        case OrderSym::suc2: return "suc2";
        case OrderSym::lt2: return "<2";
    }
    return "?";
}

std::optional<OrderSym> order_sym_from_name(const std::string& name) {
    if (name == "suc") return OrderSym::suc;
    if (name == "<") return OrderSym::lt;
    if (name == "suc1") return OrderSym::suc1;
    if (name == "<1") return OrderSym::lt1;
    if (name == "suc2") return OrderSym::suc2;
    if (name == "<2") return OrderSym::lt2;
    return std::nullopt;
}

bool order_sym_is_successor(OrderSym s) {
    return s == OrderSym::suc || s == OrderSym::suc1 || s == OrderSym::suc2;
}

int order_sym_dim(OrderSym s) {
    switch (s) {
        case OrderSym::suc:
        case OrderSym::lt:
        case OrderSym::suc1:
        case OrderSym::lt1: return 0;
        case OrderSym::suc2:
        case OrderSym::lt2: return 1;
    }
    return 0;
}

bool Signature::has_unary(const std::string& n) const { return unary_index(n) >= 0; }
bool Signature::has_binary(const std::string& n) const { return binary_index(n) >= 0; }
bool Signature::has_order(OrderSym s) const {
    return std::find(order_symbols.begin(), order_symbols.end(), s) != order_symbols.end();
}
int Signature::unary_index(const std::string& n) const {
    for (std::size_t i = 0; i < unary_symbols.size(); ++i)
        if (unary_symbols[i] == n) return static_cast<int>(i);
    return -1;
}
int Signature::binary_index(const std::string& n) const {
    for (std::size_t i = 0; i < binary_symbols.size(); ++i)
        if (binary_symbols[i] == n) return static_cast<int>(i);
    return -1;
}

void Signature::validate() const {
    std::set<std::string> seen;
    for (const auto& n : unary_symbols)
        if (!seen.insert(n).second)
            throw std::invalid_argument("duplicate symbol: " + n);
    for (const auto& n : binary_symbols)
        if (!seen.insert(n).second)
            throw std::invalid_argument("duplicate symbol: " + n);
    for (const auto& n : unary_symbols)
        if (order_sym_from_name(n))
            throw std::invalid_argument("order symbol used as relation symbol: " + n);
    for (const auto& n : binary_symbols)
        if (order_sym_from_name(n))
            throw std::invalid_argument("order symbol used as relation symbol: " + n);

    std::set<OrderSym> os(order_symbols.begin(), order_symbols.end());
    if (os.size() != order_symbols.size())
        throw std::invalid_argument("duplicate order symbol");
    // Supported shapes: a subset of {suc,<} or of one of the indexed families
    // {suc1,<1,<2}, {suc1,suc2,<2}, {<1,<2}, {suc1,suc2}. Mixing the
    // unindexed symbols with indexed ones is rejected.
    auto subset_of = [&](std::initializer_list<OrderSym> profile) {
        for (OrderSym s : os)
            if (std::find(profile.begin(), profile.end(), s) == profile.end()) return false;
        return true;
    };
    bool ok = subset_of({OrderSym::suc, OrderSym::lt}) ||
              subset_of({OrderSym::suc1, OrderSym::lt1, OrderSym::lt2}) ||
              subset_of({OrderSym::suc1, OrderSym::suc2, OrderSym::lt2}) ||
              subset_of({OrderSym::lt1, OrderSym::lt2}) ||
              subset_of({OrderSym::suc1, OrderSym::suc2});
    if (!ok) throw std::invalid_argument("unsupported order-symbol combination");
}

namespace {

std::shared_ptr<Formula> mk(NodeKind k) {
    auto f = std::make_shared<Formula>();
    f->kind = k;
    return f;
}

FormulaPtr mk_bin(NodeKind k, FormulaPtr a, FormulaPtr b) {
    auto f = mk(k);
    f->lhs = std::move(a);
    f->rhs = std::move(b);
    return f;
}

}  // namespace

FormulaPtr Formula::mk_atom1(std::string sym, Var v) {
    auto f = mk(NodeKind::atom);
    f->symbol = std::move(sym);
    f->arity = 1;
    f->v1 = v;
    f->v2 = v;
    return f;
}

FormulaPtr Formula::mk_atom2(std::string sym, Var a, Var b) {
    auto f = mk(NodeKind::atom);
    f->symbol = std::move(sym);
    f->arity = 2;
    f->v1 = a;
    f->v2 = b;
    return f;
}

FormulaPtr Formula::mk_order(OrderSym s, Var a, Var b) {
    auto f = mk(NodeKind::order_atom);
    f->order = s;
    f->v1 = a;
    f->v2 = b;
    return f;
}

FormulaPtr Formula::mk_eq(Var a, Var b) {
    auto f = mk(NodeKind::equality);
    f->v1 = a;
    f->v2 = b;
    return f;
}

FormulaPtr Formula::mk_not(FormulaPtr c) {
    auto f = mk(NodeKind::neg);
    f->lhs = std::move(c);
    return f;
}

FormulaPtr Formula::mk_and(FormulaPtr a, FormulaPtr b) { return mk_bin(NodeKind::conj, std::move(a), std::move(b)); }
FormulaPtr Formula::mk_or(FormulaPtr a, FormulaPtr b) { return mk_bin(NodeKind::disj, std::move(a), std::move(b)); }
FormulaPtr Formula::mk_implies(FormulaPtr a, FormulaPtr b) { return mk_bin(NodeKind::implies, std::move(a), std::move(b)); }

FormulaPtr Formula::mk_forall(Var v, FormulaPtr c) {
    auto f = mk(NodeKind::forall);
    f->v1 = v;
    f->lhs = std::move(c);
    return f;
}

FormulaPtr Formula::mk_exists(Var v, FormulaPtr c) {
    auto f = mk(NodeKind::exists);
    f->v1 = v;
    f->lhs = std::move(c);
    return f;
}

FormulaPtr Formula::mk_so_exists(std::vector<SoDecl> decls, FormulaPtr c) {
    auto f = mk(NodeKind::so_exists);
    f->so_decls = std::move(decls);
    f->lhs = std::move(c);
    return f;
}

bool ast_equal(const FormulaPtr& a, const FormulaPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case NodeKind::atom:
            return a->symbol == b->symbol && a->arity == b->arity &&
                   a->v1 == b->v1 && a->v2 == b->v2;
        case NodeKind::order_atom:
            return a->order == b->order && a->v1 == b->v1 && a->v2 == b->v2;
        case NodeKind::equality:
            return a->v1 == b->v1 && a->v2 == b->v2;
        case NodeKind::neg:
            return ast_equal(a->lhs, b->lhs);
        case NodeKind::conj:
        case NodeKind::disj:
        case NodeKind::implies:
            return ast_equal(a->lhs, b->lhs) && ast_equal(a->rhs, b->rhs);
        case NodeKind::forall:
        case NodeKind::exists:
            return a->v1 == b->v1 && ast_equal(a->lhs, b->lhs);
        case NodeKind::so_exists:
            return a->so_decls == b->so_decls && ast_equal(a->lhs, b->lhs);
    }
    return false;
}

bool is_quantifier_free(const FormulaPtr& f) {
    if (!f) return true;
    switch (f->kind) {
        case NodeKind::forall:
        case NodeKind::exists:
        case NodeKind::so_exists: return false;
        case NodeKind::neg: return is_quantifier_free(f->lhs);
        case NodeKind::conj:
        case NodeKind::disj:
        case NodeKind::implies:
            return is_quantifier_free(f->lhs) && is_quantifier_free(f->rhs);
        default: return true;
    }
}

bool has_so_prefix(const FormulaPtr& f) { return f && f->kind == NodeKind::so_exists; }

std::size_t ast_size(const FormulaPtr& f) {
    if (!f) return 0;
    return 1 + ast_size(f->lhs) + ast_size(f->rhs);
}

// ---------------------------------------------------------------- parsing

namespace {

struct Token {
    enum Kind { name, var, number, lparen, rparen, comma, dot, slash, tilde, amp,
                pipe, arrow, eq, lt, lt1, lt2, kw_forall, kw_exists, kw_ex2, end } kind;
    std::string text;
    std::size_t pos;
};

struct Lexer {
    const std::string& s;
    std::size_t i = 0;
    explicit Lexer(const std::string& str) : s(str) {}

    Token next() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t start = i;
        if (i >= s.size()) return {Token::end, "", start};
        char c = s[i];
        auto one = [&](Token::Kind k) { ++i; return Token{k, std::string(1, c), start}; };
        switch (c) {
            case '(': return one(Token::lparen);
            case ')': return one(Token::rparen);
            case ',': return one(Token::comma);
            case '.': return one(Token::dot);
            case '/': return one(Token::slash);
            case '~': return one(Token::tilde);
            case '&': return one(Token::amp);
            case '|': return one(Token::pipe);
            case '=': return one(Token::eq);
            case '-':
                if (i + 1 < s.size() && s[i + 1] == '>') { i += 2; return {Token::arrow, "->", start}; }
                throw ParseError("stray '-'", start);
            case '<':
                if (i + 1 < s.size() && s[i + 1] == '1') { i += 2; return {Token::lt1, "<1", start}; }
                if (i + 1 < s.size() && s[i + 1] == '2') { i += 2; return {Token::lt2, "<2", start}; }
                ++i;
                return {Token::lt, "<", start};
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            std::string digits = s.substr(i, j - i);
            i = j;
            return {Token::number, digits, start};
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) ||
                                    s[j] == '_' || s[j] == '\'')) ++j;
            std::string word = s.substr(i, j - i);
            i = j;
            if (word == "A") return {Token::kw_forall, word, start};
            if (word == "E") return {Token::kw_exists, word, start};
            if (word == "EX2") return {Token::kw_ex2, word, start};
            if (word == "x" || word == "y") return {Token::var, word, start};
            return {Token::name, word, start};
        }
        throw ParseError(std::string("unexpected character '") + c + "'", start);
    }
};

struct Parser {
    Lexer lex;
    Token tok;
    const std::optional<Signature>& declared;
    std::map<std::string, int> inferred_arity;
    std::set<OrderSym> orders_used;
    std::vector<SoDecl> so_decls;

    Parser(const std::string& text, const std::optional<Signature>& decl)
        : lex(text), declared(decl) {
        tok = lex.next();
    }

    void advance() { tok = lex.next(); }

    void expect(Token::Kind k, const char* what) {
        if (tok.kind != k) throw ParseError(std::string("expected ") + what, tok.pos);
        advance();
    }

    Var parse_var() {
        if (tok.kind != Token::var) throw ParseError("expected variable x or y", tok.pos);
        Var v = tok.text == "x" ? Var::x : Var::y;
        advance();
        return v;
    }

    void note_use(const std::string& name, int arity, std::size_t pos) {
        for (const auto& d : so_decls)
            if (d.name == name) {
                if (d.arity != arity) throw ParseError("arity mismatch for symbol " + name, pos);
                return;
            }
        if (declared) {
            int want = arity == 1 ? declared->unary_index(name) : declared->binary_index(name);
            if (want >= 0) return;
            bool other_arity = arity == 1 ? declared->has_binary(name) : declared->has_unary(name);
            if (other_arity) throw ParseError("arity mismatch for symbol " + name, pos);
            throw ParseError("undeclared symbol " + name, pos);
        }
        auto [it, fresh] = inferred_arity.emplace(name, arity);
        if (!fresh && it->second != arity)
            throw ParseError("arity mismatch for symbol " + name, pos);
    }

    FormulaPtr parse_sentence() {
        FormulaPtr f;
        if (tok.kind == Token::kw_ex2) {
            std::size_t prefix_pos = tok.pos;
            advance();
            std::vector<SoDecl> decls;
            for (;;) {
                if (tok.kind != Token::name)
                    throw ParseError("expected relation name in EX2 prefix", tok.pos);
                SoDecl d;
                d.name = tok.text;
                if (order_sym_from_name(d.name))
                    throw ParseError("order symbol in EX2 prefix: " + d.name, tok.pos);
                advance();
                expect(Token::slash, "'/'");
                if (tok.kind != Token::number || (tok.text != "1" && tok.text != "2"))
                    throw ParseError("expected arity 1 or 2", tok.pos);
                d.arity = tok.text == "1" ? 1 : 2;
                advance();
                for (const auto& e : decls)
                    if (e.name == d.name)
                        throw ParseError("duplicate EX2 symbol " + d.name, prefix_pos);
                if (declared && (declared->has_unary(d.name) || declared->has_binary(d.name)))
                    throw ParseError("EX2 symbol shadows a declared symbol: " + d.name, prefix_pos);
                decls.push_back(std::move(d));
                if (tok.kind == Token::comma) { advance(); continue; }
                break;
            }
            expect(Token::dot, "'.' after EX2 prefix");
            so_decls = decls;
            FormulaPtr body = parse_implies();
            f = Formula::mk_so_exists(std::move(decls), std::move(body));
        } else {
            f = parse_implies();
        }
        if (tok.kind != Token::end) throw ParseError("trailing input after sentence", tok.pos);
        return f;
    }

    FormulaPtr parse_implies() {
        FormulaPtr a = parse_or();
        if (tok.kind == Token::arrow) {
            advance();
            FormulaPtr b = parse_implies();
            return Formula::mk_implies(std::move(a), std::move(b));
        }
        return a;
    }

    FormulaPtr parse_or() {
        FormulaPtr a = parse_and();
        while (tok.kind == Token::pipe) {
            advance();
            a = Formula::mk_or(std::move(a), parse_and());
        }
        return a;
    }

    FormulaPtr parse_and() {
        FormulaPtr a = parse_unary();
        while (tok.kind == Token::amp) {
            advance();
            a = Formula::mk_and(std::move(a), parse_unary());
        }
        return a;
    }

    FormulaPtr parse_unary() {
        if (tok.kind == Token::tilde) {
            advance();
            return Formula::mk_not(parse_unary());
        }
        if (tok.kind == Token::kw_forall || tok.kind == Token::kw_exists) {
            bool fa = tok.kind == Token::kw_forall;
            advance();
            Var v = parse_var();
            expect(Token::dot, "'.' after quantified variable");
            // The quantifier body extends as far right as possible.
            FormulaPtr body = parse_implies();
            return fa ? Formula::mk_forall(v, std::move(body))
                      : Formula::mk_exists(v, std::move(body));
        }
        return parse_atomexpr();
    }

    FormulaPtr parse_atomexpr() {
        if (tok.kind == Token::lparen) {
            advance();
            FormulaPtr f = parse_implies();
            expect(Token::rparen, "')'");
            return f;
        }
        if (tok.kind == Token::var) {
            Var a = parse_var();
            OrderSym os = OrderSym::lt;
            bool is_order = true;
            switch (tok.kind) {
                case Token::eq: is_order = false; break;
                case Token::lt: os = OrderSym::lt; break;
                case Token::lt1: os = OrderSym::lt1; break;
                case Token::lt2: os = OrderSym::lt2; break;
                default: throw ParseError("expected =, <, <1 or <2 after variable", tok.pos);
            }
            advance();
            Var b = parse_var();
            if (!is_order) return Formula::mk_eq(a, b);
            orders_used.insert(os);
            return Formula::mk_order(os, a, b);
        }
        if (tok.kind == Token::name) {
            std::string name = tok.text;
            std::size_t pos = tok.pos;
            advance();
            expect(Token::lparen, "'(' after relation symbol");
            Var a = parse_var();
            if (tok.kind == Token::comma) {
                advance();
                Var b = parse_var();
                expect(Token::rparen, "')'");
                if (auto os = order_sym_from_name(name)) {
                    // only the successor symbols reach here; < is lexed as an operator
                    orders_used.insert(*os);
                    return Formula::mk_order(*os, a, b);
                }
                note_use(name, 2, pos);
                return Formula::mk_atom2(name, a, b);
            }
            expect(Token::rparen, "')'");
            if (order_sym_from_name(name))
                throw ParseError("order symbol needs two arguments: " + name, pos);
            note_use(name, 1, pos);
            return Formula::mk_atom1(name, a);
        }
        throw ParseError("expected formula", tok.pos);
    }
};

void check_closed(const FormulaPtr& f, bool bound_x, bool bound_y) {
    if (!f) return;
    switch (f->kind) {
        case NodeKind::atom:
        case NodeKind::order_atom:
        case NodeKind::equality: {
            auto need = [&](Var v) {
                bool ok = v == Var::x ? bound_x : bound_y;
                if (!ok)
                    throw ParseError(std::string("free variable ") + var_name(v), 0);
            };
            need(f->v1);
            need(f->v2);
            break;
        }
        case NodeKind::neg: check_closed(f->lhs, bound_x, bound_y); break;
        case NodeKind::conj:
        case NodeKind::disj:
        case NodeKind::implies:
            check_closed(f->lhs, bound_x, bound_y);
            check_closed(f->rhs, bound_x, bound_y);
            break;
        case NodeKind::forall:
        case NodeKind::exists:
            check_closed(f->lhs, bound_x || f->v1 == Var::x, bound_y || f->v1 == Var::y);
            break;
        case NodeKind::so_exists:
            throw ParseError("second-order prefix only allowed at the root", 0);
    }
}

}  // namespace

ParseResult parse(const std::string& text, const std::optional<Signature>& declared) {
    if (declared) declared->validate();
    Parser p(text, declared);
    FormulaPtr f = p.parse_sentence();
    check_closed(f->kind == NodeKind::so_exists ? f->lhs : f, false, false);

    ParseResult res;
    res.formula = f;
    if (declared) {
        res.signature = *declared;
        for (OrderSym s : p.orders_used)
            if (!res.signature.has_order(s)) res.signature.order_symbols.push_back(s);
    } else {
        for (const auto& [name, arity] : p.inferred_arity) {
            if (arity == 1) res.signature.unary_symbols.push_back(name);
            else res.signature.binary_symbols.push_back(name);
        }
        res.signature.order_symbols.assign(p.orders_used.begin(), p.orders_used.end());
    }
    std::sort(res.signature.order_symbols.begin(), res.signature.order_symbols.end());
    res.signature.validate();
    return res;
}

// ---------------------------------------------------------------- printing

namespace {

// Precedence levels: implies/quantifier=1, or=2, and=3, neg=4, atoms=5.
void print_rec(std::ostringstream& out, const FormulaPtr& f, int parent_prec) {
    auto paren = [&](int prec, auto&& body) {
        bool need = prec < parent_prec;
        if (need) out << '(';
        body();
        if (need) out << ')';
    };
    switch (f->kind) {
        case NodeKind::atom:
            out << f->symbol << '(' << var_name(f->v1);
            if (f->arity == 2) out << ',' << var_name(f->v2);
            out << ')';
            break;
        case NodeKind::order_atom:
            if (order_sym_is_successor(f->order)) {
                out << order_sym_name(f->order) << '(' << var_name(f->v1) << ','
                    << var_name(f->v2) << ')';
            } else {
                paren(5, [&] {
                    out << var_name(f->v1) << ' ' << order_sym_name(f->order) << ' '
                        << var_name(f->v2);
                });
            }
            break;
        case NodeKind::equality:
            paren(5, [&] { out << var_name(f->v1) << " = " << var_name(f->v2); });
            break;
        case NodeKind::neg:
            out << '~';
            print_rec(out, f->lhs, 6);
            break;
        case NodeKind::conj:
            paren(3, [&] {
                print_rec(out, f->lhs, 3);
                out << " & ";
                print_rec(out, f->rhs, 4);
            });
            break;
        case NodeKind::disj:
            paren(2, [&] {
                print_rec(out, f->lhs, 2);
                out << " | ";
                print_rec(out, f->rhs, 3);
            });
            break;
        case NodeKind::implies:
            paren(1, [&] {
                print_rec(out, f->lhs, 2);
                out << " -> ";
                print_rec(out, f->rhs, 1);
            });
            break;
        case NodeKind::forall:
        case NodeKind::exists:
            paren(1, [&] {
                out << (f->kind == NodeKind::forall ? 'A' : 'E') << ' '
                    << var_name(f->v1) << ". ";
                print_rec(out, f->lhs, 1);
            });
            break;
        case NodeKind::so_exists: {
            out << "EX2 ";
            bool first = true;
            for (const auto& d : f->so_decls) {
                if (!first) out << ", ";
                first = false;
                out << d.name << '/' << d.arity;
            }
            out << ". ";
            print_rec(out, f->lhs, 1);
            break;
        }
    }
}

}  // namespace

std::string pretty_print(const FormulaPtr& f) {
    std::ostringstream out;
    print_rec(out, f, 0);
    return out.str();
}

FormulaPtr substitute_order(const FormulaPtr& f, OrderSym from, OrderSym to) {
    if (order_sym_is_successor(from) != order_sym_is_successor(to))
        throw std::invalid_argument("substitute_order: cannot swap an order with a successor");
    if (!f) return f;
    switch (f->kind) {
        case NodeKind::atom:
        case NodeKind::equality:
            return f;
        case NodeKind::order_atom: {
            if (f->order != from) return f;
            auto c = std::make_shared<Formula>(*f);
            c->order = to;
            return c;
        }
        default: {
            auto l = f->lhs ? substitute_order(f->lhs, from, to) : nullptr;
            auto r = f->rhs ? substitute_order(f->rhs, from, to) : nullptr;
            if (l == f->lhs && r == f->rhs) return f;
            auto c = std::make_shared<Formula>(*f);
            c->lhs = std::move(l);
            c->rhs = std::move(r);
            return c;
        }
    }
}

FormulaPtr negate(const FormulaPtr& f) {
    if (has_so_prefix(f))
        throw std::invalid_argument("cannot negate a sentence with an EX2 prefix");
    return Formula::mk_not(f);
}

namespace {
void collect_orders(const FormulaPtr& f, std::set<OrderSym>& out) {
    if (!f) return;
    if (f->kind == NodeKind::order_atom) out.insert(f->order);
    collect_orders(f->lhs, out);
    collect_orders(f->rhs, out);
}
}  // namespace

std::vector<OrderSym> used_order_symbols(const FormulaPtr& f) {
    std::set<OrderSym> s;
    collect_orders(f, s);
    return {s.begin(), s.end()};
}

}  // namespace fo2
