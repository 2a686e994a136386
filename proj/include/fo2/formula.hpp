#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fo2 {

// Order symbols supported on ordered structures. A signature may use the
// unindexed pair {suc, <} or a subset of one of the indexed profiles.
enum class OrderSym : uint8_t { suc, lt, suc1, lt1, suc2, lt2 };

const char* order_sym_name(OrderSym s);
std::optional<OrderSym> order_sym_from_name(const std::string& name);
bool order_sym_is_successor(OrderSym s);

// Which dimension (0 or 1) an order symbol talks about. The unindexed
// suc/< live in dimension 0.
int order_sym_dim(OrderSym s);

struct Signature {
    std::vector<std::string> unary_symbols;
    std::vector<std::string> binary_symbols;
    std::vector<OrderSym> order_symbols;  // sorted, duplicate-free

    bool has_unary(const std::string& n) const;
    bool has_binary(const std::string& n) const;
    bool has_order(OrderSym s) const;
    int unary_index(const std::string& n) const;   // -1 if absent
    int binary_index(const std::string& n) const;  // -1 if absent

    // Throws std::invalid_argument on duplicate names or an unsupported
    // order-symbol combination.
    void validate() const;
};

enum class Var : uint8_t { x, y };
inline Var other(Var v) { return v == Var::x ? Var::y : Var::x; }
inline const char* var_name(Var v) { return v == Var::x ? "x" : "y"; }

enum class NodeKind : uint8_t {
    atom,      // P(v) or R(v,w); `symbol` names a declared T-symbol
    order_atom,// order symbol applied to (v, w)
    equality,  // v = w
    neg,
    conj,
    disj,
    implies,
    forall,
    exists,
    so_exists, // second-order prefix EX2 R/2, Q/1. phi  (root only)
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct SoDecl {
    std::string name;
    int arity = 1;
    bool operator==(const SoDecl&) const = default;
};

// Immutable AST node. Shared subtrees are fine; transforms build fresh spines.
struct Formula {
    NodeKind kind;
    std::string symbol;           // atom relation name
    int arity = 1;                // atom only (distinguishes P(x) from R(x,x))
    OrderSym order = OrderSym::lt;// order_atom only
    Var v1 = Var::x, v2 = Var::x; // atom/equality arguments, quantified var in v1
    FormulaPtr lhs, rhs;          // children (lhs only for unary nodes)
    std::vector<SoDecl> so_decls; // so_exists only

    static FormulaPtr mk_atom1(std::string sym, Var v);
    static FormulaPtr mk_atom2(std::string sym, Var a, Var b);
    static FormulaPtr mk_order(OrderSym s, Var a, Var b);
    static FormulaPtr mk_eq(Var a, Var b);
    static FormulaPtr mk_not(FormulaPtr f);
    static FormulaPtr mk_and(FormulaPtr a, FormulaPtr b);
    static FormulaPtr mk_or(FormulaPtr a, FormulaPtr b);
    static FormulaPtr mk_implies(FormulaPtr a, FormulaPtr b);
    static FormulaPtr mk_forall(Var v, FormulaPtr f);
    static FormulaPtr mk_exists(Var v, FormulaPtr f);
    static FormulaPtr mk_so_exists(std::vector<SoDecl> decls, FormulaPtr f);
};

bool ast_equal(const FormulaPtr& a, const FormulaPtr& b);
bool is_quantifier_free(const FormulaPtr& f);
bool has_so_prefix(const FormulaPtr& f);
std::size_t ast_size(const FormulaPtr& f);

struct ParseError : std::runtime_error {
    std::size_t position;
    ParseError(std::string msg, std::size_t pos)
        : std::runtime_error(std::move(msg)), position(pos) {}
};

struct ParseResult {
    FormulaPtr formula;
    Signature signature;  // declared-or-inferred signature
};

// Parses one sentence. When `declared` is given, every symbol must belong to
// it; otherwise the signature is inferred from the atoms (arity from use).
// Rejects: syntax errors, a third variable, arity mismatches, undeclared
// symbols, free variables, and a non-root second-order prefix.
ParseResult parse(const std::string& text,
                  const std::optional<Signature>& declared = std::nullopt);

std::string pretty_print(const FormulaPtr& f);

// Rewrites every atom over `from` to `to`. Both must be of the same kind
// (order<->order, successor<->successor); throws std::invalid_argument else.
FormulaPtr substitute_order(const FormulaPtr& f, OrderSym from, OrderSym to);

// Outer negation. Rejects sentences with a second-order prefix.
FormulaPtr negate(const FormulaPtr& f);

// Collects the order symbols actually used in f.
std::vector<OrderSym> used_order_symbols(const FormulaPtr& f);

}  // namespace fo2
