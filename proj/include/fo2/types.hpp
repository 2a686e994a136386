#pragma once

#include "fo2/formula.hpp"
#include "fo2/structure.hpp"

#include <memory>
#include <string>
#include <vector>

namespace fo2 {

struct ScottForm;

// How a dimension of the order profile can relate two distinct elements.
enum class DimKind : uint8_t { absent, lt_only, suc_only, both };

// Descriptor digits per DimKind. A full order type is the composition of one
// digit per present dimension (dimension 0 major).
enum : int { kBothLtNext = 0, kBothGtNext = 1, kBothLtFar = 2, kBothGtFar = 3 };
enum : int { kLtLt = 0, kLtGt = 1 };
enum : int { kSucNext = 0, kSucPrev = 1, kSucNone = 2 };

// Enumerations of the atomic 1- and 2-element configurations over a
// signature: unary types (truth of every P(x) and R(x,x)), binary types
// (truth of every R(x,y) and R(y,x) for distinct x, y), and order types
// (how the underlying orders relate two distinct elements).
class TypeTable {
public:
    explicit TypeTable(Signature sig);

    const Signature& signature() const { return sig_; }
    int num_unary_symbols() const { return u_; }
    int num_binary_symbols() const { return b_; }
    int num_unary_types() const { return 1 << (u_ + b_); }
    int num_binary_types() const { return 1 << (2 * b_); }
    int num_order_types() const { return d_count_; }

    DimKind dim_kind(int dim) const { return kind_[dim]; }
    int dim_digit_count(int dim) const;

    bool sigma_unary(int sigma, int usym) const { return (sigma >> usym) & 1; }
    bool sigma_loop(int sigma, int bsym) const { return (sigma >> (u_ + bsym)) & 1; }
    std::string sigma_name(int sigma) const;

    bool gamma_fwd(int gamma, int bsym) const { return (gamma >> (2 * bsym)) & 1; }
    bool gamma_bwd(int gamma, int bsym) const { return (gamma >> (2 * bsym + 1)) & 1; }
    int gamma_reverse(int gamma) const;
    std::string gamma_name(int gamma) const;

    int order_digit(int d, int dim) const;
    int order_compose(int digit0, int digit1) const;
    int order_reverse(int d) const;
    std::string order_name(int d) const;
    // Truth of the order atom `s(x,y)` (or `s(y,x)` when `swapped`) between
    // distinct elements related as described by d.
    bool order_atom_holds(int d, OrderSym s, bool swapped) const;

    // Quantifier-free evaluation over an abstract configuration: x of type
    // sigma_x, y of type sigma_y, distinct, related by d and gamma.
    bool eval_pair(const FormulaPtr& qf, int sigma_x, int d, int gamma,
                   int sigma_y) const;
    // Quantifier-free evaluation with y = x of type sigma.
    bool eval_diag(const FormulaPtr& qf, int sigma) const;

    // Extraction from a concrete structure (same signature).
    int sigma_of(const OrderedStructure& st, int elem) const;
    int gamma_of(const OrderedStructure& st, int a, int b) const;
    int order_type_of(const OrderedStructure& st, int a, int b) const;

    // Writing types into a concrete structure.
    void apply_sigma(OrderedStructure& st, int elem, int sigma) const;
    void apply_gamma(OrderedStructure& st, int a, int b, int gamma) const;

private:
    Signature sig_;
    int u_, b_;
    DimKind kind_[2];
    int d_count_;
};

// An admissible witness configuration: the witness has unary type tau and
// relates to the constrained element by order type d and binary type gamma.
struct WitnessOption {
    int d, gamma, tau;
    auto operator<=>(const WitnessOption&) const = default;
};

// The compiled form of a normal-form sentence: which unary types may occur,
// which pair configurations are forbidden by the universal core, and which
// witness configurations satisfy each witness requirement.
class ConstraintProblem {
public:
    std::shared_ptr<const TypeTable> types;
    std::vector<char> allowed;  // [sigma]

    int num_constraints() const { return static_cast<int>(options_.size()); }
    bool sigma_allowed(int sigma) const { return allowed[sigma] != 0; }
    bool no_allowed_sigma() const;

    // True when the configuration (or its reverse orientation) violates the
    // universal core.
    bool pair_bad(int sigma, int d, int gamma, int tau) const {
        return bad_[((static_cast<std::size_t>(sigma) * dcount_ + d) * gcount_ + gamma) *
                        scount_ + tau] != 0;
    }

    bool self_ok(int i, int sigma) const {
        return selfok_[static_cast<std::size_t>(i) * scount_ + sigma] != 0;
    }
    const std::vector<WitnessOption>& witness_options(int i, int sigma) const {
        return options_[i][sigma];
    }

    // Canonical human-readable rendering; stable across runs.
    std::string dump() const;

    friend ConstraintProblem compile(const ScottForm& sf);

private:
    int scount_ = 0, gcount_ = 0, dcount_ = 0;
    std::vector<char> bad_;     // both orientations folded
    std::vector<char> selfok_;  // [i][sigma]
    std::vector<std::vector<std::vector<WitnessOption>>> options_;  // [i][sigma]
};

// Compiles a normal-form sentence into a constraint problem, pruning witness
// options that would violate the universal core and iteratively dropping
// unary types left without witnesses.
ConstraintProblem compile(const ScottForm& sf);

}  // namespace fo2
