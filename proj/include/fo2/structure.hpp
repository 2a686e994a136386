#pragma once

#include "fo2/formula.hpp"

#include <string>
#include <vector>

namespace fo2 {

// A finite structure over a validated signature. Elements are 0..size-1.
// The structure always carries one or two underlying linear orders, stored
// as rank vectors (rank r means "r-th smallest"); the successor relations
// are the ones induced by those orders. The second order is meaningful only
// for signatures using suc2/<2 but is always stored.
class OrderedStructure {
public:
    OrderedStructure(Signature sig, int n);

    int size() const { return n_; }
    const Signature& signature() const { return sig_; }
    bool bidimensional() const;

    bool unary(int sym, int a) const;
    bool binary(int sym, int a, int b) const;
    bool unary(const std::string& sym, int a) const;
    bool binary(const std::string& sym, int a, int b) const;
    void set_unary(int sym, int a, bool v);
    void set_binary(int sym, int a, int b, bool v);

    int rank1(int a) const { return rank1_[a]; }
    int rank2(int a) const { return rank2_[a]; }
    // `ranks` must be a permutation of 0..n-1.
    void set_order1(const std::vector<int>& ranks);
    void set_order2(const std::vector<int>& ranks);
    // Element with the given rank (inverse of rank1/rank2).
    int element_at_rank1(int r) const;
    int element_at_rank2(int r) const;

    // Evaluates an order atom directly from the rank vectors; the symbol
    // need not be part of the signature.
    bool order_holds(OrderSym s, int a, int b) const;

    // Tarskian truth of a sentence. A second-order prefix is evaluated by
    // exhaustive search over the quantified relations; throws
    // std::runtime_error when that search space exceeds the oracle scale.
    bool eval(const FormulaPtr& sentence) const;
    // Truth under an explicit assignment; pass -1 for an unused variable.
    bool eval(const FormulaPtr& f, int ax, int ay) const;

    std::string to_json() const;

private:
    Signature sig_;
    int n_;
    std::vector<std::vector<char>> unary_;   // [sym][elem]
    std::vector<std::vector<char>> binary_;  // [sym][a*n+b]
    std::vector<int> rank1_, rank2_;
};

}  // namespace fo2
