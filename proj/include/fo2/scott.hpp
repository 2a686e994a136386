#pragma once

#include "fo2/formula.hpp"

namespace fo2 {

// A sentence in normal form: one universally quantified quantifier-free core
// plus a list of witness requirements,
//     A x. A y. universal  &  (A x. E y. existentials[0])  &  ...
// Produced by to_scott; satisfiability is preserved size-for-size.
struct ScottForm {
    FormulaPtr universal;                  // quantifier-free over x, y
    std::vector<FormulaPtr> existentials;  // quantifier-free over x, y
    Signature signature;                   // input symbols + second-order
                                           // symbols + helper symbols
    std::vector<std::string> fresh_symbols;

    // The normal form reassembled as a single sentence.
    FormulaPtr sentence() const;
};

// Converts a sentence (optionally with an EX2 prefix, which is absorbed into
// the signature) into normal form. Sentences that already are conjunctions of
// shaped conjuncts pass through without helper symbols; otherwise quantified
// subformulas are replaced inside-out by fresh unary helper relations whose
// defining axioms become additional conjuncts. The result has a model of
// size n exactly when the input does.
ScottForm to_scott(const FormulaPtr& sentence, const Signature& sig);

// Swaps the variables x and y in a quantifier-free formula.
FormulaPtr swap_vars(const FormulaPtr& f);

}  // namespace fo2
