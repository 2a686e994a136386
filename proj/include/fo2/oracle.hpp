#pragma once

#include "fo2/structure.hpp"

#include <optional>

namespace fo2 {

// Exhaustive reference search for a model of `sentence` over `sig`, trying
// sizes 1..max_size. The first underlying order is fixed to the element
// order, which is sound for satisfiability: every model is isomorphic to one
// whose first order lists the elements in place. Deterministic: returns the
// first model of a fixed canonical enumeration (sizes ascending, then the
// second order, then unary labels, then binary relations). Intentionally
// unoptimized; throws std::runtime_error when a size would exceed the
// feasible scale.
std::optional<OrderedStructure> oracle_find_model(const FormulaPtr& sentence,
                                                  const Signature& sig,
                                                  int max_size);

}  // namespace fo2
