#pragma once

#include "fo2/small_model.hpp"
#include "fo2/structure.hpp"
#include "fo2/types.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fo2 {

// Decision machinery for constraint problems over two linear orders where
// dimension 0 may additionally carry a successor ({suc1,<1,<2} or the
// {<1,<2} reduct). Dimension 0 is the shrinking axis: elements are deleted
// along it and the remainder re-embedded; dimension 1 is re-embedded with
// exact rational coordinates. Throughout, the witness map is the
// per-element, per-existential-constraint choice produced by
// extract_witnesses (entry -1: self-witness, -2: none).

// Local neighbourhood summary of one element ("center") of a solution:
// the center, its dimension-0 successor, capped sets of extremal same-type
// elements below/above the center in dimension 0 (extremal in dimension 1),
// the committed witnesses of those elements on the relevant sides, and the
// far witnesses of the center pair itself. Members are kept in dimension-1
// order. `encoding` is a canonical fingerprint: two profiles are
// isomorphic exactly when their encodings are equal.
struct GridProfile {
    int center = -1;
    std::vector<int> members;        // element ids, sorted by dimension-1 rank
    int center_index = -1;           // center's position in members
    int succ_index = -1;             // position of the dim-0 successor, -1 if absent
    std::vector<unsigned> encoding;  // canonical fingerprint
};

// Computes the profile of `center`. Requires a signature whose dimension 0
// is `both` or `lt_only` and whose dimension 1 is `lt_only`; throws
// std::invalid_argument otherwise or on malformed arguments.
GridProfile compute_profile(const ConstraintProblem& cp, const OrderedStructure& st,
                            const WitnessMap& wit, int center);

// Isomorphism of profiles: a center-preserving bijection respecting unary
// types, both order relations (and dimension-0 adjacency where the
// signature has a successor), binary pair types, and the
// successor-of-center tag. Decided by encoding equality.
bool profiles_isomorphic(const GridProfile& a, const GridProfile& b);

// The unique candidate matching (members aligned by dimension-1 rank).
// Returns, for each member of `a` in dimension-1 order, the matched member
// of `b`; nullopt when the profiles are not isomorphic.
std::optional<std::vector<int>> profile_isomorphism(const GridProfile& a,
                                                    const GridProfile& b);

// Deletes the elements strictly above c1 and weakly below c2 in dimension 0
// (c1 exclusive, c2 inclusive) and re-embeds the rest: dimension-0 ranks are
// compacted, dimension-1 positions of the upper block are transported
// through the profile matching with exact rational interpolation, and pair
// types crossing the cut are reassigned from the witness structure. The
// output is a strictly smaller solution of `cp`; no (sigma, order-type,
// pair-type, sigma) combination absent from the input is introduced.
// Output element ids follow the input order: survivor e becomes the j-th
// output element where j is the number of survivors with id < e.
// Preconditions (std::invalid_argument): st is a solution with witness map
// `wit`, rank1(c1) < rank1(c2), and the two profiles are isomorphic.
// Internal inconsistencies (conflicting pair types, no inheritable type)
// raise std::runtime_error.
OrderedStructure shrink(const ConstraintProblem& cp, const OrderedStructure& st,
                        const WitnessMap& wit, int c1, int c2);

// Smallest-deletion pair of distinct elements with isomorphic profiles:
// returns (c1, c2) with rank1(c1) < rank1(c2) minimizing the deleted-count,
// ties broken by the lower rank; nullopt when all profiles are distinct.
std::optional<std::pair<int, int>> find_shrinkable_pair(const ConstraintProblem& cp,
                                                        const OrderedStructure& st,
                                                        const WitnessMap& wit);

struct GridShrinkResult {
    OrderedStructure structure;
    int iterations = 0;
};

// Applies shrink with find_shrinkable_pair until all profiles are pairwise
// non-isomorphic. Each intermediate structure is re-verified; a failed
// verification raises std::runtime_error.
GridShrinkResult grid_shrink_to_fixpoint(const ConstraintProblem& cp,
                                         const OrderedStructure& st);

enum class GridMode { bounded, complete };

struct GridOptions {
    GridMode mode = GridMode::bounded;
    int n_max = 4;  // size cap for the bounded search
    unsigned long long step_budget = 50'000'000ull;
    // Complete mode needs to search every size up to the profile-class
    // bound; when that bound exceeds size_budget the driver refuses and
    // falls back to the bounded verdict, reporting the bound.
    unsigned long long size_budget = 100'000ull;
};

struct GridDecision {
    SearchStatus status = SearchStatus::exhausted;
    std::optional<OrderedStructure> model;
    // True when exhaustion is a proof of unsatisfiability (complete mode,
    // search ran to the profile-class bound).
    bool complete = false;
    // Complete mode only: the bound exceeded size_budget; `status` then
    // reflects the bounded search up to n_max.
    bool bound_infeasible = false;
    std::string bound;  // decimal profile-class bound (complete mode)
    unsigned long long steps = 0;
};

// Satisfiability driver. Bounded mode enumerates models up to n_max.
// Complete mode computes the small-solution bound B = (profile isomorphism
// class count) + 1 and searches up to B, making `exhausted` a definitive
// UNSAT; B is astronomically large except for trivial signatures, so the
// bound_infeasible fallback is the common outcome.
GridDecision decide_grid_sat(const ConstraintProblem& cp, const GridOptions& opt);

}  // namespace fo2
