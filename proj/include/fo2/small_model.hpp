#pragma once

#include "fo2/types.hpp"

#include <optional>

namespace fo2 {

enum class SearchStatus { found, exhausted, budget };

struct FindResult {
    SearchStatus status = SearchStatus::exhausted;
    std::optional<OrderedStructure> model;
    unsigned long long steps = 0;  // search steps actually spent
};

// Deterministic smallest-first search for a concrete model of a compiled
// problem, trying sizes 1..max_size. The first underlying order is fixed to
// the element order; the second is enumerated when the profile uses it.
// Returns the first model of the canonical enumeration, so results are
// reproducible. `budget` caps the number of search steps across all sizes.
FindResult find_model(const ConstraintProblem& cp, int max_size,
                      unsigned long long budget = 50'000'000ull);

// Single-size variant (used by the parallel search driver).
FindResult find_model_of_size(const ConstraintProblem& cp, int n,
                              unsigned long long budget);

struct CheckReport {
    bool ok = true;
    std::vector<std::string> violations;
};

// Validates a concrete structure against a compiled problem: all unary types
// allowed, no forbidden pair configuration, every witness requirement met.
CheckReport check_solution(const ConstraintProblem& cp, const OrderedStructure& st);

// Committed witness choices: entry [elem][constraint] is a witness element,
// -1 for a self-witness, -2 when none exists.
using WitnessMap = std::vector<std::vector<int>>;

// For each element and witness requirement: the smallest witness element,
// -1 when the element witnesses itself, -2 when none exists.
WitnessMap extract_witnesses(const ConstraintProblem& cp,
                             const OrderedStructure& st);

// Number of elements b != elem of unary type sigma with a smaller (larger)
// rank than elem in the given order dimension.
int count_type_before(const TypeTable& tt, const OrderedStructure& st, int elem,
                      int sigma, int dim);
int count_type_after(const TypeTable& tt, const OrderedStructure& st, int elem,
                     int sigma, int dim);

}  // namespace fo2
