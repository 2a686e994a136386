#pragma once

#include "fo2/small_model.hpp"
#include "fo2/types.hpp"

#include <compare>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace fo2 {

// ===========================================================================
// Automaton-based decision procedure for compiled problems over the
// {suc, <} profile. A solution of such a problem is a labeled word: the
// element order is the linear order, unary types are letters, and the
// machinery below tracks just enough counting state to know whether all
// distant witness requirements can be realized.
// ===========================================================================

// How one "distant witness to the left" requirement of the current letter is
// served by the counting machinery of its type pair.
enum class LeftRefKind : unsigned char {
    named,      // points at an earlier position by its ordinal
    pick_link,  // reuses a distant-right demand discharged at this position
    fresh,      // served by a spare position after the distinguished one
};

struct LeftRef {
    LeftRefKind kind = LeftRefKind::named;
    int ordinal = 0;  // meaningful for `named` only
    auto operator<=>(const LeftRef&) const = default;
};

// Discharge of pending distant-right demands at the current letter, for one
// class of demand owners (owners are grouped by their remaining demand set;
// a class member is one owner position). All mature members of every class
// are discharged here except the explicitly withheld ones, which stay
// pending so that this letter's own left demands can still use their
// positions.
struct ResolveBatch {
    int mask = 0;         // remaining demand set identifying the class
    int rest_gamma = -1;  // binary type taken by every unlisted mature member
    int withheld = 0;     // mature members kept pending
    // Binary types taken by exactly one member each; sorted, distinct,
    // disjoint from rest_gamma.
    std::vector<int> exact;
    auto operator<=>(const ResolveBatch&) const = default;
};

// Annotations guessed for one tracked type pair at one letter. The
// distinguished position of the exact-counting analysis is not guessed: the
// machinery declares it at the letter where the pair's first type reaches
// its count bound, which dominates every other placement. Distant-right
// demands are likewise not assigned to future positions in advance; they
// accumulate and are discharged by ResolveBatches when later positions of
// the partner type arrive.
struct PairAnnot {
    // Abandons the exact-counting side of this pair from here on (the
    // richness side may still accept). Emitted only when no regular
    // annotation is possible.
    bool bail = false;
    // Discharges at this letter, sorted by class mask; only letters of the
    // pair's second type after the distinguished position may carry any.
    std::vector<ResolveBatch> resolutions;
    // One reference per distinct "distant witness to the left" binary type
    // demanded at this letter (sorted by binary type).
    std::vector<LeftRef> left_refs;
    auto operator<=>(const PairAnnot&) const = default;
};

// One position of a run: the unary type plus everything the automaton
// guesses about how this position's witness requirements are realized.
struct WordLetter {
    int sigma = 0;
    // Binary type toward the next position; -1 claims this is the last one.
    int gamma_next = -1;
    // One chosen witness configuration per applicable constraint
    // (constraints the unary type cannot satisfy with itself), aligned with
    // WordNfa::applicable(sigma).
    std::vector<WitnessOption> intents;
    // Aligned with WordNfa::tracked_pair indices.
    std::vector<PairAnnot> annots;
    auto operator<=>(const WordLetter&) const = default;
};

// The automaton itself: letter alphabet and precomputed tables. States are
// managed internally by the search functions.
class WordNfa {
public:
    // `k_override`, when given, must be a multiple of 3 with
    // k >= 3 * num_binary_types (smaller blocks would not leave room for
    // the decoder); the default is 3 * (num_binary_types + 3). The problem
    // must be over the {suc, <} profile.
    explicit WordNfa(ConstraintProblem cp,
                     std::optional<int> k_override = std::nullopt);

    const ConstraintProblem& problem() const { return cp_; }
    const TypeTable& types() const { return *cp_.types; }
    int k() const { return k_; }

    // Type pairs with at least one distant witness option; only these need
    // counting machinery.
    int num_tracked_pairs() const { return static_cast<int>(pairs_.size()); }
    std::pair<int, int> tracked_pair(int p) const { return pairs_[p]; }
    int pair_index(int sigma, int tau) const;  // -1 when untracked

    // Constraints whose witness cannot be the element itself for this
    // unary type; letters carry one witness option per entry.
    const std::vector<int>& applicable(int sigma) const {
        return applicable_[sigma];
    }

    // True when some binary type is admissible on a distant pair
    // (sigma before tau); distant pairs of a solution can always be
    // back-filled exactly when this holds.
    bool far_fill_ok(int sigma, int tau) const;

private:
    ConstraintProblem cp_;
    int k_;
    std::vector<std::pair<int, int>> pairs_;
    std::vector<int> pair_index_;
    std::vector<std::vector<int>> applicable_;
    std::vector<char> far_ok_;
};

enum class WordStatus { nonempty, empty, budget };

struct WordSearchResult {
    WordStatus status = WordStatus::empty;
    std::vector<WordLetter> word;  // shortest accepted word when nonempty
    unsigned long long states = 0;  // distinct automaton states created
};

// Breadth-first emptiness check; returns the canonical shortest accepted
// word. `budget` caps the number of distinct states.
WordSearchResult shortest_accepted(const WordNfa& nfa,
                                   unsigned long long budget = 200'000ull);

// Same search restricted to words with the given unary-type sequence.
WordSearchResult accepts_labeling(const WordNfa& nfa,
                                  const std::vector<int>& sigmas,
                                  unsigned long long budget = 200'000ull);

// Rebuilds a concrete structure from an accepted word and verifies it
// against the compiled problem; a verification failure indicates a solver
// bug and raises std::runtime_error.
OrderedStructure decode_word(const WordNfa& nfa,
                             const std::vector<WordLetter>& word);

// ===========================================================================
// Witness surgery on concrete solutions (element order == position order).
// ===========================================================================

struct RewireResult {
    OrderedStructure st;
    // The kernel: boundary positions per unary type plus their witnesses,
    // sorted ascending. After rewiring, every witness is local (itself or a
    // neighbour) or lies in the kernel.
    std::vector<int> kernel;
    // Chosen witness per element and constraint (-1 self, -2 none).
    std::vector<std::vector<int>> witnesses;
    bool changed = false;
};

// Redirects distant witnesses of a solution into boundary blocks wherever a
// type pair occurs richly, reusing only pair configurations already present.
// Requires rank1 to be the identity. The result is verified; failures raise
// std::runtime_error.
RewireResult rewire_witnesses(const ConstraintProblem& cp,
                              const OrderedStructure& st);

// Removes the interval (a1, a2] from a solution whose witnesses are local or
// inside `kernel`. Preconditions (std::invalid_argument on violation):
// a1 < a2, neither in the kernel, no kernel element strictly between them,
// equal unary types, both followed by a successor, and equal binary types
// toward those successors. The surviving pair (a1, old successor of a2)
// inherits the binary type a1 had toward its old successor.
OrderedStructure shrink_pair(const ConstraintProblem& cp,
                             const OrderedStructure& st,
                             const std::vector<int>& kernel, int a1, int a2);

struct ShrinkResult {
    OrderedStructure st;
    std::vector<int> kernel;  // kernel positions in the final numbering
    int rounds = 0;           // shrink steps performed
};

// rewire_witnesses followed by repeated shrink_pair steps on matching
// position pairs until none is left. Every intermediate structure is
// verified to remain a solution.
ShrinkResult shrink_to_fixpoint(const ConstraintProblem& cp,
                                const OrderedStructure& st);

// Size bound guaranteed for the fixpoint: no larger solution survives the
// shrinking loop with a kernel of the given size.
std::size_t shrink_size_bound(std::size_t kernel_size, std::size_t num_sigma,
                              std::size_t num_gamma);

}  // namespace fo2
