#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fo2 {

// ===========================================================================
// Linearly ordered data words and the two-component automata that read them.
//
// A data word is a sequence of (letter, data value) pairs whose data values
// are pairwise distinct and form a contiguous interval of naturals. It
// represents a structure with two successor-like dimensions: positions give
// the first successor, data values give the second order and its successor.
//
// A machine is a pair (B, C): B is a nondeterministic length-preserving
// relabeling transducer reading the marked string projection in position
// order, C is a finite automaton reading the relabeled letters re-sorted by
// ascending data value. A word is accepted when some B-run is accepting and
// C accepts the resorting of the output word that run produces.
// ===========================================================================

// One data-word position.
class DataWord {
public:
    // Validates: nonempty, data values >= 0, pairwise distinct, contiguous.
    explicit DataWord(std::vector<std::pair<int, int>> letters);

    int size() const { return static_cast<int>(letters_.size()); }
    int letter(int i) const { return letters_[i].first; }
    int data(int i) const { return letters_[i].second; }
    const std::vector<std::pair<int, int>>& letters() const { return letters_; }

    // 0-based rank of data(i) among all data values.
    int data_rank(int i) const { return rank_[i]; }
    // Positions sorted by ascending data value.
    const std::vector<int>& positions_by_data() const { return by_data_; }

    bool operator==(const DataWord& o) const { return letters_ == o.letters_; }

private:
    std::vector<std::pair<int, int>> letters_;
    std::vector<int> rank_;
    std::vector<int> by_data_;
};

// How a neighboring position's data value compares to this one's:
// far below (< d-1), exactly d-1, exactly d+1, far above (> d+1), or no
// neighbor (first/last position).
enum class Mark : std::uint8_t { minus_inf, minus_one, plus_one, plus_inf, edge };

// Data comparison toward the positional predecessor (`before`) and
// successor (`after`).
struct Marking {
    Mark before = Mark::edge;
    Mark after = Mark::edge;
    auto operator<=>(const Marking&) const = default;
};

constexpr int kNumMarkings = 25;
int marking_index(Marking m);

struct MarkedLetter {
    int letter = 0;
    Marking mark;
    auto operator<=>(const MarkedLetter&) const = default;
};

// The letter sequence annotated with data comparisons toward both
// positional neighbors.
std::vector<MarkedLetter> marked_string_projection(const DataWord& w);

// The letter sequence re-sorted by ascending data value.
std::vector<int> resorting(const DataWord& w);

// ASCII renderings: marks as "-oo", "-1", "+1", "+oo", "-".
std::string mark_to_string(Mark m);
// "(tau,(-,+1))(delta,(-1,-oo))..." using the given letter names.
std::string msp_to_string(const std::vector<MarkedLetter>& msp,
                          const std::vector<std::string>& names);
// Letter names joined by single spaces.
std::string letters_to_string(const std::vector<int>& letters,
                              const std::vector<std::string>& names);
// "(tau,5) (delta,6) ..." and its parser (whitespace tolerant).
std::string data_word_to_string(const DataWord& w,
                                const std::vector<std::string>& names);
DataWord parse_data_word(const std::string& text,
                         const std::vector<std::string>& names);

// Abstract machine: input alphabet size plus exact acceptance.
class Loda {
public:
    virtual ~Loda() = default;
    virtual int num_letters() const = 0;
    virtual bool accepts(const DataWord& w) const = 0;
    // Emptiness-search hint: may any accepted word start with this letter
    // sequence? Must never reject viable prefixes.
    virtual bool prefix_viable(const std::vector<int>& letters) const {
        (void)letters;
        return true;
    }
};

// Explicit tabular machine. B-rules fire on (state, input letter, marking);
// letter or mark may be -1 to match anything. C-rules fire on
// (state, output letter).
struct BRule {
    int from = 0;
    int letter = -1;
    int mark = -1;  // marking_index or -1
    int out = 0;
    int to = 0;
};
struct CRule {
    int from = 0;
    int letter = 0;
    int to = 0;
};

class TableLoda final : public Loda {
public:
    int num_in = 0, num_out = 0;
    int b_states = 0, c_states = 0;
    std::vector<int> b_initial, b_accepting;
    std::vector<int> c_initial, c_accepting;
    std::vector<BRule> b_rules;
    std::vector<CRule> c_rules;

    int num_letters() const override { return num_in; }
    // Exact two-component semantics: search over B-runs, then simulate C on
    // the resorting of the produced relabeling.
    bool accepts(const DataWord& w) const override;
    // Prunes via B-state reachability with markings ignored.
    bool prefix_viable(const std::vector<int>& letters) const override;
};

// Raises std::invalid_argument when a letter is outside the machine's
// input alphabet; otherwise exact acceptance.
bool run(const Loda& m, const DataWord& w);

// Shortest-first exhaustive search over data words (letters lexicographic,
// then data permutations lexicographic, values 1..n): returns the first
// accepted word, or nullopt when none exists up to len_max. The latter is
// explicitly not a proof of emptiness. `budget` caps the number of
// candidate words; exceeding it raises std::runtime_error.
std::optional<DataWord> emptiness_bounded(const Loda& m, int len_max,
                                          unsigned long long budget = 50'000'000ull);

// Hand-built example machine over letters {sigma, tau, delta} (0, 1, 2):
// accepts words with a unique sigma-position that has a tau-position to its
// right carrying the next data value. B marks that tau-position with a
// fresh output letter; C checks the mark sits right after sigma in data
// order.
TableLoda unique_successor_pair_example();
const std::vector<std::string>& example_letter_names();  // {"sigma","tau","delta"}

}  // namespace fo2
