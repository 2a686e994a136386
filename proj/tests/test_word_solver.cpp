#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fo2/scott.hpp"
#include "fo2/small_model.hpp"
#include "fo2/word_solver.hpp"

#include <algorithm>
#include <cstdlib>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

using namespace fo2;

namespace {

Signature word_sig(std::vector<std::string> un = {},
                   std::vector<std::string> bi = {}) {
    Signature s;
    s.unary_symbols = std::move(un);
    s.binary_symbols = std::move(bi);
    s.order_symbols = {OrderSym::suc, OrderSym::lt};
    return s;
}

ConstraintProblem compile_word(const std::string& text,
                               std::vector<std::string> un = {},
                               std::vector<std::string> bi = {}) {
    auto r = parse(text, word_sig(std::move(un), std::move(bi)));
    return compile(to_scott(r.formula, r.signature));
}

// A structure over the problem's signature with the given unary types,
// element order equal to position order, and no binary edges yet.
OrderedStructure make_labeled(const ConstraintProblem& cp,
                              const std::vector<int>& sigmas) {
    OrderedStructure st(cp.types->signature(),
                        static_cast<int>(sigmas.size()));
    for (std::size_t i = 0; i < sigmas.size(); ++i)
        cp.types->apply_sigma(st, static_cast<int>(i), sigmas[i]);
    return st;
}

bool in_sorted(const std::vector<int>& v, int x) {
    return std::binary_search(v.begin(), v.end(), x);
}

// Whether `w` is a legitimate witness for constraint `j` of element `e`.
bool witness_valid(const ConstraintProblem& cp, const OrderedStructure& st,
                   int e, int j, int w) {
    const TypeTable& tt = *cp.types;
    const int se = tt.sigma_of(st, e);
    if (w == e) return false;
    WitnessOption o{tt.order_type_of(st, e, w), tt.gamma_of(st, e, w),
                    tt.sigma_of(st, w)};
    const auto& opts = cp.witness_options(j, se);
    return std::find(opts.begin(), opts.end(), o) != opts.end();
}

}  // namespace

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

TEST_CASE("automaton requires the word profile and a valid block size") {
    const ConstraintProblem cp0 = compile_word("A x. A y. x = x");
    CHECK_NOTHROW(WordNfa{cp0});
    CHECK_NOTHROW(WordNfa(cp0, 3));
    CHECK(WordNfa(cp0).k() == 12);      // 3 * (binary types + 3), one type
    CHECK(WordNfa(cp0, 3).k() == 3);
    CHECK_THROWS_AS(WordNfa(cp0, 4), std::invalid_argument);   // not * of 3
    CHECK_THROWS_AS(WordNfa(cp0, 0), std::invalid_argument);
    CHECK_THROWS_AS(WordNfa(cp0, -3), std::invalid_argument);
    CHECK_THROWS_AS(WordNfa(cp0, 63), std::invalid_argument);  // count cap

    const ConstraintProblem cp1 =
        compile_word("A x. A y. x = x", {}, {"R"});  // four binary types
    CHECK(WordNfa(cp1).k() == 21);
    CHECK_NOTHROW(WordNfa(cp1, 12));
    CHECK_THROWS_AS(WordNfa(cp1, 3), std::invalid_argument);  // below 3*|G|

    // Wrong order profile.
    Signature grid;
    grid.order_symbols = {OrderSym::lt1, OrderSym::lt2};
    auto r = parse("A x. A y. x = x", grid);
    const ConstraintProblem cpg = compile(to_scott(r.formula, r.signature));
    CHECK_THROWS_AS(WordNfa{cpg}, std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Emptiness and shortest words
// ---------------------------------------------------------------------------

TEST_CASE("unconstrained sentences have a one-letter witness") {
    const ConstraintProblem cp = compile_word("A x. A y. x = x");
    const WordNfa nfa(cp);
    const WordSearchResult r = shortest_accepted(nfa);
    REQUIRE(r.status == WordStatus::nonempty);
    CHECK(r.word.size() == 1);
    const OrderedStructure st = decode_word(nfa, r.word);  // self-verifying
    CHECK(st.size() == 1);
}

TEST_CASE("forbidding all distant pairs caps words at two letters") {
    const ConstraintProblem cp =
        compile_word("A x. A y. ~(x < y & ~suc(x,y))");
    const WordNfa nfa(cp);

    const WordSearchResult r = shortest_accepted(nfa);
    REQUIRE(r.status == WordStatus::nonempty);
    CHECK(r.word.size() == 1);

    CHECK(accepts_labeling(nfa, {0, 0}).status == WordStatus::nonempty);
    CHECK(accepts_labeling(nfa, {0, 0, 0}).status == WordStatus::empty);

    // The brute-force search agrees size three is where models stop.
    CHECK(find_model_of_size(cp, 2, 1'000'000).status ==
          SearchStatus::found);
    CHECK(find_model_of_size(cp, 3, 1'000'000).status ==
          SearchStatus::exhausted);
}

TEST_CASE("remote witness requirements force three positions") {
    const ConstraintProblem cp = compile_word(
        "(A x. E y. P(x) -> (x < y & ~suc(x,y) & Q(y))) & (A x. E y. P(y))",
        {"P", "Q"});
    const WordNfa nfa(cp);

    const WordSearchResult r = shortest_accepted(nfa);
    REQUIRE(r.status == WordStatus::nonempty);
    CHECK(r.word.size() == 3);
    const OrderedStructure st = decode_word(nfa, r.word);
    CHECK(st.size() == 3);
    CHECK(check_solution(cp, st).ok);

    const FindResult fm = find_model(cp, 5);
    REQUIRE(fm.status == SearchStatus::found);
    CHECK(fm.model->size() == 3);

    // The canonical search is deterministic.
    CHECK(shortest_accepted(nfa).word == r.word);
}

TEST_CASE("a tiny state budget is reported as such") {
    const ConstraintProblem cp = compile_word(
        "(A x. E y. P(x) -> (x < y & ~suc(x,y) & Q(y))) & (A x. E y. P(y))",
        {"P", "Q"});
    const WordNfa nfa(cp);
    const WordSearchResult r = shortest_accepted(nfa, 2);
    CHECK(r.status == WordStatus::budget);
    CHECK(r.word.empty());
    CHECK(r.states > 2);
}

// ---------------------------------------------------------------------------
// Exact counting vs. plentiful types (small block size to make both sides
// reachable by hand-sized words)
// ---------------------------------------------------------------------------

namespace {
const char* kSplitText =
    "(A x. A y. ~(~P(x) & x < y & P(y)))"
    " & (A x. E y. ~P(x) | (x < y & ~suc(x,y) & ~P(y)))"
    " & (A x. E y. P(x) | (y < x & ~suc(y,x) & P(y)))";
}

TEST_CASE("minimal split model matches the brute-force search") {
    const ConstraintProblem cp = compile_word(kSplitText, {"P"});
    const FindResult fm = find_model(cp, 6);
    REQUIRE(fm.status == SearchStatus::found);
    CHECK(fm.model->size() == 4);

    for (int k : {12, 3}) {
        const WordNfa nfa(cp, k);
        const WordSearchResult r = shortest_accepted(nfa);
        REQUIRE(r.status == WordStatus::nonempty);
        CHECK(r.word.size() == 4);
        CHECK(decode_word(nfa, r.word).size() == 4);
    }
}

TEST_CASE("letters beyond the count bound pass only by plenty") {
    const ConstraintProblem cp = compile_word(kSplitText, {"P"});
    const WordNfa nfa(cp, 3);  // count bound k+1 = 4 per tracked type

    // Six P's need six distant non-P's to the right; with only four
    // countable ones the pair must occur plentifully -- and does.
    const std::vector<int> rich(
        {1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0});
    const WordSearchResult acc = accepts_labeling(nfa, rich);
    REQUIRE(acc.status == WordStatus::nonempty);
    CHECK(acc.word.size() == rich.size());
    const OrderedStructure st = decode_word(nfa, acc.word);
    CHECK(st.size() == 12);
    CHECK(check_solution(cp, st).ok);

    // With a single non-P at the end neither analysis can account for the
    // six pending requirements.
    const std::vector<int> starved({1, 1, 1, 1, 1, 1, 0});
    CHECK(accepts_labeling(nfa, starved).status == WordStatus::empty);
}

// ---------------------------------------------------------------------------
// Agreement with the exhaustive model search on a formula battery
// ---------------------------------------------------------------------------

TEST_CASE("shortest accepted words match exhaustive minimal models") {
    struct Probe {
        const char* text;
        std::vector<std::string> un;
        std::vector<std::string> bi;
        int minimal;  // 0: no models at all
    };
    const std::vector<Probe> probes = {
        {"A x. A y. x = x", {}, {}, 1},
        {"E x. P(x)", {"P"}, {}, 1},
        {"A x. E y. suc(x,y)", {}, {}, 0},
        {"A x. E y. suc(x,y) | suc(y,x)", {}, {}, 2},
        {"A x. E y. x < y & P(y)", {"P"}, {}, 0},
        {"E x. A y. x = y | x < y", {}, {}, 1},
        {"(A x. E y. P(x) -> (x < y & Q(y))) & (E x. P(x))",
         {"P", "Q"}, {}, 2},
        {"A x. E y. (P(x) & ~P(y)) | (~P(x) & P(y))", {"P"}, {}, 2},
        {"(A x. A y. ~(P(x) & P(y) & x < y)) & (E x. P(x))", {"P"}, {}, 1},
        {"A x. E y. R(x,y) & ~(x = y)", {}, {"R"}, 2},
    };

    for (const Probe& pr : probes) {
        CAPTURE(pr.text);
        const ConstraintProblem cp = compile_word(pr.text, pr.un, pr.bi);
        // The tightest legal block size keeps the certified-empty searches
        // small.
        const WordNfa nfa(cp, 3 * cp.types->num_binary_types());
        const WordSearchResult r = shortest_accepted(nfa);
        const FindResult fm = find_model(cp, 6);
        if (pr.minimal == 0) {
            CHECK(r.status == WordStatus::empty);
            CHECK(fm.status == SearchStatus::exhausted);
        } else {
            REQUIRE(r.status == WordStatus::nonempty);
            CHECK(static_cast<int>(r.word.size()) == pr.minimal);
            REQUIRE(fm.status == SearchStatus::found);
            CHECK(fm.model->size() == pr.minimal);
            CHECK(decode_word(nfa, r.word).size() == pr.minimal);
        }
    }
}

// ---------------------------------------------------------------------------
// Witness rewiring
// ---------------------------------------------------------------------------

namespace {
const char* kNeedsLaterQ = "A x. E y. ~P(x) | (x < y & ~suc(x,y) & Q(y))";
}

TEST_CASE("rewiring redirects plentiful distant witnesses into the kernel") {
    const ConstraintProblem cp = compile_word(kNeedsLaterQ, {"P", "Q"});
    // Five P's, a long plain middle, five Q's: the (P, Q) pair is plentiful.
    std::vector<int> sig(30, 0);
    for (int i = 0; i < 5; ++i) sig[static_cast<std::size_t>(i)] = 1;
    for (int i = 25; i < 30; ++i) sig[static_cast<std::size_t>(i)] = 2;
    const OrderedStructure st = make_labeled(cp, sig);
    REQUIRE(check_solution(cp, st).ok);

    const RewireResult rw = rewire_witnesses(cp, st);
    CHECK(rw.changed);
    CHECK(check_solution(cp, rw.st).ok);
    // Without binary symbols rewiring never touches the structure itself.
    CHECK(rw.st.to_json() == st.to_json());
    // Block placement: the first three P's spread over the last three Q's,
    // the remaining ones take the very last Q.
    CHECK(rw.witnesses[0][0] == 27);
    CHECK(rw.witnesses[1][0] == 28);
    CHECK(rw.witnesses[2][0] == 29);
    CHECK(rw.witnesses[3][0] == 29);
    CHECK(rw.witnesses[4][0] == 29);
    for (int e = 0; e < 30; ++e)
        for (std::size_t j = 0; j < rw.witnesses[e].size(); ++j) {
            const int w = rw.witnesses[static_cast<std::size_t>(e)][j];
            if (w < 0) continue;
            CHECK(witness_valid(cp, rw.st, e, static_cast<int>(j), w));
            if (std::abs(w - e) > 1) CHECK(in_sorted(rw.kernel, w));
        }
}

TEST_CASE("a pair below the plenty threshold is left alone") {
    const ConstraintProblem cp = compile_word(kNeedsLaterQ, {"P", "Q"});
    // Three P's with distant witnesses, but only two Q's beyond the third
    // P, so the pair stays on the counting side.
    const OrderedStructure st =
        make_labeled(cp, {1, 2, 1, 2, 1, 2, 2, 2});
    REQUIRE(check_solution(cp, st).ok);
    const RewireResult rw = rewire_witnesses(cp, st);
    CHECK_FALSE(rw.changed);
    CHECK(rw.witnesses == extract_witnesses(cp, st));
    CHECK(rw.st.to_json() == st.to_json());
}

TEST_CASE("rewiring handles both witness directions") {
    const ConstraintProblem cp = compile_word(kSplitText, {"P"});
    // Twelve P's then twenty-eight plain positions: P's look right, plain
    // positions look left.
    std::vector<int> sig(40, 0);
    for (int i = 0; i < 12; ++i) sig[static_cast<std::size_t>(i)] = 1;
    const OrderedStructure st = make_labeled(cp, sig);
    REQUIRE(check_solution(cp, st).ok);

    const RewireResult rw = rewire_witnesses(cp, st);
    CHECK(rw.changed);
    CHECK(rw.st.to_json() == st.to_json());
    const std::vector<std::vector<int>> before = extract_witnesses(cp, st);
    int left_moved = 0, right_moved = 0;
    for (int e = 0; e < 40; ++e)
        for (std::size_t j = 0; j < rw.witnesses[e].size(); ++j) {
            const int w = rw.witnesses[static_cast<std::size_t>(e)][j];
            const int old = before[static_cast<std::size_t>(e)][j];
            if (w < 0) {
                CHECK(w == old);
                continue;
            }
            CHECK(witness_valid(cp, rw.st, e, static_cast<int>(j), w));
            if (std::abs(w - e) > 1) CHECK(in_sorted(rw.kernel, w));
            if (w != old) (w > e ? right_moved : left_moved) += 1;
        }
    CHECK(right_moved > 0);
    CHECK(left_moved > 0);
}

TEST_CASE("rewiring with binary edges adds only known configurations") {
    const ConstraintProblem cp = compile_word(
        "A x. E y. ~P(x) | (x < y & ~suc(x,y) & R(x,y))", {"P"}, {"R"});
    const TypeTable& tt = *cp.types;
    // Twelve P's (the plenty threshold for four binary types), each with an
    // R-edge to its own distant witness.
    std::vector<int> sig(40, 0);
    for (int i = 0; i < 12; ++i) sig[static_cast<std::size_t>(i)] = 1;
    OrderedStructure st = make_labeled(cp, sig);
    for (int i = 0; i < 12; ++i) tt.apply_gamma(st, i, 14 + i, 1);
    REQUIRE(check_solution(cp, st).ok);

    const RewireResult rw = rewire_witnesses(cp, st);
    CHECK(rw.changed);
    CHECK(check_solution(cp, rw.st).ok);
    // Blocks of four share a target; old edges stay in place.
    for (int i = 0; i < 12; ++i) {
        const int expect = 29 + 4 * (i / 4);
        CHECK(rw.witnesses[static_cast<std::size_t>(i)][0] == expect);
        CHECK(rw.st.binary("R", i, expect));
        CHECK(rw.st.binary("R", i, 14 + i));  // original edge untouched
        CHECK(in_sorted(rw.kernel, expect));
    }
    // Every far pair configuration of the result already occurred.
    std::set<std::tuple<int, int, int, int>> seen;
    for (int a = 0; a < 40; ++a)
        for (int b = a + 1; b < 40; ++b)
            seen.insert({tt.sigma_of(st, a), tt.order_type_of(st, a, b),
                         tt.gamma_of(st, a, b), tt.sigma_of(st, b)});
    for (int a = 0; a < 40; ++a)
        for (int b = a + 1; b < 40; ++b) {
            const std::tuple<int, int, int, int> cfg{
                tt.sigma_of(rw.st, a), tt.order_type_of(rw.st, a, b),
                tt.gamma_of(rw.st, a, b), tt.sigma_of(rw.st, b)};
            CHECK(seen.count(cfg) == 1);
        }
}

TEST_CASE("rewiring random solutions keeps them valid") {
    const ConstraintProblem cp = compile_word(kNeedsLaterQ, {"P", "Q"});
    for (unsigned seed = 1; seed <= 50; ++seed) {
        CAPTURE(seed);
        std::mt19937 rng(900u + seed);
        const int n = 8 + static_cast<int>(rng() % 7);
        std::vector<int> sig(static_cast<std::size_t>(n), 0);
        for (int i = 0; i < n; ++i) {
            const bool front = i < n / 2;
            const bool p = rng() % 4 < (front ? 2u : 1u);
            const bool q = rng() % 4 < (front ? 1u : 2u);
            sig[static_cast<std::size_t>(i)] = (p ? 1 : 0) | (q ? 2 : 0);
        }
        // Repair: a P needs some Q at distance two or more to its right.
        for (int i = 0; i < n; ++i) {
            if (!(sig[static_cast<std::size_t>(i)] & 1)) continue;
            bool ok = false;
            for (int j = i + 2; j < n; ++j)
                ok = ok || (sig[static_cast<std::size_t>(j)] & 2);
            if (!ok) sig[static_cast<std::size_t>(i)] &= ~1;
        }
        const OrderedStructure st = make_labeled(cp, sig);
        REQUIRE(check_solution(cp, st).ok);

        const std::vector<std::vector<int>> before =
            extract_witnesses(cp, st);
        const RewireResult rw = rewire_witnesses(cp, st);
        CHECK(check_solution(cp, rw.st).ok);
        CHECK(rw.st.to_json() == st.to_json());
        CHECK(rw.changed == (rw.witnesses != before));
        for (int e = 0; e < n; ++e)
            for (std::size_t j = 0; j < rw.witnesses[e].size(); ++j) {
                const int w = rw.witnesses[static_cast<std::size_t>(e)][j];
                const int old = before[static_cast<std::size_t>(e)][j];
                if (old < 0 || std::abs(old - e) <= 1) {
                    // Local and self witnesses are never touched.
                    CHECK(w == old);
                    continue;
                }
                REQUIRE(w >= 0);
                CHECK(witness_valid(cp, rw.st, e, static_cast<int>(j), w));
                if (std::abs(w - e) > 1) CHECK(in_sorted(rw.kernel, w));
            }

        // Shrinking afterwards keeps a valid structure within the bound.
        const ShrinkResult fx = shrink_to_fixpoint(cp, st);
        CHECK(check_solution(cp, fx.st).ok);
        CHECK(static_cast<std::size_t>(fx.st.size()) <=
              shrink_size_bound(fx.kernel.size(), 4, 1));
    }
}

// ---------------------------------------------------------------------------
// Interval removal
// ---------------------------------------------------------------------------

TEST_CASE("removing an interval renumbers types and edges faithfully") {
    // No constraints: any structure is a solution, so the arithmetic of the
    // removal is isolated.
    const ConstraintProblem cp =
        compile_word("A x. A y. x = x", {}, {"R"});
    const TypeTable& tt = *cp.types;
    OrderedStructure st(cp.types->signature(), 6);
    tt.apply_gamma(st, 0, 1, 1);
    tt.apply_gamma(st, 2, 3, 1);
    tt.apply_gamma(st, 3, 4, 2);
    tt.apply_gamma(st, 4, 5, 3);
    tt.apply_gamma(st, 0, 5, 1);

    const OrderedStructure cut = shrink_pair(cp, st, {}, 0, 2);
    REQUIRE(cut.size() == 4);
    CHECK(tt.gamma_of(cut, 0, 1) == 1);  // inherited successor type
    CHECK(tt.gamma_of(cut, 1, 2) == 2);
    CHECK(tt.gamma_of(cut, 2, 3) == 3);
    CHECK(tt.gamma_of(cut, 0, 3) == 1);  // distant edge follows the mapping
    CHECK(tt.gamma_of(cut, 0, 2) == 0);
    CHECK(tt.gamma_of(cut, 1, 3) == 0);
    CHECK(check_solution(cp, cut).ok);

    // Precondition violations, each isolated.
    CHECK_THROWS_AS(shrink_pair(cp, st, {}, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(shrink_pair(cp, st, {}, -1, 2), std::invalid_argument);
    CHECK_THROWS_AS(shrink_pair(cp, st, {}, 3, 5), std::invalid_argument);
    CHECK_THROWS_AS(shrink_pair(cp, st, {2}, 0, 2), std::invalid_argument);
    CHECK_THROWS_AS(shrink_pair(cp, st, {0}, 0, 2), std::invalid_argument);
    CHECK_THROWS_AS(shrink_pair(cp, st, {1}, 0, 2), std::invalid_argument);
    CHECK_THROWS_AS(shrink_pair(cp, st, {}, 0, 4), std::invalid_argument);

    OrderedStructure loop = st;
    tt.apply_sigma(loop, 2, 1);  // unary types now differ
    CHECK_THROWS_AS(shrink_pair(cp, loop, {}, 0, 2), std::invalid_argument);
}

TEST_CASE("shrinking to the fixpoint collapses repetitive middles") {
    const ConstraintProblem cp = compile_word(kNeedsLaterQ, {"P", "Q"});
    // Four P's, twenty plain positions, four Q's.
    std::vector<int> sig(28, 0);
    for (int i = 0; i < 4; ++i) sig[static_cast<std::size_t>(i)] = 1;
    for (int i = 24; i < 28; ++i) sig[static_cast<std::size_t>(i)] = 2;
    const OrderedStructure st = make_labeled(cp, sig);
    REQUIRE(check_solution(cp, st).ok);

    const ShrinkResult fx = shrink_to_fixpoint(cp, st);
    CHECK(fx.rounds == 10);
    CHECK(fx.st.size() == 18);
    CHECK(check_solution(cp, fx.st).ok);
    CHECK(static_cast<std::size_t>(fx.st.size()) <=
          shrink_size_bound(fx.kernel.size(), 4, 1));
    // The kernel keeps the boundary blocks in the final numbering.
    std::vector<int> expect_kernel;
    for (int i = 0; i < 8; ++i) expect_kernel.push_back(i);
    for (int i = 10; i < 18; ++i) expect_kernel.push_back(i);
    CHECK(fx.kernel == expect_kernel);
    int plain = 0;
    const TypeTable& tt = *cp.types;
    for (int e = 0; e < fx.st.size(); ++e)
        plain += tt.sigma_of(fx.st, e) == 0 ? 1 : 0;
    CHECK(plain == 10);

    // Deterministic: a second run reproduces the result.
    const ShrinkResult fx2 = shrink_to_fixpoint(cp, st);
    CHECK(fx2.st.to_json() == fx.st.to_json());
    CHECK(fx2.rounds == fx.rounds);
    CHECK(fx2.kernel == fx.kernel);
}
