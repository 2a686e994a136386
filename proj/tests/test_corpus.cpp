#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fo2/corpus.hpp"
#include "fo2/scott.hpp"
#include "fo2/types.hpp"

#include <set>

using namespace fo2;

namespace {

CorpusOptions opts_for(std::vector<OrderSym> osyms, std::uint64_t seed, int count) {
    CorpusOptions o;
    o.seed = seed;
    o.count = count;
    o.order_symbols = std::move(osyms);
    return o;
}

}  // namespace

TEST_CASE("identical seeds give byte-identical corpora") {
    auto o = opts_for({OrderSym::suc, OrderSym::lt}, 7, 40);
    auto a = generate_corpus(o);
    auto b = generate_corpus(o);
    REQUIRE(a.size() == 40);
    CHECK(a == b);

    auto c = generate_corpus(opts_for({OrderSym::suc, OrderSym::lt}, 8, 40));
    CHECK(a != c);
}

TEST_CASE("every sentence parses against the corpus signature and compiles") {
    for (auto osyms : {std::vector<OrderSym>{OrderSym::suc, OrderSym::lt},
                       std::vector<OrderSym>{OrderSym::lt1, OrderSym::lt2},
                       std::vector<OrderSym>{OrderSym::suc1, OrderSym::lt1, OrderSym::lt2},
                       std::vector<OrderSym>{OrderSym::suc1, OrderSym::suc2, OrderSym::lt2}}) {
        auto o = opts_for(osyms, 11, 25);
        Signature sig = corpus_signature(o);
        auto texts = generate_corpus(o);
        REQUIRE(static_cast<int>(texts.size()) == o.count);
        for (const auto& t : texts) {
            ParseResult pr = parse(t, sig);
            ScottForm sf = to_scott(pr.formula, sig);
            ConstraintProblem cp = compile(sf);
            CHECK(cp.types != nullptr);
            for (OrderSym s : used_order_symbols(pr.formula))
                CHECK(sig.has_order(s));
        }
    }
}

TEST_CASE("corpus is not degenerate: many distinct sentences") {
    auto texts = generate_corpus(opts_for({OrderSym::suc, OrderSym::lt}, 3, 60));
    std::set<std::string> uniq(texts.begin(), texts.end());
    CHECK(uniq.size() >= 30);
}

TEST_CASE("bad options are rejected") {
    CorpusOptions o;
    o.count = -1;
    CHECK_THROWS_AS(generate_corpus(o), std::invalid_argument);
    o.count = 1;
    o.max_unary = 5;
    CHECK_THROWS_AS(generate_corpus(o), std::invalid_argument);
}
