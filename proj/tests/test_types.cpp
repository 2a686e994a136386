#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fo2/oracle.hpp"
#include "fo2/scott.hpp"
#include "fo2/small_model.hpp"
#include "fo2/types.hpp"

#include <algorithm>
#include <random>

using namespace fo2;

namespace {

Signature sig_with_orders(std::vector<OrderSym> os,
                          std::vector<std::string> un = {},
                          std::vector<std::string> bi = {}) {
    Signature s;
    s.unary_symbols = std::move(un);
    s.binary_symbols = std::move(bi);
    s.order_symbols = std::move(os);
    return s;
}

ConstraintProblem compile_text(const std::string& text) {
    auto r = parse(text);
    return compile(to_scott(r.formula, r.signature));
}

}  // namespace

TEST_CASE("order type counts per profile") {
    CHECK(TypeTable(sig_with_orders({OrderSym::suc, OrderSym::lt})).num_order_types() == 4);
    CHECK(TypeTable(sig_with_orders({OrderSym::lt1, OrderSym::lt2})).num_order_types() == 4);
    CHECK(TypeTable(sig_with_orders({OrderSym::suc1, OrderSym::lt1, OrderSym::lt2}))
              .num_order_types() == 8);
    CHECK(TypeTable(sig_with_orders({OrderSym::suc1, OrderSym::suc2, OrderSym::lt2}))
              .num_order_types() == 12);
    CHECK(TypeTable(sig_with_orders({OrderSym::suc1, OrderSym::suc2})).num_order_types() == 9);
    CHECK(TypeTable(sig_with_orders({OrderSym::lt})).num_order_types() == 2);
    CHECK(TypeTable(sig_with_orders({OrderSym::suc})).num_order_types() == 3);
    CHECK(TypeTable(sig_with_orders({})).num_order_types() == 1);
}

TEST_CASE("unary and binary type counts") {
    TypeTable tt(sig_with_orders({OrderSym::lt}, {"P", "Q"}, {"R"}));
    CHECK(tt.num_unary_types() == 8);   // 2 unary symbols + 1 loop bit
    CHECK(tt.num_binary_types() == 4);  // R(x,y), R(y,x)
    CHECK(tt.sigma_name(0) == "{}");
    CHECK(tt.sigma_name(5) == "{P,R(x,x)}");
    CHECK(tt.gamma_name(2) == "{R(y,x)}");
    CHECK(tt.gamma_name(3) == "{R(x,y),R(y,x)}");
}

TEST_CASE("type reversal is an involution and swaps the two sides") {
    TypeTable both(sig_with_orders({OrderSym::suc, OrderSym::lt}, {}, {"R", "S"}));
    CHECK(both.order_reverse(kBothLtNext) == kBothGtNext);
    CHECK(both.order_reverse(kBothLtFar) == kBothGtFar);
    for (int d = 0; d < both.num_order_types(); ++d)
        CHECK(both.order_reverse(both.order_reverse(d)) == d);
    // gamma bits: R fwd=1, R bwd=2, S fwd=4, S bwd=8
    CHECK(both.gamma_reverse(0b0110) == 0b1001);
    for (int g = 0; g < both.num_binary_types(); ++g)
        CHECK(both.gamma_reverse(both.gamma_reverse(g)) == g);

    TypeTable mixed(sig_with_orders({OrderSym::suc1, OrderSym::suc2, OrderSym::lt2}));
    CHECK(mixed.order_reverse(mixed.order_compose(kSucNext, kBothLtFar)) ==
          mixed.order_compose(kSucPrev, kBothGtFar));
    CHECK(mixed.order_reverse(mixed.order_compose(kSucNone, kBothLtNext)) ==
          mixed.order_compose(kSucNone, kBothGtNext));
    CHECK(mixed.order_name(mixed.order_compose(kSucNone, kBothLtFar)) == "none|lt_far");
}

TEST_CASE("abstract pair evaluation agrees with concrete evaluation") {
    struct Setup {
        Signature sig;
        std::vector<std::string> bodies;
    };
    const Setup setups[] = {
        {sig_with_orders({OrderSym::suc, OrderSym::lt}, {"P", "Q"}, {"R"}),
         {"suc(x,y) -> R(x,y) & ~R(y,y)",
          "x < y & ~suc(x,y) | Q(y)",
          "R(y,x) & P(x) -> x = y | suc(y,x)",
          "~(P(x) | R(x,x)) & (x < y | y < x)"}},
        {sig_with_orders({OrderSym::lt1, OrderSym::lt2}, {"P"}, {"R", "S"}),
         {"x <1 y -> x <2 y",
          "R(x,y) & S(y,x) | ~P(y) & x <2 y",
          "x = y | R(y,y) & x <1 y"}},
        {sig_with_orders({OrderSym::suc1, OrderSym::suc2, OrderSym::lt2}, {"P"}, {"R"}),
         {"suc1(x,y) & suc2(x,y) -> R(x,y)",
          "x <2 y & ~suc2(x,y) & P(x)",
          "suc2(y,x) | ~R(y,x) & suc1(y,x)"}},
        {sig_with_orders({}, {"P", "Q"}, {"R"}),
         {"P(x) & R(x,y) -> Q(y) | R(y,x)", "x = y & R(x,y)"}},
    };
    std::mt19937 rng(7);
    for (const auto& setup : setups) {
        TypeTable tt(setup.sig);
        std::vector<FormulaPtr> bodies;
        for (const auto& b : setup.bodies)
            bodies.push_back(parse("A x. A y. " + b, setup.sig).formula->lhs->lhs);
        for (int trial = 0; trial < 120; ++trial) {
            int n = 1 + static_cast<int>(rng() % 5);
            OrderedStructure st(setup.sig, n);
            for (std::size_t u = 0; u < setup.sig.unary_symbols.size(); ++u)
                for (int a = 0; a < n; ++a)
                    st.set_unary(static_cast<int>(u), a, rng() % 2 == 0);
            for (std::size_t b = 0; b < setup.sig.binary_symbols.size(); ++b)
                for (int a = 0; a < n; ++a)
                    for (int c = 0; c < n; ++c)
                        st.set_binary(static_cast<int>(b), a, c, rng() % 2 == 0);
            std::vector<int> r1(n), r2(n);
            std::iota(r1.begin(), r1.end(), 0);
            std::iota(r2.begin(), r2.end(), 0);
            std::shuffle(r1.begin(), r1.end(), rng);
            std::shuffle(r2.begin(), r2.end(), rng);
            st.set_order1(r1);
            st.set_order2(r2);
            for (const auto& body : bodies) {
                for (int a = 0; a < n; ++a) {
                    CHECK(tt.eval_diag(body, tt.sigma_of(st, a)) == st.eval(body, a, a));
                    for (int b = 0; b < n; ++b) {
                        if (a == b) continue;
                        bool via_types =
                            tt.eval_pair(body, tt.sigma_of(st, a), tt.order_type_of(st, a, b),
                                         tt.gamma_of(st, a, b), tt.sigma_of(st, b));
                        CHECK(via_types == st.eval(body, a, b));
                    }
                }
            }
        }
    }
}

TEST_CASE("type extraction round-trips through type application") {
    Signature sig = sig_with_orders({OrderSym::suc, OrderSym::lt}, {"P"}, {"R"});
    TypeTable tt(sig);
    std::mt19937 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        OrderedStructure st(sig, 4);
        for (int a = 0; a < 4; ++a) tt.apply_sigma(st, a, static_cast<int>(rng() % 4));
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b)
                tt.apply_gamma(st, a, b, static_cast<int>(rng() % 4));
        for (int a = 0; a < 4; ++a) {
            int s = tt.sigma_of(st, a);
            OrderedStructure copy = st;
            tt.apply_sigma(copy, a, s);
            CHECK(tt.sigma_of(copy, a) == s);
            for (int b = a + 1; b < 4; ++b) {
                int g = tt.gamma_of(st, a, b);
                CHECK(tt.gamma_of(st, b, a) == tt.gamma_reverse(g));
                CHECK(tt.order_type_of(st, b, a) ==
                      tt.order_reverse(tt.order_type_of(st, a, b)));
            }
        }
    }
}

TEST_CASE("compiling a small sentence yields the expected tables") {
    auto cp = compile_text("(A x. A y. x < y -> ~(P(x) & P(y))) & (A x. E y. P(y))");
    CHECK(cp.dump() ==
          "profile: <\n"
          "unary types (2): 0:{} 1:{P}\n"
          "binary types (1): 0:{}\n"
          "order types (2): 0:lt 1:gt\n"
          "allowed: 0 1\n"
          "forbidden pairs:\n"
          "  (1,lt,0,1)\n"
          "  (1,gt,0,1)\n"
          "witness requirements (1):\n"
          "  i=0 sigma=0: (lt,0,1) (gt,0,1)\n"
          "  i=0 sigma=1: self\n");
}

TEST_CASE("starved types are pruned to a fixpoint") {
    auto cp = compile_text("(A x. ~Q(x)) & (A x. E y. P(x) -> Q(y))");
    // types: 0:{} 1:{P} 2:{Q} 3:{P,Q}; Q-types die by the universal,
    // P-types starve because their witnesses needed a Q
    CHECK(cp.sigma_allowed(0));
    CHECK_FALSE(cp.sigma_allowed(1));
    CHECK_FALSE(cp.sigma_allowed(2));
    CHECK_FALSE(cp.sigma_allowed(3));

    // demanding a P somewhere then starves everything
    auto cp2 = compile_text(
        "(A x. ~Q(x)) & (A x. E y. P(x) -> Q(y)) & (A x. E y. P(y))");
    CHECK(cp2.no_allowed_sigma());
    CHECK(find_model(cp2, 4).status == SearchStatus::exhausted);
}

TEST_CASE("models found for compiled problems satisfy the original sentence") {
    const char* battery[] = {
        "(A x. A y. x < y -> ~(P(x) & P(y))) & (A x. E y. P(y))",
        "A x. E y. suc(x,y) | suc(y,x)",
        "E x. E y. x <1 y & y <2 x",
        "(A x. E y. R(x,y) & ~R(y,x))",
        "(A x. A y. R(x,y)) & (A x. E y. R(x,y) & ~R(y,x))",  // unsatisfiable
        "A x. E y. suc(x,y)",                                  // unsatisfiable
        "E x. P(x) & E y. y < x & P(y) & E x. x < y & P(x)",   // three P's
        "EX2 C/1. A x. E y. suc(x,y) -> C(y) & ~C(x)",
    };
    for (const char* text : battery) {
        CAPTURE(text);
        auto r = parse(text);
        auto sf = to_scott(r.formula, r.signature);
        auto cp = compile(sf);
        auto found = find_model(cp, 3);
        REQUIRE(found.status != SearchStatus::budget);
        auto reference = oracle_find_model(r.formula, r.signature, 3);
        CHECK((found.status == SearchStatus::found) == reference.has_value());
        if (found.status == SearchStatus::found) {
            REQUIRE(reference.has_value());
            CHECK(found.model->size() == reference->size());
            // the model satisfies the normal form it was built from
            CHECK(found.model->eval(sf.sentence()));
            auto rep = check_solution(cp, *found.model);
            CAPTURE(rep.violations);
            CHECK(rep.ok);
        }
    }
}

TEST_CASE("model search is deterministic") {
    auto cp = compile_text("(A x. E y. R(x,y) & ~R(y,x))");
    auto a = find_model(cp, 4);
    auto b = find_model(cp, 4);
    REQUIRE(a.status == SearchStatus::found);
    REQUIRE(b.status == SearchStatus::found);
    CHECK(a.model->to_json() == b.model->to_json());
    CHECK(a.model->size() == 3);
}

TEST_CASE("search budgets are respected") {
    auto cp = compile_text("E x. P(x) & E y. y < x & P(y) & E x. x < y & P(x)");
    auto r = find_model(cp, 4, 5);
    CHECK(r.status == SearchStatus::budget);
}

TEST_CASE("violations are reported") {
    auto cp = compile_text("(A x. A y. x < y -> ~(P(x) & P(y))) & (A x. E y. P(y))");
    OrderedStructure st(cp.types->signature(), 2);
    // no P anywhere: both elements lack their witness
    auto rep = check_solution(cp, st);
    CHECK_FALSE(rep.ok);
    CHECK(rep.violations.size() == 2);
    // two P's: a forbidden pair (and each witnesses itself)
    cp.types->apply_sigma(st, 0, 1);
    cp.types->apply_sigma(st, 1, 1);
    auto rep2 = check_solution(cp, st);
    CHECK_FALSE(rep2.ok);
    REQUIRE(rep2.violations.size() == 1);
    CHECK(rep2.violations[0].find("forbidden configuration") != std::string::npos);
}

TEST_CASE("witness extraction returns consistent witnesses") {
    auto cp = compile_text("(A x. E y. R(x,y) & ~R(y,x))");
    auto found = find_model(cp, 4);
    REQUIRE(found.status == SearchStatus::found);
    auto w = extract_witnesses(cp, *found.model);
    const auto& st = *found.model;
    for (int a = 0; a < st.size(); ++a) {
        REQUIRE(w[a][0] >= 0);
        CHECK(st.binary("R", a, w[a][0]));
        CHECK_FALSE(st.binary("R", w[a][0], a));
    }
}

TEST_CASE("counting helpers count within one dimension") {
    Signature sig = sig_with_orders({OrderSym::lt1, OrderSym::lt2}, {"P"});
    TypeTable tt(sig);
    OrderedStructure st(sig, 5);
    for (int a : {0, 2, 4}) st.set_unary(0, a, true);
    st.set_order2({4, 3, 2, 1, 0});
    // P-elements: 0,2,4 (sigma = 1)
    CHECK(count_type_before(tt, st, 3, 1, 0) == 2);  // 0 and 2
    CHECK(count_type_after(tt, st, 3, 1, 0) == 1);   // 4
    CHECK(count_type_before(tt, st, 3, 1, 1) == 1);  // reversed: only 4
    CHECK(count_type_after(tt, st, 3, 1, 1) == 2);
    CHECK(count_type_before(tt, st, 0, 1, 0) == 0);
    CHECK(count_type_after(tt, st, 0, 0, 0) == 2);   // non-P: 1 and 3
}
