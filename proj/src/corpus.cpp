#include "fo2/corpus.hpp"

#include "fo2/scott.hpp"
#include "fo2/types.hpp"

#include <random>
#include <stdexcept>

namespace fo2 {

namespace {

// mt19937_64 with manual modulo sampling. The <random> distribution
// helpers are implementation-defined, which would break byte-identical
// corpora across standard-library versions.
struct Rng {
    std::mt19937_64 eng;
    explicit Rng(std::uint64_t seed) : eng(seed) {}
    int below(int m) { return static_cast<int>(eng() % static_cast<std::uint64_t>(m)); }
    bool chance(int num, int den) { return below(den) < num; }
};

struct Scope {
    bool has_x = false;
    bool has_y = false;
    int size() const { return (has_x ? 1 : 0) + (has_y ? 1 : 0); }
    bool has(Var v) const { return v == Var::x ? has_x : has_y; }
    Scope with(Var v) const {
        Scope s = *this;
        (v == Var::x ? s.has_x : s.has_y) = true;
        return s;
    }
};

struct Gen {
    Rng rng;
    std::vector<std::string> unary;
    std::vector<std::string> binary;
    std::vector<OrderSym> osyms;
    int max_depth;
    int max_connectives;
    int conn_left = 0;

    FormulaPtr leaf(const Scope& sc) {
        std::vector<FormulaPtr> pool;
        std::vector<Var> in;
        if (sc.has_x) in.push_back(Var::x);
        if (sc.has_y) in.push_back(Var::y);
        for (const auto& u : unary)
            for (Var v : in) pool.push_back(Formula::mk_atom1(u, v));
        for (const auto& b : binary)
            for (Var v : in)
                for (Var w : in) pool.push_back(Formula::mk_atom2(b, v, w));
        if (sc.size() == 2) {
            for (OrderSym s : osyms) {
                pool.push_back(Formula::mk_order(s, Var::x, Var::y));
                pool.push_back(Formula::mk_order(s, Var::y, Var::x));
            }
            pool.push_back(Formula::mk_eq(Var::x, Var::y));
        }
        if (pool.empty()) pool.push_back(Formula::mk_eq(Var::x, Var::x));
        return pool[static_cast<std::size_t>(rng.below(static_cast<int>(pool.size())))];
    }

    FormulaPtr formula(const Scope& sc, int depth) {
        int roll = rng.below(8);
        if (roll < 3 && conn_left > 0) {
            --conn_left;
            int kind = rng.below(4);
            if (kind == 0) return Formula::mk_not(formula(sc, depth));
            FormulaPtr a = formula(sc, depth);
            FormulaPtr b = formula(sc, depth);
            if (kind == 1) return Formula::mk_and(a, b);
            if (kind == 2) return Formula::mk_or(a, b);
            return Formula::mk_implies(a, b);
        }
        if (roll < 5 && depth > 0 && sc.size() < 2) return quantified(sc, depth);
        return leaf(sc);
    }

    FormulaPtr quantified(const Scope& sc, int depth) {
        Var v = sc.has_x ? Var::y : Var::x;
        FormulaPtr body = formula(sc.with(v), depth - 1);
        return rng.chance(1, 2) ? Formula::mk_forall(v, body)
                                : Formula::mk_exists(v, body);
    }

    FormulaPtr sentence() {
        conn_left = max_connectives;
        return quantified(Scope{}, max_depth);
    }
};

}  // namespace

Signature corpus_signature(const CorpusOptions& opt) {
    if (opt.max_unary < 0 || opt.max_unary > 2 || opt.max_binary < 0 ||
        opt.max_binary > 1)
        throw std::invalid_argument("corpus symbol pool is limited to 2 unary, 1 binary");
    Signature sig;
    static const char* kUnary[] = {"P", "Q"};
    for (int i = 0; i < opt.max_unary; ++i) sig.unary_symbols.push_back(kUnary[i]);
    if (opt.max_binary > 0) sig.binary_symbols.push_back("R");
    sig.order_symbols = opt.order_symbols;
    sig.validate();
    return sig;
}

std::vector<std::string> generate_corpus(const CorpusOptions& opt) {
    if (opt.count < 0) throw std::invalid_argument("corpus count must be >= 0");
    if (opt.max_depth < 1) throw std::invalid_argument("corpus depth must be >= 1");
    const Signature sig = corpus_signature(opt);

    Gen gen{Rng(opt.seed),
            sig.unary_symbols,
            sig.binary_symbols,
            sig.order_symbols,
            opt.max_depth,
            opt.max_connectives};

    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(opt.count));
    int guard = 0;
    while (static_cast<int>(out.size()) < opt.count) {
        if (++guard > opt.count * 50 + 1000)
            throw std::runtime_error("corpus generator failed to produce valid sentences");
        FormulaPtr f = gen.sentence();
        std::string text = pretty_print(f);
        try {
            ParseResult pr = parse(text, sig);
            ScottForm sf = to_scott(pr.formula, sig);
            (void)compile(sf);
        } catch (const std::exception&) {
            continue;  // deterministic skip; the stream position advances
        }
        out.push_back(std::move(text));
    }
    return out;
}

}  // namespace fo2
