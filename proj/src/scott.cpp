#include "fo2/scott.hpp"

#include <set>

namespace fo2 {

FormulaPtr swap_vars(const FormulaPtr& f) {
    if (!f) return f;
    switch (f->kind) {
        case NodeKind::atom: {
            auto c = std::make_shared<Formula>(*f);
            c->v1 = other(c->v1);
            c->v2 = other(c->v2);
            return c;
        }
        case NodeKind::order_atom:
        case NodeKind::equality: {
            auto c = std::make_shared<Formula>(*f);
            c->v1 = other(c->v1);
            c->v2 = other(c->v2);
            return c;
        }
        case NodeKind::neg:
        case NodeKind::conj:
        case NodeKind::disj:
        case NodeKind::implies: {
            auto c = std::make_shared<Formula>(*f);
            c->lhs = swap_vars(f->lhs);
            c->rhs = swap_vars(f->rhs);
            return c;
        }
        default:
            throw std::invalid_argument("swap_vars expects a quantifier-free formula");
    }
}

namespace {

struct Normalizer {
    Signature sig;  // grows with helper symbols
    std::vector<FormulaPtr> universals;
    std::vector<FormulaPtr> existentials;
    std::vector<std::string> fresh;
    int counter = 0;

    std::string fresh_symbol() {
        for (;;) {
            std::string name = "_S" + std::to_string(counter++);
            if (!sig.has_unary(name) && !sig.has_binary(name)) {
                sig.unary_symbols.push_back(name);
                fresh.push_back(name);
                return name;
            }
        }
    }

    // Replaces Q v. theta (theta quantifier-free) by a fresh unary helper
    // applied to the other variable, emitting the two defining conjuncts.
    FormulaPtr replace_quantifier(NodeKind q, Var v, const FormulaPtr& theta) {
        Var u = other(v);
        std::string s = fresh_symbol();
        // normalize so the helper argument is x and the witness variable is y
        FormulaPtr body = u == Var::y ? swap_vars(theta) : theta;
        FormulaPtr sx = Formula::mk_atom1(s, Var::x);
        if (q == NodeKind::exists) {
            universals.push_back(Formula::mk_or(Formula::mk_not(body), sx));
            existentials.push_back(Formula::mk_or(Formula::mk_not(sx), body));
        } else {
            universals.push_back(Formula::mk_or(Formula::mk_not(sx), body));
            existentials.push_back(Formula::mk_or(sx, Formula::mk_not(body)));
        }
        return Formula::mk_atom1(s, u);
    }

    // Bottom-up elimination of every quantifier in f; the result is
    // quantifier-free.
    FormulaPtr eliminate(const FormulaPtr& f) {
        switch (f->kind) {
            case NodeKind::atom:
            case NodeKind::order_atom:
            case NodeKind::equality:
                return f;
            case NodeKind::neg: {
                auto c = std::make_shared<Formula>(*f);
                c->lhs = eliminate(f->lhs);
                return c;
            }
            case NodeKind::conj:
            case NodeKind::disj:
            case NodeKind::implies: {
                auto c = std::make_shared<Formula>(*f);
                c->lhs = eliminate(f->lhs);
                c->rhs = eliminate(f->rhs);
                return c;
            }
            case NodeKind::forall:
            case NodeKind::exists:
                return replace_quantifier(f->kind, f->v1, eliminate(f->lhs));
            case NodeKind::so_exists:
                throw std::invalid_argument("nested second-order prefix");
        }
        return f;
    }

    // Routes one top-level conjunct into the normal form, spending helper
    // symbols only where the shape requires them.
    void add_conjunct(const FormulaPtr& c) {
        if (c->kind == NodeKind::conj) {
            add_conjunct(c->lhs);
            add_conjunct(c->rhs);
            return;
        }
        if (c->kind == NodeKind::forall) {
            const FormulaPtr& b = c->lhs;
            if (b->kind == NodeKind::forall) {
                universals.push_back(eliminate(b->lhs));
                return;
            }
            if (b->kind == NodeKind::exists && b->v1 != c->v1) {
                FormulaPtr body = eliminate(b->lhs);
                existentials.push_back(c->v1 == Var::y ? swap_vars(body) : body);
                return;
            }
            if (b->kind == NodeKind::exists) {
                // A v. E v. theta: the outer quantifier is vacuous
                FormulaPtr body = eliminate(b->lhs);
                existentials.push_back(b->v1 == Var::x ? swap_vars(body) : body);
                return;
            }
            universals.push_back(eliminate(b));
            return;
        }
        if (c->kind == NodeKind::exists) {
            FormulaPtr body = eliminate(c->lhs);
            // A x. E y. psi with psi mentioning only y expresses E y. psi
            existentials.push_back(c->v1 == Var::x ? swap_vars(body) : body);
            return;
        }
        // anything else: eliminate quantifiers; helper relations standing in
        // for closed subformulas are constant, so asserting the remainder
        // under A x. A y. is equivalent
        universals.push_back(eliminate(c));
    }
};

FormulaPtr conjoin(const std::vector<FormulaPtr>& fs) {
    if (fs.empty()) return Formula::mk_eq(Var::x, Var::x);  // canonical "true"
    FormulaPtr acc = fs.front();
    for (std::size_t i = 1; i < fs.size(); ++i) acc = Formula::mk_and(acc, fs[i]);
    return acc;
}

}  // namespace

FormulaPtr ScottForm::sentence() const {
    FormulaPtr all = Formula::mk_forall(
        Var::x, Formula::mk_forall(Var::y, universal));
    for (const auto& psi : existentials)
        all = Formula::mk_and(all,
              Formula::mk_forall(Var::x, Formula::mk_exists(Var::y, psi)));
    return all;
}

ScottForm to_scott(const FormulaPtr& sentence, const Signature& sig) {
    Normalizer nz;
    nz.sig = sig;
    nz.sig.validate();

    FormulaPtr body = sentence;
    if (has_so_prefix(sentence)) {
        for (const auto& d : sentence->so_decls) {
            if (d.arity == 1) nz.sig.unary_symbols.push_back(d.name);
            else nz.sig.binary_symbols.push_back(d.name);
        }
        nz.sig.validate();
        body = sentence->lhs;
    }

    nz.add_conjunct(body);

    ScottForm out;
    out.universal = conjoin(nz.universals);
    out.existentials = std::move(nz.existentials);
    out.signature = std::move(nz.sig);
    out.fresh_symbols = std::move(nz.fresh);
    return out;
}

}  // namespace fo2
