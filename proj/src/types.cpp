#include "fo2/types.hpp"

#include "fo2/scott.hpp"

#include <sstream>

namespace fo2 {

namespace {

const char* kBothNames[] = {"lt_next", "gt_next", "lt_far", "gt_far"};
const char* kLtNames[] = {"lt", "gt"};
const char* kSucNames[] = {"next", "prev", "none"};

int digit_count(DimKind k) {
    switch (k) {
        case DimKind::absent: return 1;
        case DimKind::lt_only: return 2;
        case DimKind::suc_only: return 3;
        case DimKind::both: return 4;
    }
    return 1;
}

const char* digit_name(DimKind k, int digit) {
    switch (k) {
        case DimKind::absent: return "";
        case DimKind::lt_only: return kLtNames[digit];
        case DimKind::suc_only: return kSucNames[digit];
        case DimKind::both: return kBothNames[digit];
    }
    return "";
}

int reverse_digit(DimKind k, int digit) {
    switch (k) {
        case DimKind::absent: return 0;
        case DimKind::lt_only: return digit ^ 1;        // lt <-> gt
        case DimKind::suc_only: return digit == kSucNone ? kSucNone : digit ^ 1;
        case DimKind::both: return digit ^ 1;           // *_next and *_far swap sides
    }
    return digit;
}

// Truth of s(x,y) under one digit; `swapped` asks about s(y,x).
bool digit_atom(DimKind k, int digit, bool is_suc, bool swapped) {
    switch (k) {
        case DimKind::absent:
            throw std::invalid_argument("order atom on a dimension without symbols");
        case DimKind::lt_only:
            if (is_suc) throw std::invalid_argument("successor atom on an order-only dimension");
            return swapped ? digit == kLtGt : digit == kLtLt;
        case DimKind::suc_only:
            if (!is_suc) throw std::invalid_argument("order atom on a successor-only dimension");
            return swapped ? digit == kSucPrev : digit == kSucNext;
        case DimKind::both:
            if (is_suc)
                return swapped ? digit == kBothGtNext : digit == kBothLtNext;
            return swapped ? (digit == kBothGtNext || digit == kBothGtFar)
                           : (digit == kBothLtNext || digit == kBothLtFar);
    }
    return false;
}

}  // namespace

TypeTable::TypeTable(Signature sig) : sig_(std::move(sig)) {
    sig_.validate();
    u_ = static_cast<int>(sig_.unary_symbols.size());
    b_ = static_cast<int>(sig_.binary_symbols.size());
    bool has_lt[2] = {false, false}, has_suc[2] = {false, false};
    for (OrderSym s : sig_.order_symbols) {
        int dim = order_sym_dim(s);
        (order_sym_is_successor(s) ? has_suc[dim] : has_lt[dim]) = true;
    }
    for (int dim = 0; dim < 2; ++dim) {
        if (has_lt[dim] && has_suc[dim]) kind_[dim] = DimKind::both;
        else if (has_lt[dim]) kind_[dim] = DimKind::lt_only;
        else if (has_suc[dim]) kind_[dim] = DimKind::suc_only;
        else kind_[dim] = DimKind::absent;
    }
    d_count_ = digit_count(kind_[0]) * digit_count(kind_[1]);
}

int TypeTable::dim_digit_count(int dim) const { return digit_count(kind_[dim]); }

std::string TypeTable::sigma_name(int sigma) const {
    std::ostringstream out;
    out << '{';
    bool first = true;
    for (int i = 0; i < u_; ++i)
        if (sigma_unary(sigma, i)) {
            if (!first) out << ',';
            first = false;
            out << sig_.unary_symbols[i];
        }
    for (int i = 0; i < b_; ++i)
        if (sigma_loop(sigma, i)) {
            if (!first) out << ',';
            first = false;
            out << sig_.binary_symbols[i] << "(x,x)";
        }
    out << '}';
    return out.str();
}

int TypeTable::gamma_reverse(int gamma) const {
    int out = 0;
    for (int i = 0; i < b_; ++i) {
        if (gamma_fwd(gamma, i)) out |= 1 << (2 * i + 1);
        if (gamma_bwd(gamma, i)) out |= 1 << (2 * i);
    }
    return out;
}

std::string TypeTable::gamma_name(int gamma) const {
    std::ostringstream out;
    out << '{';
    bool first = true;
    for (int i = 0; i < b_; ++i) {
        if (gamma_fwd(gamma, i)) {
            if (!first) out << ',';
            first = false;
            out << sig_.binary_symbols[i] << "(x,y)";
        }
        if (gamma_bwd(gamma, i)) {
            if (!first) out << ',';
            first = false;
            out << sig_.binary_symbols[i] << "(y,x)";
        }
    }
    out << '}';
    return out.str();
}

int TypeTable::order_digit(int d, int dim) const {
    if (dim == 0) return d / digit_count(kind_[1]);
    return d % digit_count(kind_[1]);
}

int TypeTable::order_compose(int digit0, int digit1) const {
    return digit0 * digit_count(kind_[1]) + digit1;
}

int TypeTable::order_reverse(int d) const {
    return order_compose(reverse_digit(kind_[0], order_digit(d, 0)),
                         reverse_digit(kind_[1], order_digit(d, 1)));
}

std::string TypeTable::order_name(int d) const {
    std::string n0 = digit_name(kind_[0], order_digit(d, 0));
    std::string n1 = digit_name(kind_[1], order_digit(d, 1));
    if (n0.empty()) return n1.empty() ? "-" : n1;
    if (n1.empty()) return n0;
    return n0 + "|" + n1;
}

bool TypeTable::order_atom_holds(int d, OrderSym s, bool swapped) const {
    int dim = order_sym_dim(s);
    return digit_atom(kind_[dim], order_digit(d, dim), order_sym_is_successor(s), swapped);
}

namespace {

// one shared recursive evaluator; sigma_y < 0 encodes the diagonal case
bool eval_rec(const TypeTable& tt, const FormulaPtr& f, int sx, int d, int g, int sy) {
    bool diag = sy < 0;
    switch (f->kind) {
        case NodeKind::atom: {
            const Signature& sig = tt.signature();
            if (f->arity == 1) {
                int i = sig.unary_index(f->symbol);
                if (i < 0) throw std::invalid_argument("unknown unary symbol " + f->symbol);
                int s = (diag || f->v1 == Var::x) ? sx : sy;
                return tt.sigma_unary(s, i);
            }
            int i = sig.binary_index(f->symbol);
            if (i < 0) throw std::invalid_argument("unknown binary symbol " + f->symbol);
            if (diag || f->v1 == f->v2) {
                int s = (diag || f->v1 == Var::x) ? sx : sy;
                return tt.sigma_loop(s, i);
            }
            return f->v1 == Var::x ? tt.gamma_fwd(g, i) : tt.gamma_bwd(g, i);
        }
        case NodeKind::order_atom:
            if (diag || f->v1 == f->v2) return false;  // orders are irreflexive
            return tt.order_atom_holds(d, f->order, f->v1 == Var::y);
        case NodeKind::equality:
            return diag || f->v1 == f->v2;
        case NodeKind::neg:
            return !eval_rec(tt, f->lhs, sx, d, g, sy);
        case NodeKind::conj:
            return eval_rec(tt, f->lhs, sx, d, g, sy) && eval_rec(tt, f->rhs, sx, d, g, sy);
        case NodeKind::disj:
            return eval_rec(tt, f->lhs, sx, d, g, sy) || eval_rec(tt, f->rhs, sx, d, g, sy);
        case NodeKind::implies:
            return !eval_rec(tt, f->lhs, sx, d, g, sy) || eval_rec(tt, f->rhs, sx, d, g, sy);
        default:
            throw std::invalid_argument("eval_pair expects a quantifier-free formula");
    }
}

}  // namespace

bool TypeTable::eval_pair(const FormulaPtr& qf, int sigma_x, int d, int gamma,
                          int sigma_y) const {
    return eval_rec(*this, qf, sigma_x, d, gamma, sigma_y);
}

bool TypeTable::eval_diag(const FormulaPtr& qf, int sigma) const {
    return eval_rec(*this, qf, sigma, 0, 0, -1);
}

int TypeTable::sigma_of(const OrderedStructure& st, int elem) const {
    int s = 0;
    for (int i = 0; i < u_; ++i)
        if (st.unary(i, elem)) s |= 1 << i;
    for (int i = 0; i < b_; ++i)
        if (st.binary(i, elem, elem)) s |= 1 << (u_ + i);
    return s;
}

int TypeTable::gamma_of(const OrderedStructure& st, int a, int b) const {
    int g = 0;
    for (int i = 0; i < b_; ++i) {
        if (st.binary(i, a, b)) g |= 1 << (2 * i);
        if (st.binary(i, b, a)) g |= 1 << (2 * i + 1);
    }
    return g;
}

int TypeTable::order_type_of(const OrderedStructure& st, int a, int b) const {
    if (a == b) throw std::invalid_argument("order type needs two distinct elements");
    int digits[2] = {0, 0};
    for (int dim = 0; dim < 2; ++dim) {
        if (kind_[dim] == DimKind::absent) continue;
        int ra = dim == 0 ? st.rank1(a) : st.rank2(a);
        int rb = dim == 0 ? st.rank1(b) : st.rank2(b);
        switch (kind_[dim]) {
            case DimKind::lt_only:
                digits[dim] = ra < rb ? kLtLt : kLtGt;
                break;
            case DimKind::suc_only:
                digits[dim] = rb == ra + 1 ? kSucNext : ra == rb + 1 ? kSucPrev : kSucNone;
                break;
            case DimKind::both:
                if (ra < rb) digits[dim] = rb == ra + 1 ? kBothLtNext : kBothLtFar;
                else digits[dim] = ra == rb + 1 ? kBothGtNext : kBothGtFar;
                break;
            default: break;
        }
    }
    return order_compose(digits[0], digits[1]);
}

void TypeTable::apply_sigma(OrderedStructure& st, int elem, int sigma) const {
    for (int i = 0; i < u_; ++i) st.set_unary(i, elem, sigma_unary(sigma, i));
    for (int i = 0; i < b_; ++i) st.set_binary(i, elem, elem, sigma_loop(sigma, i));
}

void TypeTable::apply_gamma(OrderedStructure& st, int a, int b, int gamma) const {
    for (int i = 0; i < b_; ++i) {
        st.set_binary(i, a, b, gamma_fwd(gamma, i));
        st.set_binary(i, b, a, gamma_bwd(gamma, i));
    }
}

// ----------------------------------------------------------------- compile

bool ConstraintProblem::no_allowed_sigma() const {
    for (char c : allowed)
        if (c) return false;
    return true;
}

ConstraintProblem compile(const ScottForm& sf) {
    ConstraintProblem cp;
    cp.types = std::make_shared<TypeTable>(sf.signature);
    const TypeTable& tt = *cp.types;
    const int S = tt.num_unary_types();
    const int G = tt.num_binary_types();
    const int D = tt.num_order_types();
    const int m = static_cast<int>(sf.existentials.size());
    cp.scount_ = S;
    cp.gcount_ = G;
    cp.dcount_ = D;

    cp.allowed.assign(S, 0);
    for (int s = 0; s < S; ++s)
        cp.allowed[s] = tt.eval_diag(sf.universal, s) ? 1 : 0;

    // forbidden pair configurations, folded over both orientations
    cp.bad_.assign(static_cast<std::size_t>(S) * D * G * S, 0);
    std::vector<char> raw(cp.bad_.size(), 0);
    auto idx = [&](int s, int d, int g, int t) {
        return ((static_cast<std::size_t>(s) * D + d) * G + g) * S + t;
    };
    for (int s = 0; s < S; ++s)
        for (int d = 0; d < D; ++d)
            for (int g = 0; g < G; ++g)
                for (int t = 0; t < S; ++t)
                    raw[idx(s, d, g, t)] =
                        tt.eval_pair(sf.universal, s, d, g, t) ? 0 : 1;
    for (int s = 0; s < S; ++s)
        for (int d = 0; d < D; ++d) {
            int rd = tt.order_reverse(d);
            for (int g = 0; g < G; ++g) {
                int rg = tt.gamma_reverse(g);
                for (int t = 0; t < S; ++t)
                    cp.bad_[idx(s, d, g, t)] =
                        raw[idx(s, d, g, t)] | raw[idx(t, rd, rg, s)];
            }
        }

    cp.selfok_.assign(static_cast<std::size_t>(m) * S, 0);
    cp.options_.assign(m, std::vector<std::vector<WitnessOption>>(S));
    for (int i = 0; i < m; ++i) {
        const FormulaPtr& psi = sf.existentials[i];
        for (int s = 0; s < S; ++s) {
            if (tt.eval_diag(psi, s)) {
                cp.selfok_[static_cast<std::size_t>(i) * S + s] = 1;
                continue;  // satisfied with the element as its own witness
            }
            auto& opts = cp.options_[i][s];
            for (int d = 0; d < D; ++d)
                for (int g = 0; g < G; ++g)
                    for (int t = 0; t < S; ++t)
                        if (cp.allowed[t] && !cp.pair_bad(s, d, g, t) &&
                            tt.eval_pair(psi, s, d, g, t))
                            opts.push_back({d, g, t});
        }
    }

    // fixpoint: a type whose witness requirement cannot be met at all is
    // dropped, which may starve other types in turn
    bool changed = true;
    while (changed) {
        changed = false;
        for (int s = 0; s < S; ++s) {
            if (!cp.allowed[s]) continue;
            for (int i = 0; i < m && cp.allowed[s]; ++i) {
                if (cp.self_ok(i, s)) continue;
                auto& opts = cp.options_[i][s];
                std::erase_if(opts, [&](const WitnessOption& w) {
                    return !cp.allowed[w.tau];
                });
                if (opts.empty()) {
                    cp.allowed[s] = 0;
                    changed = true;
                }
            }
        }
    }
    // leave no stale options behind for dropped types
    for (int i = 0; i < m; ++i)
        for (int s = 0; s < S; ++s) {
            if (!cp.allowed[s]) {
                cp.options_[i][s].clear();
                continue;
            }
            std::erase_if(cp.options_[i][s], [&](const WitnessOption& w) {
                return !cp.allowed[w.tau];
            });
        }
    return cp;
}

std::string ConstraintProblem::dump() const {
    const TypeTable& tt = *types;
    std::ostringstream out;
    out << "profile:";
    if (tt.signature().order_symbols.empty()) out << " (none)";
    for (OrderSym s : tt.signature().order_symbols) out << ' ' << order_sym_name(s);
    out << '\n';
    out << "unary types (" << tt.num_unary_types() << "):";
    for (int s = 0; s < tt.num_unary_types(); ++s) out << ' ' << s << ':' << tt.sigma_name(s);
    out << '\n';
    out << "binary types (" << tt.num_binary_types() << "):";
    for (int g = 0; g < tt.num_binary_types(); ++g) out << ' ' << g << ':' << tt.gamma_name(g);
    out << '\n';
    out << "order types (" << tt.num_order_types() << "):";
    for (int d = 0; d < tt.num_order_types(); ++d) out << ' ' << d << ':' << tt.order_name(d);
    out << '\n';
    out << "allowed:";
    for (int s = 0; s < tt.num_unary_types(); ++s)
        if (allowed[s]) out << ' ' << s;
    out << '\n';
    out << "forbidden pairs:\n";
    for (int s = 0; s < scount_; ++s)
        for (int d = 0; d < dcount_; ++d)
            for (int g = 0; g < gcount_; ++g)
                for (int t = 0; t < scount_; ++t)
                    if (allowed[s] && allowed[t] && pair_bad(s, d, g, t))
                        out << "  (" << s << ',' << tt.order_name(d) << ',' << g << ','
                            << t << ")\n";
    out << "witness requirements (" << num_constraints() << "):\n";
    for (int i = 0; i < num_constraints(); ++i)
        for (int s = 0; s < scount_; ++s) {
            if (!allowed[s]) continue;
            out << "  i=" << i << " sigma=" << s << ':';
            if (self_ok(i, s)) {
                out << " self\n";
                continue;
            }
            for (const auto& w : options_[i][s])
                out << " (" << tt.order_name(w.d) << ',' << w.gamma << ',' << w.tau << ')';
            out << '\n';
        }
    return out.str();
}

}  // namespace fo2
