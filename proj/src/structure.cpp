#include "fo2/structure.hpp"

#include "json.hpp"

#include <algorithm>
#include <numeric>

namespace fo2 {

OrderedStructure::OrderedStructure(Signature sig, int n) : sig_(std::move(sig)), n_(n) {
    if (n <= 0) throw std::invalid_argument("structure size must be positive");
    sig_.validate();
    unary_.assign(sig_.unary_symbols.size(), std::vector<char>(n_, 0));
    binary_.assign(sig_.binary_symbols.size(), std::vector<char>(n_ * n_, 0));
    rank1_.resize(n_);
    std::iota(rank1_.begin(), rank1_.end(), 0);
    rank2_ = rank1_;
}

bool OrderedStructure::bidimensional() const {
    for (OrderSym s : sig_.order_symbols)
        if (order_sym_dim(s) == 1) return true;
    return false;
}

bool OrderedStructure::unary(int sym, int a) const { return unary_.at(sym)[a] != 0; }
bool OrderedStructure::binary(int sym, int a, int b) const {
    return binary_.at(sym)[a * n_ + b] != 0;
}
bool OrderedStructure::unary(const std::string& sym, int a) const {
    int i = sig_.unary_index(sym);
    if (i < 0) throw std::invalid_argument("unknown unary symbol " + sym);
    return unary(i, a);
}
bool OrderedStructure::binary(const std::string& sym, int a, int b) const {
    int i = sig_.binary_index(sym);
    if (i < 0) throw std::invalid_argument("unknown binary symbol " + sym);
    return binary(i, a, b);
}
void OrderedStructure::set_unary(int sym, int a, bool v) { unary_.at(sym)[a] = v ? 1 : 0; }
void OrderedStructure::set_binary(int sym, int a, int b, bool v) {
    binary_.at(sym)[a * n_ + b] = v ? 1 : 0;
}

static void check_perm(const std::vector<int>& ranks, int n) {
    if (static_cast<int>(ranks.size()) != n)
        throw std::invalid_argument("rank vector has wrong length");
    std::vector<char> seen(n, 0);
    for (int r : ranks) {
        if (r < 0 || r >= n || seen[r]) throw std::invalid_argument("rank vector is not a permutation");
        seen[r] = 1;
    }
}

void OrderedStructure::set_order1(const std::vector<int>& ranks) {
    check_perm(ranks, n_);
    rank1_ = ranks;
}
void OrderedStructure::set_order2(const std::vector<int>& ranks) {
    check_perm(ranks, n_);
    rank2_ = ranks;
}

int OrderedStructure::element_at_rank1(int r) const {
    for (int a = 0; a < n_; ++a)
        if (rank1_[a] == r) return a;
    throw std::invalid_argument("rank out of range");
}
int OrderedStructure::element_at_rank2(int r) const {
    for (int a = 0; a < n_; ++a)
        if (rank2_[a] == r) return a;
    throw std::invalid_argument("rank out of range");
}

bool OrderedStructure::order_holds(OrderSym s, int a, int b) const {
    const std::vector<int>& rk = order_sym_dim(s) == 0 ? rank1_ : rank2_;
    if (order_sym_is_successor(s)) return rk[b] == rk[a] + 1;
    return rk[a] < rk[b];
}

namespace {

// Upper bound on the number of fresh relation bits an exhaustive
// second-order search may enumerate.
constexpr int kMaxSoBits = 26;

}  // namespace

bool OrderedStructure::eval(const FormulaPtr& f, int ax, int ay) const {
    auto elem = [&](Var v) {
        int e = v == Var::x ? ax : ay;
        if (e < 0) throw std::invalid_argument("unbound variable in eval");
        return e;
    };
    switch (f->kind) {
        case NodeKind::atom: {
            if (f->arity == 1) {
                int i = sig_.unary_index(f->symbol);
                if (i < 0) throw std::invalid_argument("unknown unary symbol " + f->symbol);
                return unary(i, elem(f->v1));
            }
            int i = sig_.binary_index(f->symbol);
            if (i < 0) throw std::invalid_argument("unknown binary symbol " + f->symbol);
            return binary(i, elem(f->v1), elem(f->v2));
        }
        case NodeKind::order_atom:
            return order_holds(f->order, elem(f->v1), elem(f->v2));
        case NodeKind::equality:
            return elem(f->v1) == elem(f->v2);
        case NodeKind::neg:
            return !eval(f->lhs, ax, ay);
        case NodeKind::conj:
            return eval(f->lhs, ax, ay) && eval(f->rhs, ax, ay);
        case NodeKind::disj:
            return eval(f->lhs, ax, ay) || eval(f->rhs, ax, ay);
        case NodeKind::implies:
            return !eval(f->lhs, ax, ay) || eval(f->rhs, ax, ay);
        case NodeKind::forall:
            for (int e = 0; e < n_; ++e) {
                bool ok = f->v1 == Var::x ? eval(f->lhs, e, ay) : eval(f->lhs, ax, e);
                if (!ok) return false;
            }
            return true;
        case NodeKind::exists:
            for (int e = 0; e < n_; ++e) {
                bool ok = f->v1 == Var::x ? eval(f->lhs, e, ay) : eval(f->lhs, ax, e);
                if (ok) return true;
            }
            return false;
        case NodeKind::so_exists: {
            // Exhaustive search over the quantified relations on a copy with
            // an extended signature.
            long long bits = 0;
            for (const auto& d : f->so_decls)
                bits += d.arity == 1 ? n_ : static_cast<long long>(n_) * n_;
            if (bits > kMaxSoBits)
                throw std::runtime_error("oracle scale exceeded: second-order search over " +
                                         std::to_string(bits) + " bits");
            OrderedStructure ext = *this;
            std::vector<std::pair<int, int>> slots;  // (sym index in ext, cell count)
            for (const auto& d : f->so_decls) {
                if (d.arity == 1) {
                    ext.sig_.unary_symbols.push_back(d.name);
                    ext.unary_.emplace_back(n_, 0);
                    slots.emplace_back(-static_cast<int>(ext.unary_.size()), n_);
                } else {
                    ext.sig_.binary_symbols.push_back(d.name);
                    ext.binary_.emplace_back(n_ * n_, 0);
                    slots.emplace_back(static_cast<int>(ext.binary_.size()), n_ * n_);
                }
            }
            ext.sig_.validate();
            unsigned long long total = 1ull << bits;
            for (unsigned long long mask = 0; mask < total; ++mask) {
                unsigned long long m = mask;
                for (auto [sym, cells] : slots) {
                    auto& vec = sym < 0 ? ext.unary_[-sym - 1] : ext.binary_[sym - 1];
                    for (int c = 0; c < cells; ++c) {
                        vec[c] = static_cast<char>(m & 1);
                        m >>= 1;
                    }
                }
                if (ext.eval(f->lhs, ax, ay)) return true;
            }
            return false;
        }
    }
    return false;
}

bool OrderedStructure::eval(const FormulaPtr& sentence) const {
    return eval(sentence, -1, -1);
}

std::string OrderedStructure::to_json() const {
    nlohmann::ordered_json j;
    j["size"] = n_;
    nlohmann::ordered_json un = nlohmann::ordered_json::object();
    for (std::size_t s = 0; s < sig_.unary_symbols.size(); ++s) {
        std::vector<int> elems;
        for (int a = 0; a < n_; ++a)
            if (unary_[s][a]) elems.push_back(a);
        un[sig_.unary_symbols[s]] = elems;
    }
    j["unary"] = un;
    nlohmann::ordered_json bin = nlohmann::ordered_json::object();
    for (std::size_t s = 0; s < sig_.binary_symbols.size(); ++s) {
        std::vector<std::pair<int, int>> pairs;
        for (int a = 0; a < n_; ++a)
            for (int b = 0; b < n_; ++b)
                if (binary_[s][a * n_ + b]) pairs.emplace_back(a, b);
        bin[sig_.binary_symbols[s]] = pairs;
    }
    j["binary"] = bin;
    j["order1"] = rank1_;
    if (bidimensional()) j["order2"] = rank2_;
    return j.dump();
}

}  // namespace fo2
