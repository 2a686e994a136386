#include "fo2/small_model.hpp"

#include <algorithm>
#include <numeric>

namespace fo2 {

namespace {

struct SizeSearch {
    const ConstraintProblem& cp;
    const TypeTable& tt;
    int n;
    unsigned long long budget;
    unsigned long long steps = 0;
    bool out_of_budget = false;

    std::vector<int> allowed_list;
    std::vector<int> dmat;    // [a*n+b] order type of (a,b), a != b
    std::vector<int> sigma;   // [a]
    std::vector<int> gamma;   // [a*n+b] for a < b
    std::optional<OrderedStructure> model;

    SizeSearch(const ConstraintProblem& p, int size, unsigned long long b)
        : cp(p), tt(*p.types), n(size), budget(b) {
        for (int s = 0; s < tt.num_unary_types(); ++s)
            if (cp.sigma_allowed(s)) allowed_list.push_back(s);
        sigma.assign(n, -1);
        gamma.assign(n * n, -1);
    }

    bool spend() {
        if (++steps > budget) {
            out_of_budget = true;
            return false;
        }
        return true;
    }

    int gamma_at(int a, int b) const {
        return a < b ? gamma[a * n + b] : tt.gamma_reverse(gamma[b * n + a]);
    }

    // Is there some way element a's requirement i could still be met, looking
    // only at the unary labels? (Necessary condition; gammas come later.)
    bool sigma_feasible(int a, int i) const {
        if (cp.self_ok(i, sigma[a])) return true;
        for (const auto& w : cp.witness_options(i, sigma[a]))
            for (int b = 0; b < n; ++b)
                if (b != a && sigma[b] == w.tau && dmat[a * n + b] == w.d)
                    return true;
        return false;
    }

    bool row_satisfied(int a) const {
        for (int i = 0; i < cp.num_constraints(); ++i) {
            if (cp.self_ok(i, sigma[a])) continue;
            bool ok = false;
            for (const auto& w : cp.witness_options(i, sigma[a])) {
                for (int b = 0; b < n && !ok; ++b)
                    if (b != a && sigma[b] == w.tau && dmat[a * n + b] == w.d &&
                        gamma_at(a, b) == w.gamma)
                        ok = true;
                if (ok) break;
            }
            if (!ok) return false;
        }
        return true;
    }

    bool assign_pairs(int pair_index, const std::vector<std::pair<int, int>>& pairs) {
        if (pair_index == static_cast<int>(pairs.size())) {
            // the last row closes together with the second-to-last
            return n == 1 ? row_satisfied(0) : row_satisfied(n - 1);
        }
        auto [a, b] = pairs[pair_index];
        for (int g = 0; g < tt.num_binary_types(); ++g) {
            if (!spend()) return false;
            if (cp.pair_bad(sigma[a], dmat[a * n + b], g, sigma[b])) continue;
            gamma[a * n + b] = g;
            // row a is fully typed once its last pair is placed
            if (b == n - 1 && !row_satisfied(a)) continue;
            if (assign_pairs(pair_index + 1, pairs)) return true;
            if (out_of_budget) return false;
        }
        gamma[a * n + b] = -1;
        return false;
    }

    bool assign_sigmas(int a, const std::vector<std::pair<int, int>>& pairs) {
        if (a == n) {
            for (int e = 0; e < n; ++e)
                for (int i = 0; i < cp.num_constraints(); ++i)
                    if (!sigma_feasible(e, i)) return false;
            return assign_pairs(0, pairs);
        }
        for (int s : allowed_list) {
            if (!spend()) return false;
            sigma[a] = s;
            if (assign_sigmas(a + 1, pairs)) return true;
            if (out_of_budget) return false;
        }
        sigma[a] = -1;
        return false;
    }

    // Runs the search for one assignment of the second order (given via a
    // prepared structure holding the rank vectors); fills `model` on success.
    bool run(OrderedStructure& st) {
        dmat.assign(n * n, 0);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                if (a != b) dmat[a * n + b] = tt.order_type_of(st, a, b);
        std::vector<std::pair<int, int>> pairs;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
        if (!assign_sigmas(0, pairs)) return false;
        for (int a = 0; a < n; ++a) tt.apply_sigma(st, a, sigma[a]);
        for (auto [a, b] : pairs) tt.apply_gamma(st, a, b, gamma[a * n + b]);
        model = st;
        return true;
    }
};

}  // namespace

FindResult find_model_of_size(const ConstraintProblem& cp, int n,
                              unsigned long long budget) {
    FindResult res;
    if (cp.no_allowed_sigma()) {
        res.status = SearchStatus::exhausted;
        return res;
    }
    SizeSearch search(cp, n, budget);
    OrderedStructure st(cp.types->signature(), n);
    bool second_order = cp.types->dim_kind(1) != DimKind::absent;
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        st.set_order2(perm);
        if (search.run(st)) {
            res.status = SearchStatus::found;
            res.model = std::move(search.model);
            res.steps = search.steps;
            return res;
        }
        if (search.out_of_budget) {
            res.status = SearchStatus::budget;
            res.steps = search.steps;
            return res;
        }
    } while (second_order && std::next_permutation(perm.begin(), perm.end()));
    res.status = SearchStatus::exhausted;
    res.steps = search.steps;
    return res;
}

FindResult find_model(const ConstraintProblem& cp, int max_size,
                      unsigned long long budget) {
    unsigned long long spent = 0;
    for (int n = 1; n <= max_size; ++n) {
        FindResult r = find_model_of_size(cp, n, budget - spent);
        spent += r.steps;
        r.steps = spent;
        if (r.status != SearchStatus::exhausted) return r;
    }
    FindResult res;
    res.status = SearchStatus::exhausted;
    res.steps = spent;
    return res;
}

CheckReport check_solution(const ConstraintProblem& cp, const OrderedStructure& st) {
    const TypeTable& tt = *cp.types;
    CheckReport rep;
    auto fail = [&](std::string msg) {
        rep.ok = false;
        rep.violations.push_back(std::move(msg));
    };
    const int n = st.size();
    std::vector<int> sigma(n);
    for (int a = 0; a < n; ++a) {
        sigma[a] = tt.sigma_of(st, a);
        if (!cp.sigma_allowed(sigma[a]))
            fail("element " + std::to_string(a) + " has forbidden unary type " +
                 tt.sigma_name(sigma[a]));
    }
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            int d = tt.order_type_of(st, a, b);
            int g = tt.gamma_of(st, a, b);
            if (cp.pair_bad(sigma[a], d, g, sigma[b]))
                fail("pair (" + std::to_string(a) + "," + std::to_string(b) +
                     ") realizes a forbidden configuration (" + tt.order_name(d) + ")");
        }
    for (int a = 0; a < n; ++a)
        for (int i = 0; i < cp.num_constraints(); ++i) {
            if (cp.self_ok(i, sigma[a])) continue;
            bool ok = false;
            for (int b = 0; b < n && !ok; ++b) {
                if (b == a) continue;
                WitnessOption w{tt.order_type_of(st, a, b), tt.gamma_of(st, a, b),
                                sigma[b]};
                const auto& opts = cp.witness_options(i, sigma[a]);
                ok = std::find(opts.begin(), opts.end(), w) != opts.end();
            }
            if (!ok)
                fail("element " + std::to_string(a) + " lacks a witness for requirement " +
                     std::to_string(i));
        }
    return rep;
}

std::vector<std::vector<int>> extract_witnesses(const ConstraintProblem& cp,
                                                const OrderedStructure& st) {
    const TypeTable& tt = *cp.types;
    const int n = st.size();
    std::vector<std::vector<int>> out(n, std::vector<int>(cp.num_constraints(), -2));
    for (int a = 0; a < n; ++a) {
        int sa = tt.sigma_of(st, a);
        for (int i = 0; i < cp.num_constraints(); ++i) {
            if (cp.self_ok(i, sa)) {
                out[a][i] = -1;
                continue;
            }
            for (int b = 0; b < n; ++b) {
                if (b == a) continue;
                WitnessOption w{tt.order_type_of(st, a, b), tt.gamma_of(st, a, b),
                                tt.sigma_of(st, b)};
                const auto& opts = cp.witness_options(i, sa);
                if (std::find(opts.begin(), opts.end(), w) != opts.end()) {
                    out[a][i] = b;
                    break;
                }
            }
        }
    }
    return out;
}

int count_type_before(const TypeTable& tt, const OrderedStructure& st, int elem,
                      int sigma, int dim) {
    int cnt = 0;
    for (int b = 0; b < st.size(); ++b) {
        if (b == elem || tt.sigma_of(st, b) != sigma) continue;
        int rb = dim == 0 ? st.rank1(b) : st.rank2(b);
        int re = dim == 0 ? st.rank1(elem) : st.rank2(elem);
        if (rb < re) ++cnt;
    }
    return cnt;
}

int count_type_after(const TypeTable& tt, const OrderedStructure& st, int elem,
                     int sigma, int dim) {
    int cnt = 0;
    for (int b = 0; b < st.size(); ++b) {
        if (b == elem || tt.sigma_of(st, b) != sigma) continue;
        int rb = dim == 0 ? st.rank1(b) : st.rank2(b);
        int re = dim == 0 ? st.rank1(elem) : st.rank2(elem);
        if (rb > re) ++cnt;
    }
    return cnt;
}

}  // namespace fo2
