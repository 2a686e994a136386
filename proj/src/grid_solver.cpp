#include "fo2/grid_solver.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>

namespace fo2 {

namespace {

using Rat = boost::multiprecision::cpp_rational;
using Big = boost::multiprecision::cpp_int;

void validate_grid_signature(const TypeTable& tt) {
    DimKind d0 = tt.dim_kind(0), d1 = tt.dim_kind(1);
    if ((d0 != DimKind::both && d0 != DimKind::lt_only) || d1 != DimKind::lt_only)
        throw std::invalid_argument(
            "grid decision needs two linear orders, with at most a successor on "
            "dimension 0");
}

// View of a structure in the grid solver's axes: V is dimension 0 (the
// shrinking axis, which may carry a successor), H is dimension 1.
struct Ax {
    const OrderedStructure* st;
    int v(int a) const { return st->rank1(a); }
    int h(int a) const { return st->rank2(a); }
    int at_v(int r) const { return st->element_at_rank1(r); }
};

// Full precondition check shared by the profile and shrink entry points:
// grid signature, structure is a solution, witness map has matching shape
// and certifies the solution.
void validate_grid_inputs(const ConstraintProblem& cp, const OrderedStructure& st,
                          const WitnessMap& wit) {
    const TypeTable& tt = *cp.types;
    validate_grid_signature(tt);
    const int n = st.size();
    const int ec = cp.num_constraints();
    if (static_cast<int>(wit.size()) != n)
        throw std::invalid_argument("witness map has wrong number of rows");
    CheckReport rep = check_solution(cp, st);
    if (!rep.ok)
        throw std::invalid_argument("structure is not a solution: " +
                                    (rep.violations.empty() ? std::string("unknown")
                                                            : rep.violations.front()));
    for (int e = 0; e < n; ++e) {
        if (static_cast<int>(wit[e].size()) != ec)
            throw std::invalid_argument("witness map has wrong number of columns");
        const int sg = tt.sigma_of(st, e);
        for (int i = 0; i < ec; ++i) {
            const int w = wit[e][i];
            if (w < -1 || w >= n || w == e)
                throw std::invalid_argument("witness map entry out of range");
            if (w == -1) {
                if (!cp.self_ok(i, sg))
                    throw std::invalid_argument("witness map claims an invalid self-witness");
                continue;
            }
            const WitnessOption realized{tt.order_type_of(st, e, w),
                                         tt.gamma_of(st, e, w), tt.sigma_of(st, w)};
            const auto& opts = cp.witness_options(i, sg);
            if (std::find(opts.begin(), opts.end(), realized) == opts.end())
                throw std::invalid_argument("witness map entry does not witness its constraint");
        }
    }
}

std::vector<int> witnesses_of(const WitnessMap& wit, int a) {
    std::vector<int> w;
    for (int x : wit[a])
        if (x >= 0) w.push_back(x);
    std::sort(w.begin(), w.end());
    w.erase(std::unique(w.begin(), w.end()), w.end());
    return w;
}

// Profile internals: the per-type extremal sets are needed by shrink, not
// just the member list.
struct Detail {
    int center = -1;
    int succ = -1;  // dimension-0 successor of the center, -1 if absent
    // Per unary type: extremal elements strictly below / strictly above the
    // center in dimension 0 (above excludes the successor), extremal in
    // dimension 1, capped at k+2, each list sorted by dimension-1 rank.
    std::vector<std::vector<int>> min_down, max_down, min_up, max_up;
    std::vector<int> members;   // P(center), sorted by dimension-1 rank
    std::vector<int> index_of;  // element -> index in members, or -1
};

int profile_cap(const TypeTable& tt) { return 3 * tt.num_binary_types() + 2; }

Detail build_detail(const ConstraintProblem& cp, const OrderedStructure& st,
                    const WitnessMap& wit, int c) {
    const TypeTable& tt = *cp.types;
    const int n = st.size();
    if (c < 0 || c >= n) throw std::invalid_argument("profile center out of range");
    Ax ax{&st};
    const int S = tt.num_unary_types();
    const int cap = profile_cap(tt);
    const int vc = ax.v(c);

    Detail d;
    d.center = c;
    d.succ = vc + 1 < n ? ax.at_v(vc + 1) : -1;
    d.min_down.assign(S, {});
    d.max_down.assign(S, {});
    d.min_up.assign(S, {});
    d.max_up.assign(S, {});

    // One pass in dimension-1 order gathers the per-type below/above lists.
    std::vector<std::vector<int>> below(S), above(S);
    for (int r = 0; r < n; ++r) {
        const int e = st.element_at_rank2(r);
        const int sg = tt.sigma_of(st, e);
        if (ax.v(e) < vc) below[sg].push_back(e);
        else if (ax.v(e) > vc && e != d.succ) above[sg].push_back(e);
    }
    auto head = [&](const std::vector<int>& xs) {
        return std::vector<int>(xs.begin(),
                                xs.begin() + std::min<std::size_t>(xs.size(), cap));
    };
    auto tail = [&](const std::vector<int>& xs) {
        const std::size_t start = xs.size() > static_cast<std::size_t>(cap)
                                      ? xs.size() - cap : 0;
        return std::vector<int>(xs.begin() + start, xs.end());
    };
    for (int sg = 0; sg < S; ++sg) {
        d.min_down[sg] = head(below[sg]);
        d.max_down[sg] = tail(below[sg]);
        d.min_up[sg] = head(above[sg]);
        d.max_up[sg] = tail(above[sg]);
    }

    std::set<int> P;
    P.insert(c);
    if (d.succ >= 0) P.insert(d.succ);
    // Witnesses of the extremal elements on the side relevant for each set:
    // min-sets look right of the element, max-sets left; down-sets keep
    // witnesses above the center, up-sets keep witnesses below.
    auto add_set = [&](const std::vector<int>& xs, bool right_of, bool above_c) {
        for (int a : xs) {
            P.insert(a);
            for (int b : witnesses_of(wit, a)) {
                if ((ax.h(b) > ax.h(a)) != right_of) continue;
                if (above_c ? ax.v(b) > vc : ax.v(b) < vc) P.insert(b);
            }
        }
    };
    for (int sg = 0; sg < S; ++sg) {
        add_set(d.min_down[sg], true, true);
        add_set(d.max_down[sg], false, true);
        add_set(d.min_up[sg], true, false);
        add_set(d.max_up[sg], false, false);
    }
    // The center's own far witnesses above it, and the successor's far
    // witnesses below it, are needed to re-provide the cut pairs touching
    // the center pair.
    for (int b : witnesses_of(wit, c))
        if (ax.v(b) > vc) P.insert(b);
    if (d.succ >= 0)
        for (int a : witnesses_of(wit, d.succ))
            if (ax.v(a) < vc) P.insert(a);

    d.members.assign(P.begin(), P.end());
    std::sort(d.members.begin(), d.members.end(),
              [&](int a, int b) { return ax.h(a) < ax.h(b); });
    d.index_of.assign(n, -1);
    for (std::size_t i = 0; i < d.members.size(); ++i)
        d.index_of[d.members[i]] = static_cast<int>(i);
    return d;
}

std::vector<unsigned> encode_detail(const TypeTable& tt, const OrderedStructure& st,
                                    const Detail& d) {
    Ax ax{&st};
    const bool has_suc = tt.dim_kind(0) == DimKind::both;
    const int m = static_cast<int>(d.members.size());

    std::vector<int> byv = d.members;
    std::sort(byv.begin(), byv.end(), [&](int a, int b) { return ax.v(a) < ax.v(b); });
    std::map<int, int> vpos;
    for (int i = 0; i < m; ++i) vpos[byv[i]] = i;

    std::vector<unsigned> enc;
    enc.reserve(3 + 2 * m + m * m);
    enc.push_back(static_cast<unsigned>(m));
    enc.push_back(static_cast<unsigned>(d.index_of[d.center]));
    enc.push_back(static_cast<unsigned>(d.succ >= 0 ? d.index_of[d.succ] + 1 : 0));
    for (int e : d.members) {
        enc.push_back(static_cast<unsigned>(tt.sigma_of(st, e)));
        enc.push_back(static_cast<unsigned>(vpos[e]));
    }
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            enc.push_back(static_cast<unsigned>(tt.gamma_of(st, d.members[i], d.members[j])));
            if (has_suc) {
                const int dv = ax.v(d.members[j]) - ax.v(d.members[i]);
                enc.push_back(dv == 1 ? 1u : dv == -1 ? 2u : 0u);
            }
        }
    return enc;
}

GridProfile to_public(const TypeTable& tt, const OrderedStructure& st, const Detail& d) {
    GridProfile p;
    p.center = d.center;
    p.members = d.members;
    p.center_index = d.index_of[d.center];
    p.succ_index = d.succ >= 0 ? d.index_of[d.succ] : -1;
    p.encoding = encode_detail(tt, st, d);
    return p;
}

// ---------------------------------------------------------------- shrinking

struct Shrinker {
    const ConstraintProblem& cp;
    const TypeTable& tt;
    const OrderedStructure& st;
    const WitnessMap& wit;
    Ax ax;
    int c1, c2, v1, v2, n, n2;
    int s1 = -1, s2 = -1;
    int G, k, S;
    Detail p1, p2;
    std::vector<int> sig_of;             // unary type per input element
    std::vector<int> new_id, old_of;     // id maps (survivors only)
    std::vector<Rat> x;                  // output dim-1 coordinate per survivor
    std::set<Rat> used;
    std::map<std::pair<int, int>, int> cross;  // (below, above) -> type below->above
    std::vector<std::pair<int, int>> wword;    // (elem, mark) along dim 1
    // marks in wword: 0 below center, 1 the successor, 2 the center, 3 above

    Shrinker(const ConstraintProblem& cp_, const OrderedStructure& st_,
             const WitnessMap& wit_, int c1_, int c2_)
        : cp(cp_), tt(*cp_.types), st(st_), wit(wit_), ax{&st_}, c1(c1_), c2(c2_) {}

    int nvr(int e) const {  // compacted dimension-0 rank of a survivor
        const int r = ax.v(e);
        return r <= v1 ? r : r - (v2 - v1);
    }
    bool lower(int e) const { return ax.v(e) <= v1; }

    void assign_cross(int lo, int hi, int g, const char* who) {
        auto [it, fresh] = cross.try_emplace(std::make_pair(lo, hi), g);
        if (!fresh && it->second != g)
            throw std::runtime_error(std::string("conflicting pair types from ") + who);
    }

    // Order type lo->hi in the output for a (below, above) pair.
    int cross_d(int lo, int hi) const {
        int d0;
        if (tt.dim_kind(0) == DimKind::both)
            d0 = (lo == c1 && hi == s2) ? kBothLtNext : kBothLtFar;
        else
            d0 = kLtLt;
        const int d1 = x[lo] < x[hi] ? kLtLt : kLtGt;
        return tt.order_compose(d0, d1);
    }

    // Order type p->q in the output, any sides.
    int out_d(int p, int q) const {
        int d0;
        const int dv = nvr(q) - nvr(p);
        if (tt.dim_kind(0) == DimKind::both)
            d0 = dv == 1 ? kBothLtNext : dv == -1 ? kBothGtNext
                 : dv > 0 ? kBothLtFar : kBothGtFar;
        else
            d0 = dv > 0 ? kLtLt : kLtGt;
        const int d1 = x[p] < x[q] ? kLtLt : kLtGt;
        return tt.order_compose(d0, d1);
    }

    void setup() {
        n = st.size();
        if (c1 < 0 || c1 >= n || c2 < 0 || c2 >= n || c1 == c2)
            throw std::invalid_argument("shrink needs two distinct elements");
        v1 = ax.v(c1);
        v2 = ax.v(c2);
        if (v1 >= v2)
            throw std::invalid_argument("shrink needs c1 below c2 in dimension 0");
        G = tt.num_binary_types();
        k = 3 * G;
        S = tt.num_unary_types();
        p1 = build_detail(cp, st, wit, c1);
        p2 = build_detail(cp, st, wit, c2);
        if (encode_detail(tt, st, p1) != encode_detail(tt, st, p2))
            throw std::invalid_argument("shrink needs isomorphic profiles");
        s1 = p1.succ;
        s2 = p2.succ;
        if (s1 < 0 || s2 < 0)
            throw std::runtime_error("successor bookkeeping broken (internal)");
        sig_of.resize(n);
        for (int e = 0; e < n; ++e) sig_of[e] = tt.sigma_of(st, e);

        n2 = n - (v2 - v1);
        new_id.assign(n, -1);
        old_of.clear();
        for (int e = 0; e < n; ++e)
            if (ax.v(e) <= v1 || ax.v(e) > v2) {
                new_id[e] = static_cast<int>(old_of.size());
                old_of.push_back(e);
            }
    }

    void place(int e, Rat val, bool resolve) {
        auto it = used.find(val);
        if (it != used.end()) {
            if (!resolve) throw std::runtime_error("coordinate collision (internal)");
            if (it == used.begin()) {
                val = val - 1;
            } else {
                val = (*std::prev(it) + val) / 2;
            }
        }
        if (!used.insert(val).second)
            throw std::runtime_error("coordinate collision after shift (internal)");
        x[e] = val;
    }

    void embed() {
        x.assign(n, Rat(0));
        // Lower block keeps its coordinates.
        for (int e = 0; e < n; ++e)
            if (new_id[e] >= 0 && lower(e)) place(e, Rat(ax.h(e)), false);
        // Upper-block elements matched through the profiles take their
        // partners' old coordinates; the match is exact, so no collisions.
        const int m = static_cast<int>(p2.members.size());
        for (int i = 0; i < m; ++i) {
            const int u = p2.members[i];
            if (new_id[u] >= 0 && !lower(u)) place(u, Rat(ax.h(p1.members[i])), false);
        }
        // Remaining upper-block elements interpolate between the bracketing
        // matched members; exact collisions shift to the midpoint below.
        std::vector<int> h2(m);
        for (int i = 0; i < m; ++i) h2[i] = ax.h(p2.members[i]);
        std::vector<int> rest;
        for (int r = 0; r < n; ++r) {
            const int e = st.element_at_rank2(r);
            if (new_id[e] >= 0 && !lower(e) && p2.index_of[e] < 0) rest.push_back(e);
        }
        for (int u : rest) {
            const int hu = ax.h(u);
            const int j =
                static_cast<int>(std::upper_bound(h2.begin(), h2.end(), hu) - h2.begin()) - 1;
            if (j < 0 || j + 1 >= m)
                throw std::runtime_error("interpolation bracket missing (internal)");
            const Rat x1j(ax.h(p1.members[j]));
            const Rat x1j1(ax.h(p1.members[j + 1]));
            const Rat val =
                x1j + Rat(hu - h2[j]) / Rat(h2[j + 1] - h2[j]) * (x1j1 - x1j);
            place(u, val, true);
        }
    }

    // ---- witness re-provision ----

    struct Dem {
        int owner, cons, wold, d, g, tau;
    };
    // key: (type below, type above, below element left of above element)
    std::map<std::tuple<int, int, bool>, std::pair<std::vector<Dem>, std::vector<Dem>>>
        rounds;

    void collect_demands() {
        const int ec = cp.num_constraints();
        for (int idx = 0; idx < n2; ++idx) {
            const int e = old_of[idx];
            for (int i = 0; i < ec; ++i) {
                const int w = wit[e][i];
                if (w < 0) continue;
                if (lower(e)) {
                    if (ax.v(w) <= v1) continue;         // pair survives intact
                    if (e == c1 && w == s1) continue;    // successor pair covers it
                    Dem dm{e, i, w, tt.order_type_of(st, e, w), tt.gamma_of(st, e, w),
                           sig_of[w]};
                    rounds[{sig_of[e], dm.tau, ax.h(e) < ax.h(w)}].first.push_back(dm);
                } else {
                    if (ax.v(w) > v2) continue;
                    if (e == s2 && w == c2) continue;
                    Dem dm{e, i, w, tt.order_type_of(st, e, w), tt.gamma_of(st, e, w),
                           sig_of[w]};
                    rounds[{dm.tau, sig_of[e], ax.h(w) < ax.h(e)}].second.push_back(dm);
                }
            }
        }
    }

    void build_word() {
        std::set<int> aw;
        for (int sg = 0; sg < S; ++sg) {
            for (int e : p1.min_down[sg]) aw.insert(e);
            for (int e : p1.max_down[sg]) aw.insert(e);
            for (int e : p1.min_up[sg]) aw.insert(e);
            for (int e : p1.max_up[sg]) aw.insert(e);
        }
        aw.insert(c1);
        aw.insert(s1);
        wword.clear();
        for (int e : aw) wword.emplace_back(e, 0);
        std::sort(wword.begin(), wword.end(),
                  [&](const std::pair<int, int>& a, const std::pair<int, int>& b) {
                      return ax.h(a.first) < ax.h(b.first);
                  });
        for (auto& en : wword) {
            const int e = en.first;
            en.second = e == c1 ? 2 : e == s1 ? 1 : ax.v(e) < v1 ? 0 : 3;
        }
    }

    bool is_rich(int sg, int tu, bool below_left) const {
        const int L = static_cast<int>(wword.size());
        std::vector<int> prefA(L + 1, 0), prefB(L + 1, 0);
        for (int i = 0; i < L; ++i) {
            const auto& [e, mark] = wword[i];
            prefA[i + 1] = prefA[i] + (mark == 0 && sig_of[e] == sg ? 1 : 0);
            prefB[i + 1] = prefB[i] + (mark == 3 && sig_of[e] == tu ? 1 : 0);
        }
        for (int u = 0; u < L; ++u) {
            const int a_before = prefA[u], a_after = prefA[L] - prefA[u + 1];
            const int b_before = prefB[u], b_after = prefB[L] - prefB[u + 1];
            if (below_left ? (a_before >= k && b_after >= k)
                           : (a_after >= k && b_before >= k))
                return true;
        }
        return false;
    }

    // In-round direction helpers: a "forward" pair has the below element on
    // the round's witness side of the above element.
    bool ok_pair(int lo, int hi, bool below_left) const {
        return below_left ? x[lo] < x[hi] : x[lo] > x[hi];
    }

    void run_rich_round(int sg, int tu, bool below_left, const std::vector<Dem>& bel,
                        const std::vector<Dem>& abv) {
        const std::vector<int>& asrc = below_left ? p1.min_down[sg] : p1.max_down[sg];
        const std::vector<int>& bsrc = below_left ? p2.max_up[tu] : p2.min_up[tu];
        if (static_cast<int>(asrc.size()) < k || static_cast<int>(bsrc.size()) < k)
            throw std::runtime_error("rich round with thin extremal sets (internal)");
        // Round-ordered: index 0 is the round's first position; the blocks
        // of the below side sit first, those of the above side last.
        std::vector<int> Ak, Bk;
        if (below_left) {
            Ak.assign(asrc.begin(), asrc.begin() + k);
            Bk.assign(bsrc.end() - k, bsrc.end());
        } else {
            Ak.assign(asrc.end() - k, asrc.end());
            std::reverse(Ak.begin(), Ak.end());
            Bk.assign(bsrc.begin(), bsrc.begin() + k);
            std::reverse(Bk.begin(), Bk.end());
        }
        std::map<int, int> apos, bpos;
        for (int i = 0; i < k; ++i) apos[Ak[i]] = i;
        for (int i = 0; i < k; ++i) bpos[Bk[i]] = i;

        std::map<int, std::set<int>> bel_s, bel_rest, abv_c, abv_rest;
        for (const Dem& dm : bel) (dm.wold == s1 ? bel_s : bel_rest)[dm.owner].insert(dm.g);
        for (const Dem& dm : abv) (dm.wold == c2 ? abv_c : abv_rest)[dm.owner].insert(dm.g);

        std::set<int> bel_owners, abv_owners;
        for (auto& [o, _] : bel_s) bel_owners.insert(o);
        for (auto& [o, _] : bel_rest) bel_owners.insert(o);
        for (auto& [o, _] : abv_c) abv_owners.insert(o);
        for (auto& [o, _] : abv_rest) abv_owners.insert(o);

        for (int a : bel_owners) {
            std::set<int> all;
            if (auto it = bel_s.find(a); it != bel_s.end()) all = it->second;
            if (auto it = bel_rest.find(a); it != bel_rest.end())
                all.insert(it->second.begin(), it->second.end());
            if (auto it = apos.find(a); it != apos.end()) {
                // block member: palette slot per demanded type
                const int bi = it->second / G;
                for (int g : all) {
                    const int b = Bk[bi * G + g];
                    if (!ok_pair(a, b, below_left))
                        throw std::runtime_error("block witness on wrong side (internal)");
                    assign_cross(a, b, g, "rich-round blocks");
                }
            } else {
                std::set<int> sset;
                if (auto it = bel_s.find(a); it != bel_s.end()) sset = it->second;
                for (int g : sset) {
                    if (!ok_pair(a, s2, below_left))
                        throw std::runtime_error("successor fallback on wrong side (internal)");
                    assign_cross(a, s2, g, "rich-round successor fallback");
                }
                int j = 0;
                for (int g : all) {
                    if (sset.count(g)) continue;
                    ++j;  // j-th remaining demand takes the j-th round-last target
                    const int b = Bk[k - j];
                    if (!ok_pair(a, b, below_left))
                        throw std::runtime_error("extremal witness on wrong side (internal)");
                    assign_cross(a, b, g, "rich-round lower extras");
                }
            }
        }
        for (int b : abv_owners) {
            std::set<int> all;
            if (auto it = abv_c.find(b); it != abv_c.end()) all = it->second;
            if (auto it = abv_rest.find(b); it != abv_rest.end())
                all.insert(it->second.begin(), it->second.end());
            if (auto it = bpos.find(b); it != bpos.end()) {
                const int bi = it->second / G;
                for (int g : all) {
                    const int a = Ak[((bi + 1) % 3) * G + g];
                    if (!ok_pair(a, b, below_left))
                        throw std::runtime_error("block witness on wrong side (internal)");
                    assign_cross(a, b, tt.gamma_reverse(g), "rich-round blocks");
                }
            } else {
                std::set<int> cset;
                if (auto it = abv_c.find(b); it != abv_c.end()) cset = it->second;
                for (int g : cset) {
                    if (!ok_pair(c1, b, below_left))
                        throw std::runtime_error("center fallback on wrong side (internal)");
                    assign_cross(c1, b, tt.gamma_reverse(g), "rich-round center fallback");
                }
                // Remaining demands pick the round-earliest block members on
                // the valid side; unplaceable ones fall to the repair pass.
                std::set<int> taken;
                for (int g : all) {
                    if (cset.count(g)) continue;
                    for (int a : Ak) {
                        if (taken.count(a) || !ok_pair(a, b, below_left)) continue;
                        taken.insert(a);
                        assign_cross(a, b, tt.gamma_reverse(g), "rich-round upper extras");
                        break;
                    }
                }
            }
        }
    }

    void run_poor_round(const std::vector<Dem>& bel, const std::vector<Dem>& abv) {
        for (const Dem& dm : bel) {
            const int idx = p1.index_of[dm.wold];
            if (idx < 0) continue;  // repair pass will re-provide
            const int tgt = p2.members[idx];
            if (ax.v(tgt) <= v2)
                throw std::runtime_error("matched witness not in upper block (internal)");
            if (dm.owner == c1 && tgt == s2)
                throw std::runtime_error("successor pair reached via matching (internal)");
            if ((x[dm.owner] < x[tgt]) != (ax.h(dm.owner) < ax.h(dm.wold)))
                throw std::runtime_error("matched witness flipped sides (internal)");
            assign_cross(dm.owner, tgt, dm.g, "poor-round lower demands");
        }
        for (const Dem& dm : abv) {
            const int idx = p2.index_of[dm.wold];
            if (idx < 0) continue;
            const int tgt = p1.members[idx];
            if (ax.v(tgt) > v1)
                throw std::runtime_error("matched witness not in lower block (internal)");
            if (tgt == c1 && dm.owner == s2)
                throw std::runtime_error("successor pair reached via matching (internal)");
            if ((x[tgt] < x[dm.owner]) != (ax.h(dm.wold) < ax.h(dm.owner)))
                throw std::runtime_error("matched witness flipped sides (internal)");
            assign_cross(tgt, dm.owner, tt.gamma_reverse(dm.g), "poor-round upper demands");
        }
    }

    // ---- admissible-combination bookkeeping ----

    std::map<std::tuple<int, int, int>, int> combo_first;  // (sigma,d,tau) -> type
    std::set<std::tuple<int, int, int, int>> combos;       // (sigma,d,type,tau)

    void build_combos() {
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                if (a == b) continue;
                const int d = tt.order_type_of(st, a, b);
                const int g = tt.gamma_of(st, a, b);
                combo_first.try_emplace({sig_of[a], d, sig_of[b]}, g);
                combos.insert({sig_of[a], d, g, sig_of[b]});
            }
    }

    // Type of a surviving pair p->q under the assignments so far; `known`
    // reports whether it is determined yet.
    int gamma_so_far(int p, int q, bool& known) const {
        if (lower(p) == lower(q)) {
            known = true;
            return tt.gamma_of(st, p, q);
        }
        const int lo = lower(p) ? p : q;
        const int hi = lower(p) ? q : p;
        auto it = cross.find(std::make_pair(lo, hi));
        if (it == cross.end()) {
            known = false;
            return 0;
        }
        known = true;
        return p == lo ? it->second : tt.gamma_reverse(it->second);
    }

    bool satisfied(int e, int i) const {
        const int sg = sig_of[e];
        if (cp.self_ok(i, sg)) return true;
        const auto& opts = cp.witness_options(i, sg);
        for (int idx = 0; idx < n2; ++idx) {
            const int q = old_of[idx];
            if (q == e) continue;
            bool known = false;
            const int g = gamma_so_far(e, q, known);
            if (!known) continue;
            const WitnessOption got{out_d(e, q), g, sig_of[q]};
            if (std::find(opts.begin(), opts.end(), got) != opts.end()) return true;
        }
        return false;
    }

    void repair() {
        const int ec = cp.num_constraints();
        for (int idx = 0; idx < n2; ++idx) {
            const int e = old_of[idx];
            for (int i = 0; i < ec; ++i) {
                if (satisfied(e, i)) continue;
                bool done = false;
                for (const WitnessOption& op : cp.witness_options(i, sig_of[e])) {
                    if (done) break;
                    if (!combos.count({sig_of[e], op.d, op.gamma, op.tau})) continue;
                    for (int qidx = 0; qidx < n2 && !done; ++qidx) {
                        const int q = old_of[qidx];
                        if (q == e || sig_of[q] != op.tau) continue;
                        if (lower(q) == lower(e)) continue;  // fixed pairs can't change
                        const int lo = lower(e) ? e : q;
                        const int hi = lower(e) ? q : e;
                        if (cross.count(std::make_pair(lo, hi))) continue;
                        if (out_d(e, q) != op.d) continue;
                        assign_cross(lo, hi, e == lo ? op.gamma : tt.gamma_reverse(op.gamma),
                                     "repair");
                        done = true;
                    }
                }
                if (!done)
                    throw std::runtime_error(
                        "repair failed: no admissible replacement witness (internal)");
            }
        }
    }

    void fill_defaults() {
        for (int li = 0; li < n2; ++li) {
            const int lo = old_of[li];
            if (!lower(lo)) continue;
            for (int hj = 0; hj < n2; ++hj) {
                const int hi = old_of[hj];
                if (lower(hi)) continue;
                if (cross.count(std::make_pair(lo, hi))) continue;
                const int d = cross_d(lo, hi);
                auto it = combo_first.find({sig_of[lo], d, sig_of[hi]});
                if (it == combo_first.end())
                    throw std::runtime_error(
                        "no inheritable type for a cross configuration (internal)");
                assign_cross(lo, hi, it->second, "defaults");
            }
        }
    }

    OrderedStructure finish() {
        OrderedStructure out(st.signature(), n2);
        std::vector<int> r1(n2), r2(n2);
        for (int idx = 0; idx < n2; ++idx) r1[idx] = nvr(old_of[idx]);
        std::vector<int> byx(n2);
        for (int i = 0; i < n2; ++i) byx[i] = i;
        std::sort(byx.begin(), byx.end(),
                  [&](int a, int b) { return x[old_of[a]] < x[old_of[b]]; });
        for (int r = 0; r < n2; ++r) r2[byx[r]] = r;
        out.set_order1(r1);
        out.set_order2(r2);
        for (int idx = 0; idx < n2; ++idx) tt.apply_sigma(out, idx, sig_of[old_of[idx]]);
        for (int i = 0; i < n2; ++i)
            for (int j = i + 1; j < n2; ++j) {
                const int a = old_of[i], b = old_of[j];
                if (lower(a) == lower(b)) tt.apply_gamma(out, i, j, tt.gamma_of(st, a, b));
            }
        for (const auto& [pr, g] : cross)
            tt.apply_gamma(out, new_id[pr.first], new_id[pr.second], g);
        return out;
    }

    OrderedStructure run() {
        setup();
        embed();
        build_combos();
        assign_cross(c1, s2, tt.gamma_of(st, c1, s1), "successor inheritance");
        collect_demands();
        build_word();
        for (auto& [key, rd] : rounds) {
            const auto& [sg, tu, below_left] = key;
            if (is_rich(sg, tu, below_left))
                run_rich_round(sg, tu, below_left, rd.first, rd.second);
            else
                run_poor_round(rd.first, rd.second);
        }
        repair();
        fill_defaults();
        return finish();
    }
};

}  // namespace

GridProfile compute_profile(const ConstraintProblem& cp, const OrderedStructure& st,
                            const WitnessMap& wit, int center) {
    validate_grid_inputs(cp, st, wit);
    const Detail d = build_detail(cp, st, wit, center);
    return to_public(*cp.types, st, d);
}

bool profiles_isomorphic(const GridProfile& a, const GridProfile& b) {
    return a.encoding == b.encoding;
}

std::optional<std::vector<int>> profile_isomorphism(const GridProfile& a,
                                                    const GridProfile& b) {
    if (!profiles_isomorphic(a, b)) return std::nullopt;
    return b.members;  // members align by dimension-1 rank
}

OrderedStructure shrink(const ConstraintProblem& cp, const OrderedStructure& st,
                        const WitnessMap& wit, int c1, int c2) {
    validate_grid_inputs(cp, st, wit);
    Shrinker sh(cp, st, wit, c1, c2);
    return sh.run();
}

std::optional<std::pair<int, int>> find_shrinkable_pair(const ConstraintProblem& cp,
                                                        const OrderedStructure& st,
                                                        const WitnessMap& wit) {
    validate_grid_inputs(cp, st, wit);
    const TypeTable& tt = *cp.types;
    const int n = st.size();
    Ax ax{&st};
    std::map<std::vector<unsigned>, std::vector<int>> groups;
    for (int e = 0; e < n; ++e) {
        const Detail d = build_detail(cp, st, wit, e);
        groups[encode_detail(tt, st, d)].push_back(e);
    }
    std::optional<std::pair<int, int>> best;
    int best_gap = 0, best_v = 0;
    for (auto& [enc, elems] : groups) {
        if (elems.size() < 2) continue;
        std::sort(elems.begin(), elems.end(),
                  [&](int a, int b) { return ax.v(a) < ax.v(b); });
        for (std::size_t i = 0; i + 1 < elems.size(); ++i) {
            const int gap = ax.v(elems[i + 1]) - ax.v(elems[i]);
            const int va = ax.v(elems[i]);
            if (!best || gap < best_gap || (gap == best_gap && va < best_v)) {
                best = std::make_pair(elems[i], elems[i + 1]);
                best_gap = gap;
                best_v = va;
            }
        }
    }
    return best;
}

GridShrinkResult grid_shrink_to_fixpoint(const ConstraintProblem& cp,
                                         const OrderedStructure& st) {
    GridShrinkResult res{st, 0};
    while (true) {
        const WitnessMap wit = extract_witnesses(cp, res.structure);
        const auto pair = find_shrinkable_pair(cp, res.structure, wit);
        if (!pair) break;
        OrderedStructure next = shrink(cp, res.structure, wit, pair->first, pair->second);
        const CheckReport rep = check_solution(cp, next);
        if (!rep.ok)
            throw std::runtime_error(
                "shrink produced a non-solution: " +
                (rep.violations.empty() ? std::string("unknown") : rep.violations.front()));
        if (next.size() >= res.structure.size())
            throw std::runtime_error("shrink failed to reduce the size (internal)");
        res.structure = std::move(next);
        ++res.iterations;
    }
    return res;
}

GridDecision decide_grid_sat(const ConstraintProblem& cp, const GridOptions& opt) {
    const TypeTable& tt = *cp.types;
    validate_grid_signature(tt);
    if (opt.n_max < 1) throw std::invalid_argument("n_max must be >= 1");

    GridDecision dec;
    if (opt.mode == GridMode::bounded) {
        FindResult r = find_model(cp, opt.n_max, opt.step_budget);
        dec.status = r.status;
        dec.model = std::move(r.model);
        dec.steps = r.steps;
        return dec;
    }

    // Complete mode: a solution exists iff one exists below the
    // profile-class bound, counted crudely from the profile shape limits.
    const long long S = tt.num_unary_types();
    const long long G = tt.num_binary_types();
    const long long E = cp.num_constraints();
    const long long cap = profile_cap(tt);
    const long long P = 2 + 4 * S * cap * (1 + E) + 2 * E;  // max profile size
    const double log2_classes = static_cast<double>(P) * std::log2(2.0 * static_cast<double>(S)) +
                                static_cast<double>(P) * static_cast<double>(P) *
                                    std::log2(static_cast<double>(G)) +
                                2.0 * (std::lgamma(static_cast<double>(P) + 1.0) / std::log(2.0)) +
                                2.0 * std::log2(static_cast<double>(P));
    Big bound;
    bool exact = false;
    if (log2_classes < 4000.0) {
        const Big bp(P);
        Big classes = boost::multiprecision::pow(Big(2 * S), static_cast<unsigned>(P));
        if (G > 1)
            classes *= boost::multiprecision::pow(Big(G), static_cast<unsigned>(P * P));
        Big fact = 1;
        for (long long i = 2; i <= P; ++i) fact *= i;
        classes *= fact * fact * bp * bp;
        bound = classes + 1;
        exact = true;
        dec.bound = bound.str();
    } else {
        dec.bound = "about 2^" + std::to_string(static_cast<long long>(log2_classes));
    }

    const bool feasible = exact && bound <= Big(opt.size_budget) &&
                          bound <= Big(std::numeric_limits<int>::max());
    if (!feasible) {
        dec.bound_infeasible = true;
        FindResult r = find_model(cp, opt.n_max, opt.step_budget);
        dec.status = r.status;
        dec.model = std::move(r.model);
        dec.steps = r.steps;
        return dec;
    }
    FindResult r = find_model(cp, static_cast<int>(bound.convert_to<long long>()),
                              opt.step_budget);
    dec.status = r.status;
    dec.model = std::move(r.model);
    dec.steps = r.steps;
    dec.complete = r.status == SearchStatus::exhausted;
    return dec;
}

}  // namespace fo2
