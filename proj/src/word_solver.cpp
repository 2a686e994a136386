#include "fo2/word_solver.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cassert>
#include <deque>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fo2 {

namespace {

// Upper bound on the block size so that every unary-type counter fits a
// byte. The counters themselves saturate at k + 2: every verdict compares
// them against thresholds of at most k + 1, so larger values are
// indistinguishable, and saturating there keeps the reachable state space
// small enough to close.
constexpr int kCntCap = 64;

// Saturation point for single-type pending classes: an arrival can deduct at
// most one member per exact binary type plus the withheld ones before the
// rest is discharged in bulk, so counts this far above every comparison
// threshold behave identically.
int pending_cap(int k, int G) { return k + 4 + 2 * G; }

// Saturation point for the spare-position counter: a letter consumes at most
// one spare per distinct left-demand binary type and spares are not used up
// across letters, so larger values are indistinguishable.
int free_cap(int G) { return G + 2; }

// ---------------------------------------------------------------------------
// Automaton state
// ---------------------------------------------------------------------------

// Counting state for one tracked type pair (sigma_p before tau_p).
struct PairMachine {
    bool touched = false;

    // Richness side: looks for a position with >= k sigma_p strictly before
    // and >= k tau_p strictly after, and checks that every distant demand
    // leaves enough room on its side.
    int stat = 0;  // 0..2k+1; 2k+1 means the rich split position exists
    int m = 0;     // worst outstanding distant-right demand (see step_pair)
    int y = 0;     // distant-right demand of the previous letter
    bool rich_dead = false;

    // Exact-counting (poor) side: tracks how each distant demand is served
    // relative to the distinguished position v (the (k+1)-th sigma_p).
    bool poor_dead = false;
    bool v_declared = false;
    int tau_after = 0;  // #tau_p strictly after v (sat. at k+2)
    // Spare positions at or after v (demand-free or fully discharged),
    // usable by fresh left references once they are two letters old.
    int free0 = 0;        // created at the previous letter
    int free1 = 0;        // created two letters ago
    int free_mature = 0;  // older; saturates at num_binary_types + 2
    // Unserved demands of positions before v: (ordinal, gamma, age<=2).
    std::vector<std::array<unsigned char, 3>> obligations;
    // Unserved demand owners at or after v, grouped into classes by their
    // remaining demand set: (demand-set mask, age<=2, member count).
    // Single-type classes saturate at pending_cap; multi-type classes stay
    // exact (their members migrate between classes, which saturation would
    // corrupt). The list is sorted and gap-free.
    std::vector<std::array<unsigned short, 3>> pending;

    bool operator==(const PairMachine&) const = default;
};

struct NfaState {
    bool has_prev = false;
    int prev_sigma = 0;
    int prev_gamma = -1;  // -1: the previous letter claimed to be last
    int tau_demand = -1;  // forced unary type of the next letter, -1: none
    std::vector<unsigned char> cnt;  // per unary type, saturating
    std::vector<PairMachine> pairs;
};

void serialize(const NfaState& s, std::string& out) {
    out.clear();
    auto u8 = [&out](int v) { out.push_back(static_cast<char>(v & 0xff)); };
    auto u16 = [&u8](int v) { u8(v & 0xff); u8((v >> 8) & 0xff); };
    u8(s.has_prev ? 1 : 0);
    u8(s.prev_sigma);
    u8(s.prev_gamma + 1);
    u8(s.tau_demand + 1);
    for (unsigned char c : s.cnt) out.push_back(static_cast<char>(c));
    for (const PairMachine& m : s.pairs) {
        u8((m.touched ? 1 : 0) | (m.rich_dead ? 2 : 0) | (m.poor_dead ? 4 : 0) |
           (m.v_declared ? 8 : 0));
        u8(m.stat);
        u8(m.m);
        u8(m.y);
        u8(m.tau_after);
        u8(m.free0);
        u8(m.free1);
        u8(m.free_mature);
        u8(static_cast<int>(m.obligations.size()));
        for (const auto& e : m.obligations) { u8(e[0]); u8(e[1]); u8(e[2]); }
        u8(static_cast<int>(m.pending.size()));
        for (const auto& e : m.pending) { u16(e[0]); u8(e[1]); u16(e[2]); }
    }
}

// ---------------------------------------------------------------------------
// Replay bookkeeping (used when rebuilding a structure from a word)
// ---------------------------------------------------------------------------

struct Replay {
    struct PairTrace {
        std::vector<int> sigma_positions;  // ascending
        int v_pos = -1;
        // Pending demand owners at or after v: (position, remaining demand
        // set), ascending by position.
        std::vector<std::pair<int, int>> pending_owners;
    };
    std::vector<PairTrace> pairs;
    std::vector<char> emit;  // per pair: collect assignments?
    std::map<std::pair<int, int>, int> assign;  // (a, b) with a < b -> gamma
    int pos = 0;  // position of the letter being applied

    void set(int a, int b, int gamma) {
        assert(a < b);
        auto [it, fresh] = assign.emplace(std::make_pair(a, b), gamma);
        if (!fresh && it->second != gamma)
            throw std::runtime_error(
                "word decoder: conflicting pair assignment");
    }
};

// Distinct binary types the letter demands toward distant positions of unary
// type `other` in the given direction, sorted ascending.
std::vector<int> far_demands(const WordLetter& L, int other, bool right) {
    std::vector<int> out;
    const int want_d = right ? kBothLtFar : kBothGtFar;
    for (const WitnessOption& o : L.intents)
        if (o.d == want_d && o.tau == other) out.push_back(o.gamma);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Ages every pending class and merges the classes that collide. Counts of
// single-type classes saturate at `pcap`; multi-type counts stay exact.
void promote_pending(std::vector<std::array<unsigned short, 3>>& pending,
                     int pcap) {
    if (pending.empty()) return;
    for (auto& e : pending)
        if (e[1] < 2) e[1] += 1;
    std::sort(pending.begin(), pending.end());
    std::size_t w = 0;
    for (std::size_t i = 0; i < pending.size(); ++i) {
        if (w > 0 && pending[w - 1][0] == pending[i][0] &&
            pending[w - 1][1] == pending[i][1]) {
            int merged = pending[w - 1][2] + pending[i][2];
            if (std::popcount(static_cast<unsigned>(pending[i][0])) == 1)
                merged = std::min(merged, pcap);
            pending[w - 1][2] =
                static_cast<unsigned short>(std::min(merged, 65000));
        } else {
            pending[w++] = pending[i];
        }
    }
    pending.resize(w);
}

// Applies the letter's ResolveBatches to the mature pending classes of one
// pair. Returns false if the batches are malformed; otherwise updates the
// class table, collects the binary types discharged right now, the total
// withheld count, and the number of owners whose demands are now complete.
bool discharge_pending(PairMachine& m, const PairAnnot& a, int dl_size,
                       int pcap, int p, Replay* rp, bool do_emit,
                       std::set<int>& resolved_gammas, int& withheld_total,
                       int& free_gain) {
    std::vector<std::array<unsigned short, 3>> next;
    auto add_class = [&next, pcap](int mask, int age, int c) {
        if (c <= 0) return;
        const bool single = std::popcount(static_cast<unsigned>(mask)) == 1;
        for (auto& e : next)
            if (e[0] == mask && e[1] == age) {
                int merged = e[2] + c;
                if (single) merged = std::min(merged, pcap);
                e[2] = static_cast<unsigned short>(std::min(merged, 65000));
                return;
            }
        if (single) c = std::min(c, pcap);
        next.push_back({static_cast<unsigned short>(mask),
                        static_cast<unsigned short>(age),
                        static_cast<unsigned short>(std::min(c, 65000))});
    };

    // Replay bookkeeping: planned mask changes per owner (-1: done).
    std::vector<std::pair<int, int>> snapshot;
    std::vector<int> new_mask;
    if (rp) {
        snapshot = rp->pairs[p].pending_owners;
        new_mask.resize(snapshot.size());
        for (std::size_t i = 0; i < snapshot.size(); ++i)
            new_mask[i] = snapshot[i].second;
    }

    std::size_t bix = 0;
    for (const auto& e : m.pending) {
        if (e[1] != 2) {
            add_class(e[0], e[1], e[2]);
            continue;
        }
        const int mask = e[0];
        const int mc = e[2];
        const bool single = std::popcount(static_cast<unsigned>(mask)) == 1;
        if (bix >= a.resolutions.size()) return false;
        const ResolveBatch& rb = a.resolutions[bix++];
        if (rb.mask != mask || rb.withheld < 0) return false;
        withheld_total += rb.withheld;
        int prev_g = -1;
        for (int g : rb.exact) {
            if (g <= prev_g) return false;  // sorted and distinct
            prev_g = g;
            if (!(mask & (1 << g)) || g == rb.rest_gamma) return false;
        }
        const int taken = static_cast<int>(rb.exact.size()) + rb.withheld;
        int rest_count = 0;
        if (rb.rest_gamma >= 0) {
            if (!(mask & (1 << rb.rest_gamma))) return false;
            rest_count = mc - taken;
            // Bulk discharges of fewer than two members are written with
            // `exact`, which keeps the encoding unique.
            if (rest_count < 2) return false;
        } else {
            // Exact accounting; meaningless for saturated classes, whose
            // true count is unknown.
            if (single && mc == pcap) return false;
            if (taken != mc) return false;
        }
        for (int g : rb.exact) resolved_gammas.insert(g);
        if (rb.rest_gamma >= 0) resolved_gammas.insert(rb.rest_gamma);
        if (rb.withheld > 0) add_class(mask, 2, rb.withheld);
        for (int g : rb.exact) {
            const int rem = mask & ~(1 << g);
            if (rem) add_class(rem, 2, 1); else free_gain += 1;
        }
        if (rb.rest_gamma >= 0) {
            const int rem = mask & ~(1 << rb.rest_gamma);
            if (rem) add_class(rem, 2, rest_count);
            else free_gain += rest_count;
        }

        if (rp) {
            // Pop the oldest eligible owners: one per exact type, then the
            // bulk, leaving the withheld (youngest) ones pending.
            std::vector<std::size_t> elig;
            for (std::size_t i = 0; i < snapshot.size(); ++i)
                if (new_mask[i] == mask && snapshot[i].second == mask &&
                    snapshot[i].first <= rp->pos - 2)
                    elig.push_back(i);
            std::size_t ptr = 0;
            auto pop = [&](int g) {
                if (ptr >= elig.size())
                    throw std::runtime_error(
                        "word decoder: pending owner list out of sync");
                const std::size_t idx = elig[ptr++];
                if (do_emit) rp->set(snapshot[idx].first, rp->pos, g);
                new_mask[idx] = snapshot[idx].second & ~(1 << g);
                if (new_mask[idx] == 0) new_mask[idx] = -1;
            };
            for (int g : rb.exact) pop(g);
            if (rb.rest_gamma >= 0) {
                const int bulk = static_cast<int>(elig.size()) -
                                 static_cast<int>(ptr) - rb.withheld;
                if (bulk < 1)
                    throw std::runtime_error(
                        "word decoder: pending owner list out of sync");
                for (int i = 0; i < bulk; ++i) pop(rb.rest_gamma);
            } else if (static_cast<int>(elig.size() - ptr) != rb.withheld) {
                throw std::runtime_error(
                    "word decoder: pending owner list out of sync");
            }
        }
    }
    if (bix != a.resolutions.size()) return false;
    if (withheld_total > dl_size) return false;
    std::sort(next.begin(), next.end());
    m.pending = std::move(next);
    if (rp) {
        std::vector<std::pair<int, int>> rebuilt;
        for (std::size_t i = 0; i < snapshot.size(); ++i)
            if (new_mask[i] > 0)
                rebuilt.push_back({snapshot[i].first, new_mask[i]});
        rp->pairs[p].pending_owners = std::move(rebuilt);
    }
    return true;
}

// ---------------------------------------------------------------------------
// One-pair transition
// ---------------------------------------------------------------------------

bool step_pair(const WordNfa& nfa, NfaState& s, int p, const WordLetter& L,
               Replay* rp) {
    const auto [sig_p, tau_p] = nfa.tracked_pair(p);
    const TypeTable& tt = nfa.types();
    const int k = nfa.k();
    PairMachine& m = s.pairs[p];
    const PairAnnot& a = L.annots[p];
    const bool is_sig = (L.sigma == sig_p);
    const bool is_tau = (L.sigma == tau_p);
    const std::vector<int> dr =
        is_sig ? far_demands(L, tau_p, true) : std::vector<int>{};
    const std::vector<int> dl =
        is_tau ? far_demands(L, sig_p, false) : std::vector<int>{};
    if (!dr.empty() || !dl.empty()) m.touched = true;

    const int cnt_sig = s.cnt[sig_p];
    const int cnt2_sig =
        cnt_sig - ((s.has_prev && s.prev_sigma == sig_p) ? 1 : 0);
    const bool do_emit = rp && !rp->emit.empty() && rp->emit[p];

    // ---- richness side (observes the letter, never rejects it) ----
    if (!dl.empty() && cnt2_sig < static_cast<int>(dl.size()))
        m.rich_dead = true;
    if (m.stat == k) {
        m.stat = k + 1;  // the position right after the k-th sigma_p
    } else if (m.stat < k) {
        if (is_sig) m.stat += 1;
    } else {
        if (is_tau && m.stat < 2 * k + 1) m.stat += 1;
    }
    if (is_tau && m.m > 0) m.m -= 1;
    m.m = std::max(m.m, m.y);
    m.y = static_cast<int>(dr.size());

    // ---- exact-counting side ----
    if (m.poor_dead) return true;  // annotations are ignored once dead
    if (a.bail) {
        m.poor_dead = true;
        return true;
    }

    const int G = tt.num_binary_types();
    const int pcap = pending_cap(k, G);
    const int fcap = free_cap(G);
    for (auto& e : m.obligations)
        if (e[2] < 2) e[2] += 1;
    if (m.v_declared) {
        m.free_mature = std::min(fcap, m.free_mature + m.free1);
        m.free1 = m.free0;
        m.free0 = 0;
    }
    promote_pending(m.pending, pcap);

    // The distinguished position v of the exact-counting analysis is fixed
    // deterministically: the letter where sigma_p's count first reaches its
    // bound. Any earlier placement is dominated by this one (obligations
    // there can always stand in for positions after v), and no later
    // placement is valid.
    bool declared_now = false;  // v is this very position
    if (!m.v_declared && is_sig && cnt_sig == k + 1) {
        m.v_declared = true;
        declared_now = true;
        m.tau_after = 0;
        if (rp) rp->pairs[p].v_pos = rp->pos;
    }

    // Arrival of a tau_p after v: discharge pending demand classes. Every
    // mature owner takes a witness here unless withheld for this letter's
    // own left demands; waiting longer never helps, because a discharged
    // owner's pairs with all later positions stay free.
    std::set<int> resolved_gammas;
    int withheld_total = 0;
    int free_gain = 0;
    if (m.v_declared && !declared_now && is_tau) {
        if (m.tau_after < k + 2) m.tau_after += 1;
        if (m.tau_after > k + 1) {
            m.poor_dead = true;  // v is not poor on the right
            return true;
        }
        if (!discharge_pending(m, a, static_cast<int>(dl.size()), pcap, p, rp,
                               do_emit, resolved_gammas, withheld_total,
                               free_gain))
            return false;
    } else {
        if (!a.resolutions.empty()) return false;
    }

    // Serve the letter's distant-left demands.
    if (a.left_refs.size() != dl.size()) return false;
    std::map<int, int> named_gamma;  // ordinal -> left-demand binary type
    {
        int fresh_used = 0;
        for (std::size_t ix = 0; ix < dl.size(); ++ix) {
            const int gl = dl[ix];
            const LeftRef& ref = a.left_refs[ix];
            switch (ref.kind) {
            case LeftRefKind::named: {
                const int i = ref.ordinal;
                if (i < 1 || i > cnt2_sig) return false;
                if (m.v_declared && i > k + 1) return false;
                if (named_gamma.count(i)) return false;
                named_gamma[i] = gl;
                if (do_emit)
                    rp->set(rp->pairs[p].sigma_positions[i - 1], rp->pos,
                            tt.gamma_reverse(gl));
                break;
            }
            case LeftRefKind::pick_link:
                if (!resolved_gammas.count(tt.gamma_reverse(gl))) return false;
                break;
            case LeftRefKind::fresh: {
                if (!m.v_declared) return false;
                if (m.free_mature + withheld_total - fresh_used < 1)
                    return false;
                fresh_used += 1;
                if (do_emit) {
                    int chosen = -1;
                    for (int o : rp->pairs[p].sigma_positions) {
                        if (o < rp->pairs[p].v_pos) continue;
                        if (o > rp->pos - 2) break;
                        if (!rp->assign.count({o, rp->pos})) {
                            chosen = o;
                            break;
                        }
                    }
                    if (chosen < 0)
                        throw std::runtime_error(
                            "word decoder: no spare position for a fresh "
                            "reference");
                    rp->set(chosen, rp->pos, tt.gamma_reverse(gl));
                }
                break;
            }
            }
        }
    }

    // Greedy resolution of mature obligations: at most one per ordinal and
    // letter, skipping ordinals whose pair type is already forced to an
    // incompatible value by a named reference.
    if (is_tau && !m.obligations.empty()) {
        std::vector<std::size_t> resolve;
        std::size_t ix = 0;
        while (ix < m.obligations.size()) {
            const int i = m.obligations[ix][0];
            std::size_t end = ix;
            while (end < m.obligations.size() && m.obligations[end][0] == i)
                ++end;
            auto nit = named_gamma.find(i);
            if (nit != named_gamma.end()) {
                const int want = tt.gamma_reverse(nit->second);
                for (std::size_t j = ix; j < end; ++j)
                    if (m.obligations[j][1] == want &&
                        m.obligations[j][2] >= 2) {
                        resolve.push_back(j);  // coincides with the named ref
                        break;
                    }
            } else {
                for (std::size_t j = ix; j < end; ++j)
                    if (m.obligations[j][2] >= 2) {
                        resolve.push_back(j);  // smallest gamma first
                        break;
                    }
            }
            ix = end;
        }
        for (auto rit = resolve.rbegin(); rit != resolve.rend(); ++rit) {
            const auto e = m.obligations[*rit];
            if (do_emit)
                rp->set(rp->pairs[p].sigma_positions[e[0] - 1], rp->pos, e[1]);
            m.obligations.erase(m.obligations.begin() +
                                static_cast<std::ptrdiff_t>(*rit));
        }
    }

    // New distant-right demands of this letter.
    if (is_sig && !m.v_declared) {
        if (cnt_sig + 1 > k + 1) {
            m.poor_dead = true;  // too many sigma_p with no v in sight
            return true;
        }
        if (!dr.empty()) {
            const int ordinal = cnt_sig + 1;
            for (int g : dr) {
                std::array<unsigned char, 3> e = {
                    static_cast<unsigned char>(ordinal),
                    static_cast<unsigned char>(g), 0};
                m.obligations.insert(
                    std::upper_bound(m.obligations.begin(),
                                     m.obligations.end(), e),
                    e);
            }
        }
    } else if (is_sig && m.v_declared) {
        // A sigma_p at or after v joins the pool: with demands it becomes
        // a pending owner, without them a future spare position.
        int mask = 0;
        for (int g : dr) mask |= 1 << g;
        if (mask) {
            const bool single =
                std::popcount(static_cast<unsigned>(mask)) == 1;
            bool joined = false;
            for (auto& e : m.pending)
                if (e[0] == mask && e[1] == 0) {
                    int c = e[2] + 1;
                    if (single) c = std::min(c, pcap);
                    e[2] = static_cast<unsigned short>(std::min(c, 65000));
                    joined = true;
                    break;
                }
            if (!joined) {
                std::array<unsigned short, 3> e = {
                    static_cast<unsigned short>(mask), 0, 1};
                m.pending.insert(
                    std::upper_bound(m.pending.begin(), m.pending.end(), e),
                    e);
            }
            if (rp) rp->pairs[p].pending_owners.push_back({rp->pos, mask});
        } else {
            m.free0 += 1;
        }
    }

    if (free_gain) m.free_mature = std::min(fcap, m.free_mature + free_gain);
    return true;
}

// ---------------------------------------------------------------------------
// Whole-letter transition
// ---------------------------------------------------------------------------

bool apply_letter(const WordNfa& nfa, NfaState& s, const WordLetter& L,
                  Replay* rp) {
    const ConstraintProblem& cp = nfa.problem();
    const TypeTable& tt = nfa.types();
    const int S = tt.num_unary_types();

    if (L.sigma < 0 || L.sigma >= S || !cp.sigma_allowed(L.sigma))
        return false;
    if (L.gamma_next < -1 || L.gamma_next >= tt.num_binary_types())
        return false;
    if (s.has_prev) {
        if (s.prev_gamma < 0) return false;  // previous letter claimed last
        if (s.tau_demand >= 0 && L.sigma != s.tau_demand) return false;
        if (cp.pair_bad(s.prev_sigma, kBothLtNext, s.prev_gamma, L.sigma))
            return false;
    }
    // Every distant pair must admit some binary type.
    for (int sig = 0; sig < S; ++sig) {
        const int c2 =
            s.cnt[sig] - ((s.has_prev && s.prev_sigma == sig) ? 1 : 0);
        if (c2 > 0 && !nfa.far_fill_ok(sig, L.sigma)) return false;
    }
    // Witness options: shape, membership and local consistency.
    const std::vector<int>& appl = nfa.applicable(L.sigma);
    if (L.intents.size() != appl.size()) return false;
    int new_tau_demand = -1;
    for (std::size_t ix = 0; ix < appl.size(); ++ix) {
        const WitnessOption& o = L.intents[ix];
        const auto& opts = cp.witness_options(appl[ix], L.sigma);
        if (std::find(opts.begin(), opts.end(), o) == opts.end())
            return false;
        if (o.d == kBothLtNext) {
            if (L.gamma_next < 0 || o.gamma != L.gamma_next) return false;
            if (new_tau_demand >= 0 && new_tau_demand != o.tau) return false;
            new_tau_demand = o.tau;
        } else if (o.d == kBothGtNext) {
            if (!s.has_prev || s.prev_gamma < 0) return false;
            if (s.prev_sigma != o.tau) return false;
            if (tt.gamma_reverse(s.prev_gamma) != o.gamma) return false;
        }
    }
    if (L.annots.size() !=
        static_cast<std::size_t>(nfa.num_tracked_pairs()))
        return false;

    for (int p = 0; p < nfa.num_tracked_pairs(); ++p)
        if (!step_pair(nfa, s, p, L, rp)) return false;

    if (rp) {
        for (int p = 0; p < nfa.num_tracked_pairs(); ++p)
            if (nfa.tracked_pair(p).first == L.sigma)
                rp->pairs[p].sigma_positions.push_back(rp->pos);
    }

    if (s.cnt[L.sigma] < nfa.k() + 2) s.cnt[L.sigma] += 1;
    s.has_prev = true;
    s.prev_sigma = L.sigma;
    s.prev_gamma = L.gamma_next;
    s.tau_demand = new_tau_demand;
    return true;
}

bool pair_rich_ok(const PairMachine& m, int k) {
    return m.stat == 2 * k + 1 && m.m == 0 && m.y == 0 && !m.rich_dead;
}

bool pair_poor_ok(const PairMachine& m, int cnt_sig, int k) {
    return !m.poor_dead && m.obligations.empty() && m.pending.empty() &&
           (m.v_declared ? m.tau_after <= k + 1 : cnt_sig <= k + 1);
}

bool accepts(const WordNfa& nfa, const NfaState& s) {
    if (!s.has_prev) return false;
    if (s.prev_gamma >= 0) return false;  // last letter must claim to be last
    if (s.tau_demand >= 0) return false;
    const int k = nfa.k();
    for (int p = 0; p < nfa.num_tracked_pairs(); ++p) {
        const PairMachine& m = s.pairs[p];
        if (!m.touched) continue;
        const int cnt_sig = s.cnt[nfa.tracked_pair(p).first];
        if (!pair_rich_ok(m, k) && !pair_poor_ok(m, cnt_sig, k))
            return false;
    }
    return true;
}

NfaState initial_state(const WordNfa& nfa) {
    NfaState s;
    s.cnt.assign(nfa.types().num_unary_types(), 0);
    s.pairs.resize(static_cast<std::size_t>(nfa.num_tracked_pairs()));
    return s;
}

// ---------------------------------------------------------------------------
// Letter generation
// ---------------------------------------------------------------------------

// Candidate annotations for one tracked pair, mirroring step_pair. Choices
// that provably lead to the same machine state are collapsed to one
// representative.
std::vector<PairAnnot> gen_pair_annots(const WordNfa& nfa, const NfaState& s,
                                       int p, int sigma,
                                       const std::vector<int>& dr,
                                       const std::vector<int>& dl) {
    const auto [sig_p, tau_p] = nfa.tracked_pair(p);
    const int k = nfa.k();
    const TypeTable& tt = nfa.types();
    const PairMachine& m0 = s.pairs[p];
    if (m0.poor_dead) return {PairAnnot{}};
    const bool is_sig = (sigma == sig_p);
    const bool is_tau = (sigma == tau_p);
    const int cnt_sig = s.cnt[sig_p];
    const int cnt2_sig =
        cnt_sig - ((s.has_prev && s.prev_sigma == sig_p) ? 1 : 0);

    const auto bail_only = [] {
        PairAnnot a;
        a.bail = true;
        return std::vector<PairAnnot>{std::move(a)};
    };

    PairMachine m = m0;
    const int G = tt.num_binary_types();
    const int pcap = pending_cap(k, G);
    const int fcap = free_cap(G);
    for (auto& e : m.obligations)
        if (e[2] < 2) e[2] += 1;
    if (m.v_declared) {
        m.free_mature = std::min(fcap, m.free_mature + m.free1);
        m.free1 = m.free0;
        m.free0 = 0;
    }
    promote_pending(m.pending, pcap);
    bool declared_now = false;  // mirrors the deterministic rule in step_pair
    if (!m.v_declared && is_sig && cnt_sig == k + 1) {
        m.v_declared = true;
        declared_now = true;
        m.tau_after = 0;
    }
    const bool arrival = m.v_declared && !declared_now && is_tau;
    if (arrival) {
        if (m.tau_after < k + 2) m.tau_after += 1;
        // step_pair stops validating once the counting side is dead, so a
        // single empty annotation is the right representative for that path.
        if (m.tau_after > k + 1) return {PairAnnot{}};
    }

    // Discharge combinations for the mature pending classes.
    struct ResCombo {
        std::vector<ResolveBatch> batches;
        std::set<int> resolved;
        int withheld_total = 0;
    };
    std::vector<ResCombo> rescombos;
    if (arrival) {
        std::vector<std::array<unsigned short, 3>> mature;
        for (const auto& e : m.pending)
            if (e[1] == 2) mature.push_back(e);
        ResCombo cur;
        auto rec = [&](auto&& self, std::size_t cx) -> void {
            if (cx == mature.size()) {
                rescombos.push_back(cur);
                return;
            }
            const int mask = mature[cx][0];
            const int mc = mature[cx][2];
            const bool single =
                std::popcount(static_cast<unsigned>(mask)) == 1;
            const int budget =
                static_cast<int>(dl.size()) - cur.withheld_total;
            std::vector<int> bits;
            for (int g = 0; g < G; ++g)
                if (mask & (1 << g)) bits.push_back(g);
            const int nb = static_cast<int>(bits.size());
            auto attempt = [&](const std::vector<int>& exact, int rest,
                               int wc) {
                ResolveBatch rb;
                rb.mask = mask;
                rb.rest_gamma = rest;
                rb.withheld = wc;
                rb.exact = exact;
                cur.batches.push_back(std::move(rb));
                std::vector<int> added;
                for (int g : exact)
                    if (cur.resolved.insert(g).second) added.push_back(g);
                if (rest >= 0 && cur.resolved.insert(rest).second)
                    added.push_back(rest);
                cur.withheld_total += wc;
                self(self, cx + 1);
                cur.withheld_total -= wc;
                for (int g : added) cur.resolved.erase(g);
                cur.batches.pop_back();
            };
            for (int sub = 0; sub < (1 << nb); ++sub) {
                std::vector<int> exact;
                for (int b = 0; b < nb; ++b)
                    if (sub & (1 << b)) exact.push_back(bits[b]);
                for (int wc = 0; wc <= budget; ++wc) {
                    const int taken = static_cast<int>(exact.size()) + wc;
                    if (taken > mc) break;
                    if (taken == mc && !(single && mc == pcap))
                        attempt(exact, -1, wc);
                    if (mc - taken >= 2)
                        for (int b = 0; b < nb; ++b)
                            if (!(sub & (1 << b)))
                                attempt(exact, bits[b], wc);
                }
            }
        };
        rec(rec, 0);
        if (rescombos.empty()) return bail_only();
    } else {
        rescombos.push_back({});
    }

    // Reference combinations for the distant-left demands, per discharge
    // combination (links and spare positions depend on it).
    std::vector<PairAnnot> out;
    for (const ResCombo& rc : rescombos) {
        std::vector<std::vector<LeftRef>> refcombos;
        {
            std::vector<LeftRef> cur;
            std::set<int> used_named;
            int fresh_used = 0;
            const int avail =
                m.v_declared ? m.free_mature + rc.withheld_total : 0;
            auto rec = [&](auto&& self, std::size_t ix) -> void {
                if (ix == dl.size()) {
                    refcombos.push_back(cur);
                    return;
                }
                const int gl = dl[ix];
                if (rc.resolved.count(tt.gamma_reverse(gl))) {
                    // A demand discharged right now serves this reference
                    // for free; other choices never reach more states.
                    cur.push_back({LeftRefKind::pick_link, 0});
                    self(self, ix + 1);
                    cur.pop_back();
                    return;
                }
                if (m.v_declared && avail - fresh_used >= 1) {
                    fresh_used += 1;
                    cur.push_back({LeftRefKind::fresh, 0});
                    self(self, ix + 1);
                    cur.pop_back();
                    fresh_used -= 1;
                }
                // Named references, one representative per distinct
                // obligation profile of the target ordinal.
                const int imax =
                    m.v_declared ? std::min(cnt2_sig, k + 1) : cnt2_sig;
                std::set<std::vector<unsigned char>> seen;
                for (int i = 1; i <= imax; ++i) {
                    if (used_named.count(i)) continue;
                    std::vector<unsigned char> key;
                    for (const auto& e : m.obligations)
                        if (e[0] == i) {
                            key.push_back(e[1]);
                            key.push_back(e[2]);
                        }
                    if (!seen.insert(key).second) continue;
                    used_named.insert(i);
                    cur.push_back({LeftRefKind::named, i});
                    self(self, ix + 1);
                    cur.pop_back();
                    used_named.erase(i);
                }
            };
            rec(rec, 0);
        }
        for (const auto& refs : refcombos) {
            PairAnnot a;
            a.resolutions = rc.batches;
            a.left_refs = refs;
            out.push_back(std::move(a));
        }
    }
    if (out.empty()) return bail_only();  // left demands unservable
    return out;
}

// All letters admissible from `s`; when `fixed_sigma` >= 0 only letters with
// that unary type. The enumeration order is deterministic, which makes the
// breadth-first searches canonical.
std::vector<WordLetter> gen_letters(const WordNfa& nfa, const NfaState& s,
                                    int fixed_sigma) {
    std::vector<WordLetter> out;
    const ConstraintProblem& cp = nfa.problem();
    const TypeTable& tt = nfa.types();
    const int S = tt.num_unary_types();
    const int G = tt.num_binary_types();
    if (s.has_prev && s.prev_gamma < 0) return out;  // word already closed

    for (int sigma = 0; sigma < S; ++sigma) {
        if (fixed_sigma >= 0 && sigma != fixed_sigma) continue;
        if (!cp.sigma_allowed(sigma)) continue;
        if (s.has_prev) {
            if (s.tau_demand >= 0 && sigma != s.tau_demand) continue;
            if (cp.pair_bad(s.prev_sigma, kBothLtNext, s.prev_gamma, sigma))
                continue;
        }
        bool far_fail = false;
        for (int sig = 0; sig < S && !far_fail; ++sig) {
            const int c2 =
                s.cnt[sig] - ((s.has_prev && s.prev_sigma == sig) ? 1 : 0);
            if (c2 > 0 && !nfa.far_fill_ok(sig, sigma)) far_fail = true;
        }
        if (far_fail) continue;
        const std::vector<int>& appl = nfa.applicable(sigma);

        for (int gn = -1; gn < G; ++gn) {
            // Witness-option combinations, pruned by local consistency.
            std::vector<std::vector<WitnessOption>> cand(appl.size());
            bool feasible = true;
            for (std::size_t ix = 0; ix < appl.size() && feasible; ++ix) {
                for (const WitnessOption& o :
                     cp.witness_options(appl[ix], sigma)) {
                    if (o.d == kBothLtNext) {
                        if (gn < 0 || o.gamma != gn) continue;
                    } else if (o.d == kBothGtNext) {
                        if (!s.has_prev || s.prev_sigma != o.tau ||
                            tt.gamma_reverse(s.prev_gamma) != o.gamma)
                            continue;
                    }
                    cand[ix].push_back(o);
                }
                if (cand[ix].empty()) feasible = false;
            }
            if (!feasible) continue;

            std::vector<WitnessOption> intents;
            auto rec = [&](auto&& self, std::size_t ix, int tau_dem) -> void {
                if (ix == appl.size()) {
                    // Per-pair annotation candidates for these intents.
                    WordLetter base;
                    base.sigma = sigma;
                    base.gamma_next = gn;
                    base.intents = intents;
                    std::vector<std::vector<PairAnnot>> pa(
                        static_cast<std::size_t>(nfa.num_tracked_pairs()));
                    for (int p = 0; p < nfa.num_tracked_pairs(); ++p) {
                        const auto [sig_p, tau_p] = nfa.tracked_pair(p);
                        const std::vector<int> dr =
                            sigma == sig_p ? far_demands(base, tau_p, true)
                                           : std::vector<int>{};
                        const std::vector<int> dl =
                            sigma == tau_p ? far_demands(base, sig_p, false)
                                           : std::vector<int>{};
                        pa[static_cast<std::size_t>(p)] =
                            gen_pair_annots(nfa, s, p, sigma, dr, dl);
                    }
                    base.annots.resize(
                        static_cast<std::size_t>(nfa.num_tracked_pairs()));
                    auto rec2 = [&](auto&& self2, int p) -> void {
                        if (p == nfa.num_tracked_pairs()) {
                            out.push_back(base);
                            return;
                        }
                        for (const PairAnnot& a :
                             pa[static_cast<std::size_t>(p)]) {
                            base.annots[static_cast<std::size_t>(p)] = a;
                            self2(self2, p + 1);
                        }
                    };
                    rec2(rec2, 0);
                    return;
                }
                for (const WitnessOption& o : cand[ix]) {
                    int nd = tau_dem;
                    if (o.d == kBothLtNext) {
                        if (nd >= 0 && nd != o.tau) continue;
                        nd = o.tau;
                    }
                    intents.push_back(o);
                    self(self, ix + 1, nd);
                    intents.pop_back();
                }
            };
            rec(rec, 0, -1);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Breadth-first search
// ---------------------------------------------------------------------------

WordSearchResult bfs(const WordNfa& nfa, const std::vector<int>* fixed,
                     unsigned long long budget) {
    WordSearchResult res;
    std::unordered_map<std::string, int> ids;
    std::vector<NfaState> states;
    std::vector<int> parent;
    std::vector<WordLetter> via;
    std::vector<int> depth;
    std::deque<int> queue;

    NfaState init = initial_state(nfa);
    std::string key;
    serialize(init, key);
    ids.emplace(key, 0);
    states.push_back(init);
    parent.push_back(-1);
    via.emplace_back();
    depth.push_back(0);
    queue.push_back(0);

    auto reconstruct = [&](int id) {
        std::vector<WordLetter> w;
        for (int cur = id; parent[cur] >= 0; cur = parent[cur])
            w.push_back(via[cur]);
        std::reverse(w.begin(), w.end());
        return w;
    };

    while (!queue.empty()) {
        const int id = queue.front();
        queue.pop_front();
        const int d = depth[id];
        if (fixed && static_cast<std::size_t>(d) == fixed->size()) continue;
        const int fs = fixed ? (*fixed)[static_cast<std::size_t>(d)] : -1;
        // Copy: `states` may reallocate while we expand.
        const NfaState cur = states[static_cast<std::size_t>(id)];
        for (const WordLetter& L : gen_letters(nfa, cur, fs)) {
            NfaState nxt = cur;
            if (!apply_letter(nfa, nxt, L, nullptr)) continue;
            serialize(nxt, key);
            if (fixed) {
                // Fixed-length search: acceptance is only tested at the goal
                // length, so states reached at different depths must not be
                // merged even when their serializations coincide.
                key.push_back(static_cast<char>((d + 1) & 0xff));
                key.push_back(static_cast<char>(((d + 1) >> 8) & 0xff));
            }
            auto [it, fresh] = ids.emplace(key, static_cast<int>(states.size()));
            if (!fresh) continue;
            states.push_back(nxt);
            parent.push_back(id);
            via.push_back(L);
            depth.push_back(d + 1);
            if (states.size() > budget) {
                res.status = WordStatus::budget;
                res.states = states.size();
                return res;
            }
            const bool at_goal_len =
                !fixed ||
                static_cast<std::size_t>(d + 1) == fixed->size();
            if (at_goal_len && accepts(nfa, nxt)) {
                res.status = WordStatus::nonempty;
                res.word = reconstruct(it->second);
                res.states = states.size();
                return res;
            }
            queue.push_back(it->second);
        }
    }
    res.status = WordStatus::empty;
    res.states = states.size();
    return res;
}

// ---------------------------------------------------------------------------
// Rich-side decoding: block-wise witness placement
// ---------------------------------------------------------------------------

// Positions of the given unary type in the word, ascending.
std::vector<int> positions_of(const std::vector<WordLetter>& word, int sigma) {
    std::vector<int> out;
    for (std::size_t i = 0; i < word.size(); ++i)
        if (word[i].sigma == sigma) out.push_back(static_cast<int>(i));
    return out;
}

// The r-th (1-based) element of `v` that is not within distance 1 of `near`,
// ascending when `from_front`, descending otherwise.
int pick_excluding(const std::vector<int>& v, int r, int near, bool from_front) {
    int seen = 0;
    if (from_front) {
        for (int x : v) {
            if (x >= near - 1 && x <= near + 1) continue;
            if (++seen == r) return x;
        }
    } else {
        for (auto it = v.rbegin(); it != v.rend(); ++it) {
            if (*it >= near - 1 && *it <= near + 1) continue;
            if (++seen == r) return *it;
        }
    }
    throw std::runtime_error("word decoder: block too small for a witness");
}

void rich_assign(const WordNfa& nfa, const std::vector<WordLetter>& word,
                 int p, Replay& rp) {
    const auto [sig_p, tau_p] = nfa.tracked_pair(p);
    const TypeTable& tt = nfa.types();
    const int k = nfa.k();
    const std::vector<int> sp = positions_of(word, sig_p);
    const std::vector<int> tp = positions_of(word, tau_p);
    if (static_cast<int>(sp.size()) < k || static_cast<int>(tp.size()) < k)
        throw std::runtime_error("word decoder: rich pair lacks positions");
    const std::vector<int> A(sp.begin(), sp.begin() + k);
    const std::vector<int> B(tp.end() - k, tp.end());
    const int bs = k / 3;
    auto block_of = [bs](const std::vector<int>& v, int i) {
        return std::vector<int>(v.begin() + static_cast<std::ptrdiff_t>(i) * bs,
                                v.begin() +
                                    static_cast<std::ptrdiff_t>(i + 1) * bs);
    };
    auto index_in = [](const std::vector<int>& v, int x) {
        auto it = std::lower_bound(v.begin(), v.end(), x);
        if (it != v.end() && *it == x)
            return static_cast<int>(it - v.begin());
        return -1;
    };

    for (int a : sp) {
        const std::vector<int> d =
            far_demands(word[static_cast<std::size_t>(a)], tau_p, true);
        if (d.empty()) continue;
        const int ia = index_in(A, a);
        if (ia >= 0) {
            const std::vector<int> blk = block_of(B, ia / bs);
            for (int g : d)
                rp.set(a, pick_excluding(blk, g + 1, a, true), g);
        } else {
            for (std::size_t j = 0; j < d.size(); ++j)
                rp.set(a,
                       pick_excluding(B, static_cast<int>(j) + 1, a, false),
                       d[j]);
        }
    }
    for (int b : tp) {
        const std::vector<int> d =
            far_demands(word[static_cast<std::size_t>(b)], sig_p, false);
        if (d.empty()) continue;
        const int ib = index_in(B, b);
        if (ib >= 0) {
            const std::vector<int> blk = block_of(A, (ib / bs + 1) % 3);
            for (int g : d)
                rp.set(pick_excluding(blk, g + 1, b, true), b,
                       tt.gamma_reverse(g));
        } else {
            for (std::size_t j = 0; j < d.size(); ++j)
                rp.set(pick_excluding(A, static_cast<int>(j) + 1, b, true), b,
                       tt.gamma_reverse(d[j]));
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// WordNfa
// ---------------------------------------------------------------------------

WordNfa::WordNfa(ConstraintProblem cp, std::optional<int> k_override)
    : cp_(std::move(cp)) {
    const TypeTable& tt = *cp_.types;
    if (tt.dim_kind(0) != DimKind::both || tt.dim_kind(1) != DimKind::absent)
        throw std::invalid_argument(
            "WordNfa: the problem must use the {suc, <} profile");
    const int G = tt.num_binary_types();
    k_ = k_override ? *k_override : 3 * (G + 3);
    if (k_ <= 0 || k_ % 3 != 0 || k_ < 3 * G)
        throw std::invalid_argument(
            "WordNfa: k must be a positive multiple of 3 with k >= 3 * "
            "num_binary_types");
    if (k_ > kCntCap - 4)
        throw std::invalid_argument(
            "WordNfa: k exceeds the counting capacity");
    const int S = tt.num_unary_types();
    applicable_.resize(static_cast<std::size_t>(S));
    for (int sigma = 0; sigma < S; ++sigma) {
        if (!cp_.sigma_allowed(sigma)) continue;
        for (int i = 0; i < cp_.num_constraints(); ++i)
            if (!cp_.self_ok(i, sigma))
                applicable_[static_cast<std::size_t>(sigma)].push_back(i);
    }
    far_ok_.assign(static_cast<std::size_t>(S) * S, 0);
    for (int a = 0; a < S; ++a)
        for (int b = 0; b < S; ++b)
            for (int g = 0; g < G; ++g)
                if (!cp_.pair_bad(a, kBothLtFar, g, b)) {
                    far_ok_[static_cast<std::size_t>(a) * S + b] = 1;
                    break;
                }
    pair_index_.assign(static_cast<std::size_t>(S) * S, -1);
    for (int a = 0; a < S; ++a) {
        if (!cp_.sigma_allowed(a)) continue;
        for (int b = 0; b < S; ++b) {
            if (!cp_.sigma_allowed(b)) continue;
            bool tracked = false;
            for (int i = 0; i < cp_.num_constraints() && !tracked; ++i) {
                for (const WitnessOption& o : cp_.witness_options(i, a))
                    if (o.d == kBothLtFar && o.tau == b) {
                        tracked = true;
                        break;
                    }
                if (tracked) break;
                for (const WitnessOption& o : cp_.witness_options(i, b))
                    if (o.d == kBothGtFar && o.tau == a) {
                        tracked = true;
                        break;
                    }
            }
            if (tracked) {
                pair_index_[static_cast<std::size_t>(a) * S + b] =
                    static_cast<int>(pairs_.size());
                pairs_.emplace_back(a, b);
            }
        }
    }
}

int WordNfa::pair_index(int sigma, int tau) const {
    const int S = cp_.types->num_unary_types();
    return pair_index_[static_cast<std::size_t>(sigma) * S + tau];
}

bool WordNfa::far_fill_ok(int sigma, int tau) const {
    const int S = cp_.types->num_unary_types();
    return far_ok_[static_cast<std::size_t>(sigma) * S + tau] != 0;
}

// ---------------------------------------------------------------------------
// Public search functions
// ---------------------------------------------------------------------------

WordSearchResult shortest_accepted(const WordNfa& nfa,
                                   unsigned long long budget) {
    return bfs(nfa, nullptr, budget);
}

WordSearchResult accepts_labeling(const WordNfa& nfa,
                                  const std::vector<int>& sigmas,
                                  unsigned long long budget) {
    return bfs(nfa, &sigmas, budget);
}

OrderedStructure decode_word(const WordNfa& nfa,
                             const std::vector<WordLetter>& word) {
    if (word.empty())
        throw std::invalid_argument("decode_word: the word is empty");
    const ConstraintProblem& cp = nfa.problem();
    const TypeTable& tt = nfa.types();
    const int n = static_cast<int>(word.size());
    const int P = nfa.num_tracked_pairs();

    // First pass: validate the word and find the final state.
    NfaState fin = initial_state(nfa);
    for (const WordLetter& L : word)
        if (!apply_letter(nfa, fin, L, nullptr))
            throw std::invalid_argument("decode_word: word not accepted");
    if (!accepts(nfa, fin))
        throw std::invalid_argument("decode_word: word not accepted");

    std::vector<char> use_poor(static_cast<std::size_t>(P), 0);
    for (int p = 0; p < P; ++p) {
        const PairMachine& m = fin.pairs[static_cast<std::size_t>(p)];
        if (!m.touched) continue;
        const int cnt_sig = fin.cnt[nfa.tracked_pair(p).first];
        use_poor[static_cast<std::size_t>(p)] =
            pair_poor_ok(m, cnt_sig, nfa.k()) ? 1 : 0;
    }

    // Second pass: replay, collecting assignments from the chosen side.
    Replay rp;
    rp.pairs.resize(static_cast<std::size_t>(P));
    rp.emit = use_poor;
    NfaState s = initial_state(nfa);
    for (int i = 0; i < n; ++i) {
        rp.pos = i;
        if (!apply_letter(nfa, s, word[static_cast<std::size_t>(i)], &rp))
            throw std::runtime_error("word decoder: replay diverged");
    }
    for (int p = 0; p < P; ++p)
        if (fin.pairs[static_cast<std::size_t>(p)].touched &&
            !use_poor[static_cast<std::size_t>(p)])
            rich_assign(nfa, word, p, rp);

    // Build the structure.
    OrderedStructure st(tt.signature(), n);
    std::vector<int> ranks(static_cast<std::size_t>(n));
    std::iota(ranks.begin(), ranks.end(), 0);
    st.set_order1(ranks);
    st.set_order2(ranks);
    for (int i = 0; i < n; ++i)
        tt.apply_sigma(st, i, word[static_cast<std::size_t>(i)].sigma);
    for (int i = 0; i + 1 < n; ++i)
        tt.apply_gamma(st, i, i + 1,
                       word[static_cast<std::size_t>(i)].gamma_next);
    for (const auto& [ab, g] : rp.assign)
        tt.apply_gamma(st, ab.first, ab.second, g);
    for (int a = 0; a < n; ++a)
        for (int b = a + 2; b < n; ++b) {
            if (rp.assign.count({a, b})) continue;
            const int sa = word[static_cast<std::size_t>(a)].sigma;
            const int sb = word[static_cast<std::size_t>(b)].sigma;
            int g = -1;
            for (int c = 0; c < tt.num_binary_types(); ++c)
                if (!cp.pair_bad(sa, kBothLtFar, c, sb)) {
                    g = c;
                    break;
                }
            if (g < 0)
                throw std::runtime_error(
                    "word decoder: no admissible type for a distant pair");
            tt.apply_gamma(st, a, b, g);
        }

    const CheckReport rep = check_solution(cp, st);
    if (!rep.ok)
        throw std::runtime_error(
            "word decoder produced an invalid structure: " +
            rep.violations.front());
    return st;
}

// ---------------------------------------------------------------------------
// Witness surgery
// ---------------------------------------------------------------------------

namespace {

void require_word_shape(const ConstraintProblem& cp,
                        const OrderedStructure& st, const char* who) {
    const TypeTable& tt = *cp.types;
    if (tt.dim_kind(0) != DimKind::both ||
        tt.dim_kind(1) != DimKind::absent)
        throw std::invalid_argument(std::string(who) +
                                    ": requires the {suc, <} profile");
    for (int i = 0; i < st.size(); ++i)
        if (st.rank1(i) != i)
            throw std::invalid_argument(
                std::string(who) +
                ": requires the element order to equal the position order");
}

}  // namespace

RewireResult rewire_witnesses(const ConstraintProblem& cp,
                              const OrderedStructure& st) {
    require_word_shape(cp, st, "rewire_witnesses");
    const TypeTable& tt = *cp.types;
    const int n = st.size();
    {
        const CheckReport rep = check_solution(cp, st);
        if (!rep.ok)
            throw std::invalid_argument(
                "rewire_witnesses: the input is not a solution");
    }
    const std::vector<std::vector<int>> W = extract_witnesses(cp, st);
    const int G = tt.num_binary_types();
    const int k = 3 * G;
    const int S = tt.num_unary_types();

    std::vector<int> label(static_cast<std::size_t>(n));
    std::vector<std::vector<int>> by_type(static_cast<std::size_t>(S));
    for (int i = 0; i < n; ++i) {
        label[static_cast<std::size_t>(i)] = tt.sigma_of(st, i);
        by_type[static_cast<std::size_t>(label[static_cast<std::size_t>(i)])]
            .push_back(i);
    }

    // Kernel: the first and last k+1 positions of every unary type, plus
    // all their witnesses.
    std::set<int> zset;
    for (const std::vector<int>& v : by_type) {
        const int take = std::min<int>(k + 1, static_cast<int>(v.size()));
        for (int i = 0; i < take; ++i) {
            zset.insert(v[static_cast<std::size_t>(i)]);
            zset.insert(v[v.size() - 1 - static_cast<std::size_t>(i)]);
        }
    }
    for (int e : std::vector<int>(zset.begin(), zset.end()))
        for (int w : W[static_cast<std::size_t>(e)])
            if (w >= 0) zset.insert(w);

    OrderedStructure out = st;
    std::vector<std::vector<int>> W2 = W;
    bool changed = false;

    for (int sig = 0; sig < S; ++sig) {
        for (int tau = 0; tau < S; ++tau) {
            const std::vector<int>& sp =
                by_type[static_cast<std::size_t>(sig)];
            const std::vector<int>& tp =
                by_type[static_cast<std::size_t>(tau)];
            if (static_cast<int>(sp.size()) < k) continue;
            const int u = sp[static_cast<std::size_t>(k - 1)] + 1;
            int tau_after = 0;
            for (int t : tp)
                if (t > u) ++tau_after;
            if (tau_after < k) continue;  // the pair occurs poorly

            const std::vector<int> A(sp.begin(), sp.begin() + k);
            const std::vector<int> B(tp.end() - k, tp.end());
            const int bs = G;  // block size: k == 3 * G
            auto index_in = [](const std::vector<int>& v, int x) {
                auto it = std::lower_bound(v.begin(), v.end(), x);
                if (it != v.end() && *it == x)
                    return static_cast<int>(it - v.begin());
                return -1;
            };

            // Redirect the distant-right witnesses of every sigma position.
            for (int a : sp) {
                std::vector<std::pair<int, int>> far;  // (gamma, constraint)
                for (int j = 0; j < cp.num_constraints(); ++j) {
                    const int w = W[static_cast<std::size_t>(a)]
                                   [static_cast<std::size_t>(j)];
                    if (w < 0) continue;
                    if (label[static_cast<std::size_t>(w)] != tau) continue;
                    if (tt.order_type_of(st, a, w) != kBothLtFar) continue;
                    far.emplace_back(tt.gamma_of(st, a, w), j);
                }
                if (far.empty()) continue;
                std::vector<int> ds;
                for (auto& [g, j] : far) ds.push_back(g);
                std::sort(ds.begin(), ds.end());
                ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
                const int ia = index_in(A, a);
                for (auto& [g, j] : far) {
                    int nw;
                    if (ia >= 0) {
                        nw = B[static_cast<std::size_t>((ia / bs) * bs + g)];
                    } else {
                        const int r = static_cast<int>(
                            std::lower_bound(ds.begin(), ds.end(), g) -
                            ds.begin());
                        nw = B[B.size() - 1 - static_cast<std::size_t>(r)];
                    }
                    if (nw !=
                        W[static_cast<std::size_t>(a)]
                         [static_cast<std::size_t>(j)])
                        changed = true;
                    tt.apply_gamma(out, a, nw, g);
                    W2[static_cast<std::size_t>(a)]
                      [static_cast<std::size_t>(j)] = nw;
                }
            }
            // Redirect the distant-left witnesses of every tau position.
            for (int b : tp) {
                std::vector<std::pair<int, int>> far;
                for (int j = 0; j < cp.num_constraints(); ++j) {
                    const int w = W[static_cast<std::size_t>(b)]
                                   [static_cast<std::size_t>(j)];
                    if (w < 0) continue;
                    if (label[static_cast<std::size_t>(w)] != sig) continue;
                    if (tt.order_type_of(st, b, w) != kBothGtFar) continue;
                    far.emplace_back(tt.gamma_of(st, b, w), j);
                }
                if (far.empty()) continue;
                std::vector<int> ds;
                for (auto& [g, j] : far) ds.push_back(g);
                std::sort(ds.begin(), ds.end());
                ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
                const int ib = index_in(B, b);
                for (auto& [g, j] : far) {
                    int nw;
                    if (ib >= 0) {
                        nw = A[static_cast<std::size_t>(
                            ((ib / bs + 1) % 3) * bs + g)];
                    } else {
                        const int r = static_cast<int>(
                            std::lower_bound(ds.begin(), ds.end(), g) -
                            ds.begin());
                        nw = A[static_cast<std::size_t>(r)];
                    }
                    if (nw !=
                        W[static_cast<std::size_t>(b)]
                         [static_cast<std::size_t>(j)])
                        changed = true;
                    tt.apply_gamma(out, b, nw, g);
                    W2[static_cast<std::size_t>(b)]
                      [static_cast<std::size_t>(j)] = nw;
                }
            }
        }
    }

    const CheckReport rep = check_solution(cp, out);
    if (!rep.ok)
        throw std::runtime_error(
            "rewire_witnesses produced an invalid structure: " +
            rep.violations.front());
    RewireResult res{std::move(out),
                     std::vector<int>(zset.begin(), zset.end()),
                     std::move(W2), changed};
    return res;
}

OrderedStructure shrink_pair(const ConstraintProblem& cp,
                             const OrderedStructure& st,
                             const std::vector<int>& kernel, int a1, int a2) {
    require_word_shape(cp, st, "shrink_pair");
    const TypeTable& tt = *cp.types;
    const int n = st.size();
    std::vector<int> z = kernel;
    std::sort(z.begin(), z.end());
    auto in_kernel = [&z](int x) {
        return std::binary_search(z.begin(), z.end(), x);
    };
    if (!(0 <= a1 && a1 < a2 && a2 < n))
        throw std::invalid_argument("shrink_pair: need 0 <= a1 < a2 < size");
    if (a2 + 1 >= n)
        throw std::invalid_argument("shrink_pair: a2 has no successor");
    if (in_kernel(a1) || in_kernel(a2))
        throw std::invalid_argument(
            "shrink_pair: a1 and a2 must be outside the kernel");
    for (int e = a1 + 1; e < a2; ++e)
        if (in_kernel(e))
            throw std::invalid_argument(
                "shrink_pair: a kernel position lies strictly between a1 and "
                "a2");
    if (tt.sigma_of(st, a1) != tt.sigma_of(st, a2))
        throw std::invalid_argument(
            "shrink_pair: a1 and a2 differ in unary type");
    if (tt.gamma_of(st, a1, a1 + 1) != tt.gamma_of(st, a2, a2 + 1))
        throw std::invalid_argument(
            "shrink_pair: a1 and a2 differ in the type toward their "
            "successors");

    const int cut = a2 - a1;
    const int m = n - cut;
    OrderedStructure out(st.signature(), m);
    std::vector<int> ranks(static_cast<std::size_t>(m));
    std::iota(ranks.begin(), ranks.end(), 0);
    out.set_order1(ranks);
    out.set_order2(ranks);
    auto old_of = [a1, cut](int e) { return e <= a1 ? e : e + cut; };
    for (int e = 0; e < m; ++e) tt.apply_sigma(out, e, tt.sigma_of(st, old_of(e)));
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b)
            tt.apply_gamma(out, a, b, tt.gamma_of(st, old_of(a), old_of(b)));
    // The new successor pair of a1 keeps the type a1 had toward its old one.
    tt.apply_gamma(out, a1, a1 + 1, tt.gamma_of(st, a1, a1 + 1));
    return out;
}

ShrinkResult shrink_to_fixpoint(const ConstraintProblem& cp,
                                const OrderedStructure& st) {
    RewireResult rw = rewire_witnesses(cp, st);
    const TypeTable& tt = *cp.types;
    OrderedStructure cur = std::move(rw.st);
    std::vector<int> z = std::move(rw.kernel);
    int rounds = 0;
    for (;;) {
        const int n = cur.size();
        std::vector<char> inz(static_cast<std::size_t>(n), 0);
        for (int e : z) inz[static_cast<std::size_t>(e)] = 1;
        // A position can pair up when it and its successor are both outside
        // the kernel; its signature is (unary, type toward successor,
        // successor's unary).
        int f1 = -1, f2 = -1;
        for (int a1 = 0; a1 + 1 < n && f1 < 0; ++a1) {
            if (inz[static_cast<std::size_t>(a1)] ||
                inz[static_cast<std::size_t>(a1 + 1)])
                continue;
            for (int a2 = a1 + 1; a2 + 1 < n; ++a2) {
                if (inz[static_cast<std::size_t>(a2)]) break;  // run ended
                if (inz[static_cast<std::size_t>(a2 + 1)]) break;
                if (tt.sigma_of(cur, a1) == tt.sigma_of(cur, a2) &&
                    tt.sigma_of(cur, a1 + 1) == tt.sigma_of(cur, a2 + 1) &&
                    tt.gamma_of(cur, a1, a1 + 1) ==
                        tt.gamma_of(cur, a2, a2 + 1)) {
                    f1 = a1;
                    f2 = a2;
                    break;
                }
            }
        }
        if (f1 < 0) break;
        cur = shrink_pair(cp, cur, z, f1, f2);
        const int cut = f2 - f1;
        for (int& e : z)
            if (e > f2) e -= cut;
        ++rounds;
        const CheckReport rep = check_solution(cp, cur);
        if (!rep.ok)
            throw std::runtime_error(
                "shrink_to_fixpoint produced an invalid structure: " +
                rep.violations.front());
    }
    return {std::move(cur), std::move(z), rounds};
}

std::size_t shrink_size_bound(std::size_t kernel_size, std::size_t num_sigma,
                              std::size_t num_gamma) {
    return (kernel_size + 1) * (num_sigma * num_gamma + 1) + kernel_size + 2;
}

}  // namespace fo2
