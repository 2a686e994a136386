#include "fo2/loda.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace fo2 {

DataWord::DataWord(std::vector<std::pair<int, int>> letters)
    : letters_(std::move(letters)) {
    const int n = static_cast<int>(letters_.size());
    if (n == 0) throw std::invalid_argument("data word: must be nonempty");
    int lo = letters_[0].second, hi = letters_[0].second;
    for (const auto& [s, d] : letters_) {
        if (d < 0) throw std::invalid_argument("data word: values must be naturals");
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    if (hi - lo + 1 != n)
        throw std::invalid_argument("data word: values must form a contiguous interval");
    std::vector<int> seen(n, 0);
    for (const auto& [s, d] : letters_)
        if (seen[d - lo]++)
            throw std::invalid_argument("data word: values must be pairwise distinct");
    rank_.resize(n);
    by_data_.resize(n);
    for (int i = 0; i < n; ++i) {
        rank_[i] = letters_[i].second - lo;
        by_data_[rank_[i]] = i;
    }
}

int marking_index(Marking m) {
    return static_cast<int>(m.before) * 5 + static_cast<int>(m.after);
}

namespace {

Mark compare_neighbor(int neighbor, int self) {
    if (neighbor < self - 1) return Mark::minus_inf;
    if (neighbor == self - 1) return Mark::minus_one;
    if (neighbor == self + 1) return Mark::plus_one;
    return Mark::plus_inf;
}

}  // namespace

std::vector<MarkedLetter> marked_string_projection(const DataWord& w) {
    const int n = w.size();
    std::vector<MarkedLetter> out(n);
    for (int i = 0; i < n; ++i) {
        out[i].letter = w.letter(i);
        out[i].mark.before =
            i == 0 ? Mark::edge : compare_neighbor(w.data(i - 1), w.data(i));
        out[i].mark.after =
            i == n - 1 ? Mark::edge : compare_neighbor(w.data(i + 1), w.data(i));
    }
    return out;
}

std::vector<int> resorting(const DataWord& w) {
    std::vector<int> out;
    out.reserve(w.size());
    for (int p : w.positions_by_data()) out.push_back(w.letter(p));
    return out;
}

std::string mark_to_string(Mark m) {
    switch (m) {
        case Mark::minus_inf: return "-oo";
        case Mark::minus_one: return "-1";
        case Mark::plus_one: return "+1";
        case Mark::plus_inf: return "+oo";
        case Mark::edge: return "-";
    }
    return "?";
}

std::string msp_to_string(const std::vector<MarkedLetter>& msp,
                          const std::vector<std::string>& names) {
    std::string out;
    for (const MarkedLetter& ml : msp) {
        out += "(" + names.at(ml.letter) + ",(" + mark_to_string(ml.mark.before) +
               "," + mark_to_string(ml.mark.after) + "))";
    }
    return out;
}

std::string letters_to_string(const std::vector<int>& letters,
                              const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < letters.size(); ++i) {
        if (i) out += " ";
        out += names.at(letters[i]);
    }
    return out;
}

std::string data_word_to_string(const DataWord& w,
                                const std::vector<std::string>& names) {
    std::string out;
    for (int i = 0; i < w.size(); ++i) {
        if (i) out += " ";
        out += "(" + names.at(w.letter(i)) + "," + std::to_string(w.data(i)) + ")";
    }
    return out;
}

DataWord parse_data_word(const std::string& text,
                         const std::vector<std::string>& names) {
    std::vector<std::pair<int, int>> letters;
    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    skip_ws();
    while (i < text.size()) {
        if (text[i] != '(')
            throw std::invalid_argument("data word: expected '(' at offset " +
                                        std::to_string(i));
        ++i;
        std::string name;
        while (i < text.size() && text[i] != ',' && text[i] != ')') name += text[i++];
        if (i == text.size() || text[i] != ',')
            throw std::invalid_argument("data word: expected ',' after letter name");
        ++i;
        std::string digits;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])))
            digits += text[i++];
        if (digits.empty() || i == text.size() || text[i] != ')')
            throw std::invalid_argument("data word: expected a value and ')'");
        ++i;
        const auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end())
            throw std::invalid_argument("data word: unknown letter '" + name + "'");
        letters.emplace_back(static_cast<int>(it - names.begin()), std::stoi(digits));
        skip_ws();
    }
    return DataWord(std::move(letters));
}

bool TableLoda::accepts(const DataWord& w) const {
    const std::vector<MarkedLetter> msp = marked_string_projection(w);
    const int n = w.size();
    std::vector<int> outs(n, 0);
    unsigned long long nodes = 0;

    auto c_accepts = [&]() {
        std::vector<char> cur(c_states, 0);
        for (int s : c_initial) cur[s] = 1;
        for (int p : w.positions_by_data()) {
            std::vector<char> nxt(c_states, 0);
            bool any = false;
            for (const CRule& r : c_rules)
                if (cur[r.from] && r.letter == outs[p]) nxt[r.to] = any = true;
            if (!any) return false;
            cur.swap(nxt);
        }
        for (int s : c_accepting)
            if (cur[s]) return true;
        return false;
    };

    std::function<bool(int, int)> rec = [&](int i, int q) -> bool {
        if (++nodes > 20'000'000ull)
            throw std::runtime_error("machine run: search budget exceeded");
        if (i == n) {
            if (std::find(b_accepting.begin(), b_accepting.end(), q) ==
                b_accepting.end())
                return false;
            return c_accepts();
        }
        const int mi = marking_index(msp[i].mark);
        for (const BRule& r : b_rules) {
            if (r.from != q) continue;
            if (r.letter != -1 && r.letter != msp[i].letter) continue;
            if (r.mark != -1 && r.mark != mi) continue;
            outs[i] = r.out;
            if (rec(i + 1, r.to)) return true;
        }
        return false;
    };

    for (int q0 : b_initial)
        if (rec(0, q0)) return true;
    return false;
}

bool TableLoda::prefix_viable(const std::vector<int>& letters) const {
    std::vector<char> cur(b_states, 0);
    for (int s : b_initial) cur[s] = 1;
    for (int a : letters) {
        std::vector<char> nxt(b_states, 0);
        bool any = false;
        for (const BRule& r : b_rules)
            if (cur[r.from] && (r.letter == -1 || r.letter == a)) nxt[r.to] = any = true;
        if (!any) return false;
        cur.swap(nxt);
    }
    return true;
}

bool run(const Loda& m, const DataWord& w) {
    for (const auto& [s, d] : w.letters())
        if (s < 0 || s >= m.num_letters())
            throw std::invalid_argument("machine run: letter outside the alphabet");
    return m.accepts(w);
}

std::optional<DataWord> emptiness_bounded(const Loda& m, int len_max,
                                          unsigned long long budget) {
    if (len_max < 1)
        throw std::invalid_argument("emptiness search: len_max must be >= 1");
    const int S = m.num_letters();
    unsigned long long used = 0;
    std::optional<DataWord> result;
    for (int n = 1; n <= len_max && !result; ++n) {
        std::vector<int> seq;
        std::function<bool()> rec = [&]() -> bool {
            if (!m.prefix_viable(seq)) return false;
            if (static_cast<int>(seq.size()) == n) {
                std::vector<int> vals(n);
                std::iota(vals.begin(), vals.end(), 1);
                do {
                    if (++used > budget)
                        throw std::runtime_error("emptiness search: budget exceeded");
                    std::vector<std::pair<int, int>> ls(n);
                    for (int i = 0; i < n; ++i) ls[i] = {seq[i], vals[i]};
                    DataWord w(std::move(ls));
                    if (m.accepts(w)) {
                        result = std::move(w);
                        return true;
                    }
                } while (std::next_permutation(vals.begin(), vals.end()));
                return false;
            }
            for (int a = 0; a < S; ++a) {
                seq.push_back(a);
                if (rec()) return true;
                seq.pop_back();
            }
            return false;
        };
        rec();
    }
    return result;
}

TableLoda unique_successor_pair_example() {
    TableLoda m;
    m.num_in = 3;   // sigma, tau, delta
    m.num_out = 4;  // + marked tau
    m.b_states = 3;
    m.b_initial = {0};
    m.b_accepting = {2};
    // 0: sigma not yet seen; 1: sigma seen, mark not yet placed; 2: done.
    m.b_rules = {
        {0, 1, -1, 1, 0}, {0, 2, -1, 2, 0}, {0, 0, -1, 0, 1},
        {1, 1, -1, 1, 1}, {1, 2, -1, 2, 1}, {1, 1, -1, 3, 2},
        {2, 1, -1, 1, 2}, {2, 2, -1, 2, 2},
    };
    m.c_states = 3;
    m.c_initial = {0};
    m.c_accepting = {2};
    // The marked tau must directly follow sigma in data order.
    m.c_rules = {
        {0, 1, 0}, {0, 2, 0}, {0, 0, 1}, {1, 3, 2}, {2, 1, 2}, {2, 2, 2},
    };
    return m;
}

const std::vector<std::string>& example_letter_names() {
    static const std::vector<std::string> names{"sigma", "tau", "delta"};
    return names;
}

}  // namespace fo2
