#include "fo2/oracle.hpp"

#include <algorithm>
#include <numeric>

namespace fo2 {

namespace {

constexpr long long kMaxEnumBits = 30;

}  // namespace

std::optional<OrderedStructure> oracle_find_model(const FormulaPtr& sentence,
                                                  const Signature& sig,
                                                  int max_size) {
    sig.validate();
    for (int n = 1; n <= max_size; ++n) {
        long long ubits = static_cast<long long>(sig.unary_symbols.size()) * n;
        long long bbits = static_cast<long long>(sig.binary_symbols.size()) * n * n;
        if (ubits + bbits > kMaxEnumBits)
            throw std::runtime_error("oracle scale exceeded: size " + std::to_string(n) +
                                     " needs " + std::to_string(ubits + bbits) +
                                     " relation bits");

        OrderedStructure base(sig, n);
        bool two_orders = base.bidimensional();

        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        do {
            OrderedStructure st = base;
            st.set_order2(perm);
            unsigned long long utotal = 1ull << ubits;
            unsigned long long btotal = 1ull << bbits;
            for (unsigned long long um = 0; um < utotal; ++um) {
                unsigned long long m = um;
                for (std::size_t s = 0; s < sig.unary_symbols.size(); ++s)
                    for (int a = 0; a < n; ++a) {
                        st.set_unary(static_cast<int>(s), a, (m & 1) != 0);
                        m >>= 1;
                    }
                for (unsigned long long bm = 0; bm < btotal; ++bm) {
                    unsigned long long q = bm;
                    for (std::size_t s = 0; s < sig.binary_symbols.size(); ++s)
                        for (int a = 0; a < n; ++a)
                            for (int b = 0; b < n; ++b) {
                                st.set_binary(static_cast<int>(s), a, b, (q & 1) != 0);
                                q >>= 1;
                            }
                    if (st.eval(sentence)) return st;
                }
            }
        } while (two_orders && std::next_permutation(perm.begin(), perm.end()));
    }
    return std::nullopt;
}

}  // namespace fo2
