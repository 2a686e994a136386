#pragma once

#include "fo2/formula.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fo2 {

// Options for the deterministic sentence generator used by the
// cross-checking tools and tests.
struct CorpusOptions {
    std::uint64_t seed = 1;
    int count = 100;
    // Order symbols the sentences may mention; must form one of the
    // supported profiles.
    std::vector<OrderSym> order_symbols = {OrderSym::suc, OrderSym::lt};
    int max_unary = 2;        // unary symbols drawn from {P, Q}
    int max_binary = 1;       // binary symbols drawn from {R}
    int max_depth = 3;        // quantifier nesting depth
    int max_connectives = 8;  // boolean connectives per sentence
};

// The declared signature matching the generator's symbol pool; every corpus
// sentence parses against it and compiles over its order symbols.
Signature corpus_signature(const CorpusOptions& opt);

// Generates `count` closed two-variable sentences as texts. Deterministic:
// identical options yield byte-identical output on every platform (the
// generator uses mt19937_64 with manual modulo sampling, never the
// library's distribution helpers). Every sentence parses back against
// corpus_signature(opt) and compiles into a constraint problem.
std::vector<std::string> generate_corpus(const CorpusOptions& opt);

}  // namespace fo2
