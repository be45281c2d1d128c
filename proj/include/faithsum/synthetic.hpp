#pragma once

#include <cstdint>

#include "faithsum/corpus.hpp"

namespace faithsum {

// Deterministic toy-corpus generator. Clean summaries recombine document
// tokens; hallucinated summaries additionally contain at least one sentinel
// entity absent from their document, so rule-based metrics and the
// classifier can recover the ground truth.
struct GenSpec {
    std::size_t num_pairs = 1000;
    std::size_t vocab_size = 60;       // lowercase content words
    std::size_t doc_len_min = 18;
    std::size_t doc_len_max = 32;
    std::size_t summary_len_min = 5;
    std::size_t summary_len_max = 9;
    double hallucination_rate = 0.0;   // probability a pair is hallucinated
    std::size_t sentinel_pool = 4;     // distinct sentinel entities
    std::size_t entity_pool = 24;      // distinct in-document entities
    std::uint64_t seed = 0;
    std::string language = "syn";

    void validate() const;
};

Corpus generate(const GenSpec& spec);

}  // namespace faithsum
