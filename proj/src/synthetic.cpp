#include "faithsum/synthetic.hpp"

#include <cstdio>
#include <stdexcept>

#include "faithsum/rng.hpp"

namespace faithsum {

namespace {

std::string fmt(const char* pattern, std::size_t n) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), pattern, n);
    return buf;
}

std::string join(const TokenSeq& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    return out;
}

}  // namespace

void GenSpec::validate() const {
    if (num_pairs == 0) throw std::invalid_argument("gen: num_pairs must be positive");
    if (vocab_size == 0 || sentinel_pool == 0 || entity_pool == 0) {
        throw std::invalid_argument("gen: vocabulary pools must be positive");
    }
    if (doc_len_min > doc_len_max || doc_len_min < 8) {
        throw std::invalid_argument("gen: document length range invalid (min >= 8)");
    }
    if (summary_len_min == 0 || summary_len_min > summary_len_max) {
        throw std::invalid_argument("gen: summary length range invalid");
    }
    // summaries are windows starting at offsets 0..3
    if (summary_len_max + 3 > doc_len_min) {
        throw std::invalid_argument("gen: summaries must fit inside the shortest document");
    }
    if (hallucination_rate < 0.0 || hallucination_rate > 1.0) {
        throw std::invalid_argument("gen: hallucination_rate must be in [0,1]");
    }
}

// Documents are one "sentence": a lowercase word first, entity mentions at
// fixed early positions (so every summary window covers at least one), then
// a mix of content words with occasional entities and numbers. Summaries are
// windows of the document; hallucinated ones get a sentinel entity spliced
// in at position 1, which the default extractor is guaranteed to see.
Corpus generate(const GenSpec& spec) {
    spec.validate();
    Corpus corpus;
    corpus.language = spec.language;
    corpus.pairs.reserve(spec.num_pairs);
    Rng root(spec.seed);

    for (std::size_t idx = 0; idx < spec.num_pairs; ++idx) {
        Rng rng = root.fork(idx + 1);

        const std::size_t doc_len =
            spec.doc_len_min + rng.below(spec.doc_len_max - spec.doc_len_min + 1);
        TokenSeq doc;
        doc.reserve(doc_len);
        for (std::size_t pos = 0; pos < doc_len; ++pos) {
            if (pos == 2 || pos == 5) {
                doc.push_back(fmt("Ent%02zu", rng.below(spec.entity_pool)));
            } else if (pos > 5 && rng.next_double() < 0.10) {
                doc.push_back(fmt("Ent%02zu", rng.below(spec.entity_pool)));
            } else if (pos > 5 && rng.next_double() < 0.05) {
                doc.push_back(fmt("%zu", 100 + rng.below(900)));
            } else {
                doc.push_back(fmt("w%02zu", rng.below(spec.vocab_size)));
            }
        }

        const std::size_t summ_len =
            spec.summary_len_min +
            rng.below(spec.summary_len_max - spec.summary_len_min + 1);
        const std::size_t start = rng.below(4);
        TokenSeq summary(doc.begin() + static_cast<std::ptrdiff_t>(start),
                         doc.begin() + static_cast<std::ptrdiff_t>(start + summ_len));

        const bool hallucinated = rng.next_double() < spec.hallucination_rate;
        if (hallucinated) {
            summary.insert(summary.begin() + 1,
                           fmt("Zorb%02zu", rng.below(spec.sentinel_pool)));
        }

        SummaryPair pair;
        pair.doc.id = fmt("syn-%06zu", idx);
        pair.doc.text = join(doc);
        pair.summary_text = join(summary);
        pair.label = hallucinated ? 0 : 1;
        corpus.pairs.push_back(std::move(pair));
    }
    corpus.retokenize();
    return corpus;
}

}  // namespace faithsum
