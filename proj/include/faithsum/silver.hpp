#pragma once

#include <memory>
#include <string>
#include <utility>

#include "faithsum/corpus.hpp"

namespace faithsum {

// Text translation hook. The paper-scale pipeline would call an MT system;
// here identity and dictionary translators keep everything offline.
class Translator {
public:
    virtual ~Translator() = default;
    virtual std::string translate(const std::string& text, const std::string& src,
                                  const std::string& tgt) const = 0;
};

// "identity" or "dictionary:<path>" (two-column tab-separated token map).
std::unique_ptr<Translator> make_translator(const std::string& spec);

struct SilverDataset {
    Corpus positives;
    Corpus negatives;
    CorpusSplits splits;
    std::string scorer_names;  // comma-joined provenance
    std::size_t k = 0;
};

// Sorts by aggregate score (descending, ties by ascending id); top k become
// positives (label 1), bottom k negatives (label 0). Throws when 2k exceeds
// the corpus or any aggregate is missing.
std::pair<Corpus, Corpus> rank_and_select(const Corpus& scored, std::size_t k);

// Translates document and summary of every pair into tgt, merges, shuffles
// and splits per spec. Labels survive translation.
SilverDataset build_silver(const Corpus& positives, const Corpus& negatives,
                           const Translator& translator, const std::string& tgt,
                           const SplitSpec& spec);

}  // namespace faithsum
