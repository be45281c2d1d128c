#pragma once

#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "faithsum/corpus.hpp"

namespace faithsum {

struct RougeResult {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Clipped n-gram overlap. Throws std::invalid_argument when n == 0.
RougeResult rouge_n(const TokenSeq& candidate, const TokenSeq& reference, int n);

// LCS-based: P = LCS/|cand|, R = LCS/|ref|.
RougeResult rouge_l(const TokenSeq& candidate, const TokenSeq& reference);

// 100 * |distinct summary n-grams absent from the document| / |distinct
// summary n-grams|. Throws when the summary has fewer than n tokens.
double novel_ngram_pct(const TokenSeq& summary, const TokenSeq& document, int n);

using EntitySet = std::set<std::string>;
using EntityExtractor = std::function<EntitySet(const std::string& text)>;

// Default extractor: tokens capitalized at non-sentence-initial positions
// plus purely numeric tokens, lowercased for comparison. Sentence starts are
// the first token and any token following ., ! or ?.
EntitySet extract_entities(const std::string& text);

// 100 * |summary entities not in document entities| / |summary entities|,
// 0 when the summary has no entities.
double enfs_pct(const std::string& summary_text, const std::string& document_text,
                const EntityExtractor& extractor = extract_entities);

// Min-max normalizes each scorer column over the population, flips
// lower-is-faithful columns, fills aggregate = mean of normalized values.
// Constant columns normalize to 0.5. Requires >= 2 vectors with identical
// scorer names.
std::vector<ScoreVector> normalize_and_aggregate(const std::vector<ScoreVector>& raw);

// Pluggable faithfulness scorer, looked up by name in experiment configs.
class FaithfulnessScorer {
public:
    virtual ~FaithfulnessScorer() = default;
    virtual std::string name() const = 0;
    virtual bool higher_is_faithful() const = 0;
    virtual double score_pair(const SummaryPair& pair) const = 0;
};

// Built-in scorers: "enfs" (lower is faithful), "novel1"/"novel2"/"novel3"
// (novel n-gram %, lower is faithful), "overlap1" (summary unigram overlap
// with the document, higher is faithful). Throws on unknown names.
std::unique_ptr<FaithfulnessScorer> make_scorer(const std::string& name);

}  // namespace faithsum
