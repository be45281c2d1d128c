#include "faithsum/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace faithsum {

namespace {

double f_measure(double p, double r) {
    return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

}  // namespace

RougeResult rouge_n(const TokenSeq& candidate, const TokenSeq& reference, int n) {
    if (n <= 0) throw std::invalid_argument("rouge_n: n must be >= 1");
    const auto cand = ngrams(candidate, n);
    const auto ref = ngrams(reference, n);
    long long cand_total = 0;
    long long ref_total = 0;
    long long clipped = 0;
    for (const auto& [gram, count] : cand) cand_total += count;
    for (const auto& [gram, count] : ref) {
        ref_total += count;
        auto it = cand.find(gram);
        if (it != cand.end()) clipped += std::min(count, it->second);
    }
    RougeResult result;
    result.precision = cand_total > 0 ? static_cast<double>(clipped) / static_cast<double>(cand_total) : 0.0;
    result.recall = ref_total > 0 ? static_cast<double>(clipped) / static_cast<double>(ref_total) : 0.0;
    result.f1 = f_measure(result.precision, result.recall);
    return result;
}

RougeResult rouge_l(const TokenSeq& candidate, const TokenSeq& reference) {
    const std::size_t m = candidate.size();
    const std::size_t n = reference.size();
    RougeResult result;
    if (m == 0 || n == 0) return result;
    // single-row LCS table
    std::vector<std::size_t> prev(n + 1, 0);
    std::vector<std::size_t> cur(n + 1, 0);
    for (std::size_t i = 1; i <= m; ++i) {
        for (std::size_t j = 1; j <= n; ++j) {
            if (candidate[i - 1] == reference[j - 1]) {
                cur[j] = prev[j - 1] + 1;
            } else {
                cur[j] = std::max(prev[j], cur[j - 1]);
            }
        }
        std::swap(prev, cur);
    }
    const double lcs = static_cast<double>(prev[n]);
    result.precision = lcs / static_cast<double>(m);
    result.recall = lcs / static_cast<double>(n);
    result.f1 = f_measure(result.precision, result.recall);
    return result;
}

double novel_ngram_pct(const TokenSeq& summary, const TokenSeq& document, int n) {
    if (n <= 0) throw std::invalid_argument("novel_ngram_pct: n must be >= 1");
    if (summary.size() < static_cast<std::size_t>(n)) {
        throw std::invalid_argument("novel_ngram_pct: summary has fewer than n tokens");
    }
    const auto summ = ngrams(summary, n);
    const auto doc = ngrams(document, n);
    std::size_t novel = 0;
    for (const auto& [gram, count] : summ) {
        if (doc.find(gram) == doc.end()) ++novel;
    }
    return 100.0 * static_cast<double>(novel) / static_cast<double>(summ.size());
}

EntitySet extract_entities(const std::string& text) {
    EntitySet entities;
    bool sentence_initial = true;
    for (const std::string& tok : tokenize_cased(text)) {
        if (tok == "." || tok == "!" || tok == "?") {
            sentence_initial = true;
            continue;
        }
        const char first = tok[0];
        const bool punct_only = tok.size() == 1 && !std::isalnum(static_cast<unsigned char>(first));
        if (punct_only) continue;  // commas etc. do not end a sentence
        const bool numeric = std::all_of(tok.begin(), tok.end(), [](unsigned char c) {
            return std::isdigit(c);
        });
        if (numeric) {
            entities.insert(tok);
        } else if (!sentence_initial && first >= 'A' && first <= 'Z') {
            std::string lowered = tok;
            for (char& c : lowered) {
                if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
            }
            entities.insert(lowered);
        }
        sentence_initial = false;
    }
    return entities;
}

double enfs_pct(const std::string& summary_text, const std::string& document_text,
                const EntityExtractor& extractor) {
    const EntitySet summ = extractor(summary_text);
    if (summ.empty()) return 0.0;
    const EntitySet doc = extractor(document_text);
    std::size_t unsupported = 0;
    for (const std::string& e : summ) {
        if (doc.find(e) == doc.end()) ++unsupported;
    }
    return 100.0 * static_cast<double>(unsupported) / static_cast<double>(summ.size());
}

std::vector<ScoreVector> normalize_and_aggregate(const std::vector<ScoreVector>& raw) {
    if (raw.size() < 2) {
        throw std::invalid_argument("normalize_and_aggregate: need at least 2 score vectors");
    }
    const auto& names = raw.front().raw;
    for (const ScoreVector& sv : raw) {
        if (sv.raw.size() != names.size() ||
            sv.higher_is_faithful.size() != names.size()) {
            throw std::invalid_argument("normalize_and_aggregate: mismatched scorer names");
        }
        for (const auto& [name, value] : names) {
            if (sv.raw.find(name) == sv.raw.end() ||
                sv.higher_is_faithful.find(name) == sv.higher_is_faithful.end()) {
                throw std::invalid_argument("normalize_and_aggregate: mismatched scorer names");
            }
        }
    }
    std::vector<ScoreVector> out = raw;
    for (const auto& [name, unused] : names) {
        double lo = raw.front().raw.at(name);
        double hi = lo;
        for (const ScoreVector& sv : raw) {
            lo = std::min(lo, sv.raw.at(name));
            hi = std::max(hi, sv.raw.at(name));
        }
        const double range = hi - lo;
        for (ScoreVector& sv : out) {
            double norm = range == 0.0 ? 0.5 : (sv.raw.at(name) - lo) / range;
            if (!sv.higher_is_faithful.at(name)) norm = 1.0 - norm;
            sv.normalized[name] = norm;
        }
    }
    for (ScoreVector& sv : out) {
        double sum = 0.0;
        for (const auto& [name, value] : sv.normalized) sum += value;
        sv.aggregate = sum / static_cast<double>(sv.normalized.size());
    }
    return out;
}

namespace {

class EnfsScorer final : public FaithfulnessScorer {
public:
    std::string name() const override { return "enfs"; }
    bool higher_is_faithful() const override { return false; }
    double score_pair(const SummaryPair& pair) const override {
        return enfs_pct(pair.summary_text, pair.doc.text);
    }
};

class NovelNgramScorer final : public FaithfulnessScorer {
public:
    explicit NovelNgramScorer(int n) : n_(n) {}
    std::string name() const override { return "novel" + std::to_string(n_); }
    bool higher_is_faithful() const override { return false; }
    double score_pair(const SummaryPair& pair) const override {
        // summaries shorter than n have no n-grams and nothing novel
        if (pair.summary.size() < static_cast<std::size_t>(n_)) return 0.0;
        return novel_ngram_pct(pair.summary, pair.doc.tokens, n_);
    }

private:
    int n_;
};

class OverlapScorer final : public FaithfulnessScorer {
public:
    std::string name() const override { return "overlap1"; }
    bool higher_is_faithful() const override { return true; }
    double score_pair(const SummaryPair& pair) const override {
        if (pair.summary.empty()) return 100.0;
        return 100.0 - novel_ngram_pct(pair.summary, pair.doc.tokens, 1);
    }
};

}  // namespace

std::unique_ptr<FaithfulnessScorer> make_scorer(const std::string& name) {
    if (name == "enfs") return std::make_unique<EnfsScorer>();
    if (name == "novel1") return std::make_unique<NovelNgramScorer>(1);
    if (name == "novel2") return std::make_unique<NovelNgramScorer>(2);
    if (name == "novel3") return std::make_unique<NovelNgramScorer>(3);
    if (name == "overlap1") return std::make_unique<OverlapScorer>();
    throw std::invalid_argument("unknown scorer: " + name);
}

}  // namespace faithsum
