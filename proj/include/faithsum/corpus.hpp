#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace faithsum {

using TokenSeq = std::vector<std::string>;
using TokenIds = std::vector<int>;

enum class TokenizeMode { whitespace, character };

// Whitespace mode lowercases ASCII, splits on Unicode whitespace and peels
// surrounding punctuation off into separate tokens. Character mode emits one
// token per non-whitespace code point. Empty text gives an empty sequence.
TokenSeq tokenize(const std::string& text, TokenizeMode mode);

// Whitespace tokenization without lowercasing; the entity extractor needs
// the original capitalization.
TokenSeq tokenize_cased(const std::string& text);

// All contiguous n-grams with multiplicity. Grams are joined with '\x1f' so
// they can key a hash map. Throws std::invalid_argument when n == 0.
std::unordered_map<std::string, int> ngrams(const TokenSeq& tokens, int n);

// Per-scorer raw scores plus (after normalize_and_aggregate) min-max
// normalized values oriented so that higher always means more faithful.
struct ScoreVector {
    std::map<std::string, double> raw;
    // true: higher raw score = more faithful; false: lower = more faithful
    std::map<std::string, bool> higher_is_faithful;
    std::map<std::string, double> normalized;  // empty until normalized
    std::optional<double> aggregate;

    bool operator==(const ScoreVector&) const = default;
};

struct Document {
    std::string id;
    std::string text;
    TokenSeq tokens;  // filled by tokenization of text
};

struct SummaryPair {
    Document doc;
    std::string summary_text;
    TokenSeq summary;           // tokens of summary_text
    std::optional<int> label;   // 1 = faithful, 0 = hallucinated
    std::optional<ScoreVector> scores;
};

struct Corpus {
    std::vector<SummaryPair> pairs;
    std::string language;

    std::size_t size() const { return pairs.size(); }
    bool empty() const { return pairs.empty(); }

    // Fills doc.tokens and summary for every pair.
    void retokenize(TokenizeMode mode = TokenizeMode::whitespace);
};

struct SplitSpec {
    double train = 0.95;
    double val = 0.025;
    double test = 0.025;
    std::uint64_t seed = 0;

    void validate() const;
};

struct CorpusSplits {
    Corpus train;
    Corpus val;
    Corpus test;
};

// Deterministic shuffle by spec.seed, then sizes floor(N*train),
// floor(N*val), remainder to test. Throws on an empty corpus.
CorpusSplits split_corpus(const Corpus& corpus, const SplitSpec& spec);

struct ParseError : std::runtime_error {
    ParseError(const std::string& path, std::size_t line, const std::string& what);
    std::size_t line;
};

struct IntegrityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// JSON Lines with fields {id, text, summary, label?, scores?}; a `#lang:`
// header line carries the language tag. Round-trip is lossless.
Corpus load_corpus(const std::string& path);
void save_corpus(const Corpus& corpus, const std::string& path);

// token -> id with fixed reserved ids below.
class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kBos = 1;
    static constexpr int kEos = 2;
    static constexpr int kUnk = 3;
    static constexpr int kSep = 4;
    static constexpr int kCls = 5;
    static constexpr int kNumReserved = 6;

    Vocabulary();

    // Tokens of every document and summary in the corpus, most frequent
    // first (ties by token text), capped at max_size ids total.
    static Vocabulary build(const Corpus& corpus, std::size_t max_size = 4096);

    // Rebuild from an id-ordered token list (e.g. a checkpoint). The first
    // six entries must be the reserved tokens.
    static Vocabulary from_tokens(const std::vector<std::string>& tokens);

    int add(const std::string& token);  // returns existing id if present
    int id(const std::string& token) const;  // kUnk when unknown
    const std::string& token(int id) const;
    std::size_t size() const { return id_to_token_.size(); }

    TokenIds encode(const TokenSeq& tokens) const;
    TokenSeq decode(const TokenIds& ids) const;

    const std::vector<std::string>& tokens() const { return id_to_token_; }

private:
    std::unordered_map<std::string, int> token_to_id_;
    std::vector<std::string> id_to_token_;
};

}  // namespace faithsum
