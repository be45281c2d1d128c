#include "faithsum/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "faithsum/rng.hpp"

namespace faithsum {

namespace {

using json = nlohmann::ordered_json;

// Decodes the code point starting at text[i]; advances i past it. Invalid
// bytes are treated as one-byte code points so tokenization never throws.
std::uint32_t next_code_point(const std::string& text, std::size_t& i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    std::uint32_t cp = c;
    if (c >= 0xF0) {
        len = 4;
        cp = c & 0x07u;
    } else if (c >= 0xE0) {
        len = 3;
        cp = c & 0x0Fu;
    } else if (c >= 0xC0) {
        len = 2;
        cp = c & 0x1Fu;
    }
    if (i + len > text.size()) len = 1, cp = c;
    for (std::size_t k = 1; k < len; ++k) {
        const unsigned char cont = static_cast<unsigned char>(text[i + k]);
        if ((cont & 0xC0u) != 0x80u) {
            len = 1;
            cp = c;
            break;
        }
        cp = (cp << 6) | (cont & 0x3Fu);
    }
    i += len;
    return cp;
}

bool is_space_cp(std::uint32_t cp) {
    switch (cp) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
        case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
        case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

bool is_ascii_punct(std::uint32_t cp) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
}

std::string lower_ascii(std::string s) {
    for (char& c : s) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return s;
}

// One whitespace-delimited chunk -> leading punct tokens, core, trailing
// punct tokens.
void emit_chunk(const std::string& chunk, TokenSeq& out, bool lower) {
    std::size_t begin = 0;
    std::size_t end = chunk.size();
    std::vector<std::string> leading;
    while (begin < end) {
        std::size_t i = begin;
        const std::uint32_t cp = next_code_point(chunk, i);
        if (!is_ascii_punct(cp)) break;
        leading.push_back(chunk.substr(begin, i - begin));
        begin = i;
    }
    std::vector<std::string> trailing;
    while (end > begin) {
        // scan to the last code point in [begin, end)
        std::size_t last = begin;
        std::size_t i = begin;
        while (i < end) {
            last = i;
            next_code_point(chunk, i);
        }
        std::size_t j = last;
        const std::uint32_t cp = next_code_point(chunk, j);
        if (!is_ascii_punct(cp)) break;
        trailing.push_back(chunk.substr(last, end - last));
        end = last;
    }
    for (auto& t : leading) out.push_back(std::move(t));
    if (end > begin) {
        std::string core = chunk.substr(begin, end - begin);
        out.push_back(lower ? lower_ascii(std::move(core)) : std::move(core));
    }
    for (auto it = trailing.rbegin(); it != trailing.rend(); ++it) {
        out.push_back(std::move(*it));
    }
}

TokenSeq whitespace_tokens(const std::string& text, bool lower) {
    TokenSeq out;
    std::string chunk;
    std::size_t i = 0;
    while (i < text.size()) {
        const std::size_t start = i;
        const std::uint32_t cp = next_code_point(text, i);
        if (is_space_cp(cp)) {
            if (!chunk.empty()) {
                emit_chunk(chunk, out, lower);
                chunk.clear();
            }
        } else {
            chunk.append(text, start, i - start);
        }
    }
    if (!chunk.empty()) emit_chunk(chunk, out, lower);
    return out;
}

}  // namespace

TokenSeq tokenize(const std::string& text, TokenizeMode mode) {
    if (mode == TokenizeMode::character) {
        TokenSeq out;
        std::size_t i = 0;
        while (i < text.size()) {
            const std::size_t start = i;
            const std::uint32_t cp = next_code_point(text, i);
            if (!is_space_cp(cp)) out.push_back(text.substr(start, i - start));
        }
        return out;
    }
    return whitespace_tokens(text, /*lower=*/true);
}

TokenSeq tokenize_cased(const std::string& text) {
    return whitespace_tokens(text, /*lower=*/false);
}

std::unordered_map<std::string, int> ngrams(const TokenSeq& tokens, int n) {
    if (n <= 0) throw std::invalid_argument("ngrams: n must be >= 1");
    std::unordered_map<std::string, int> counts;
    const std::size_t len = tokens.size();
    const std::size_t nn = static_cast<std::size_t>(n);
    if (len < nn) return counts;
    for (std::size_t i = 0; i + nn <= len; ++i) {
        std::string key = tokens[i];
        for (std::size_t k = 1; k < nn; ++k) {
            key += '\x1f';
            key += tokens[i + k];
        }
        ++counts[key];
    }
    return counts;
}

void Corpus::retokenize(TokenizeMode mode) {
    for (auto& pair : pairs) {
        pair.doc.tokens = tokenize(pair.doc.text, mode);
        pair.summary = tokenize(pair.summary_text, mode);
    }
}

void SplitSpec::validate() const {
    if (train < 0 || val < 0 || test < 0) {
        throw std::invalid_argument("split proportions must be non-negative");
    }
    if (std::fabs(train + val + test - 1.0) > 1e-9) {
        throw std::invalid_argument("split proportions must sum to 1");
    }
}

CorpusSplits split_corpus(const Corpus& corpus, const SplitSpec& spec) {
    spec.validate();
    if (corpus.empty()) throw std::invalid_argument("split_corpus: empty corpus");
    const std::size_t n = corpus.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(spec.seed);
    rng.shuffle(order);

    const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.train));
    const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.val));

    CorpusSplits splits;
    splits.train.language = splits.val.language = splits.test.language = corpus.language;
    for (std::size_t i = 0; i < n; ++i) {
        const SummaryPair& p = corpus.pairs[order[i]];
        if (i < n_train) {
            splits.train.pairs.push_back(p);
        } else if (i < n_train + n_val) {
            splits.val.pairs.push_back(p);
        } else {
            splits.test.pairs.push_back(p);
        }
    }
    return splits;
}

ParseError::ParseError(const std::string& path, std::size_t line_no, const std::string& what)
    : std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what),
      line(line_no) {}

namespace {

json scores_to_json(const ScoreVector& sv) {
    json j;
    j["raw"] = sv.raw;
    j["higher_is_faithful"] = sv.higher_is_faithful;
    if (!sv.normalized.empty()) j["normalized"] = sv.normalized;
    if (sv.aggregate) j["aggregate"] = *sv.aggregate;
    return j;
}

ScoreVector scores_from_json(const json& j) {
    ScoreVector sv;
    sv.raw = j.at("raw").get<std::map<std::string, double>>();
    sv.higher_is_faithful = j.at("higher_is_faithful").get<std::map<std::string, bool>>();
    if (j.contains("normalized")) {
        sv.normalized = j.at("normalized").get<std::map<std::string, double>>();
    }
    if (j.contains("aggregate")) sv.aggregate = j.at("aggregate").get<double>();
    return sv;
}

}  // namespace

Corpus load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path);
    Corpus corpus;
    std::unordered_map<std::string, std::size_t> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line.rfind("#lang:", 0) == 0) {
            std::string tag = line.substr(6);
            const auto first = tag.find_first_not_of(" \t");
            corpus.language = first == std::string::npos ? "" : tag.substr(first);
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(path, line_no, e.what());
        }
        try {
            SummaryPair pair;
            pair.doc.id = j.at("id").get<std::string>();
            pair.doc.text = j.at("text").get<std::string>();
            pair.summary_text = j.at("summary").get<std::string>();
            if (j.contains("label")) {
                const int label = j.at("label").get<int>();
                if (label != 0 && label != 1) {
                    throw ParseError(path, line_no, "label must be 0 or 1");
                }
                pair.label = label;
            }
            if (j.contains("scores")) pair.scores = scores_from_json(j.at("scores"));
            if (!seen_ids.emplace(pair.doc.id, line_no).second) {
                throw IntegrityError(path + ":" + std::to_string(line_no) +
                                     ": duplicate id \"" + pair.doc.id + "\"");
            }
            corpus.pairs.push_back(std::move(pair));
        } catch (const json::exception& e) {
            throw ParseError(path, line_no, e.what());
        }
    }
    corpus.retokenize();
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write corpus file: " + path);
    out << "#lang: " << corpus.language << "\n";
    for (const SummaryPair& pair : corpus.pairs) {
        json j;
        j["id"] = pair.doc.id;
        j["text"] = pair.doc.text;
        j["summary"] = pair.summary_text;
        if (pair.label) j["label"] = *pair.label;
        if (pair.scores) j["scores"] = scores_to_json(*pair.scores);
        out << j.dump() << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

Vocabulary::Vocabulary() {
    for (const char* tok : {"<pad>", "<bos>", "<eos>", "<unk>", "<sep>", "<cls>"}) {
        token_to_id_.emplace(tok, static_cast<int>(id_to_token_.size()));
        id_to_token_.push_back(tok);
    }
}

Vocabulary Vocabulary::build(const Corpus& corpus, std::size_t max_size) {
    std::unordered_map<std::string, std::size_t> counts;
    for (const SummaryPair& pair : corpus.pairs) {
        for (const std::string& t : pair.doc.tokens) ++counts[t];
        for (const std::string& t : pair.summary) ++counts[t];
    }
    std::vector<std::pair<std::string, std::size_t>> sorted(counts.begin(), counts.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    Vocabulary vocab;
    for (const auto& [token, count] : sorted) {
        if (vocab.size() >= max_size) break;
        vocab.add(token);
    }
    return vocab;
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
    Vocabulary vocab;
    if (tokens.size() < kNumReserved) {
        throw std::invalid_argument("vocabulary: token list is missing reserved entries");
    }
    for (std::size_t i = 0; i < kNumReserved; ++i) {
        if (tokens[i] != vocab.id_to_token_[i]) {
            throw std::invalid_argument("vocabulary: reserved tokens out of order");
        }
    }
    for (std::size_t i = kNumReserved; i < tokens.size(); ++i) vocab.add(tokens[i]);
    return vocab;
}

int Vocabulary::add(const std::string& token) {
    auto [it, inserted] = token_to_id_.emplace(token, static_cast<int>(id_to_token_.size()));
    if (inserted) id_to_token_.push_back(token);
    return it->second;
}

int Vocabulary::id(const std::string& token) const {
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
        throw std::invalid_argument("token id out of range: " + std::to_string(id));
    }
    return id_to_token_[static_cast<std::size_t>(id)];
}

TokenIds Vocabulary::encode(const TokenSeq& tokens) const {
    TokenIds ids;
    ids.reserve(tokens.size());
    for (const std::string& t : tokens) ids.push_back(id(t));
    return ids;
}

TokenSeq Vocabulary::decode(const TokenIds& ids) const {
    TokenSeq tokens;
    tokens.reserve(ids.size());
    for (int i : ids) tokens.push_back(token(i));
    return tokens;
}

}  // namespace faithsum
