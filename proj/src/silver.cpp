#include "faithsum/silver.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "faithsum/rng.hpp"

namespace faithsum {

namespace {

class IdentityTranslator final : public Translator {
public:
    std::string translate(const std::string& text, const std::string&,
                          const std::string&) const override {
        return text;
    }
};

class DictionaryTranslator final : public Translator {
public:
    explicit DictionaryTranslator(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open dictionary: " + path);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty() || line[0] == '#') continue;
            const auto tab = line.find('\t');
            if (tab == std::string::npos) {
                throw ParseError(path, line_no, "expected two tab-separated columns");
            }
            map_[line.substr(0, tab)] = line.substr(tab + 1);
        }
    }

    std::string translate(const std::string& text, const std::string&,
                          const std::string&) const override {
        std::istringstream in(text);
        std::ostringstream out;
        std::string word;
        bool first = true;
        while (in >> word) {
            if (!first) out << ' ';
            first = false;
            auto it = map_.find(word);
            out << (it == map_.end() ? word : it->second);
        }
        return out.str();
    }

private:
    std::unordered_map<std::string, std::string> map_;
};

}  // namespace

std::unique_ptr<Translator> make_translator(const std::string& spec) {
    if (spec == "identity") return std::make_unique<IdentityTranslator>();
    if (spec.rfind("dictionary:", 0) == 0) {
        return std::make_unique<DictionaryTranslator>(spec.substr(11));
    }
    throw std::invalid_argument("unknown translator: " + spec);
}

std::pair<Corpus, Corpus> rank_and_select(const Corpus& scored, std::size_t k) {
    if (k == 0) throw std::invalid_argument("rank_and_select: k must be positive");
    if (2 * k > scored.size()) {
        throw std::invalid_argument("rank_and_select: 2k exceeds corpus size");
    }
    for (const SummaryPair& pair : scored.pairs) {
        if (!pair.scores || !pair.scores->aggregate) {
            throw std::invalid_argument("rank_and_select: pair \"" + pair.doc.id +
                                        "\" has no aggregate score");
        }
    }
    std::vector<const SummaryPair*> order;
    order.reserve(scored.size());
    for (const SummaryPair& pair : scored.pairs) order.push_back(&pair);
    std::sort(order.begin(), order.end(), [](const SummaryPair* a, const SummaryPair* b) {
        const double sa = *a->scores->aggregate;
        const double sb = *b->scores->aggregate;
        if (sa != sb) return sa > sb;
        return a->doc.id < b->doc.id;
    });

    Corpus positives;
    Corpus negatives;
    positives.language = negatives.language = scored.language;
    for (std::size_t i = 0; i < k; ++i) {
        SummaryPair p = *order[i];
        p.label = 1;
        positives.pairs.push_back(std::move(p));
    }
    for (std::size_t i = scored.size() - k; i < scored.size(); ++i) {
        SummaryPair p = *order[i];
        p.label = 0;
        negatives.pairs.push_back(std::move(p));
    }
    return {std::move(positives), std::move(negatives)};
}

SilverDataset build_silver(const Corpus& positives, const Corpus& negatives,
                           const Translator& translator, const std::string& tgt,
                           const SplitSpec& spec) {
    if (positives.empty() || negatives.empty()) {
        throw std::invalid_argument("build_silver: positive and negative sets must be non-empty");
    }
    std::unordered_map<std::string, int> ids;
    auto check = [&ids](const Corpus& c, int expected_label) {
        for (const SummaryPair& pair : c.pairs) {
            if (!pair.label || *pair.label != expected_label) {
                throw std::invalid_argument("build_silver: pair \"" + pair.doc.id +
                                            "\" is missing its label");
            }
            if (!ids.emplace(pair.doc.id, expected_label).second) {
                throw std::invalid_argument("build_silver: id \"" + pair.doc.id +
                                            "\" appears in both sets");
            }
        }
    };
    check(positives, 1);
    check(negatives, 0);

    auto translate_corpus = [&](const Corpus& src) {
        Corpus out = src;
        out.language = tgt;
        for (SummaryPair& pair : out.pairs) {
            try {
                pair.doc.text = translator.translate(pair.doc.text, src.language, tgt);
                pair.summary_text = translator.translate(pair.summary_text, src.language, tgt);
            } catch (const std::exception& e) {
                throw std::runtime_error("build_silver: translation failed for pair \"" +
                                         pair.doc.id + "\": " + e.what());
            }
        }
        out.retokenize();
        return out;
    };

    SilverDataset dataset;
    dataset.positives = translate_corpus(positives);
    dataset.negatives = translate_corpus(negatives);
    dataset.k = positives.size();

    Corpus merged;
    merged.language = tgt;
    merged.pairs = dataset.positives.pairs;
    merged.pairs.insert(merged.pairs.end(), dataset.negatives.pairs.begin(),
                        dataset.negatives.pairs.end());
    dataset.splits = split_corpus(merged, spec);
    return dataset;
}

}  // namespace faithsum
