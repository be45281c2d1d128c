#include "faithsum/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "faithsum/classifier.hpp"
#include "faithsum/corpus.hpp"
#include "faithsum/decode.hpp"
#include "faithsum/edit.hpp"
#include "faithsum/metrics.hpp"
#include "faithsum/report.hpp"
#include "faithsum/rng.hpp"
#include "faithsum/silver.hpp"
#include "faithsum/stats.hpp"
#include "faithsum/synthetic.hpp"
#include "faithsum/train.hpp"

namespace faithsum {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct CommandIo {
    std::string name;
    const ExperimentConfig& config;
    fs::path out;
    std::vector<std::string> artifacts;
    std::vector<std::string> seeds;

    fs::path path(const std::string& artifact) {
        artifacts.push_back(artifact);
        return out / artifact;
    }

    void note_seed(const std::string& key, std::uint64_t value) {
        seeds.push_back(key + " " + std::to_string(value));
    }

    void write_manifest() {
        std::ofstream m(out / "manifest.txt", std::ios::binary);
        if (!m) throw std::runtime_error("cannot write manifest in " + out.string());
        m << "command " << name << "\n";
        m << "config_hash " << fnv1a_hex(config.canonical_section(name)) << "\n";
        for (const std::string& s : seeds) m << "seed " << s << "\n";
        for (const std::string& a : artifacts) m << "artifact " << a << "\n";
    }
};

std::uint64_t require_seed(const ExperimentConfig& config, const std::string& section,
                           CommandIo& io, const std::string& key = "seed") {
    if (!config.has(section, key)) {
        throw std::runtime_error("config: [" + section + "] needs an explicit " + key);
    }
    const auto value = static_cast<std::uint64_t>(config.get_int(section, key, 0));
    io.note_seed(key, value);
    return value;
}

std::vector<std::string> split_csv(const std::string& joined) {
    std::vector<std::string> out;
    std::istringstream ss(joined);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (!part.empty()) out.push_back(part);
    }
    return out;
}

// ---- generate ----

void cmd_generate(const ExperimentConfig& cfg, CommandIo& io) {
    cfg.require_known_keys("generate",
                           {"pairs", "vocab_size", "doc_len_min", "doc_len_max",
                            "summary_len_min", "summary_len_max", "rate", "sentinel_pool",
                            "entity_pool", "seed", "language"});
    GenSpec spec;
    spec.num_pairs = static_cast<std::size_t>(cfg.get_int("generate", "pairs", 1000));
    spec.vocab_size = static_cast<std::size_t>(cfg.get_int("generate", "vocab_size", 60));
    spec.doc_len_min = static_cast<std::size_t>(cfg.get_int("generate", "doc_len_min", 18));
    spec.doc_len_max = static_cast<std::size_t>(cfg.get_int("generate", "doc_len_max", 32));
    spec.summary_len_min =
        static_cast<std::size_t>(cfg.get_int("generate", "summary_len_min", 5));
    spec.summary_len_max =
        static_cast<std::size_t>(cfg.get_int("generate", "summary_len_max", 9));
    spec.hallucination_rate = cfg.get_double("generate", "rate", 0.0);
    spec.sentinel_pool = static_cast<std::size_t>(cfg.get_int("generate", "sentinel_pool", 4));
    spec.entity_pool = static_cast<std::size_t>(cfg.get_int("generate", "entity_pool", 24));
    spec.language = cfg.get_or("generate", "language", "syn");
    spec.seed = require_seed(cfg, "generate", io);
    save_corpus(generate(spec), io.path("corpus.jsonl").string());
}

// ---- score ----

void cmd_score(const ExperimentConfig& cfg, CommandIo& io) {
    cfg.require_known_keys("score", {"input", "scorers", "normalize"});
    Corpus corpus = load_corpus(cfg.get("score", "input"));
    if (corpus.empty()) throw std::runtime_error("score: empty corpus");
    const auto names = split_csv(cfg.get_or("score", "scorers", "enfs,novel2,novel3,overlap1"));
    std::vector<std::unique_ptr<FaithfulnessScorer>> scorers;
    for (const std::string& n : names) scorers.push_back(make_scorer(n));
    for (SummaryPair& pair : corpus.pairs) {
        if (!pair.scores) pair.scores = ScoreVector{};
        for (const auto& scorer : scorers) {
            pair.scores->raw[scorer->name()] = scorer->score_pair(pair);
            pair.scores->higher_is_faithful[scorer->name()] = scorer->higher_is_faithful();
        }
    }
    if (cfg.get_bool("score", "normalize", true)) {
        std::vector<ScoreVector> raw;
        raw.reserve(corpus.size());
        for (const SummaryPair& pair : corpus.pairs) raw.push_back(*pair.scores);
        std::vector<ScoreVector> normalized = normalize_and_aggregate(raw);
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            corpus.pairs[i].scores = normalized[i];
        }
    }
    save_corpus(corpus, io.path("scored.jsonl").string());
}

// ---- build-silver ----

void cmd_build_silver(const ExperimentConfig& cfg, CommandIo& io) {
    cfg.require_known_keys("build-silver", {"input", "k", "translator", "target_lang",
                                            "train_prop", "val_prop", "test_prop", "seed"});
    Corpus scored = load_corpus(cfg.get("build-silver", "input"));
    const auto k = static_cast<std::size_t>(cfg.get_int("build-silver", "k", 2000));
    auto [positives, negatives] = rank_and_select(scored, k);
    auto translator = make_translator(cfg.get_or("build-silver", "translator", "identity"));
    SplitSpec split;
    split.train = cfg.get_double("build-silver", "train_prop", 0.95);
    split.val = cfg.get_double("build-silver", "val_prop", 0.025);
    split.test = cfg.get_double("build-silver", "test_prop", 0.025);
    split.seed = require_seed(cfg, "build-silver", io);
    const std::string tgt = cfg.get_or("build-silver", "target_lang", scored.language);
    SilverDataset silver = build_silver(positives, negatives, *translator, tgt, split);
    save_corpus(silver.positives, io.path("positives.jsonl").string());
    save_corpus(silver.negatives, io.path("negatives.jsonl").string());
    save_corpus(silver.splits.train, io.path("train.jsonl").string());
    save_corpus(silver.splits.val, io.path("val.jsonl").string());
    save_corpus(silver.splits.test, io.path("test.jsonl").string());
}

// ---- train-classifier ----

void cmd_train_classifier(const ExperimentConfig& cfg, CommandIo& io) {
    cfg.require_known_keys("train-classifier",
                           {"train", "val", "test", "d_model", "d_ff", "n_heads", "layers",
                            "max_len", "lr", "batch_size", "epochs", "seed"});
    SilverDataset silver;
    silver.splits.train = load_corpus(cfg.get("train-classifier", "train"));
    silver.splits.val = load_corpus(cfg.get("train-classifier", "val"));
    ClassifierConfig model_cfg;
    model_cfg.d_model = static_cast<std::size_t>(cfg.get_int("train-classifier", "d_model", 16));
    model_cfg.d_ff = static_cast<std::size_t>(cfg.get_int("train-classifier", "d_ff", 32));
    model_cfg.n_heads = static_cast<std::size_t>(cfg.get_int("train-classifier", "n_heads", 2));
    model_cfg.layers = static_cast<std::size_t>(cfg.get_int("train-classifier", "layers", 1));
    model_cfg.max_len = static_cast<std::size_t>(cfg.get_int("train-classifier", "max_len", 512));
    ClassifierTrainConfig train_cfg;
    train_cfg.lr = cfg.get_double("train-classifier", "lr", 5e-5);
    train_cfg.batch_size =
        static_cast<std::size_t>(cfg.get_int("train-classifier", "batch_size", 32));
    train_cfg.epochs = static_cast<std::size_t>(cfg.get_int("train-classifier", "epochs", 2));
    train_cfg.seed = require_seed(cfg, "train-classifier", io);

    FaithfulnessClassifier clf = train_classifier(silver, model_cfg, train_cfg);
    save_checkpoint(clf.to_checkpoint(), io.path("classifier.ckpt").string());

    if (cfg.has("train-classifier", "test")) {
        const Corpus test = load_corpus(cfg.get("train-classifier", "test"));
        const ClassifierEval eval = evaluate_classifier(clf, test);
        std::ofstream out(io.path("metrics.tsv"), std::ios::binary);
        out << "accuracy\tprecision\trecall\tf1\n";
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%.2f\t%.2f\t%.2f\t%.2f\n", eval.accuracy,
                      eval.precision, eval.recall, eval.f1);
        out << buf;
    }
}

// ---- train-summarizer ----

ModelConfig summarizer_config(const ExperimentConfig& cfg, const std::string& section,
                              std::size_t vocab_size) {
    ModelConfig mc;
    mc.vocab_size = vocab_size;
    mc.d_model = static_cast<std::size_t>(cfg.get_int(section, "d_model", 16));
    mc.d_ff = static_cast<std::size_t>(cfg.get_int(section, "d_ff", 32));
    mc.n_heads = static_cast<std::size_t>(cfg.get_int(section, "n_heads", 2));
    mc.enc_layers = static_cast<std::size_t>(cfg.get_int(section, "enc_layers", 1));
    mc.dec_layers = static_cast<std::size_t>(cfg.get_int(section, "dec_layers", 1));
    mc.max_positions = static_cast<std::size_t>(cfg.get_int(section, "max_positions", 128));
    mc.label_smoothing = cfg.get_double(section, "label_smoothing", 0.1);
    return mc;
}

TrainConfig train_config(const ExperimentConfig& cfg, const std::string& section) {
    TrainConfig tc;
    tc.lr = cfg.get_double(section, "lr", 1e-4);
    tc.batch_size = static_cast<std::size_t>(cfg.get_int(section, "batch_size", 32));
    tc.epochs = static_cast<std::size_t>(cfg.get_int(section, "epochs", 10));
    tc.warmup_steps = static_cast<std::size_t>(cfg.get_int(section, "warmup_steps", 500));
    tc.weight_decay = cfg.get_double(section, "weight_decay", 0.01);
    tc.clip_norm = cfg.get_double(section, "clip_norm", 0.1);
    tc.validate_every = static_cast<std::size_t>(cfg.get_int(section, "validate_every", 0));
    tc.val_max_len = static_cast<std::size_t>(cfg.get_int(section, "val_max_len", 24));
    tc.val_min_len = static_cast<std::size_t>(cfg.get_int(section, "val_min_len", 1));
    return tc;
}

void write_history(const fs::path& path, const std::vector<HistoryEntry>& history) {
    std::ofstream out(path, std::ios::binary);
    out << "step\tloss\tcriterion\n";
    for (const HistoryEntry& h : history) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%zu\t%.6f\t%.6f\n", h.step, h.loss, h.criterion);
        out << buf;
    }
}

void cmd_train_summarizer(const ExperimentConfig& cfg, CommandIo& io) {
    const std::string s = "train-summarizer";
    cfg.require_known_keys(
        s, {"train", "val", "weighted", "weight_provider", "classifier", "criterion",
            "d_model", "d_ff", "n_heads", "enc_layers", "dec_layers", "max_positions",
            "label_smoothing", "vocab_max", "lr", "batch_size", "epochs", "warmup_steps",
            "weight_decay", "clip_norm", "validate_every", "val_max_len", "val_min_len",
            "seed"});
    const Corpus train_split = load_corpus(cfg.get(s, "train"));
    const Corpus val_split = load_corpus(cfg.get(s, "val"));
    const Vocabulary vocab = Vocabulary::build(
        train_split, static_cast<std::size_t>(cfg.get_int(s, "vocab_max", 4096)));
    const ModelConfig mc = summarizer_config(cfg, s, vocab.size());
    TrainConfig tc = train_config(cfg, s);
    tc.seed = require_seed(cfg, s, io);
    tc.criterion = cfg.get_or(s, "criterion", "rouge1") == "faithfulness"
                       ? SelectionCriterion::faithfulness
                       : SelectionCriterion::rouge1;

    std::shared_ptr<const FaithfulnessClassifier> clf;
    if (cfg.has(s, "classifier")) {
        clf = std::make_shared<FaithfulnessClassifier>(
            FaithfulnessClassifier::from_checkpoint(load_checkpoint(cfg.get(s, "classifier"))));
    }
    std::unique_ptr<WeightProvider> weights;
    if (cfg.get_bool(s, "weighted", false)) {
        const std::string provider = cfg.get_or(s, "weight_provider", "enfs");
        if (provider == "classifier") {
            if (!clf) throw std::runtime_error("train-summarizer: classifier provider needs classifier=");
            weights = make_classifier_weight_provider(clf);
        } else {
            weights = make_weight_provider(provider);
        }
    }

    const Model model = Model::init(mc, tc.seed);
    const TrainResult result =
        train(model, train_split, val_split, vocab, tc, weights.get(), clf.get());
    save_checkpoint(result.best.to_checkpoint(vocab.tokens()),
                    io.path("summarizer.ckpt").string());
    write_history(io.path("history.tsv"), result.history);
}

// ---- finetune-expert ----

void cmd_finetune_expert(const ExperimentConfig& cfg, CommandIo& io) {
    const std::string s = "finetune-expert";
    cfg.require_known_keys(s, {"base", "corpus", "label_filter", "sample_n", "lr",
                               "batch_size", "epochs", "warmup_steps", "weight_decay",
                               "clip_norm", "seed"});
    const Checkpoint base_ckpt = load_checkpoint(cfg.get(s, "base"));
    Model base = Model::from_checkpoint(base_ckpt);
    const Vocabulary vocab = Vocabulary::from_tokens(base_ckpt.vocab_tokens);
    Corpus corpus = load_corpus(cfg.get(s, "corpus"));
    if (cfg.has(s, "label_filter")) {
        const int want = static_cast<int>(cfg.get_int(s, "label_filter", 1));
        Corpus filtered;
        filtered.language = corpus.language;
        for (const SummaryPair& pair : corpus.pairs) {
            if (pair.label && *pair.label == want) filtered.pairs.push_back(pair);
        }
        corpus = std::move(filtered);
    }
    TrainConfig tc = train_config(cfg, s);
    tc.seed = require_seed(cfg, s, io);
    if (cfg.has(s, "sample_n")) {
        const auto n = static_cast<std::size_t>(cfg.get_int(s, "sample_n", 0));
        if (n < corpus.size()) {
            Rng rng(tc.seed);
            std::vector<std::size_t> order(corpus.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            rng.shuffle(order);
            Corpus sampled;
            sampled.language = corpus.language;
            for (std::size_t i = 0; i < n; ++i) sampled.pairs.push_back(corpus.pairs[order[i]]);
            corpus = std::move(sampled);
        }
    }
    const FinetuneResult result = finetune_subset(base, corpus, vocab, tc);
    save_checkpoint(result.model.to_checkpoint(vocab.tokens()),
                    io.path("expert.ckpt").string());
    std::ofstream log(io.path("finetune.tsv"), std::ios::binary);
    log << "epoch_pairs\tsteps\n" << result.epoch_pairs << "\t" << result.steps << "\n";
}

// ---- edit ----

void cmd_edit(const ExperimentConfig& cfg, CommandIo& io) {
    cfg.require_known_keys("edit", {"mode", "base", "expert", "anti", "lambda"});
    const std::string mode = cfg.get("edit", "mode");
    const Checkpoint base = load_checkpoint(cfg.get("edit", "base"));
    const double lambda = cfg.get_double("edit", "lambda", 1.0);
    Checkpoint edited = base;
    if (mode == "tvn") {
        const Checkpoint anti = load_checkpoint(cfg.get("edit", "anti"));
        edited.params = tvn(base.params, anti.params, lambda);
    } else if (mode == "cape") {
        const Checkpoint expert = load_checkpoint(cfg.get("edit", "expert"));
        const Checkpoint anti = load_checkpoint(cfg.get("edit", "anti"));
        edited.params = cape(base.params, expert.params, anti.params, lambda);
    } else {
        throw std::runtime_error("edit: mode must be tvn or cape");
    }
    save_checkpoint(edited, io.path("edited.ckpt").string());
}

// ---- decode ----

void save_decoded(const fs::path& path, const std::vector<json>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (const json& row : rows) out << row.dump() << "\n";
}

void cmd_decode(const ExperimentConfig& cfg, CommandIo& io) {
    const std::string s = "decode";
    cfg.require_known_keys(s, {"ckpt", "input", "dexpert", "expert", "anti", "lambda",
                               "beam_size", "min_len", "max_len", "length_penalty",
                               "block_ngram", "limit"});
    const Checkpoint ckpt = load_checkpoint(cfg.get(s, "ckpt"));
    const Model model = Model::from_checkpoint(ckpt);
    const Vocabulary vocab = Vocabulary::from_tokens(ckpt.vocab_tokens);
    const Corpus input = load_corpus(cfg.get(s, "input"));

    DecodeConfig dc;
    dc.beam_size = static_cast<std::size_t>(cfg.get_int(s, "beam_size", 6));
    dc.min_len = static_cast<std::size_t>(cfg.get_int(s, "min_len", 30));
    dc.max_len = static_cast<std::size_t>(cfg.get_int(s, "max_len", 84));
    dc.length_penalty = cfg.get_double(s, "length_penalty", 0.6);
    dc.block_ngram = static_cast<std::size_t>(cfg.get_int(s, "block_ngram", 3));
    dc.lambda = cfg.get_double(s, "lambda", 0.0);
    dc.validate();

    std::unique_ptr<Model> expert;
    std::unique_ptr<Model> anti;
    if (cfg.get_bool(s, "dexpert", false)) {
        expert = std::make_unique<Model>(
            Model::from_checkpoint(load_checkpoint(cfg.get(s, "expert"))));
        anti = std::make_unique<Model>(
            Model::from_checkpoint(load_checkpoint(cfg.get(s, "anti"))));
    }

    std::size_t limit = input.size();
    if (cfg.has(s, "limit")) {
        limit = std::min(limit, static_cast<std::size_t>(cfg.get_int(s, "limit", 0)));
    }
    std::vector<json> rows;
    for (std::size_t i = 0; i < limit; ++i) {
        const SummaryPair& pair = input.pairs[i];
        TokenIds source = vocab.encode(pair.doc.tokens);
        if (source.size() > model.config().max_positions) {
            source.resize(model.config().max_positions);
        }
        const DecodeResult decoded = decode_summary(model, source, dc, expert.get(), anti.get());
        json row;
        row["id"] = pair.doc.id;
        row["tokens"] = vocab.decode(decoded.tokens);
        row["score"] = decoded.score;
        rows.push_back(std::move(row));
    }
    save_decoded(io.path("decoded.jsonl"), rows);
}

// ---- evaluate ----

std::map<std::string, TokenSeq> load_decoded(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open decoded file: " + path);
    std::map<std::string, TokenSeq> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(path, line_no, e.what());
        }
        out[j.at("id").get<std::string>()] = j.at("tokens").get<TokenSeq>();
    }
    return out;
}

void cmd_evaluate(const ExperimentConfig& cfg, CommandIo& io) {
    cfg.require_known_keys("evaluate", {"entry", "scorer", "classifier"});
    const auto entries = cfg.get_all("evaluate", "entry");
    if (entries.empty()) throw std::runtime_error("evaluate: no entry keys");

    const std::string scorer_name = cfg.get_or("evaluate", "scorer", "enfs");
    std::shared_ptr<const FaithfulnessClassifier> clf;
    std::unique_ptr<FaithfulnessScorer> scorer;
    if (scorer_name == "classifier") {
        clf = std::make_shared<FaithfulnessClassifier>(FaithfulnessClassifier::from_checkpoint(
            load_checkpoint(cfg.get("evaluate", "classifier"))));
        scorer = make_classifier_scorer(clf);
    } else {
        scorer = make_scorer(scorer_name);
    }

    std::vector<EvalRow> rows;
    for (const std::string& entry : entries) {
        const auto parts = split_csv(entry);
        if (parts.size() != 4) {
            throw std::runtime_error("evaluate: entry must be system,language,candidates,references");
        }
        const auto candidates = load_decoded(parts[2]);
        const Corpus refs = load_corpus(parts[3]);
        EvalRow row;
        row.system = parts[0];
        row.language = parts[1];
        std::size_t matched = 0;
        for (const SummaryPair& ref : refs.pairs) {
            auto it = candidates.find(ref.doc.id);
            if (it == candidates.end()) continue;
            ++matched;
            const TokenSeq& cand = it->second;
            row.rouge1 += rouge_n(cand, ref.summary, 1).f1 * 100.0;
            row.rouge2 += rouge_n(cand, ref.summary, 2).f1 * 100.0;
            row.rouge_l += rouge_l(cand, ref.summary).f1 * 100.0;
            SummaryPair hyp = ref;
            hyp.summary = cand;
            std::string text;
            for (std::size_t i = 0; i < cand.size(); ++i) {
                if (i) text += ' ';
                text += cand[i];
            }
            hyp.summary_text = text;
            double faith = scorer->score_pair(hyp);
            if (scorer_name == "classifier") faith *= 100.0;
            row.faithfulness += faith;
            row.novel_bi += cand.size() >= 2 ? novel_ngram_pct(cand, ref.doc.tokens, 2) : 0.0;
            row.novel_tri += cand.size() >= 3 ? novel_ngram_pct(cand, ref.doc.tokens, 3) : 0.0;
        }
        if (matched == 0) {
            throw std::runtime_error("evaluate: no candidate ids matched " + parts[3]);
        }
        const auto n = static_cast<double>(matched);
        row.rouge1 /= n;
        row.rouge2 /= n;
        row.rouge_l /= n;
        row.faithfulness /= n;
        row.novel_bi /= n;
        row.novel_tri /= n;
        rows.push_back(std::move(row));
    }
    emit_report(rows, scorer_name, io.path("report.tsv").string(),
                io.path("report.txt").string());
}

// ---- sanity-shuffle ----

void cmd_sanity_shuffle(const ExperimentConfig& cfg, CommandIo& io) {
    cfg.require_known_keys("sanity-shuffle", {"input", "seed"});
    const Corpus corpus = load_corpus(cfg.get("sanity-shuffle", "input"));
    if (corpus.size() < 2) throw std::runtime_error("sanity-shuffle: need >= 2 pairs");
    const std::uint64_t seed = require_seed(cfg, "sanity-shuffle", io);

    double aligned = 0.0;
    for (const SummaryPair& pair : corpus.pairs) {
        aligned += enfs_pct(pair.summary_text, pair.doc.text);
    }
    aligned /= static_cast<double>(corpus.size());

    std::vector<std::size_t> perm(corpus.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    Rng rng(seed);
    rng.shuffle(perm);
    double shuffled = 0.0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        shuffled += enfs_pct(corpus.pairs[i].summary_text, corpus.pairs[perm[i]].doc.text);
    }
    shuffled /= static_cast<double>(corpus.size());

    std::ofstream out(io.path("shuffle.tsv"), std::ios::binary);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "aligned_enfs\tshuffled_enfs\n%.4f\t%.4f\n", aligned,
                  shuffled);
    out << buf;
}

// ---- correlate ----

void cmd_correlate(const ExperimentConfig& cfg, CommandIo& io) {
    cfg.require_known_keys("correlate", {"scores", "labels"});
    // metric scores: pair_id \t value
    std::map<std::string, double> metric;
    {
        std::ifstream in(cfg.get("correlate", "scores"));
        if (!in) throw std::runtime_error("cannot open scores file");
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            const auto tab = line.find('\t');
            if (tab == std::string::npos) throw std::runtime_error("scores: expected id<TAB>value");
            metric[line.substr(0, tab)] = std::stod(line.substr(tab + 1));
        }
    }
    // human labels: pair_id \t rater_id \t label
    std::map<std::string, std::vector<int>> ratings;
    std::set<int> categories;
    {
        std::ifstream in(cfg.get("correlate", "labels"));
        if (!in) throw std::runtime_error("cannot open labels file");
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::istringstream ls(line);
            std::string id;
            std::string rater;
            int label = 0;
            if (!(ls >> id >> rater >> label)) {
                throw std::runtime_error("labels: expected id<TAB>rater<TAB>label");
            }
            ratings[id].push_back(label);
            categories.insert(label);
        }
    }
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<std::vector<int>> table;
    for (const auto& [id, labels] : ratings) {
        auto it = metric.find(id);
        if (it == metric.end()) {
            throw std::runtime_error("correlate: no metric score for pair " + id);
        }
        double mean = 0.0;
        for (int l : labels) mean += l;
        mean /= static_cast<double>(labels.size());
        xs.push_back(it->second);
        ys.push_back(mean);
        std::vector<int> counts(categories.size(), 0);
        for (int l : labels) {
            const auto idx = static_cast<std::size_t>(
                std::distance(categories.begin(), categories.find(l)));
            counts[idx] += 1;
        }
        table.push_back(std::move(counts));
    }
    const Correlation corr = correlation_stats(xs, ys);
    const double kappa = fleiss_kappa(table);
    std::ofstream out(io.path("correlation.tsv"), std::ios::binary);
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "pearson_rho\tpearson_p\tspearman_rho\tspearman_p\tfleiss_kappa\n"
                  "%.4f\t%.4f\t%.4f\t%.4f\t%.4f\n",
                  corr.pearson_rho, corr.pearson_p, corr.spearman_rho, corr.spearman_p,
                  kappa);
    out << buf;
}

}  // namespace

void run_command(const std::string& name, const ExperimentConfig& config,
                 const std::string& out_dir) {
    if (out_dir.empty()) throw std::runtime_error("run_command: --out directory required");
    fs::create_directories(out_dir);
    CommandIo io{name, config, fs::path(out_dir), {}, {}};

    if (name == "generate") cmd_generate(config, io);
    else if (name == "score") cmd_score(config, io);
    else if (name == "build-silver") cmd_build_silver(config, io);
    else if (name == "train-classifier") cmd_train_classifier(config, io);
    else if (name == "train-summarizer") cmd_train_summarizer(config, io);
    else if (name == "finetune-expert") cmd_finetune_expert(config, io);
    else if (name == "edit") cmd_edit(config, io);
    else if (name == "decode") cmd_decode(config, io);
    else if (name == "evaluate") cmd_evaluate(config, io);
    else if (name == "sanity-shuffle") cmd_sanity_shuffle(config, io);
    else if (name == "correlate") cmd_correlate(config, io);
    else throw std::runtime_error("unknown command: " + name);

    io.write_manifest();
}

}  // namespace faithsum
