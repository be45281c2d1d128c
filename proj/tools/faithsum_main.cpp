#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "faithsum/commands.hpp"
#include "faithsum/config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"silver faithfulness datasets, classifiers and summarizer training"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string seed;

    const std::vector<std::string> commands = {
        "generate",        "score",  "build-silver", "train-classifier",
        "train-summarizer", "finetune-expert", "edit", "decode",
        "evaluate",        "sanity-shuffle", "correlate"};

    bool flag_weighted = false;
    bool flag_dexpert = false;
    bool flag_tvn = false;
    bool flag_cape = false;

    for (const std::string& name : commands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "experiment config file");
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_option("--seed", seed, "seed override for this command");
        if (name == "train-summarizer") {
            sub->add_flag("--weighted", flag_weighted, "enable faithfulness-weighted loss");
        }
        if (name == "decode") {
            sub->add_flag("--dexpert", flag_dexpert, "fuse expert/anti-expert logits");
        }
        if (name == "edit") {
            sub->add_flag("--tvn", flag_tvn, "task vector negation");
            sub->add_flag("--cape", flag_cape, "contrastive parameter ensembling");
        }
    }

    CLI11_PARSE(app, argc, argv);
    const std::string name = app.get_subcommands().front()->get_name();

    try {
        faithsum::ExperimentConfig config =
            config_path.empty() ? faithsum::ExperimentConfig{}
                                : faithsum::ExperimentConfig::parse_file(config_path);
        if (!seed.empty()) config.set(name, "seed", seed);
        if (flag_weighted) config.set(name, "weighted", "1");
        if (flag_dexpert) config.set(name, "dexpert", "1");
        if (flag_tvn && flag_cape) throw std::runtime_error("edit: pick one of --tvn/--cape");
        if (flag_tvn) config.set(name, "mode", "tvn");
        if (flag_cape) config.set(name, "mode", "cape");
        faithsum::run_command(name, config, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "faithsum " << name << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}
