#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "henn/henn.h"

namespace {

void to_stdout(const char* text, size_t len, void*) {
    std::fwrite(text, 1, len, stdout);
    std::fflush(stdout);
}

int exit_code(henn_status s) {
    if (s == HENN_OK) return 0;
    if (s == HENN_ERR_IO) return 2;
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hyper-evidential classifier with composite-set labels"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> lambda;
    std::optional<std::string> reg_mode;
    std::optional<std::string> out_dir;

    const char* commands[][2] = {
        {"gen-data", "Generate the synthetic train/val/test splits and domain file"},
        {"train", "Train the evidence network and write the best checkpoint"},
        {"eval", "Evaluate a checkpoint and write the metrics report"},
        {"uncertainty", "Export per-sample uncertainty and evidence records"},
        {"verify", "Run the analytic-vs-oracle verification suite"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--seed", seed, "Random seed");
        sub->add_option("--lambda", lambda, "Regularizer weight");
        sub->add_option("--reg-mode", reg_mode, "Regularizer: kl, entropy, dirichlet-kl or none")
            ->check(CLI::IsMember({"kl", "entropy", "dirichlet-kl", "none"}));
        sub->add_option("--out", out_dir, "Output directory");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    nlohmann::json config = nlohmann::json::object();
    if (!config_path.empty()) {
        std::ifstream is(config_path);
        if (!is) {
            std::cerr << "error: cannot read config " << config_path << "\n";
            return 2;
        }
        std::stringstream ss;
        ss << is.rdbuf();
        try {
            config = nlohmann::json::parse(ss.str());
        } catch (const nlohmann::json::parse_error& e) {
            std::cerr << "error: " << config_path << ": " << e.what() << "\n";
            return 1;
        }
        if (!config.is_object()) {
            std::cerr << "error: " << config_path << ": config must be a JSON object\n";
            return 1;
        }
    }
    if (seed) config["seed"] = *seed;
    if (lambda) config["lambda"] = *lambda;
    if (reg_mode) config["reg_mode"] = *reg_mode;
    if (out_dir) config["out"] = *out_dir;

    const std::string command = app.get_subcommands().front()->get_name();
    const henn_status s = henn_run(command.c_str(), config.dump().c_str(), to_stdout, nullptr);
    if (s != HENN_OK && s != HENN_ERR_CHECK_FAILED)
        std::cerr << "error (" << henn_status_name(s) << "): " << henn_last_error_message() << "\n";
    else if (s == HENN_ERR_CHECK_FAILED)
        std::cerr << "verify: " << henn_last_error_message() << "\n";
    return exit_code(s);
}
