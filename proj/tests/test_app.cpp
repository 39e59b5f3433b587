#include <fstream>
#include <sstream>

#include "doctest.h"
#include "test_support.hpp"

#include "json.hpp"

#include "henn/app.hpp"
#include "henn/error.hpp"

using namespace henn;
using testing::TempDir;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

RunConfig small_config(const std::filesystem::path& out, const std::string& extra = "") {
    nlohmann::json j = nlohmann::json::parse(R"({"n_train": 300, "n_val": 100, "n_test": 100, "epochs": 3})");
    if (!extra.empty()) j.update(nlohmann::json::parse(extra));
    j["out"] = out.string();
    return parse_run_config(j.dump());
}

std::string run(const std::string& cmd, const RunConfig& cfg) {
    std::string text;
    run_command(cmd, cfg, [&](std::string_view s) { text += s; });
    return text;
}

}  // namespace

TEST_CASE("config defaults and derived paths") {
    const RunConfig c = parse_run_config("{}");
    CHECK(c.seed == 1);
    CHECK(c.train.lambda == 0.1);
    CHECK(c.train.epochs == 100);
    CHECK(c.data.partition->num_classes() == 6);
    CHECK(c.checkpoint_path() == std::filesystem::path("run") / "model.json");
    CHECK(c.data_dir_path() == std::filesystem::path("run") / "data");

    const RunConfig d = parse_run_config(R"({"seed": 7, "out": "x", "report": "r.txt"})");
    CHECK(d.train.seed == 7);
    CHECK(d.data.seed == 7);
    CHECK(d.report_path() == "r.txt");
    CHECK(d.loss_log_path() == std::filesystem::path("x") / "loss_log.tsv");
}

TEST_CASE("config rejects bad input") {
    CHECK_THROWS_AS(parse_run_config("{"), ParseError);
    CHECK_THROWS_AS(parse_run_config("[]"), ValidationError);
    CHECK_THROWS_AS(parse_run_config(R"({"lamda": 0.1})"), ValidationError);
    CHECK_THROWS_AS(parse_run_config(R"({"lambda": -1})"), ValidationError);
    CHECK_THROWS_AS(parse_run_config(R"({"seed": -1})"), ValidationError);
    CHECK_THROWS_AS(parse_run_config(R"({"reg_mode": "l2"})"), ValidationError);
    CHECK_THROWS_AS(parse_run_config(R"({"k": 4})"), ValidationError);
    CHECK_THROWS_AS(parse_run_config(R"({"groups": [[0, 1], [1]]})"), ValidationError);
    CHECK_THROWS_AS(parse_run_config(R"({"composite_ratio": 1.5})"), ValidationError);
    CHECK_THROWS_AS(parse_run_config(R"({"eval_split": "dev"})"), ValidationError);
    CHECK_THROWS_AS(parse_run_config(R"({"means": [[0, 0]]})"), ValidationError);
}

TEST_CASE("config with explicit groups infers k") {
    const RunConfig c = parse_run_config(R"({"groups": [[0], [1, 2]], "dim": 3})");
    CHECK(c.data.partition->num_classes() == 3);
    CHECK(c.data.partition->num_composite() == 1);
    const RunConfig again = parse_run_config(run_config_to_json(c));
    CHECK(*again.data.partition == *c.data.partition);
    CHECK(again.data.dim == 3);
}

TEST_CASE("gen-data writes deterministic splits") {
    TempDir a("app-a"), b("app-b");
    const std::string text = run("gen-data", small_config(a.path));
    CHECK(text.find("train: n=300") != std::string::npos);
    CHECK(text.find("test: n=100") != std::string::npos);
    run("gen-data", small_config(b.path));
    for (const char* f : {"train.jsonl", "val.jsonl", "test.jsonl", "domain.json"})
        CHECK(slurp(a.path / "data" / f) == slurp(b.path / "data" / f));

    TempDir c("app-c");
    const std::string none = run("gen-data", small_config(c.path, R"({"composite_ratio": 0})"));
    CHECK(none.find("train: n=300 composite=0 ") != std::string::npos);
}

TEST_CASE("train, eval and uncertainty") {
    TempDir dir("app-run");
    const RunConfig cfg = small_config(dir.path);
    run("gen-data", cfg);
    const std::string log = run("train", cfg);
    CHECK(log.find("best epoch") != std::string::npos);
    CHECK(std::filesystem::exists(cfg.checkpoint_path()));
    const std::string tsv = slurp(cfg.loss_log_path());
    CHECK(tsv.rfind("epoch\tupce\treg\ttotal\tval_set_accuracy\n", 0) == 0);
    CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 4);

    run("eval", cfg);
    const auto report = nlohmann::json::parse(slurp(dir.path / "report.json"));
    CHECK(report["samples"] == 100);
    for (const char* key : {"over_js", "accuracy"}) {
        const double v = report[key].get<double>();
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    CHECK(slurp(cfg.report_path()).find("over_js") != std::string::npos);

    const std::string u = run("uncertainty", cfg);
    CHECK(u.find("nonzero_composite_ratio: ") != std::string::npos);
    std::ifstream is(cfg.uncertainty_path());
    std::string line;
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        const auto rec = nlohmann::json::parse(line);
        CHECK(rec["evidence"].size() == 8);
        CHECK(rec["vacuity"].get<double>() > 0.0);
        ++rows;
    }
    CHECK(rows == 100);
}

TEST_CASE("lambda changes the trained model") {
    TempDir a("app-l0"), b("app-l1");
    const RunConfig c0 = small_config(a.path, R"({"lambda": 0, "epochs": 2})");
    const RunConfig c1 = small_config(b.path, R"({"lambda": 0.1, "epochs": 2})");
    run("gen-data", c0);
    run("gen-data", c1);
    run("train", c0);
    run("train", c1);
    CHECK(slurp(c0.checkpoint_path()) != slurp(c1.checkpoint_path()));
}

TEST_CASE("eval rejects a checkpoint for another domain") {
    TempDir a("app-k3"), b("app-k6");
    const RunConfig k3 = small_config(a.path, R"({"groups": [[0], [1, 2]], "epochs": 1})");
    run("gen-data", k3);
    run("train", k3);
    RunConfig k6 = small_config(b.path);
    run("gen-data", k6);
    k6.checkpoint = k3.checkpoint_path();
    CHECK_THROWS_AS(run("eval", k6), ValidationError);
}

TEST_CASE("missing inputs are I/O errors") {
    TempDir dir("app-missing");
    CHECK_THROWS_AS(run("train", small_config(dir.path)), IoError);
    CHECK_THROWS_AS(run("bogus", small_config(dir.path)), ValidationError);
}
