#include "henn/app.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "henn/error.hpp"
#include "henn/eval.hpp"
#include "henn/oracle.hpp"

namespace henn {

using nlohmann::json;
namespace fs = std::filesystem;

fs::path RunConfig::data_dir_path() const { return data_dir.value_or(out / "data"); }
fs::path RunConfig::checkpoint_path() const { return checkpoint.value_or(out / "model.json"); }
fs::path RunConfig::report_path() const { return report.value_or(out / "report.txt"); }
fs::path RunConfig::loss_log_path() const { return loss_log.value_or(out / "loss_log.tsv"); }
fs::path RunConfig::uncertainty_path() const { return uncertainty_out.value_or(out / "uncertainty.jsonl"); }

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "seed",        "out",          "data_dir",   "checkpoint",  "report",         "loss_log",
        "uncertainty_out", "learning_rate", "lambda", "epochs",    "batch_size",     "hidden",
        "activation",  "reg_mode",     "k",          "groups",      "dim",            "radius",
        "within_std",  "blur_scale",   "composite_ratio", "n_train", "n_val",        "n_test",
        "means",       "gamma",        "mc_samples", "verify_cases", "eval_split",
    };
    return keys;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& why) {
    throw ValidationError("config key '" + key + "': " + why);
}

std::uint64_t get_uint(const json& doc, const std::string& key) {
    const json& v = doc.at(key);
    if (!v.is_number_unsigned()) bad_value(key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

double get_real(const json& doc, const std::string& key) {
    const json& v = doc.at(key);
    if (!v.is_number()) bad_value(key, "expected a number");
    return v.get<double>();
}

std::string get_string(const json& doc, const std::string& key) {
    const json& v = doc.at(key);
    if (!v.is_string()) bad_value(key, "expected a string");
    auto s = v.get<std::string>();
    if (s.empty()) bad_value(key, "must not be empty");
    return s;
}

template <class T>
std::vector<std::vector<T>> get_nested(const json& doc, const std::string& key) {
    const json& v = doc.at(key);
    if (!v.is_array()) bad_value(key, "expected an array of arrays");
    std::vector<std::vector<T>> out;
    for (const auto& row : v) {
        if (!row.is_array()) bad_value(key, "expected an array of arrays");
        std::vector<T> r;
        for (const auto& x : row) {
            if constexpr (std::is_same_v<T, double>) {
                if (!x.is_number()) bad_value(key, "expected numbers");
            } else {
                if (!x.is_number_unsigned()) bad_value(key, "expected non-negative integers");
            }
            r.push_back(x.get<T>());
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ValidationError("config must be a JSON object");
    for (const auto& [key, _] : doc.items())
        if (!known_keys().count(key)) throw ValidationError("unknown config key '" + key + "'");

    RunConfig cfg;
    auto has = [&](const char* key) { return doc.contains(key); };

    if (has("seed")) cfg.seed = get_uint(doc, "seed");
    cfg.train.seed = cfg.seed;
    cfg.data.seed = cfg.seed;

    if (has("out")) cfg.out = get_string(doc, "out");
    if (has("data_dir")) cfg.data_dir = get_string(doc, "data_dir");
    if (has("checkpoint")) cfg.checkpoint = get_string(doc, "checkpoint");
    if (has("report")) cfg.report = get_string(doc, "report");
    if (has("loss_log")) cfg.loss_log = get_string(doc, "loss_log");
    if (has("uncertainty_out")) cfg.uncertainty_out = get_string(doc, "uncertainty_out");

    if (has("learning_rate")) cfg.train.learning_rate = get_real(doc, "learning_rate");
    if (!(cfg.train.learning_rate > 0.0)) bad_value("learning_rate", "must be > 0");
    if (has("lambda")) cfg.train.lambda = get_real(doc, "lambda");
    if (!(cfg.train.lambda >= 0.0)) bad_value("lambda", "must be >= 0");
    if (has("epochs")) cfg.train.epochs = get_uint(doc, "epochs");
    if (cfg.train.epochs == 0) bad_value("epochs", "must be >= 1");
    if (has("batch_size")) cfg.train.batch_size = get_uint(doc, "batch_size");
    if (cfg.train.batch_size == 0) bad_value("batch_size", "must be >= 1");
    if (has("hidden")) {
        const json& h = doc.at("hidden");
        if (!h.is_array()) bad_value("hidden", "expected an array of layer widths");
        cfg.train.hidden.clear();
        for (const auto& w : h) {
            if (!w.is_number_unsigned() || w.get<std::uint64_t>() == 0) bad_value("hidden", "widths must be >= 1");
            cfg.train.hidden.push_back(w.get<std::size_t>());
        }
    }
    if (has("activation")) {
        auto a = parse_activation(get_string(doc, "activation"));
        if (!a) bad_value("activation", "expected relu or tanh");
        cfg.train.activation = *a;
    }
    if (has("reg_mode")) {
        auto m = parse_reg_mode(get_string(doc, "reg_mode"));
        if (!m) bad_value("reg_mode", "expected kl, entropy, dirichlet-kl or none");
        cfg.train.reg_mode = *m;
    }

    if (has("groups")) {
        auto groups = get_nested<ClassIndex>(doc, "groups");
        std::size_t k = 0;
        for (const auto& g : groups) k += g.size();
        if (has("k")) k = get_uint(doc, "k");
        if (auto err = Partition::validate(k, groups)) bad_value("groups", *err);
        cfg.data.partition = std::make_shared<const Partition>(k, std::move(groups));
    } else if (has("k")) {
        bad_value("k", "'groups' must be given together with 'k'");
    }
    if (has("dim")) cfg.data.dim = get_uint(doc, "dim");
    if (cfg.data.dim == 0) bad_value("dim", "must be >= 1");
    if (has("radius")) cfg.data.radius = get_real(doc, "radius");
    if (has("within_std")) cfg.data.within_std = get_real(doc, "within_std");
    if (!(cfg.data.within_std > 0.0)) bad_value("within_std", "must be > 0");
    if (has("blur_scale")) cfg.data.blur_scale = get_real(doc, "blur_scale");
    if (!(cfg.data.blur_scale >= 1.0)) bad_value("blur_scale", "must be >= 1");
    if (has("composite_ratio")) cfg.data.composite_ratio = get_real(doc, "composite_ratio");
    if (!(cfg.data.composite_ratio >= 0.0 && cfg.data.composite_ratio <= 1.0))
        bad_value("composite_ratio", "must lie in [0, 1]");
    if (has("n_train")) cfg.data.n_train = get_uint(doc, "n_train");
    if (has("n_val")) cfg.data.n_val = get_uint(doc, "n_val");
    if (has("n_test")) cfg.data.n_test = get_uint(doc, "n_test");
    if (has("means")) cfg.data.means = get_nested<double>(doc, "means");
    if (!cfg.data.means.empty()) {
        if (cfg.data.means.size() != cfg.data.partition->num_classes()) bad_value("means", "need one row per class");
        for (const auto& m : cfg.data.means)
            if (m.size() != cfg.data.dim) bad_value("means", "each row must have 'dim' entries");
    } else if (cfg.data.dim < 2) {
        bad_value("dim", "the default circle layout needs dim >= 2; give 'means' explicitly");
    }

    if (has("gamma")) cfg.gamma = get_real(doc, "gamma");
    if (!(cfg.gamma >= 0.0)) bad_value("gamma", "must be >= 0");
    if (has("mc_samples")) cfg.mc_samples = get_uint(doc, "mc_samples");
    if (cfg.mc_samples < 1000) bad_value("mc_samples", "must be >= 1000");
    if (has("verify_cases")) cfg.verify_cases = get_uint(doc, "verify_cases");
    if (has("eval_split")) cfg.eval_split = get_string(doc, "eval_split");
    if (cfg.eval_split != "train" && cfg.eval_split != "val" && cfg.eval_split != "test")
        bad_value("eval_split", "expected train, val or test");
    return cfg;
}

std::string run_config_to_json(const RunConfig& c) {
    json doc;
    doc["seed"] = c.seed;
    doc["out"] = c.out.string();
    doc["data_dir"] = c.data_dir_path().string();
    doc["checkpoint"] = c.checkpoint_path().string();
    doc["report"] = c.report_path().string();
    doc["loss_log"] = c.loss_log_path().string();
    doc["uncertainty_out"] = c.uncertainty_path().string();
    doc["learning_rate"] = c.train.learning_rate;
    doc["lambda"] = c.train.lambda;
    doc["epochs"] = c.train.epochs;
    doc["batch_size"] = c.train.batch_size;
    doc["hidden"] = c.train.hidden;
    doc["activation"] = std::string(to_string(c.train.activation));
    doc["reg_mode"] = std::string(to_string(c.train.reg_mode));
    doc["k"] = c.data.partition->num_classes();
    doc["groups"] = c.data.partition->groups();
    doc["dim"] = c.data.dim;
    doc["radius"] = c.data.radius;
    doc["within_std"] = c.data.within_std;
    doc["blur_scale"] = c.data.blur_scale;
    doc["composite_ratio"] = c.data.composite_ratio;
    doc["n_train"] = c.data.n_train;
    doc["n_val"] = c.data.n_val;
    doc["n_test"] = c.data.n_test;
    doc["means"] = c.data.means;
    doc["gamma"] = c.gamma;
    doc["mc_samples"] = c.mc_samples;
    doc["verify_cases"] = c.verify_cases;
    doc["eval_split"] = c.eval_split;
    return doc.dump(2);
}

namespace {

struct Emitter {
    const OutputSink& sink;

    void line(const std::string& s) const {
        if (sink) sink(s + "\n");
    }
    void block(const std::string& s) const {
        if (sink) sink(s);
    }
};

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

void ensure_parent(const fs::path& file) {
    const auto parent = file.parent_path();
    if (parent.empty()) return;
    std::error_code ec;
    fs::create_directories(parent, ec);
    if (ec) throw IoError("cannot create directory " + parent.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
    ensure_parent(path);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << text;
    if (!os) throw IoError("write failed for " + path.string());
}

std::vector<Sample> read_split(const RunConfig& cfg, const std::string& split, const Partition& partition) {
    return read_jsonl(cfg.data_dir_path() / (split + ".jsonl"), partition);
}

std::string count_line(const std::string& name, const std::vector<Sample>& s) {
    std::size_t composite = 0;
    for (const auto& x : s) composite += x.label.popcount() > 1;
    return name + ": n=" + std::to_string(s.size()) + " composite=" + std::to_string(composite) +
           " singleton=" + std::to_string(s.size() - composite);
}

PredictionRecord record_for(const Prediction& p, const LabelVector& truth) {
    PredictionRecord r;
    r.truth = truth;
    r.set_prediction = p.set_prediction.members;
    r.singleton_prediction = p.singleton_prediction;
    r.vagueness = p.vagueness;
    r.vacuity = p.vacuity;
    r.dissonance = p.dissonance;
    return r;
}

// Fraction of samples whose predicted focal set equals the labeled set.
double set_accuracy(const Model& model, const std::vector<Sample>& data) {
    if (data.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& s : data) hits += predict(model.params, s.features, model.partition).set_prediction.members ==
                                       s.label.support();
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

Model load_compatible_model(const RunConfig& cfg, std::shared_ptr<const Partition>& domain) {
    domain = read_domain(cfg.data_dir_path() / "domain.json");
    Model model = load_checkpoint(cfg.checkpoint_path());
    if (!(*model.partition == *domain))
        throw ValidationError("checkpoint partition does not match the data domain in " +
                              cfg.data_dir_path().string());
    return model;
}

void cmd_gen_data(const RunConfig& cfg, const Emitter& out) {
    const DatasetSplits splits = generate(cfg.data);
    const fs::path dir = cfg.data_dir_path();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
    write_jsonl(splits.train, dir / "train.jsonl");
    write_jsonl(splits.val, dir / "val.jsonl");
    write_jsonl(splits.test, dir / "test.jsonl");
    write_domain(*cfg.data.partition, dir / "domain.json");
    out.line("wrote " + dir.string());
    out.line(count_line("train", splits.train));
    out.line(count_line("val", splits.val));
    out.line(count_line("test", splits.test));
}

void cmd_train(const RunConfig& cfg, const Emitter& out) {
    const auto partition = read_domain(cfg.data_dir_path() / "domain.json");
    const auto train = read_split(cfg, "train", *partition);
    const auto val = read_split(cfg, "val", *partition);
    if (train.empty()) throw ValidationError("training split is empty");
    const std::size_t dim = train.front().features.size();
    for (const auto* split : {&train, &val})
        for (const auto& s : *split)
            if (s.features.size() != dim) throw ValidationError("samples have inconsistent feature dimensions");

    Model model = make_model(dim, partition, cfg.train);
    AdamState adam(model.params);
    MlpParams best = model.params;
    double best_acc = -1.0;
    std::size_t best_epoch = 0;

    std::ostringstream log;
    log << "epoch\tupce\treg\ttotal\tval_set_accuracy\n";
    for (std::size_t epoch = 0; epoch < cfg.train.epochs; ++epoch) {
        const LossBreakdown loss = train_epoch(model.params, adam, train, partition, cfg.train, epoch);
        const double acc = set_accuracy(model, val);
        char row[160];
        std::snprintf(row, sizeof row, "%zu\t%.9g\t%.9g\t%.9g\t%.6f\n", epoch + 1, loss.upce, loss.reg, loss.total,
                      acc);
        log << row;
        if (acc > best_acc) {
            best_acc = acc;
            best = model.params;
            best_epoch = epoch + 1;
        }
        out.block(std::string("epoch ") + row);
    }
    model.params = best;
    ensure_parent(cfg.checkpoint_path());
    save_checkpoint(model, cfg.checkpoint_path());
    write_text(cfg.loss_log_path(), log.str());
    out.line("best epoch: " + std::to_string(best_epoch) + fmt(" (val set accuracy %.6f)", best_acc));
    out.line("checkpoint: " + cfg.checkpoint_path().string());
    out.line("loss log: " + cfg.loss_log_path().string());
}

fs::path json_twin(const fs::path& report) {
    fs::path twin = report;
    if (twin.extension() == ".json") return twin += ".json";
    return twin.replace_extension(".json");
}

void cmd_eval(const RunConfig& cfg, const Emitter& out) {
    std::shared_ptr<const Partition> domain;
    const Model model = load_compatible_model(cfg, domain);
    const auto data = read_split(cfg, cfg.eval_split, *domain);
    std::vector<PredictionRecord> records;
    records.reserve(data.size());
    for (const auto& s : data) records.push_back(record_for(predict(model.params, s.features, model.partition), s.label));
    const MetricsReport report = evaluate(records);
    const std::string text = format_report(report);
    write_text(cfg.report_path(), text);
    write_text(json_twin(cfg.report_path()), report_to_json(report));
    out.block(text);
}

void cmd_uncertainty(const RunConfig& cfg, const Emitter& out) {
    std::shared_ptr<const Partition> domain;
    const Model model = load_compatible_model(cfg, domain);
    const auto data = read_split(cfg, cfg.eval_split, *domain);
    const std::size_t k = domain->num_classes();
    const std::size_t m = domain->num_composite();

    std::ostringstream os;
    std::size_t nz_single = 0, nz_comp = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Prediction p = predict(model.params, data[i].features, model.partition);
        double mean_single = 0.0, mean_comp = 0.0;
        for (std::size_t s = 0; s < k; ++s) mean_single += p.evidence[s] / static_cast<double>(k);
        for (std::size_t s = k; s < k + m; ++s) mean_comp += p.evidence[s] / static_cast<double>(m);
        const bool fs = mean_single >= cfg.gamma;
        const bool fc = m > 0 && mean_comp >= cfg.gamma;
        nz_single += fs;
        nz_comp += fc;

        json rec;
        rec["index"] = i;
        rec["label"] = data[i].label.support();
        rec["evidence"] = p.evidence;
        rec["vacuity"] = p.vacuity;
        rec["vagueness"] = p.vagueness;
        rec["dissonance"] = p.dissonance;
        rec["set_prediction"] = p.set_prediction.members;
        rec["singleton_prediction"] = p.singleton_prediction;
        rec["nonzero_singleton_evidence"] = fs;
        rec["nonzero_composite_evidence"] = m > 0 ? json(fc) : json(nullptr);
        os << rec.dump() << '\n';
    }
    write_text(cfg.uncertainty_path(), os.str());
    const double n = data.empty() ? 1.0 : static_cast<double>(data.size());
    out.line("samples: " + std::to_string(data.size()));
    out.line(fmt("gamma: %g", cfg.gamma));
    out.line(fmt("nonzero_singleton_ratio: %.6f", static_cast<double>(nz_single) / n));
    if (m > 0)
        out.line(fmt("nonzero_composite_ratio: %.6f", static_cast<double>(nz_comp) / n));
    else
        out.line("nonzero_composite_ratio: n/a (no composite groups)");
    out.line("wrote " + cfg.uncertainty_path().string());
}

bool cmd_verify(const RunConfig& cfg, const Emitter& out) {
    oracle::VerifyOptions opt;
    opt.mc_samples = cfg.mc_samples;
    opt.mc_cases = cfg.verify_cases;
    const auto checks = oracle::run_verify_suite(opt);
    out.block(oracle::format_checks(checks));
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

}  // namespace

bool run_command(std::string_view command, const RunConfig& config, const OutputSink& sink) {
    const Emitter out{sink};
    if (command == "gen-data") {
        cmd_gen_data(config, out);
    } else if (command == "train") {
        cmd_train(config, out);
    } else if (command == "eval") {
        cmd_eval(config, out);
    } else if (command == "uncertainty") {
        cmd_uncertainty(config, out);
    } else if (command == "verify") {
        return cmd_verify(config, out);
    } else {
        throw ValidationError("unknown command '" + std::string(command) + "'");
    }
    return true;
}

}  // namespace henn
