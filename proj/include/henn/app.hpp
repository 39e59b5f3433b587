#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "henn/data.hpp"
#include "henn/net.hpp"

namespace henn {

/// Everything a command needs. Parsed from one flat JSON object; every key is
/// optional and unknown keys are rejected.
///
/// Paths left unset are derived from `out`:
///   data_dir        <out>/data        (train/val/test .jsonl + domain.json)
///   checkpoint      <out>/model.json
///   report          <out>/report.txt  (a .json twin is written alongside)
///   loss_log        <out>/loss_log.tsv
///   uncertainty_out <out>/uncertainty.jsonl
struct RunConfig {
    std::uint64_t seed = 1;
    TrainConfig train;
    DatasetSpec data = default_dataset_spec();

    std::filesystem::path out = "run";
    std::optional<std::filesystem::path> data_dir;
    std::optional<std::filesystem::path> checkpoint;
    std::optional<std::filesystem::path> report;
    std::optional<std::filesystem::path> loss_log;
    std::optional<std::filesystem::path> uncertainty_out;

    /// Split read by eval and uncertainty: "train", "val" or "test".
    std::string eval_split = "test";
    /// Non-zero threshold on mean evidence in the uncertainty export.
    double gamma = 1e-4;
    std::size_t mc_samples = 200'000;
    std::size_t verify_cases = 20;

    std::filesystem::path data_dir_path() const;
    std::filesystem::path checkpoint_path() const;
    std::filesystem::path report_path() const;
    std::filesystem::path loss_log_path() const;
    std::filesystem::path uncertainty_path() const;
};

/// Throws ParseError on malformed JSON and ValidationError on unknown keys,
/// wrong types or invalid values.
RunConfig parse_run_config(std::string_view json_text);
/// Canonical JSON of a config (all keys, resolved paths).
std::string run_config_to_json(const RunConfig& config);

using OutputSink = std::function<void(std::string_view)>;

/// Runs "gen-data", "train", "eval", "uncertainty" or "verify". Returns true on
/// success and false when verify reports a failed check; errors throw.
bool run_command(std::string_view command, const RunConfig& config, const OutputSink& sink);

}  // namespace henn
