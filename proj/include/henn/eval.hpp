#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "henn/hyperdomain.hpp"

namespace henn {

using ClassSet = std::vector<ClassIndex>;  // ascending, non-empty

struct PredictionRecord {
    LabelVector truth;
    ClassSet set_prediction;
    ClassIndex singleton_prediction = 0;
    double vagueness = 0.0;
    double vacuity = 0.0;
    double dissonance = 0.0;
};

/// |a ∩ b| / |a ∪ b|. Both sets must be non-empty.
double jaccard(const ClassSet& a, const ClassSet& b);

/// Mean Jaccard over all records.
double over_js(std::span<const PredictionRecord> records);

/// Mean Jaccard over records whose set prediction has more than one class;
/// nullopt when there are none.
std::optional<double> comp_js(std::span<const PredictionRecord> records);

/// Fraction of records whose singleton prediction lies in the truth set.
double accuracy(std::span<const PredictionRecord> records);

/// Mann-Whitney estimate of P(pos > neg) + P(pos == neg) / 2.
double auroc(std::span<const double> positive, std::span<const double> negative);

struct MetricsReport {
    std::size_t n = 0;
    std::size_t n_composite_truth = 0;
    std::size_t n_composite_predicted = 0;
    double over_js = 0.0;
    std::optional<double> comp_js;
    double accuracy = 0.0;
    /// Composite-labeled samples are the positives; nullopt if either class of
    /// sample is absent.
    std::optional<double> auroc_vagueness;
    std::optional<double> auroc_vacuity;
    std::optional<double> auroc_dissonance;
};

MetricsReport evaluate(std::span<const PredictionRecord> records);

/// Flat "key: value" block; undefined CompJS prints as 0.0 with a flag line.
std::string format_report(const MetricsReport& report);
std::string report_to_json(const MetricsReport& report);

}  // namespace henn
