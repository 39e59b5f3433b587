#include "henn/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "json.hpp"

#include "henn/error.hpp"

namespace henn {

double jaccard(const ClassSet& a, const ClassSet& b) {
    if (a.empty() || b.empty()) throw DomainError("jaccard: sets must be non-empty");
    ClassSet sa = a, sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    ClassSet inter, uni;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(inter));
    std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(uni));
    return static_cast<double>(inter.size()) / static_cast<double>(uni.size());
}

double over_js(std::span<const PredictionRecord> records) {
    if (records.empty()) throw DomainError("over_js: no records");
    double acc = 0.0;
    for (const auto& r : records) acc += jaccard(r.truth.support(), r.set_prediction);
    return acc / static_cast<double>(records.size());
}

std::optional<double> comp_js(std::span<const PredictionRecord> records) {
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& r : records) {
        if (r.set_prediction.size() <= 1) continue;
        acc += jaccard(r.truth.support(), r.set_prediction);
        ++n;
    }
    if (n == 0) return std::nullopt;
    return acc / static_cast<double>(n);
}

double accuracy(std::span<const PredictionRecord> records) {
    if (records.empty()) throw DomainError("accuracy: no records");
    std::size_t hits = 0;
    for (const auto& r : records) {
        if (r.singleton_prediction < r.truth.size() && r.truth.bits[r.singleton_prediction]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(records.size());
}

double auroc(std::span<const double> positive, std::span<const double> negative) {
    if (positive.empty() || negative.empty()) throw DomainError("auroc: both score lists must be non-empty");
    // Rank-sum with average ranks over the pooled scores.
    struct Item {
        double score;
        bool pos;
    };
    std::vector<Item> items;
    items.reserve(positive.size() + negative.size());
    for (double s : positive) items.push_back({s, true});
    for (double s : negative) items.push_back({s, false});
    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.score < b.score; });
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < items.size()) {
        std::size_t j = i;
        while (j < items.size() && items[j].score == items[i].score) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1..j
        for (std::size_t t = i; t < j; ++t)
            if (items[t].pos) rank_sum_pos += avg_rank;
        i = j;
    }
    const double np = static_cast<double>(positive.size());
    const double nn = static_cast<double>(negative.size());
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

MetricsReport evaluate(std::span<const PredictionRecord> records) {
    MetricsReport rep;
    rep.n = records.size();
    rep.over_js = over_js(records);
    rep.comp_js = comp_js(records);
    rep.accuracy = accuracy(records);
    std::vector<double> vag_pos, vag_neg, vac_pos, vac_neg, dis_pos, dis_neg;
    for (const auto& r : records) {
        if (r.set_prediction.size() > 1) ++rep.n_composite_predicted;
        const bool composite = r.truth.popcount() > 1;
        if (composite) ++rep.n_composite_truth;
        (composite ? vag_pos : vag_neg).push_back(r.vagueness);
        (composite ? vac_pos : vac_neg).push_back(r.vacuity);
        (composite ? dis_pos : dis_neg).push_back(r.dissonance);
    }
    if (!vag_pos.empty() && !vag_neg.empty()) {
        rep.auroc_vagueness = auroc(vag_pos, vag_neg);
        rep.auroc_vacuity = auroc(vac_pos, vac_neg);
        rep.auroc_dissonance = auroc(dis_pos, dis_neg);
    }
    return rep;
}

namespace {

std::string fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string fixed_or_na(const std::optional<double>& v) { return v ? fixed(*v) : "n/a"; }

}  // namespace

std::string format_report(const MetricsReport& r) {
    std::string out;
    out += "samples: " + std::to_string(r.n) + "\n";
    out += "composite_truth: " + std::to_string(r.n_composite_truth) + "\n";
    out += "composite_predicted: " + std::to_string(r.n_composite_predicted) + "\n";
    out += "over_js: " + fixed(r.over_js) + "\n";
    out += "comp_js: " + fixed(r.comp_js.value_or(0.0)) + "\n";
    out += "comp_js_defined: " + std::string(r.comp_js ? "true" : "false") + "\n";
    out += "accuracy: " + fixed(r.accuracy) + "\n";
    out += "auroc_vagueness: " + fixed_or_na(r.auroc_vagueness) + "\n";
    out += "auroc_dissonance: " + fixed_or_na(r.auroc_dissonance) + "\n";
    out += "auroc_vacuity: " + fixed_or_na(r.auroc_vacuity) + "\n";
    return out;
}

std::string report_to_json(const MetricsReport& r) {
    nlohmann::json doc;
    doc["samples"] = r.n;
    doc["composite_truth"] = r.n_composite_truth;
    doc["composite_predicted"] = r.n_composite_predicted;
    doc["over_js"] = r.over_js;
    doc["comp_js"] = r.comp_js.value_or(0.0);
    doc["comp_js_defined"] = r.comp_js.has_value();
    doc["accuracy"] = r.accuracy;
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    doc["auroc_vagueness"] = opt(r.auroc_vagueness);
    doc["auroc_dissonance"] = opt(r.auroc_dissonance);
    doc["auroc_vacuity"] = opt(r.auroc_vacuity);
    return doc.dump(1) + "\n";
}

}  // namespace henn
