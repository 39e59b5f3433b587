#include "henn/data.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "henn/error.hpp"
#include "henn/rng.hpp"

namespace henn {

using nlohmann::json;

std::shared_ptr<const Partition> default_partition() {
    return std::make_shared<const Partition>(6, std::vector<std::vector<ClassIndex>>{{0, 1}, {2, 3}, {4}, {5}});
}

DatasetSpec default_dataset_spec() {
    DatasetSpec spec;
    spec.partition = default_partition();
    return spec;
}

std::vector<std::vector<double>> class_means(const DatasetSpec& spec) {
    if (!spec.partition) throw DomainError("dataset spec has no partition");
    const std::size_t k = spec.partition->num_classes();
    if (!spec.means.empty()) {
        if (spec.means.size() != k) throw DomainError("dataset spec: need one mean per class");
        for (const auto& m : spec.means)
            if (m.size() != spec.dim) throw DomainError("dataset spec: mean has wrong dimension");
        return spec.means;
    }
    if (spec.dim < 2) throw DomainError("dataset spec: circle layout needs dim >= 2");
    std::vector<std::vector<double>> means(k, std::vector<double>(spec.dim, 0.0));
    for (std::size_t c = 0; c < k; ++c) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(k);
        means[c][0] = spec.radius * std::cos(angle);
        means[c][1] = spec.radius * std::sin(angle);
    }
    return means;
}

namespace {

void check_spec(const DatasetSpec& spec) {
    if (!spec.partition || spec.partition->num_classes() == 0) throw DomainError("dataset spec has zero classes");
    if (spec.dim == 0) throw DomainError("dataset spec: feature dimension must be >= 1");
    if (!(spec.composite_ratio >= 0.0 && spec.composite_ratio <= 1.0))
        throw DomainError("dataset spec: composite ratio must lie in [0, 1]");
    if (!(spec.blur_scale >= 1.0)) throw DomainError("dataset spec: blur scale must be >= 1");
    if (!(spec.within_std > 0.0)) throw DomainError("dataset spec: within-class std must be > 0");
}

std::vector<Sample> generate_split(const DatasetSpec& spec, const std::vector<std::vector<double>>& means,
                                   const std::vector<std::vector<double>>& centroids, std::size_t n,
                                   std::uint64_t stream) {
    const Partition& part = *spec.partition;
    const std::size_t k = part.num_classes();
    Rng rng(spec.seed, stream);
    std::vector<Sample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const ClassIndex cls = rng.below(k);
        const GroupIndex j = part.containing_group(cls);
        // Always consume the coin so the stream layout does not depend on rho.
        const bool blurred = rng.uniform() < spec.composite_ratio && part.is_composite(j);
        Sample s;
        s.features.resize(spec.dim);
        const auto& center = blurred ? centroids[j] : means[cls];
        const double sd = blurred ? spec.within_std * spec.blur_scale : spec.within_std;
        for (std::size_t d = 0; d < spec.dim; ++d) s.features[d] = center[d] + sd * rng.normal();
        s.label = blurred ? LabelVector::group_indicator(part, j) : LabelVector::singleton(k, cls);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

DatasetSplits generate(const DatasetSpec& spec) {
    check_spec(spec);
    const auto means = class_means(spec);
    const Partition& part = *spec.partition;
    std::vector<std::vector<double>> centroids(part.num_groups(), std::vector<double>(spec.dim, 0.0));
    for (GroupIndex j = 0; j < part.num_groups(); ++j) {
        for (ClassIndex c : part.group(j))
            for (std::size_t d = 0; d < spec.dim; ++d) centroids[j][d] += means[c][d];
        for (double& v : centroids[j]) v /= static_cast<double>(part.group(j).size());
    }
    DatasetSplits splits;
    splits.train = generate_split(spec, means, centroids, spec.n_train, 1);
    splits.val = generate_split(spec, means, centroids, spec.n_val, 2);
    splits.test = generate_split(spec, means, centroids, spec.n_test, 3);
    return splits;
}

void write_jsonl(const std::vector<Sample>& samples, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    for (const auto& s : samples) {
        json rec;
        rec["x"] = s.features;
        rec["y"] = s.label.bits;
        os << rec.dump() << '\n';
    }
    if (!os) throw IoError("write failed for " + path.string());
}

std::vector<Sample> read_jsonl(const std::filesystem::path& path, const Partition& partition) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    std::vector<Sample> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        Sample s;
        try {
            const json rec = json::parse(line);
            s.features = rec.at("x").get<std::vector<double>>();
            s.label.bits = rec.at("y").get<std::vector<std::uint8_t>>();
        } catch (const json::exception& e) {
            throw ParseError(where + ": malformed record: " + e.what());
        }
        if (auto report = validate_label(s.label, partition)) throw ValidationError(where + ": " + *report);
        out.push_back(std::move(s));
    }
    return out;
}

void write_domain(const Partition& partition, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    json doc;
    doc["k"] = partition.num_classes();
    doc["groups"] = partition.groups();
    os << doc.dump() << '\n';
    if (!os) throw IoError("write failed for " + path.string());
}

std::shared_ptr<const Partition> read_domain(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    std::stringstream buf;
    buf << is.rdbuf();
    std::size_t k = 0;
    std::vector<std::vector<ClassIndex>> groups;
    try {
        const json doc = json::parse(buf.str());
        k = doc.at("k").get<std::size_t>();
        groups = doc.at("groups").get<std::vector<std::vector<ClassIndex>>>();
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": malformed domain file: " + e.what());
    }
    return std::make_shared<const Partition>(k, std::move(groups));
}

}  // namespace henn
