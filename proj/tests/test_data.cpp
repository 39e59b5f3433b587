#include <fstream>
#include <set>

#include "doctest.h"
#include "test_support.hpp"

#include "henn/data.hpp"
#include "henn/error.hpp"

using namespace henn;
using testing::TempDir;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

}  // namespace

TEST_CASE("default spec shape") {
    const auto spec = default_dataset_spec();
    CHECK(spec.partition->num_classes() == 6);
    CHECK(spec.partition->num_composite() == 2);
    CHECK(spec.dim == 2);
    CHECK(spec.radius == 4.0);
    CHECK(spec.within_std == 1.0);
    CHECK(spec.blur_scale == 2.0);
    CHECK(spec.composite_ratio == 0.5);
    const auto d = generate(spec);
    CHECK(d.train.size() == 2000);
    CHECK(d.val.size() == 500);
    CHECK(d.test.size() == 500);
}

TEST_CASE("composite ratio extremes") {
    auto spec = default_dataset_spec();
    spec.composite_ratio = 0.0;
    for (const auto& s : generate(spec).train) CHECK(s.label.popcount() == 1);

    spec.composite_ratio = 1.0;
    spec.partition = testing::part(4, {{0, 1}, {2, 3}});
    for (const auto& s : generate(spec).train) CHECK(s.label.popcount() == 2);
}

TEST_CASE("composite fraction within binomial 3 sigma") {
    auto spec = default_dataset_spec();
    spec.n_train = 20000;
    const auto d = generate(spec);
    std::size_t comp = 0;
    for (const auto& s : d.train) comp += s.label.popcount() > 1;
    const double p = 0.5 * 4.0 / 6.0;
    const double n = 20000.0;
    CHECK(std::abs(double(comp) - n * p) <= 3.0 * std::sqrt(n * p * (1 - p)));
}

TEST_CASE("labels valid and splits disjoint") {
    const auto spec = default_dataset_spec();
    const auto d = generate(spec);
    std::set<std::vector<double>> seen;
    for (const auto* split : {&d.train, &d.val, &d.test})
        for (const auto& s : *split) {
            CHECK_FALSE(validate_label(s.label, *spec.partition).has_value());
            CHECK(seen.insert(s.features).second);
        }
}

TEST_CASE("degenerate spec") {
    auto spec = default_dataset_spec();
    spec.partition = nullptr;
    CHECK_THROWS_AS(generate(spec), DomainError);
}

TEST_CASE("jsonl round trip and determinism") {
    TempDir tmp("data");
    const auto spec = default_dataset_spec();
    const auto d = generate(spec);
    write_jsonl(d.train, tmp.path / "a.jsonl");
    write_jsonl(generate(spec).train, tmp.path / "b.jsonl");
    CHECK(slurp(tmp.path / "a.jsonl") == slurp(tmp.path / "b.jsonl"));
    CHECK(read_jsonl(tmp.path / "a.jsonl", *spec.partition) == d.train);

    write_domain(*spec.partition, tmp.path / "domain.json");
    CHECK(*read_domain(tmp.path / "domain.json") == *spec.partition);
}

TEST_CASE("jsonl errors carry line numbers") {
    TempDir tmp("data-err");
    const auto p = testing::part(3, {{0}, {1, 2}});
    {
        std::ofstream(tmp.path / "empty.jsonl");
    }
    CHECK(read_jsonl(tmp.path / "empty.jsonl", *p).empty());
    {
        std::ofstream os(tmp.path / "bad_label.jsonl");
        os << "{\"x\": [0.0], \"y\": [0, 1, 1]}\n{\"x\": [1.0], \"y\": [1, 1, 0]}\n";
    }
    try {
        read_jsonl(tmp.path / "bad_label.jsonl", *p);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
    {
        std::ofstream os(tmp.path / "bad_json.jsonl");
        os << "{\"x\": [0.0], \"y\": [1, 0, 0]}\n\n{\"x\": [0.0], \"y\": \n";
    }
    try {
        read_jsonl(tmp.path / "bad_json.jsonl", *p);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
    CHECK_THROWS_AS(read_jsonl(tmp.path / "missing.jsonl", *p), IoError);
    CHECK_THROWS_AS(write_jsonl({}, tmp.path / "no" / "such" / "dir.jsonl"), IoError);
}
