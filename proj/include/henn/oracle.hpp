#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "henn/gdd.hpp"
#include "henn/hyperdomain.hpp"

namespace henn::oracle {

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;

    /// |value - mean| in units of standard error.
    double z_score(double value) const;
};

/// A scalar function of a simplex point whose expectation under a GDD is
/// estimated by Monte-Carlo.
struct Statistic {
    enum class Kind { MeanK, LogPK, LogGroupJ, Pce, NegLogPdf, LogRatioToFlat };
    Kind kind;
    std::size_t index = 0;  // class for MeanK/LogPK, group for LogGroupJ
    LabelVector label;      // Pce only

    static Statistic mean_k(ClassIndex k) { return {Kind::MeanK, k, {}}; }
    static Statistic log_p_k(ClassIndex k) { return {Kind::LogPK, k, {}}; }
    static Statistic log_group_j(GroupIndex j) { return {Kind::LogGroupJ, j, {}}; }
    static Statistic pce(LabelVector y) { return {Kind::Pce, 0, std::move(y)}; }
    static Statistic neg_log_pdf() { return {Kind::NegLogPdf, 0, {}}; }
    static Statistic log_ratio_to_flat() { return {Kind::LogRatioToFlat, 0, {}}; }

    /// Tags: "mean_<k>", "log_p_<k>", "log_group_<j>", "pce" (needs a label),
    /// "neg_log_pdf", "log_ratio_to_flat". DomainError on anything else.
    static Statistic parse(std::string_view tag, std::optional<LabelVector> label = std::nullopt);
};

inline constexpr std::size_t kDefaultMcSamples = 200'000;

/// Estimates several statistics from one shared stream of n GDD draws. Draws
/// are taken in fixed-size chunks, each from its own stream keyed by
/// (seed, chunk index); chunk summaries are merged in chunk order, so results
/// depend only on (params, stats, n, seed). Requires n >= 1000.
std::vector<McEstimate> mc_expectations(const GddParams& params, std::span<const Statistic> stats, std::size_t n,
                                        std::uint64_t seed);
McEstimate mc_expectation(const GddParams& params, const Statistic& stat, std::size_t n, std::uint64_t seed);

/// Central differences with step 1e-5 * max(1, |x_i|). DomainError naming the
/// coordinate if f is non-finite at a probe point.
std::vector<double> finite_diff(const std::function<double(std::span<const double>)>& f, std::span<const double> at);

/// Relative error ||a - b|| / max(||a||, ||b||, tiny).
double relative_error(std::span<const double> a, std::span<const double> b);

/// Integral of exp(log_pdf) over the simplex by a midpoint rule (K = 2) or a
/// midpoint rule on the collapsed square (K = 3). UnsupportedError for K > 3.
double simplex_quadrature(const GddParams& params, std::size_t resolution = 0);

/// Textbook Dirichlet(alpha) closed forms, written without reference to the
/// GDD code paths.
namespace dirichlet {
double log_pdf(std::span<const double> alpha, std::span<const double> x);
std::vector<double> mean(std::span<const double> alpha);
double expected_log(std::span<const double> alpha, std::size_t k);
double entropy(std::span<const double> alpha);
double kl_to_uniform(std::span<const double> alpha);
/// Direct Dirichlet draw from normalized gammas.
std::vector<double> sample(std::span<const double> alpha, Rng& rng);
}  // namespace dirichlet

/// Special functions under test; the defaults are the library's own.
struct SpecialFns {
    std::function<double(double)> log_gamma;
    std::function<double(double)> digamma;
    std::function<double(double)> trigamma;

    static SpecialFns library();
};

struct CheckResult {
    std::string name;
    double measured = 0.0;  // error or worst z-score, in the units of `tolerance`
    double tolerance = 0.0;
    bool passed = false;
    std::string detail;
};

struct VerifyOptions {
    SpecialFns fns = SpecialFns::library();
    std::size_t mc_samples = kDefaultMcSamples;
    std::size_t mc_cases = 20;
    std::uint64_t seed = 20240517;
};

/// Special-function identities, golden opinion values, normalizer
/// quadrature, MC agreement of every analytic GDD/loss expectation, finite-
/// difference gradient checks, the UPCE >= PCE(mean) bound, derivative sign
/// structure and Dirichlet reductions.
std::vector<CheckResult> run_verify_suite(const VerifyOptions& options = {});
std::string format_checks(std::span<const CheckResult> checks);

}  // namespace henn::oracle
