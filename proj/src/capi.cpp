#include "henn/henn.h"

#include <cstring>
#include <memory>
#include <string>

#include "henn/app.hpp"
#include "henn/error.hpp"
#include "henn/gdd.hpp"
#include "henn/loss.hpp"
#include "henn/net.hpp"
#include "henn/opinion.hpp"

struct henn_partition {
    std::shared_ptr<const henn::Partition> p;
};

struct henn_model {
    henn::Model m;
};

namespace {

thread_local std::string last_error;

henn_status fail(henn_status s, const std::string& msg) {
    last_error = msg;
    return s;
}

template <class F>
henn_status guarded(F&& fn) {
    try {
        last_error.clear();
        return fn();
    } catch (const henn::Error& e) {
        switch (e.kind()) {
            case henn::ErrorKind::Validation: return fail(HENN_ERR_VALIDATION, e.what());
            case henn::ErrorKind::Io: return fail(HENN_ERR_IO, e.what());
            case henn::ErrorKind::Domain: return fail(HENN_ERR_DOMAIN, e.what());
            case henn::ErrorKind::Parse: return fail(HENN_ERR_PARSE, e.what());
            case henn::ErrorKind::Unsupported: return fail(HENN_ERR_UNSUPPORTED, e.what());
        }
        return fail(HENN_ERR_INTERNAL, e.what());
    } catch (const std::bad_alloc&) {
        return fail(HENN_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(HENN_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(HENN_ERR_INTERNAL, "unknown exception");
    }
}

henn::GddParams make_params(const henn_partition* part, const double* alpha, const double* c) {
    const auto& p = *part->p;
    std::vector<double> a(alpha, alpha + p.num_classes());
    std::vector<double> cc(c, c + p.num_groups());
    return henn::GddParams(part->p, std::move(a), std::move(cc));
}

}  // namespace

extern "C" {

const char* henn_version(void) { return "1.0.0"; }

const char* henn_status_name(henn_status status) {
    switch (status) {
        case HENN_OK: return "ok";
        case HENN_ERR_VALIDATION: return "validation error";
        case HENN_ERR_IO: return "I/O error";
        case HENN_ERR_DOMAIN: return "domain error";
        case HENN_ERR_PARSE: return "parse error";
        case HENN_ERR_UNSUPPORTED: return "unsupported";
        case HENN_ERR_CHECK_FAILED: return "check failed";
        case HENN_ERR_INVALID_ARGUMENT: return "invalid argument";
        case HENN_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* henn_last_error_message(void) { return last_error.c_str(); }

henn_status henn_partition_create(size_t k, const size_t* members, const size_t* group_sizes, size_t num_groups,
                                  henn_partition** out) {
    if (!out || (num_groups > 0 && (!members || !group_sizes)))
        return fail(HENN_ERR_INVALID_ARGUMENT, "henn_partition_create: null pointer");
    *out = nullptr;
    return guarded([&] {
        std::vector<std::vector<henn::ClassIndex>> groups(num_groups);
        std::size_t at = 0;
        for (std::size_t j = 0; j < num_groups; ++j) {
            groups[j].assign(members + at, members + at + group_sizes[j]);
            at += group_sizes[j];
        }
        auto p = std::make_shared<const henn::Partition>(k, std::move(groups));
        *out = new henn_partition{std::move(p)};
        return HENN_OK;
    });
}

void henn_partition_destroy(henn_partition* partition) { delete partition; }

size_t henn_partition_num_classes(const henn_partition* p) { return p ? p->p->num_classes() : 0; }
size_t henn_partition_num_groups(const henn_partition* p) { return p ? p->p->num_groups() : 0; }
size_t henn_partition_num_composite(const henn_partition* p) { return p ? p->p->num_composite() : 0; }
size_t henn_partition_evidence_width(const henn_partition* p) { return p ? p->p->evidence_width() : 0; }

henn_status henn_opinion_measures(const henn_partition* partition, const double* evidence, size_t width,
                                  double* vacuity, double* vagueness, double* dissonance) {
    if (!partition || !evidence) return fail(HENN_ERR_INVALID_ARGUMENT, "henn_opinion_measures: null pointer");
    return guarded([&] {
        const auto& p = *partition->p;
        if (width != p.evidence_width())
            throw henn::DomainError("evidence width must be K + m = " + std::to_string(p.evidence_width()));
        const auto family = henn::FocalFamily::from_partition(p);
        const auto op = henn::opinion_from_evidence(std::span<const double>(evidence, width), family);
        if (vacuity) *vacuity = henn::vacuity(op);
        if (vagueness) *vagueness = henn::vagueness(op, family);
        if (dissonance) *dissonance = henn::dissonance(op, family);
        return HENN_OK;
    });
}

henn_status henn_gdd_mean(const henn_partition* partition, const double* alpha, const double* c, double* mean_out) {
    if (!partition || !alpha || !c || !mean_out) return fail(HENN_ERR_INVALID_ARGUMENT, "henn_gdd_mean: null pointer");
    return guarded([&] {
        const auto m = henn::mean(make_params(partition, alpha, c));
        std::memcpy(mean_out, m.data(), m.size() * sizeof(double));
        return HENN_OK;
    });
}

henn_status henn_gdd_stats_compute(const henn_partition* partition, const double* alpha, const double* c,
                                   henn_gdd_stats* out) {
    if (!partition || !alpha || !c || !out) return fail(HENN_ERR_INVALID_ARGUMENT, "henn_gdd_stats_compute: null pointer");
    return guarded([&] {
        const auto params = make_params(partition, alpha, c);
        out->log_normalizer = henn::log_normalizer(params);
        out->entropy = henn::entropy(params);
        out->kl_to_flat = henn::kl_to_flat(params);
        return HENN_OK;
    });
}

henn_status henn_loss(const henn_partition* partition, const double* alpha, const double* c, const uint8_t* label,
                      double lambda, const char* reg_mode, double* total, double* d_alpha, double* d_c) {
    if (!partition || !alpha || !c || !label || !total)
        return fail(HENN_ERR_INVALID_ARGUMENT, "henn_loss: null pointer");
    return guarded([&] {
        const auto mode = henn::parse_reg_mode(reg_mode ? reg_mode : "kl");
        if (!mode) throw henn::ValidationError("unknown regularizer mode '" + std::string(reg_mode) + "'");
        const auto params = make_params(partition, alpha, c);
        henn::LabelVector y{std::vector<std::uint8_t>(label, label + partition->p->num_classes())};
        *total = henn::total_loss(params, y, lambda, *mode).total;
        if (d_alpha || d_c) {
            const auto g = henn::grad_total(params, y, lambda, *mode);
            if (d_alpha) std::memcpy(d_alpha, g.d_alpha.data(), g.d_alpha.size() * sizeof(double));
            if (d_c) std::memcpy(d_c, g.d_c.data(), g.d_c.size() * sizeof(double));
        }
        return HENN_OK;
    });
}

henn_status henn_model_load(const char* checkpoint_path, henn_model** out) {
    if (!checkpoint_path || !out) return fail(HENN_ERR_INVALID_ARGUMENT, "henn_model_load: null pointer");
    *out = nullptr;
    return guarded([&] {
        *out = new henn_model{henn::load_checkpoint(checkpoint_path)};
        return HENN_OK;
    });
}

void henn_model_destroy(henn_model* model) { delete model; }

size_t henn_model_input_dim(const henn_model* model) { return model ? model->m.params.input_dim() : 0; }
size_t henn_model_evidence_width(const henn_model* model) { return model ? model->m.params.output_dim() : 0; }

henn_status henn_model_predict(const henn_model* model, const double* x, size_t dim, double* evidence_out,
                               henn_prediction* out) {
    if (!model || !x || !out) return fail(HENN_ERR_INVALID_ARGUMENT, "henn_model_predict: null pointer");
    return guarded([&] {
        if (dim != model->m.params.input_dim())
            throw henn::DomainError("input has " + std::to_string(dim) + " features, model expects " +
                                    std::to_string(model->m.params.input_dim()));
        const auto p = henn::predict(model->m.params, std::span<const double>(x, dim), model->m.partition);
        if (evidence_out) std::memcpy(evidence_out, p.evidence.data(), p.evidence.size() * sizeof(double));
        out->is_composite = p.set_prediction.kind.is_composite() ? 1 : 0;
        out->set_index = p.set_prediction.kind.index;
        out->singleton_prediction = p.singleton_prediction;
        out->vacuity = p.vacuity;
        out->vagueness = p.vagueness;
        out->dissonance = p.dissonance;
        return HENN_OK;
    });
}

henn_status henn_run(const char* command, const char* config_json, henn_output_fn sink, void* user) {
    if (!command) return fail(HENN_ERR_INVALID_ARGUMENT, "henn_run: null command");
    return guarded([&] {
        const std::string text = (config_json && *config_json) ? config_json : "{}";
        const henn::RunConfig cfg = henn::parse_run_config(text);
        henn::OutputSink out;
        if (sink) out = [sink, user](std::string_view s) { sink(s.data(), s.size(), user); };
        if (!henn::run_command(command, cfg, out)) return fail(HENN_ERR_CHECK_FAILED, "one or more checks failed");
        return HENN_OK;
    });
}

}  // extern "C"
