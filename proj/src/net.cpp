#include "henn/net.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "henn/error.hpp"
#include "henn/rng.hpp"

namespace henn {

using nlohmann::json;

std::string_view to_string(Activation a) { return a == Activation::Relu ? "relu" : "tanh"; }

std::optional<Activation> parse_activation(std::string_view name) {
    if (name == "relu") return Activation::Relu;
    if (name == "tanh") return Activation::Tanh;
    return std::nullopt;
}

std::size_t MlpParams::num_parameters() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weights.size() + l.bias.size();
    return n;
}

MlpParams init_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden, std::size_t output_dim,
                   Activation activation, std::uint64_t seed) {
    if (input_dim == 0 || output_dim == 0) throw DomainError("init_mlp: dimensions must be positive");
    MlpParams p;
    p.hidden_activation = activation;
    Rng rng(seed, 0x1417);
    std::size_t in = input_dim;
    auto add_layer = [&](std::size_t out) {
        if (out == 0) throw DomainError("init_mlp: hidden width must be positive");
        DenseLayer l{in, out, std::vector<double>(in * out), std::vector<double>(out, 0.0)};
        const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
        for (double& w : l.weights) w = bound * (2.0 * rng.uniform() - 1.0);
        p.layers.push_back(std::move(l));
        in = out;
    };
    for (std::size_t h : hidden) add_layer(h);
    add_layer(output_dim);
    return p;
}

MlpParams zeros_like(const MlpParams& params) {
    MlpParams z = params;
    for (auto& l : z.layers) {
        std::fill(l.weights.begin(), l.weights.end(), 0.0);
        std::fill(l.bias.begin(), l.bias.end(), 0.0);
    }
    return z;
}

std::vector<double> flatten(const MlpParams& params) {
    std::vector<double> out;
    out.reserve(params.num_parameters());
    for (const auto& l : params.layers) {
        out.insert(out.end(), l.weights.begin(), l.weights.end());
        out.insert(out.end(), l.bias.begin(), l.bias.end());
    }
    return out;
}

void unflatten(std::span<const double> flat, MlpParams& params) {
    if (flat.size() != params.num_parameters()) throw DomainError("unflatten: size mismatch");
    std::size_t pos = 0;
    for (auto& l : params.layers) {
        for (double& w : l.weights) w = flat[pos++];
        for (double& b : l.bias) b = flat[pos++];
    }
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

namespace {

void check_params(const MlpParams& params) {
    if (params.layers.empty()) throw DomainError("network has no layers");
    std::size_t in = params.layers.front().in;
    for (const auto& l : params.layers) {
        if (l.in != in || l.weights.size() != l.in * l.out || l.bias.size() != l.out)
            throw DomainError("network layer shapes are inconsistent");
        in = l.out;
    }
}

double activate(Activation a, double z) { return a == Activation::Relu ? (z > 0.0 ? z : 0.0) : std::tanh(z); }

// Derivative expressed through the pre-activation.
double activate_grad(Activation a, double z) {
    if (a == Activation::Relu) return z > 0.0 ? 1.0 : 0.0;
    const double t = std::tanh(z);
    return 1.0 - t * t;
}

void dense(const DenseLayer& l, std::span<const double> in, std::vector<double>& out) {
    out.assign(l.out, 0.0);
    for (std::size_t o = 0; o < l.out; ++o) {
        const double* row = l.weights.data() + o * l.in;
        double acc = l.bias[o];
        for (std::size_t i = 0; i < l.in; ++i) acc += row[i] * in[i];
        out[o] = acc;
    }
}

struct ForwardCache {
    std::vector<std::vector<double>> inputs;  // input to each layer
    std::vector<std::vector<double>> pre;     // pre-activation of each layer
};

ForwardCache run_forward(const MlpParams& params, std::span<const double> x) {
    check_params(params);
    if (x.size() != params.input_dim())
        throw DomainError("forward: input has dimension " + std::to_string(x.size()) + ", expected " +
                          std::to_string(params.input_dim()));
    ForwardCache cache;
    const std::size_t n = params.layers.size();
    cache.inputs.resize(n);
    cache.pre.resize(n);
    cache.inputs[0].assign(x.begin(), x.end());
    for (std::size_t li = 0; li < n; ++li) {
        dense(params.layers[li], cache.inputs[li], cache.pre[li]);
        if (li + 1 < n) {
            auto& next = cache.inputs[li + 1];
            next.resize(cache.pre[li].size());
            for (std::size_t i = 0; i < next.size(); ++i) next[i] = activate(params.hidden_activation, cache.pre[li][i]);
        }
    }
    return cache;
}

std::vector<double> evidence_from_logits(std::span<const double> z) {
    std::vector<double> e(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) e[i] = softplus(z[i]);
    return e;
}

void check_head(const MlpParams& params, const Partition& partition) {
    if (params.output_dim() != partition.evidence_width())
        throw DomainError("network head width " + std::to_string(params.output_dim()) + " does not match K + m = " +
                          std::to_string(partition.evidence_width()));
}

}  // namespace

std::vector<double> forward_logits(const MlpParams& params, std::span<const double> x) {
    return std::move(run_forward(params, x).pre.back());
}

std::vector<double> forward(const MlpParams& params, std::span<const double> x) {
    return evidence_from_logits(forward_logits(params, x));
}

LossBreakdown example_loss(const MlpParams& params, std::span<const double> x, const LabelVector& y,
                           const std::shared_ptr<const Partition>& partition, double lambda, RegMode mode) {
    check_params(params);
    check_head(params, *partition);
    const auto e = forward(params, x);
    return total_loss(params_from_evidence(e, partition), y, lambda, mode);
}

BackwardResult backward(const MlpParams& params, std::span<const double> x, const LabelVector& y,
                        const std::shared_ptr<const Partition>& partition, double lambda, RegMode mode) {
    check_params(params);
    check_head(params, *partition);
    const ForwardCache cache = run_forward(params, x);
    const auto& logits = cache.pre.back();
    const auto evidence = evidence_from_logits(logits);
    const GddParams gdd = params_from_evidence(evidence, partition);

    BackwardResult out{zeros_like(params), total_loss(gdd, y, lambda, mode)};
    const LossGrad lg = grad_total(gdd, y, lambda, mode);

    // dL/de: singletons map to alpha, composite slots to their group's c.
    const std::size_t k = partition->num_classes();
    const auto& comp = partition->composite_groups();
    std::vector<double> delta(logits.size());
    for (std::size_t i = 0; i < k; ++i) delta[i] = lg.d_alpha[i];
    for (std::size_t i = 0; i < comp.size(); ++i) delta[k + i] = lg.d_c[comp[i]];
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] *= sigmoid(logits[i]);

    for (std::size_t li = params.layers.size(); li-- > 0;) {
        const DenseLayer& layer = params.layers[li];
        DenseLayer& g = out.grad.layers[li];
        const auto& in = cache.inputs[li];
        for (std::size_t o = 0; o < layer.out; ++o) {
            g.bias[o] = delta[o];
            double* grow = g.weights.data() + o * layer.in;
            for (std::size_t i = 0; i < layer.in; ++i) grow[i] = delta[o] * in[i];
        }
        if (li == 0) break;
        std::vector<double> prev(layer.in, 0.0);
        for (std::size_t o = 0; o < layer.out; ++o) {
            const double* row = layer.weights.data() + o * layer.in;
            for (std::size_t i = 0; i < layer.in; ++i) prev[i] += row[i] * delta[o];
        }
        const auto& pre = cache.pre[li - 1];
        for (std::size_t i = 0; i < prev.size(); ++i) prev[i] *= activate_grad(params.hidden_activation, pre[i]);
        delta = std::move(prev);
    }
    return out;
}

AdamState::AdamState(const MlpParams& like) : first_moment(zeros_like(like)), second_moment(zeros_like(like)) {}

void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state, double lr) {
    if (params.layers.size() != grads.layers.size() || params.layers.size() != state.first_moment.layers.size())
        throw DomainError("adam_step: shape mismatch");
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);
    auto update = [&](std::vector<double>& w, const std::vector<double>& g, std::vector<double>& m,
                      std::vector<double>& v) {
        if (w.size() != g.size() || w.size() != m.size() || w.size() != v.size())
            throw DomainError("adam_step: shape mismatch");
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            const double mhat = m[i] / c1;
            const double vhat = v[i] / c2;
            w[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    };
    for (std::size_t li = 0; li < params.layers.size(); ++li) {
        update(params.layers[li].weights, grads.layers[li].weights, state.first_moment.layers[li].weights,
               state.second_moment.layers[li].weights);
        update(params.layers[li].bias, grads.layers[li].bias, state.first_moment.layers[li].bias,
               state.second_moment.layers[li].bias);
    }
}

LossBreakdown train_epoch(MlpParams& params, AdamState& state, std::span<const Sample> data,
                          const std::shared_ptr<const Partition>& partition, const TrainConfig& cfg,
                          std::size_t epoch) {
    if (data.empty()) throw DomainError("train_epoch: empty dataset");
    if (cfg.batch_size == 0) throw DomainError("train_epoch: batch size must be >= 1");
    if (!(cfg.learning_rate > 0.0)) throw DomainError("train_epoch: learning rate must be > 0");

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(cfg.seed, 0x5eed0000ULL + epoch);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    LossBreakdown sum{0.0, 0.0, 0.0, cfg.lambda};
    MlpParams batch_grad = zeros_like(params);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
        const std::size_t end = std::min(order.size(), start + cfg.batch_size);
        const double inv = 1.0 / static_cast<double>(end - start);
        batch_grad = zeros_like(params);
        for (std::size_t b = start; b < end; ++b) {
            const Sample& s = data[order[b]];
            const BackwardResult r = backward(params, s.features, s.label, partition, cfg.lambda, cfg.reg_mode);
            for (std::size_t li = 0; li < params.layers.size(); ++li) {
                auto& gw = batch_grad.layers[li].weights;
                auto& gb = batch_grad.layers[li].bias;
                for (std::size_t i = 0; i < gw.size(); ++i) gw[i] += inv * r.grad.layers[li].weights[i];
                for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += inv * r.grad.layers[li].bias[i];
            }
            sum.upce += r.loss.upce;
            sum.reg += r.loss.reg;
            sum.total += r.loss.total;
        }
        adam_step(params, batch_grad, state, cfg.learning_rate);
    }
    const double n = static_cast<double>(data.size());
    sum.upce /= n;
    sum.reg /= n;
    sum.total /= n;
    return sum;
}

Prediction predict_from_evidence(std::span<const double> evidence, const std::shared_ptr<const Partition>& partition) {
    GddParams gdd = params_from_evidence(evidence, partition);
    const FocalFamily family = FocalFamily::from_partition(*partition);
    const HyperOpinion op = opinion_from_evidence(evidence, family);
    const ClassIndex single = projected_prediction(gdd);
    return Prediction{std::vector<double>(evidence.begin(), evidence.end()),
                      std::move(gdd),
                      argmax_evidence(evidence, *partition),
                      single,
                      vacuity(op),
                      vagueness(op, family),
                      dissonance(op, family)};
}

Prediction predict(const MlpParams& params, std::span<const double> x,
                   const std::shared_ptr<const Partition>& partition) {
    check_head(params, *partition);
    const auto e = forward(params, x);
    return predict_from_evidence(e, partition);
}

Model make_model(std::size_t input_dim, std::shared_ptr<const Partition> partition, const TrainConfig& cfg) {
    Model m;
    m.params = init_mlp(input_dim, cfg.hidden, partition->evidence_width(), cfg.activation, cfg.seed);
    m.partition = std::move(partition);
    return m;
}

std::string checkpoint_to_string(const Model& model) {
    json doc;
    doc["format"] = "henn-checkpoint";
    doc["version"] = 1;
    doc["activation"] = std::string(to_string(model.params.hidden_activation));
    doc["partition"] = {{"k", model.partition->num_classes()}, {"groups", model.partition->groups()}};
    json layers = json::array();
    for (const auto& l : model.params.layers)
        layers.push_back({{"in", l.in}, {"out", l.out}, {"weights", l.weights}, {"bias", l.bias}});
    doc["layers"] = std::move(layers);
    return doc.dump(1) + "\n";
}

Model checkpoint_from_string(const std::string& text) {
    Model m;
    try {
        const json doc = json::parse(text);
        if (doc.at("format").get<std::string>() != "henn-checkpoint") throw ParseError("not a henn checkpoint");
        const auto act = parse_activation(doc.at("activation").get<std::string>());
        if (!act) throw ParseError("checkpoint has unknown activation");
        m.params.hidden_activation = *act;
        const auto& part = doc.at("partition");
        m.partition = std::make_shared<const Partition>(
            part.at("k").get<std::size_t>(), part.at("groups").get<std::vector<std::vector<ClassIndex>>>());
        for (const auto& l : doc.at("layers")) {
            m.params.layers.push_back(DenseLayer{l.at("in").get<std::size_t>(), l.at("out").get<std::size_t>(),
                                                 l.at("weights").get<std::vector<double>>(),
                                                 l.at("bias").get<std::vector<double>>()});
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed checkpoint: ") + e.what());
    }
    check_params(m.params);
    check_head(m.params, *m.partition);
    return m;
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << checkpoint_to_string(model);
    if (!os) throw IoError("write failed for " + path.string());
}

Model load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint " + path.string());
    std::stringstream buf;
    buf << is.rdbuf();
    return checkpoint_from_string(buf.str());
}

}  // namespace henn
