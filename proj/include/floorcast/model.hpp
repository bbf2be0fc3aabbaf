#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "floorcast/csv.hpp"
#include "floorcast/errors.hpp"
#include "floorcast/head.hpp"

namespace floorcast {

struct ModelConfig {
    Variant variant = Variant::hyb_httc;
    std::vector<int> cuts;  // empty -> variant default (HTC: 6, HTTC: 5,11)
    bool mtl_roof = false;
    int feature_dim = 64;
    std::vector<int> hidden = {32};
    double learning_rate = 0.001;
    int epochs = 100;
    int batch_size = 32;
    std::uint64_t seed = 42;

    VariantSpec spec() const { return VariantSpec::make(variant, cuts, mtl_roof); }
};

struct Dataset {
    int feature_dim = 0;
    std::vector<std::string> ids;               // optional; empty strings if absent
    std::vector<std::vector<double>> features;
    std::vector<int> labels;                    // floor classes in [0, 17]
    std::vector<int> roof_flat;                 // 1/0, or -1 when absent

    size_t size() const { return features.size(); }
};

// CSV schema: optional `id`, feature columns `f0..f{d-1}`, `floor_class`,
// optional `roof_flat`.
inline Dataset load_dataset_csv(const std::string& text) {
    CsvTable t = parse_csv(text);
    Dataset ds;
    std::vector<int> fcols;
    for (int d = 0;; ++d) {
        const int c = t.column("f" + std::to_string(d));
        if (c < 0) break;
        fcols.push_back(c);
    }
    if (fcols.empty()) throw DataError("dataset has no feature columns (f0, f1, ...)");
    ds.feature_dim = static_cast<int>(fcols.size());
    const int label_col = t.require_column("floor_class");
    const int id_col = t.column("id");
    const int roof_col = t.column("roof_flat");

    for (const auto& row : t.rows) {
        std::vector<double> x;
        x.reserve(fcols.size());
        for (int c : fcols) x.push_back(parse_double(row[c], "feature"));
        const int label = static_cast<int>(parse_int(row[label_col], "floor_class"));
        if (label < 0 || label >= kNumClasses)
            throw DataError("floor_class out of range: " + std::to_string(label));
        ds.features.push_back(std::move(x));
        ds.labels.push_back(label);
        ds.ids.push_back(id_col >= 0 ? row[id_col] : "");
        ds.roof_flat.push_back(roof_col >= 0
                                   ? (parse_int(row[roof_col], "roof_flat") != 0 ? 1 : 0)
                                   : -1);
    }
    return ds;
}

namespace modeldetail {

// [0, 1) double from the raw engine; deterministic across platforms.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename T>
inline void seeded_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        const size_t j = static_cast<size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace modeldetail

// Fully connected encoder: ReLU hidden layers, linear score output.
struct Mlp {
    struct Layer {
        int in = 0, out = 0;
        std::vector<double> w;  // row-major out x in
        std::vector<double> b;
    };
    std::vector<Layer> layers;

    static Mlp make(int input_dim, const std::vector<int>& hidden, int output_dim,
                    std::mt19937_64& rng) {
        Mlp net;
        std::vector<int> dims;
        dims.push_back(input_dim);
        for (int h : hidden) dims.push_back(h);
        dims.push_back(output_dim);
        for (size_t l = 0; l + 1 < dims.size(); ++l) {
            Layer layer;
            layer.in = dims[l];
            layer.out = dims[l + 1];
            const double lim = std::sqrt(6.0 / (layer.in + layer.out));
            layer.w.resize(static_cast<size_t>(layer.in) * layer.out);
            for (double& w : layer.w) w = (2.0 * modeldetail::uniform01(rng) - 1.0) * lim;
            layer.b.assign(layer.out, 0.0);
            net.layers.push_back(std::move(layer));
        }
        return net;
    }

    // Forward pass keeping activations for backprop: act[0] = x,
    // act[l+1] = output of layer l (ReLU applied on all but the last layer).
    std::vector<std::vector<double>> forward(const std::vector<double>& x) const {
        std::vector<std::vector<double>> act;
        act.push_back(x);
        for (size_t l = 0; l < layers.size(); ++l) {
            const Layer& L = layers[l];
            std::vector<double> z(L.out, 0.0);
            const auto& a = act.back();
            for (int o = 0; o < L.out; ++o) {
                double acc = L.b[o];
                const double* wrow = &L.w[static_cast<size_t>(o) * L.in];
                for (int i = 0; i < L.in; ++i) acc += wrow[i] * a[i];
                z[o] = acc;
            }
            if (l + 1 < layers.size())
                for (double& v : z) v = std::max(0.0, v);
            act.push_back(std::move(z));
        }
        return act;
    }

    std::vector<double> scores(const std::vector<double>& x) const {
        return forward(x).back();
    }
};

// Gradient buffers mirroring an Mlp's parameters.
struct MlpGrads {
    std::vector<std::vector<double>> w;
    std::vector<std::vector<double>> b;

    explicit MlpGrads(const Mlp& net) {
        for (const auto& L : net.layers) {
            w.emplace_back(L.w.size(), 0.0);
            b.emplace_back(L.b.size(), 0.0);
        }
    }
    void zero() {
        for (auto& g : w) std::fill(g.begin(), g.end(), 0.0);
        for (auto& g : b) std::fill(g.begin(), g.end(), 0.0);
    }
};

// Backprop of d(loss)/d(scores) through the network, accumulating into grads.
inline void backward(const Mlp& net, const std::vector<std::vector<double>>& act,
                     std::vector<double> dscores, MlpGrads& grads) {
    std::vector<double> delta = std::move(dscores);
    for (int l = static_cast<int>(net.layers.size()) - 1; l >= 0; --l) {
        const auto& L = net.layers[l];
        const auto& a_in = act[l];
        auto& gw = grads.w[l];
        auto& gb = grads.b[l];
        for (int o = 0; o < L.out; ++o) {
            gb[o] += delta[o];
            double* grow = &gw[static_cast<size_t>(o) * L.in];
            for (int i = 0; i < L.in; ++i) grow[i] += delta[o] * a_in[i];
        }
        if (l == 0) break;
        std::vector<double> prev(L.in, 0.0);
        for (int o = 0; o < L.out; ++o) {
            const double* wrow = &L.w[static_cast<size_t>(o) * L.in];
            for (int i = 0; i < L.in; ++i) prev[i] += wrow[i] * delta[o];
        }
        // ReLU mask of the layer input (act[l] is post-activation)
        for (int i = 0; i < L.in; ++i)
            if (act[l][i] <= 0.0) prev[i] = 0.0;
        delta = std::move(prev);
    }
}

struct Adam {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long long t = 0;
    std::vector<std::vector<double>> m_w, v_w, m_b, v_b;

    Adam(const Mlp& net, double learning_rate) : lr(learning_rate) {
        for (const auto& L : net.layers) {
            m_w.emplace_back(L.w.size(), 0.0);
            v_w.emplace_back(L.w.size(), 0.0);
            m_b.emplace_back(L.b.size(), 0.0);
            v_b.emplace_back(L.b.size(), 0.0);
        }
    }

    void step(Mlp& net, const MlpGrads& grads) {
        ++t;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (size_t l = 0; l < net.layers.size(); ++l) {
            auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                              std::vector<double>& m, std::vector<double>& v) {
                for (size_t i = 0; i < p.size(); ++i) {
                    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                    p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
                }
            };
            update(net.layers[l].w, grads.w[l], m_w[l], v_w[l]);
            update(net.layers[l].b, grads.b[l], m_b[l], v_b[l]);
        }
    }
};

struct EpochRecord {
    int epoch = 0;
    double htt = 0.0, ce = 0.0, reg = 0.0, roof = 0.0, total = 0.0;
    double val_accuracy = 0.0;
};

struct TrainedModel {
    ModelConfig config;
    Mlp net;

    VariantSpec spec() const { return config.spec(); }

    HeadEval evaluate(const std::vector<double>& x, int c_gt,
                      std::optional<bool> roof = std::nullopt) const {
        return head_eval(HeadScores{net.scores(x)}, spec(), c_gt, roof);
    }

    int predict_class(const std::vector<double>& x) const {
        const VariantSpec s = spec();
        // label 0 is a placeholder; prediction ignores the loss terms
        return head_eval(HeadScores{net.scores(x)}, s, 0,
                         s.mtl_roof ? std::optional<bool>(true) : std::nullopt)
            .prediction;
    }
};

struct TrainResult {
    TrainedModel model;
    std::vector<EpochRecord> log;
    std::vector<size_t> train_indices, val_indices, test_indices;
    int best_epoch = 0;
    double best_val_accuracy = 0.0;
};

struct SplitIndices {
    std::vector<size_t> train, val, test;
};

// Seeded 80/10/10 split (val and test get n/10 each, at least one val sample).
inline SplitIndices split_dataset(size_t n, std::uint64_t seed) {
    std::vector<size_t> idx(n);
    for (size_t i = 0; i < n; ++i) idx[i] = i;
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    modeldetail::seeded_shuffle(idx, rng);
    SplitIndices s;
    const size_t n_val = std::max<size_t>(1, n / 10);
    const size_t n_test = n / 10;
    if (n_val + n_test >= n) throw DataError("EmptyDataset: too few samples to split");
    s.val.assign(idx.begin(), idx.begin() + n_val);
    s.test.assign(idx.begin() + n_val, idx.begin() + n_val + n_test);
    s.train.assign(idx.begin() + n_val + n_test, idx.end());
    return s;
}

// Adam training, deterministic under config.seed. The weights snapshot with
// the highest validation accuracy (earliest epoch on ties) is retained.
inline TrainResult train(const ModelConfig& config, const Dataset& data) {
    if (data.size() == 0) throw DataError("EmptyDataset");
    if (data.feature_dim != config.feature_dim)
        throw ConfigError("train.feature_dim",
                          "dataset has " + std::to_string(data.feature_dim) +
                              " features, config expects " +
                              std::to_string(config.feature_dim));
    const VariantSpec spec = config.spec();
    if (spec.mtl_roof)
        for (int r : data.roof_flat)
            if (r < 0) throw DataError("MTL variant requires roof_flat labels on every row");

    SplitIndices split = split_dataset(data.size(), config.seed);

    std::mt19937_64 rng(config.seed);
    TrainResult result;
    result.model.config = config;
    result.model.net =
        Mlp::make(config.feature_dim, config.hidden, spec.score_dim(), rng);
    result.train_indices = split.train;
    result.val_indices = split.val;
    result.test_indices = split.test;

    Mlp& net = result.model.net;
    Adam opt(net, config.learning_rate);
    MlpGrads grads(net);
    Mlp best_net = net;
    double best_acc = -1.0;
    int best_epoch = -1;

    auto val_accuracy = [&]() {
        size_t correct = 0;
        for (size_t i : split.val) {
            const auto ev = head_eval(HeadScores{net.scores(data.features[i])}, spec,
                                      data.labels[i],
                                      spec.mtl_roof ? std::optional<bool>(data.roof_flat[i] != 0)
                                                    : std::nullopt);
            if (ev.prediction == data.labels[i]) ++correct;
        }
        return static_cast<double>(correct) / static_cast<double>(split.val.size());
    };

    std::vector<size_t> order = split.train;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        modeldetail::seeded_shuffle(order, rng);
        LossTerms epoch_loss;
        size_t seen = 0;
        for (size_t start = 0; start < order.size(); start += config.batch_size) {
            const size_t end = std::min(order.size(), start + config.batch_size);
            grads.zero();
            for (size_t k = start; k < end; ++k) {
                const size_t i = order[k];
                const auto act = net.forward(data.features[i]);
                const auto ev = head_eval(
                    HeadScores{act.back()}, spec, data.labels[i],
                    spec.mtl_roof ? std::optional<bool>(data.roof_flat[i] != 0) : std::nullopt);
                if (!std::isfinite(ev.loss.total))
                    throw DataError("NonFiniteLoss at epoch " + std::to_string(epoch) +
                                    ", sample " + std::to_string(i));
                epoch_loss.htt += ev.loss.htt;
                epoch_loss.ce += ev.loss.ce;
                epoch_loss.reg += ev.loss.reg;
                epoch_loss.roof += ev.loss.roof;
                epoch_loss.total += ev.loss.total;
                ++seen;
                std::vector<double> dscores = ev.grad;
                const double scale = 1.0 / static_cast<double>(end - start);
                for (double& g : dscores) g *= scale;
                backward(net, act, std::move(dscores), grads);
            }
            opt.step(net, grads);
        }
        EpochRecord rec;
        rec.epoch = epoch;
        const double inv = seen ? 1.0 / static_cast<double>(seen) : 0.0;
        rec.htt = epoch_loss.htt * inv;
        rec.ce = epoch_loss.ce * inv;
        rec.reg = epoch_loss.reg * inv;
        rec.roof = epoch_loss.roof * inv;
        rec.total = epoch_loss.total * inv;
        rec.val_accuracy = val_accuracy();
        result.log.push_back(rec);
        if (rec.val_accuracy > best_acc) {
            best_acc = rec.val_accuracy;
            best_net = net;
            best_epoch = epoch;
        }
    }
    result.model.net = best_net;
    result.best_epoch = best_epoch;
    result.best_val_accuracy = best_acc;
    return result;
}

inline std::string epoch_log_to_csv(const std::vector<EpochRecord>& log) {
    std::string out = "epoch,loss_htt,loss_ce,loss_reg,loss_roof,loss_total,val_accuracy\n";
    for (const auto& r : log)
        out += csv_join({std::to_string(r.epoch), fmt_double(r.htt, 6), fmt_double(r.ce, 6),
                         fmt_double(r.reg, 6), fmt_double(r.roof, 6), fmt_double(r.total, 6),
                         fmt_double(r.val_accuracy, 6)}) +
               "\n";
    return out;
}

inline std::string model_to_json(const TrainedModel& model) {
    nlohmann::json doc;
    doc["format"] = "floorcast-model";
    doc["version"] = 1;
    doc["variant"] = to_string(model.config.variant);
    doc["cuts"] = model.config.cuts;
    doc["mtl_roof"] = model.config.mtl_roof;
    doc["feature_dim"] = model.config.feature_dim;
    doc["hidden"] = model.config.hidden;
    doc["learning_rate"] = model.config.learning_rate;
    doc["epochs"] = model.config.epochs;
    doc["batch_size"] = model.config.batch_size;
    doc["seed"] = model.config.seed;
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& L : model.net.layers) {
        nlohmann::json jl;
        jl["in"] = L.in;
        jl["out"] = L.out;
        jl["w"] = L.w;
        jl["b"] = L.b;
        layers.push_back(std::move(jl));
    }
    doc["layers"] = std::move(layers);
    return doc.dump() + "\n";
}

inline TrainedModel model_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedDocument(std::string("model JSON: ") + e.what());
    }
    if (doc.value("format", "") != "floorcast-model")
        throw MalformedDocument("not a floorcast model file");
    TrainedModel model;
    model.config.variant = variant_from_string(doc.at("variant").get<std::string>());
    model.config.cuts = doc.value("cuts", std::vector<int>{});
    model.config.mtl_roof = doc.value("mtl_roof", false);
    model.config.feature_dim = doc.at("feature_dim").get<int>();
    model.config.hidden = doc.value("hidden", std::vector<int>{});
    model.config.learning_rate = doc.value("learning_rate", 0.001);
    model.config.epochs = doc.value("epochs", 100);
    model.config.batch_size = doc.value("batch_size", 32);
    model.config.seed = doc.value("seed", 42ULL);
    for (const auto& jl : doc.at("layers")) {
        Mlp::Layer L;
        L.in = jl.at("in").get<int>();
        L.out = jl.at("out").get<int>();
        L.w = jl.at("w").get<std::vector<double>>();
        L.b = jl.at("b").get<std::vector<double>>();
        if (L.w.size() != static_cast<size_t>(L.in) * L.out ||
            L.b.size() != static_cast<size_t>(L.out))
            throw DataError("model layer has inconsistent dimensions");
        model.net.layers.push_back(std::move(L));
    }
    return model;
}

}  // namespace floorcast
