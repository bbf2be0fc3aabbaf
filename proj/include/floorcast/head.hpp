#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "floorcast/errors.hpp"

namespace floorcast {

// Floor classes are floor number minus one: 18 classes for 1..18 floors.
inline constexpr int kNumClasses = 18;
inline constexpr double kLogClamp = 1e-12;

inline double clamped_log(double p) { return std::log(std::max(p, kLogClamp)); }

// Contiguous partition of the class range {0..17} into 1-3 ordered subsets.
// Cut points c split below/at: cuts {5, 11} give {0..4}, {5..10}, {11..17}.
class SubsetPartition {
public:
    static SubsetPartition single() { return SubsetPartition({}); }
    static SubsetPartition head_tail(int cut) { return SubsetPartition({cut}); }
    static SubsetPartition head_tail_tail(int cut1, int cut2) {
        return SubsetPartition({cut1, cut2});
    }
    static SubsetPartition from_cuts(const std::vector<int>& cuts) {
        return SubsetPartition(cuts);
    }

    int subset_count() const { return static_cast<int>(ranges_.size()); }
    bool gated() const { return subset_count() >= 2; }

    // Inclusive class range of one subset.
    std::pair<int, int> range(int subset) const { return ranges_[subset]; }
    int subset_size(int subset) const {
        return ranges_[subset].second - ranges_[subset].first + 1;
    }

    int subset_of(int c) const {
        if (c < 0 || c >= kNumClasses)
            throw DataError("floor class out of range: " + std::to_string(c));
        for (size_t s = 0; s < ranges_.size(); ++s)
            if (c >= ranges_[s].first && c <= ranges_[s].second) return static_cast<int>(s);
        throw DataError("partition does not cover class " + std::to_string(c));
    }

    const std::vector<int>& cuts() const { return cuts_; }

private:
    explicit SubsetPartition(std::vector<int> cuts) : cuts_(std::move(cuts)) {
        int prev = 0;
        for (int c : cuts_) {
            if (c < 1 || c > kNumClasses - 1 || c <= prev)
                throw ConfigError("partition.cuts",
                                  "cut points must be strictly increasing within [1, 17]");
            ranges_.emplace_back(prev, c - 1);
            prev = c;
        }
        ranges_.emplace_back(prev, kNumClasses - 1);
    }

    std::vector<int> cuts_;
    std::vector<std::pair<int, int>> ranges_;
};

// Gate + per-subset probabilities. Each vector lives on its own simplex.
struct HeadOutputs {
    std::vector<double> gate;                  // size = subset_count
    std::vector<std::vector<double>> within;   // within[s].size() = subset_size(s)
};

using ClassPMF = std::vector<double>;  // 18 entries, sums to 1

inline std::vector<double> softmax(const std::vector<double>& scores) {
    double mx = scores[0];
    for (double s : scores) mx = std::max(mx, s);
    std::vector<double> out(scores.size());
    double sum = 0.0;
    for (size_t i = 0; i < scores.size(); ++i) {
        out[i] = std::exp(scores[i] - mx);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

// -log of the gate probability of the true class's subset.
inline double httc_loss(const std::vector<double>& gate, int c_gt,
                        const SubsetPartition& part) {
    return -clamped_log(gate[part.subset_of(c_gt)]);
}

// P_c = gate(subset(c)) * within(subset(c))_c, concatenated over subsets.
inline ClassPMF combine(const HeadOutputs& outputs, const SubsetPartition& part) {
    ClassPMF pmf(kNumClasses, 0.0);
    for (int s = 0; s < part.subset_count(); ++s) {
        const auto [lo, hi] = part.range(s);
        for (int c = lo; c <= hi; ++c)
            pmf[c] = outputs.gate[s] * outputs.within[s][c - lo];
    }
    return pmf;
}

inline double ce_loss(const ClassPMF& pmf, int c_gt) {
    if (c_gt < 0 || c_gt >= kNumClasses)
        throw DataError("floor class out of range: " + std::to_string(c_gt));
    return -clamped_log(pmf[c_gt]);
}

// Expectation of the PMF; the raw regression output.
inline double expectation(const ClassPMF& pmf) {
    double f = 0.0;
    for (int c = 0; c < kNumClasses; ++c) f += c * pmf[c];
    return f;
}

inline double reg_loss(double f, int c_gt) { return std::abs(f - c_gt); }

// Binary cross entropy for the auxiliary flat/non-flat roof head.
// `flat` is the positive label; `prob` is the predicted P(flat).
inline double roof_aux_loss(double prob, bool flat) {
    return flat ? -clamped_log(prob) : -clamped_log(1.0 - prob);
}

// Inference: floor of the raw output, clamped to the class range.
inline int predict(double f) {
    return std::clamp(static_cast<int>(std::floor(f)), 0, kNumClasses - 1);
}

inline int argmax_class(const ClassPMF& pmf) {
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c)
        if (pmf[c] > pmf[best]) best = c;
    return best;
}

// ---------------------------------------------------------------------------
// Experiment variants and the score-level loss with analytic gradients.
// ---------------------------------------------------------------------------

enum class Variant { plain, htc, httc, hyb, hyb_httc };

inline const char* to_string(Variant v) {
    switch (v) {
        case Variant::plain: return "plain";
        case Variant::htc: return "htc";
        case Variant::httc: return "httc";
        case Variant::hyb: return "hyb";
        default: return "hyb_httc";
    }
}

inline Variant variant_from_string(const std::string& s) {
    if (s == "plain") return Variant::plain;
    if (s == "htc") return Variant::htc;
    if (s == "httc") return Variant::httc;
    if (s == "hyb") return Variant::hyb;
    if (s == "hyb_httc" || s == "hyb+httc") return Variant::hyb_httc;
    throw ConfigError("train.variant", "unknown variant: " + s);
}

// Resolved semantics of one experiment configuration.
struct VariantSpec {
    Variant variant = Variant::hyb_httc;
    SubsetPartition partition = SubsetPartition::head_tail_tail(5, 11);
    bool mtl_roof = false;

    bool gated() const { return partition.gated(); }
    bool hybrid() const { return variant == Variant::hyb || variant == Variant::hyb_httc; }

    // Total score dimension: gate scores (when gated) + one score per class
    // (+ roof score when MTL).
    int score_dim() const {
        int d = gated() ? partition.subset_count() : 0;
        d += kNumClasses;
        if (mtl_roof) d += 1;
        return d;
    }

    static VariantSpec make(Variant v, const std::vector<int>& cuts, bool mtl) {
        VariantSpec spec;
        spec.variant = v;
        spec.mtl_roof = mtl;
        switch (v) {
            case Variant::plain:
            case Variant::hyb:
                spec.partition = SubsetPartition::single();
                break;
            case Variant::htc:
                spec.partition = SubsetPartition::head_tail(cuts.empty() ? 6 : cuts[0]);
                break;
            case Variant::httc:
            case Variant::hyb_httc:
                if (cuts.empty())
                    spec.partition = SubsetPartition::head_tail_tail(5, 11);
                else if (cuts.size() == 2)
                    spec.partition = SubsetPartition::head_tail_tail(cuts[0], cuts[1]);
                else
                    throw ConfigError("train.cuts", "httc variants take two cut points");
                break;
        }
        return spec;
    }
};

// Raw pre-normalization scores laid out as
//   [gate scores (if gated)] [within scores, subsets in order] [roof (if MTL)]
struct HeadScores {
    std::vector<double> values;
};

struct LossTerms {
    double htt = 0.0;
    double ce = 0.0;
    double reg = 0.0;
    double roof = 0.0;
    double total = 0.0;
};

struct HeadEval {
    HeadOutputs outputs;
    ClassPMF pmf;
    double expectation_f = 0.0;
    double roof_prob = 0.5;
    LossTerms loss;
    std::vector<double> grad;  // d(total)/d(scores), same layout as HeadScores
    int prediction = 0;
};

namespace headdetail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace headdetail

// Forward pass from raw scores, with the total loss of the configured variant
// and its analytic gradient with respect to every score. The CE gradient uses
// the exact decomposition L_ce = L_htt - log within(subset(c_gt)).
inline HeadEval head_eval(const HeadScores& scores, const VariantSpec& spec, int c_gt,
                          std::optional<bool> roof_flat = std::nullopt) {
    const SubsetPartition& part = spec.partition;
    const int n_sub = part.subset_count();
    const int gate_dim = spec.gated() ? n_sub : 0;
    if (static_cast<int>(scores.values.size()) != spec.score_dim())
        throw DataError("score vector has wrong dimension");

    HeadEval ev;
    ev.grad.assign(scores.values.size(), 0.0);

    // softmax per block
    if (spec.gated()) {
        std::vector<double> gs(scores.values.begin(), scores.values.begin() + gate_dim);
        ev.outputs.gate = softmax(gs);
    } else {
        ev.outputs.gate = {1.0};
    }
    int off = gate_dim;
    for (int s = 0; s < n_sub; ++s) {
        const int sz = part.subset_size(s);
        std::vector<double> ws(scores.values.begin() + off, scores.values.begin() + off + sz);
        ev.outputs.within.push_back(softmax(ws));
        off += sz;
    }

    ev.pmf = combine(ev.outputs, part);
    ev.expectation_f = expectation(ev.pmf);

    const int s_gt = part.subset_of(c_gt);

    // losses
    if (spec.gated()) ev.loss.htt = httc_loss(ev.outputs.gate, c_gt, part);
    ev.loss.ce = ce_loss(ev.pmf, c_gt);
    if (spec.hybrid()) ev.loss.reg = reg_loss(ev.expectation_f, c_gt);
    if (spec.mtl_roof) {
        if (!roof_flat) throw DataError("MTL variant requires a roof label");
        ev.roof_prob = headdetail::sigmoid(scores.values.back());
        ev.loss.roof = roof_aux_loss(ev.roof_prob, *roof_flat);
    }
    ev.loss.total = ev.loss.htt + ev.loss.ce + ev.loss.reg + ev.loss.roof;

    // gradients -----------------------------------------------------------
    // subset expectations m_s = sum_{c in s} c * within_s[c]
    std::vector<double> m_sub(n_sub, 0.0);
    for (int s = 0; s < n_sub; ++s) {
        const auto [lo, hi] = part.range(s);
        for (int c = lo; c <= hi; ++c) m_sub[s] += c * ev.outputs.within[s][c - lo];
    }

    // gate scores: d(htt)/du = d(ce)/du = g - onehot(s_gt);
    // dF/du_j = g_j (m_j - F)
    if (spec.gated()) {
        const double ce_terms = 2.0;  // htt + the gate factor inside ce
        const double dreg_df = spec.hybrid() ? (ev.expectation_f > c_gt  ? 1.0
                                                : ev.expectation_f < c_gt ? -1.0
                                                                           : 0.0)
                                             : 0.0;
        for (int j = 0; j < n_sub; ++j) {
            const double g = ev.outputs.gate[j];
            double grad = ce_terms * (g - (j == s_gt ? 1.0 : 0.0));
            grad += dreg_df * g * (m_sub[j] - ev.expectation_f);
            ev.grad[j] = grad;
        }
    }

    // within scores: ce contributes only to the true subset's block;
    // dF/dv_s[c] = g_s w_s[c] (c - m_s)
    {
        const double dreg_df = spec.hybrid() ? (ev.expectation_f > c_gt  ? 1.0
                                                : ev.expectation_f < c_gt ? -1.0
                                                                           : 0.0)
                                             : 0.0;
        int voff = gate_dim;
        for (int s = 0; s < n_sub; ++s) {
            const auto [lo, hi] = part.range(s);
            const double g = ev.outputs.gate[s];
            for (int c = lo; c <= hi; ++c) {
                const double w = ev.outputs.within[s][c - lo];
                double grad = 0.0;
                if (s == s_gt) grad += w - (c == c_gt ? 1.0 : 0.0);
                grad += dreg_df * g * w * (c - m_sub[s]);
                ev.grad[voff + (c - lo)] = grad;
            }
            voff += part.subset_size(s);
        }
    }

    if (spec.mtl_roof)
        ev.grad.back() = ev.roof_prob - (*roof_flat ? 1.0 : 0.0);

    ev.prediction = spec.hybrid() ? predict(ev.expectation_f) : argmax_class(ev.pmf);
    return ev;
}

}  // namespace floorcast
