#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "floorcast/csv.hpp"
#include "floorcast/errors.hpp"
#include "floorcast/head.hpp"

namespace floorcast {

// The four benchmark metrics plus a row-normalized confusion matrix.
struct EvalReport {
    double accuracy = 0.0;      // exact hits / N
    double accuracy_pm1 = 0.0;  // |pred - gt| <= 1
    double mae = 0.0;           // floors
    double rmse = 0.0;          // floors
    size_t n = 0;
    // confusion[gt][pred] as percentage of ground-truth row gt; rows without
    // samples are all-zero and listed in empty_rows
    std::vector<std::vector<double>> confusion;
    std::vector<int> empty_rows;
};

inline EvalReport evaluate(const std::vector<int>& preds, const std::vector<int>& gts) {
    if (preds.size() != gts.size())
        throw DataError("LengthMismatch: " + std::to_string(preds.size()) + " predictions vs " +
                        std::to_string(gts.size()) + " labels");
    if (preds.empty()) throw DataError("EmptyInput: nothing to evaluate");

    EvalReport r;
    r.n = preds.size();
    r.confusion.assign(kNumClasses, std::vector<double>(kNumClasses, 0.0));
    std::vector<int> row_totals(kNumClasses, 0);

    size_t exact = 0, within1 = 0;
    double abs_sum = 0.0, sq_sum = 0.0;
    for (size_t i = 0; i < preds.size(); ++i) {
        const int p = preds[i];
        const int g = gts[i];
        if (p < 0 || p >= kNumClasses || g < 0 || g >= kNumClasses)
            throw DataError("floor class out of range at row " + std::to_string(i));
        const int diff = p - g;
        if (diff == 0) ++exact;
        if (std::abs(diff) <= 1) ++within1;
        abs_sum += std::abs(diff);
        sq_sum += static_cast<double>(diff) * diff;
        r.confusion[g][p] += 1.0;
        row_totals[g] += 1;
    }
    const double n = static_cast<double>(r.n);
    r.accuracy = static_cast<double>(exact) / n;
    r.accuracy_pm1 = static_cast<double>(within1) / n;
    r.mae = abs_sum / n;
    r.rmse = std::sqrt(sq_sum / n);

    for (int g = 0; g < kNumClasses; ++g) {
        if (row_totals[g] == 0) {
            r.empty_rows.push_back(g);
            continue;
        }
        for (int p = 0; p < kNumClasses; ++p)
            r.confusion[g][p] = r.confusion[g][p] * 100.0 / row_totals[g];
    }
    return r;
}

struct MetricStats {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation (n-1)
};

struct RunAggregate {
    MetricStats accuracy, accuracy_pm1, mae, rmse;
    size_t runs = 0;
};

// Mean +/- sample standard deviation over repeated runs.
inline RunAggregate aggregate_runs(const std::vector<EvalReport>& reports) {
    if (reports.size() < 2) throw DataError("TooFewRuns: need at least 2 reports");
    auto stats = [&](auto metric) {
        MetricStats s;
        for (const auto& r : reports) s.mean += metric(r);
        s.mean /= static_cast<double>(reports.size());
        double acc = 0.0;
        for (const auto& r : reports) {
            const double d = metric(r) - s.mean;
            acc += d * d;
        }
        s.stddev = std::sqrt(acc / static_cast<double>(reports.size() - 1));
        return s;
    };
    RunAggregate agg;
    agg.runs = reports.size();
    agg.accuracy = stats([](const EvalReport& r) { return r.accuracy; });
    agg.accuracy_pm1 = stats([](const EvalReport& r) { return r.accuracy_pm1; });
    agg.mae = stats([](const EvalReport& r) { return r.mae; });
    agg.rmse = stats([](const EvalReport& r) { return r.rmse; });
    return agg;
}

// Paired CSV with columns pred,gt (floor classes).
inline std::pair<std::vector<int>, std::vector<int>> parse_pairs_csv(const std::string& text) {
    CsvTable t = parse_csv(text);
    const int pc = t.require_column("pred");
    const int gc = t.require_column("gt");
    std::vector<int> preds, gts;
    for (const auto& row : t.rows) {
        preds.push_back(static_cast<int>(parse_int(row[pc], "pred")));
        gts.push_back(static_cast<int>(parse_int(row[gc], "gt")));
    }
    return {preds, gts};
}

inline std::string report_to_json(const EvalReport& r) {
    nlohmann::json doc;
    doc["format"] = "floorcast-eval";
    doc["n"] = r.n;
    doc["accuracy"] = r.accuracy;
    doc["accuracy_pm1"] = r.accuracy_pm1;
    doc["mae"] = r.mae;
    doc["rmse"] = r.rmse;
    doc["empty_rows"] = r.empty_rows;
    return doc.dump(2) + "\n";
}

// 18x18 row-percentage matrix; header names prediction classes.
inline std::string confusion_to_csv(const EvalReport& r) {
    std::string out = "gt";
    for (int p = 0; p < kNumClasses; ++p) out += ",pred_" + std::to_string(p);
    out += "\n";
    for (int g = 0; g < kNumClasses; ++g) {
        out += std::to_string(g);
        for (int p = 0; p < kNumClasses; ++p) out += "," + fmt_double(r.confusion[g][p], 4);
        out += "\n";
    }
    return out;
}

}  // namespace floorcast
