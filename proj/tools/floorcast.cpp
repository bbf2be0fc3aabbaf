#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "floorcast/config.hpp"
#include "floorcast/csv.hpp"
#include "floorcast/errors.hpp"
#include "floorcast/evaluation.hpp"
#include "floorcast/footprint_store.hpp"
#include "floorcast/fsio.hpp"
#include "floorcast/logging.hpp"
#include "floorcast/matcher.hpp"
#include "floorcast/metadata.hpp"
#include "floorcast/model.hpp"
#include "floorcast/planner.hpp"
#include "floorcast/quality.hpp"
#include "floorcast/stats.hpp"

namespace fc = floorcast;

namespace {

// Shared flags; per-subcommand fields are filled by CLI11 before callbacks run.
struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed_override;

    std::string metadata_path, footprints_path, crops_path, summaries_path;
    std::string dataset_path, model_path, features_path, pairs_path, records_path;
    std::string quota_path, store_path;

    std::string out, out_kept, out_gpx, out_rejects, out_route, out_legs, out_shortfall;
    std::string out_histogram, out_heights, out_report, out_confusion;
    std::string model_out, log_out, save_store;

    int jobs = 1;
    int dense_rays = 0;  // 0 -> bisection matcher
    bool closed_tour = false;

    std::optional<double> min_quality;
    std::optional<std::string> bbox;
    std::optional<int> utc_offset_minutes;
    std::optional<std::string> variant;
    std::optional<std::string> cuts;
    std::optional<std::string> hidden;
    bool mtl_roof = false;
    std::optional<int> epochs;
    std::optional<int> batch_size;
    std::optional<double> learning_rate;
};

fc::PipelineConfig load_config(const Options& opt) {
    fc::PipelineConfig cfg;
    if (!opt.config_path.empty()) {
        if (!std::filesystem::exists(opt.config_path))
            throw fc::ConfigError("config", "file not found: " + opt.config_path);
        cfg = fc::parse_pipeline_config(fc::read_text_file(opt.config_path));
    }
    if (opt.seed_override) {
        cfg.seed = *opt.seed_override;
        cfg.train.seed = *opt.seed_override;
    }
    if (opt.min_quality) cfg.filter.min_quality = *opt.min_quality;
    if (opt.utc_offset_minutes) cfg.filter.utc_offset_minutes = *opt.utc_offset_minutes;
    if (opt.bbox) {
        std::vector<double> nums;
        std::istringstream ss(*opt.bbox);
        std::string item;
        while (std::getline(ss, item, ',')) nums.push_back(fc::parse_double(item, "bbox"));
        if (nums.size() != 4)
            throw fc::ConfigError("filter.bbox", "expected lon_min,lat_min,lon_max,lat_max");
        cfg.filter.bounding_box = {nums[0], nums[1], nums[2], nums[3]};
    }
    if (opt.variant) cfg.train.variant = fc::variant_from_string(*opt.variant);
    if (opt.cuts) {
        cfg.train.cuts.clear();
        std::istringstream ss(*opt.cuts);
        std::string item;
        while (std::getline(ss, item, ','))
            cfg.train.cuts.push_back(static_cast<int>(fc::parse_int(item, "cuts")));
    }
    if (opt.hidden) {
        cfg.train.hidden.clear();
        std::istringstream ss(*opt.hidden);
        std::string item;
        while (std::getline(ss, item, ','))
            cfg.train.hidden.push_back(static_cast<int>(fc::parse_int(item, "hidden")));
    }
    if (opt.mtl_roof) cfg.train.mtl_roof = true;
    if (opt.epochs) cfg.train.epochs = *opt.epochs;
    if (opt.batch_size) cfg.train.batch_size = *opt.batch_size;
    if (opt.learning_rate) cfg.train.learning_rate = *opt.learning_rate;
    return cfg;
}

// Inputs declared via config or flags must resolve before work starts.
std::string read_input(const std::string& field, const std::string& path) {
    if (path.empty()) throw fc::ConfigError(field, "no path configured");
    if (!std::filesystem::exists(path))
        throw fc::ConfigError(field, "file not found: " + path);
    return fc::read_text_file(path);
}

// Loads GeoJSON or a snapshot; rejected features and ignored holes go to the
// log so the pipeline stays auditable.
fc::FootprintStore load_store_logged(const std::string& text, double cell_size_deg) {
    if (text.find("\"floorcast-store\"") != std::string::npos)
        return fc::store_from_json(text);
    fc::LoadResult loaded = fc::load_footprints(text, cell_size_deg);
    for (const auto& issue : loaded.issues)
        fc::log_warn("footprints", "feature " + std::to_string(issue.feature_index) +
                                       (issue.id.empty() ? "" : " (" + issue.id + ")") +
                                       " rejected: " + issue.message);
    if (loaded.holes_ignored)
        fc::log_warn("footprints",
                     std::to_string(loaded.holes_ignored) + " interior ring(s) ignored");
    return std::move(loaded.store);
}

std::string pick(const std::string& flag_value, const std::string& config_value) {
    return flag_value.empty() ? config_value : flag_value;
}

int run_ingest(const Options& opt) {
    const auto cfg = load_config(opt);
    const std::string text =
        read_input("paths.metadata", pick(opt.metadata_path, cfg.metadata_path));
    const auto parsed = fc::parse_metadata(text);
    const auto filtered = fc::filter_metadata(parsed.metas, cfg.filter);
    fc::log_info("ingest", std::to_string(parsed.metas.size()) + " parsed, " +
                               std::to_string(parsed.issues.size()) + " invalid, " +
                               std::to_string(filtered.kept.size()) + " kept, " +
                               std::to_string(filtered.rejected.size()) + " rejected");
    if (!opt.out_kept.empty())
        fc::atomic_write_text(opt.out_kept, fc::metas_to_json(filtered.kept));
    if (!opt.out_rejects.empty())
        fc::atomic_write_text(opt.out_rejects, fc::rejects_to_csv(parsed, filtered));
    if (!opt.out_gpx.empty()) {
        if (filtered.kept.empty()) {
            fc::log_warn("ingest", "no records kept; skipping GPX export");
        } else {
            fc::atomic_write_text(opt.out_gpx, fc::export_gpx(filtered.kept));
        }
    }
    return 0;
}

int run_match(const Options& opt) {
    const auto cfg = load_config(opt);
    const std::string store_text =
        read_input("paths.footprints", pick(opt.footprints_path, cfg.footprints_path));
    const fc::FootprintStore store = load_store_logged(store_text, cfg.matcher.cell_size_deg);
    fc::log_info("match", "store loaded with " + std::to_string(store.size()) + " footprints");
    if (!opt.save_store.empty())
        fc::atomic_write_text(opt.save_store, fc::store_to_json(store));

    const auto parsed = fc::parse_metadata(
        read_input("paths.metadata", pick(opt.metadata_path, cfg.metadata_path)));
    const auto crops =
        fc::parse_crops_json(read_input("paths.crops", pick(opt.crops_path, cfg.crops_path)));

    // group crop boxes by image, numbered in file order
    std::map<std::string, std::vector<fc::CropBox>> by_image;
    for (const auto& c : crops) by_image[c.image_id].push_back(c);

    struct Row {
        std::string image_id;
        int crop_index;
        fc::MatchResult result;
    };
    std::vector<std::vector<Row>> rows(parsed.metas.size());

    auto process = [&](size_t mi) {
        const auto& meta = parsed.metas[mi];
        auto it = by_image.find(meta.image_id);
        if (it == by_image.end()) return;
        const auto candidates =
            store.query_buffer(meta.position(), cfg.matcher.buffer_radius_m);
        fc::CameraView cam{meta.position(), meta.heading_deg, cfg.matcher.hfov_deg,
                           meta.width_px};
        for (size_t ci = 0; ci < it->second.size(); ++ci) {
            const auto interval = fc::crop_bearings(it->second[ci], cam);
            fc::MatchResult res =
                opt.dense_rays >= 2
                    ? fc::match_dense(meta.position(), interval, candidates, opt.dense_rays,
                                      cfg.matcher.max_range_m)
                    : fc::match_bisect(meta.position(), interval, candidates,
                                       cfg.matcher.eps_deg, cfg.matcher.max_range_m);
            rows[mi].push_back({meta.image_id, static_cast<int>(ci), std::move(res)});
        }
    };

    const int jobs = std::max(1, opt.jobs);
    if (jobs == 1) {
        for (size_t mi = 0; mi < parsed.metas.size(); ++mi) process(mi);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> workers;
        for (int w = 0; w < jobs; ++w)
            workers.emplace_back([&]() {
                for (size_t mi = next.fetch_add(1); mi < parsed.metas.size();
                     mi = next.fetch_add(1))
                    process(mi);
            });
        for (auto& t : workers) t.join();
    }

    std::string out = "image_id,crop_index,footprint_id,confidence,rays_cast\n";
    for (const auto& per_meta : rows)
        for (const auto& r : per_meta)
            out += fc::csv_join({r.image_id, std::to_string(r.crop_index),
                                 r.result.footprint_id.value_or(""),
                                 fc::fmt_double(r.result.confidence, 6),
                                 std::to_string(r.result.rays_cast)}) +
                   "\n";
    fc::atomic_write_text(opt.out.empty() ? "matches.csv" : opt.out, out);
    return 0;
}

int run_filter(const Options& opt) {
    const auto cfg = load_config(opt);
    const auto summaries = fc::parse_summaries_any(
        read_input("paths.summaries", pick(opt.summaries_path, cfg.summaries_path)));

    std::vector<std::pair<fc::SegmentationSummary, fc::FilterDecision>> decided(
        summaries.size());
    const int jobs = std::max(1, opt.jobs);
    auto process = [&](size_t i) {
        decided[i] = {summaries[i], fc::evaluate_filters(summaries[i], cfg.quality)};
    };
    if (jobs == 1) {
        for (size_t i = 0; i < summaries.size(); ++i) process(i);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> workers;
        for (int w = 0; w < jobs; ++w)
            workers.emplace_back([&]() {
                for (size_t i = next.fetch_add(1); i < summaries.size(); i = next.fetch_add(1))
                    process(i);
            });
        for (auto& t : workers) t.join();
    }
    size_t kept = 0;
    for (const auto& [s, d] : decided)
        if (d.keep()) ++kept;
    fc::log_info("filter", std::to_string(kept) + " of " + std::to_string(decided.size()) +
                               " crops kept");
    fc::atomic_write_text(opt.out.empty() ? "decisions.csv" : opt.out,
                          fc::decisions_to_csv(decided));
    return 0;
}

int run_plan(const Options& opt) {
    const auto cfg = load_config(opt);
    const fc::FootprintStore store = load_store_logged(
        read_input("paths.footprints", pick(opt.footprints_path, cfg.footprints_path)),
        cfg.matcher.cell_size_deg);
    if (!opt.save_store.empty())
        fc::atomic_write_text(opt.save_store, fc::store_to_json(store));
    const fc::Quota quota = fc::parse_quota_json(read_input("quota", opt.quota_path));

    const auto selection = fc::select_targets(store, quota, cfg.seed);
    for (const auto& s : selection.shortfalls)
        if (s.selected < s.requested)
            fc::log_warn("plan", "floor " + std::to_string(s.floor_count) + ": only " +
                                     std::to_string(s.selected) + " of " +
                                     std::to_string(s.requested) + " available");
    if (!opt.out_shortfall.empty())
        fc::atomic_write_text(opt.out_shortfall,
                              fc::shortfalls_to_csv(selection.shortfalls));

    const auto plan =
        fc::make_plan(selection.targets, quota.photos_per_building, opt.closed_tour);
    fc::log_info("plan", std::to_string(plan.stops.size()) + " stops, " +
                             fc::fmt_double(plan.total_distance_m / 1000.0, 2) + " km");
    if (!opt.out_route.empty()) fc::atomic_write_text(opt.out_route, fc::route_to_gpx(plan));
    if (!opt.out_legs.empty()) fc::atomic_write_text(opt.out_legs, fc::route_to_csv(plan));
    return 0;
}

int run_stats(const Options& opt) {
    const auto records = fc::parse_records_csv(read_input("records", opt.records_path));
    const auto hist = fc::floor_histogram(records);
    fc::atomic_write_text(opt.out_histogram.empty() ? "histogram.csv" : opt.out_histogram,
                          fc::histogram_to_csv(hist));
    if (!opt.out_heights.empty()) {
        const fc::FootprintStore store =
            load_store_logged(read_input("store", opt.store_path), 0.005);
        const auto exported = fc::height_floor_export(store.all());
        if (exported.skipped)
            fc::log_info("stats", std::to_string(exported.skipped) +
                                      " footprints lacked floors or height");
        fc::atomic_write_text(opt.out_heights, exported.csv);
    }
    return 0;
}

int run_train(const Options& opt) {
    auto cfg = load_config(opt);
    fc::Dataset data = fc::load_dataset_csv(read_input("dataset", opt.dataset_path));
    cfg.train.feature_dim = data.feature_dim;
    const auto result = fc::train(cfg.train, data);
    fc::log_info("train", "best val accuracy " +
                              fc::fmt_double(result.best_val_accuracy, 4) + " at epoch " +
                              std::to_string(result.best_epoch));
    fc::atomic_write_text(opt.model_out.empty() ? "model.json" : opt.model_out,
                          fc::model_to_json(result.model));
    if (!opt.log_out.empty())
        fc::atomic_write_text(opt.log_out, fc::epoch_log_to_csv(result.log));
    return 0;
}

int run_infer(const Options& opt) {
    const auto model = fc::model_from_json(read_input("model", opt.model_path));
    const fc::Dataset data = fc::load_dataset_csv(read_input("features", opt.features_path));
    if (data.feature_dim != model.config.feature_dim)
        throw fc::DataError("feature dimension mismatch: dataset " +
                            std::to_string(data.feature_dim) + ", model " +
                            std::to_string(model.config.feature_dim));
    const auto spec = model.spec();
    std::string out = "id,pred_class,expectation_f\n";
    for (size_t i = 0; i < data.size(); ++i) {
        const auto ev =
            fc::head_eval(fc::HeadScores{model.net.scores(data.features[i])}, spec, 0,
                          spec.mtl_roof ? std::optional<bool>(true) : std::nullopt);
        const std::string id = data.ids[i].empty() ? std::to_string(i) : data.ids[i];
        out += fc::csv_join({id, std::to_string(ev.prediction),
                             fc::fmt_double(ev.expectation_f, 6)}) +
               "\n";
    }
    fc::atomic_write_text(opt.out.empty() ? "predictions.csv" : opt.out, out);
    return 0;
}

int run_eval(const Options& opt) {
    const auto [preds, gts] = fc::parse_pairs_csv(read_input("pairs", opt.pairs_path));
    const auto report = fc::evaluate(preds, gts);
    fc::log_info("eval", "accuracy " + fc::fmt_double(report.accuracy, 4) + ", accuracy_pm1 " +
                             fc::fmt_double(report.accuracy_pm1, 4) + ", mae " +
                             fc::fmt_double(report.mae, 4) + ", rmse " +
                             fc::fmt_double(report.rmse, 4));
    if (!opt.out_report.empty())
        fc::atomic_write_text(opt.out_report, fc::report_to_json(report));
    if (!opt.out_confusion.empty())
        fc::atomic_write_text(opt.out_confusion, fc::confusion_to_csv(report));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"floorcast: street-level imagery to building floor counts"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "pipeline config file (INI)");
        sub->add_option("--seed", opt.seed_override, "override the configured seed");
    };

    auto* ingest = app.add_subcommand("ingest", "parse and filter image metadata");
    add_common(ingest);
    ingest->add_option("--metadata", opt.metadata_path, "metadata JSON array");
    ingest->add_option("--out-kept", opt.out_kept, "kept metadata JSON");
    ingest->add_option("--out-gpx", opt.out_gpx, "GPX waypoints of kept images");
    ingest->add_option("--out-rejects", opt.out_rejects, "rejection log CSV");
    ingest->add_option("--min-quality", opt.min_quality, "minimum quality score");
    ingest->add_option("--utc-offset-minutes", opt.utc_offset_minutes,
                       "local time = UTC + offset");
    ingest->add_option("--bbox", opt.bbox, "lon_min,lat_min,lon_max,lat_max");

    auto* match = app.add_subcommand("match", "match crops to footprints by ray voting");
    add_common(match);
    match->add_option("--footprints", opt.footprints_path, "GeoJSON or store snapshot");
    match->add_option("--metadata", opt.metadata_path, "metadata JSON array");
    match->add_option("--crops", opt.crops_path, "crop boxes JSON");
    match->add_option("--out", opt.out, "matches CSV");
    match->add_option("--save-store", opt.save_store, "persist the store snapshot");
    match->add_option("--dense", opt.dense_rays,
                      "use a dense matcher with N rays instead of bisection");
    match->add_option("--jobs", opt.jobs, "parallel workers over images");

    auto* filter = app.add_subcommand("filter", "apply segmentation quality filters");
    add_common(filter);
    filter->add_option("--summaries", opt.summaries_path, "summaries CSV or JSON");
    filter->add_option("--out", opt.out, "decision CSV");
    filter->add_option("--jobs", opt.jobs, "parallel workers");

    auto* plan = app.add_subcommand("plan", "select targets and plan a capture route");
    add_common(plan);
    plan->add_option("--footprints", opt.footprints_path, "GeoJSON or store snapshot");
    plan->add_option("--quota", opt.quota_path, "quota JSON");
    plan->add_option("--out-route", opt.out_route, "route GPX");
    plan->add_option("--out-legs", opt.out_legs, "leg distances CSV");
    plan->add_option("--out-shortfall", opt.out_shortfall, "per-category shortfall CSV");
    plan->add_option("--save-store", opt.save_store, "persist the store snapshot");
    plan->add_flag("--closed", opt.closed_tour, "return to the first building");

    auto* stats = app.add_subcommand("stats", "dataset distribution tables");
    add_common(stats);
    stats->add_option("--records", opt.records_path, "dataset records CSV");
    stats->add_option("--store", opt.store_path, "footprints for the height export");
    stats->add_option("--out-histogram", opt.out_histogram, "per-floor histogram CSV");
    stats->add_option("--out-heights", opt.out_heights, "height vs floor CSV");

    auto* train = app.add_subcommand("train", "train the floor-estimation head");
    add_common(train);
    train->add_option("--dataset", opt.dataset_path, "labeled feature CSV");
    train->add_option("--model-out", opt.model_out, "trained model JSON");
    train->add_option("--log-out", opt.log_out, "per-epoch log CSV");
    train->add_option("--variant", opt.variant, "plain|htc|httc|hyb|hyb_httc");
    train->add_option("--cuts", opt.cuts, "partition cut points, e.g. 5,11");
    train->add_option("--hidden", opt.hidden, "hidden layer widths, e.g. 32,16");
    train->add_flag("--mtl-roof", opt.mtl_roof, "add the binary roof-type head");
    train->add_option("--epochs", opt.epochs, "training epochs");
    train->add_option("--batch-size", opt.batch_size, "minibatch size");
    train->add_option("--lr", opt.learning_rate, "Adam learning rate");

    auto* infer = app.add_subcommand("infer", "predict floor classes for features");
    add_common(infer);
    infer->add_option("--model", opt.model_path, "trained model JSON");
    infer->add_option("--features", opt.features_path, "feature CSV");
    infer->add_option("--out", opt.out, "predictions CSV");

    auto* eval = app.add_subcommand("eval", "metrics over prediction/label pairs");
    add_common(eval);
    eval->add_option("--pairs", opt.pairs_path, "CSV with pred,gt columns");
    eval->add_option("--out-report", opt.out_report, "metric report JSON");
    eval->add_option("--out-confusion", opt.out_confusion, "confusion matrix CSV");

    try {
        app.parse(argc, argv);
        if (ingest->parsed()) return run_ingest(opt);
        if (match->parsed()) return run_match(opt);
        if (filter->parsed()) return run_filter(opt);
        if (plan->parsed()) return run_plan(opt);
        if (stats->parsed()) return run_stats(opt);
        if (train->parsed()) return run_train(opt);
        if (infer->parsed()) return run_infer(opt);
        if (eval->parsed()) return run_eval(opt);
        return 1;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const fc::ConfigError& e) {
        fc::log_error("cli", std::string("config error: ") + e.what());
        return 1;
    } catch (const fc::MalformedDocument& e) {
        fc::log_error("cli", std::string("malformed input: ") + e.what());
        return 2;
    } catch (const std::exception& e) {
        fc::log_error("cli", e.what());
        return 2;
    }
}
