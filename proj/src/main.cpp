#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "atcd/analysis.hpp"
#include "atcd/baselines.hpp"
#include "atcd/demand.hpp"
#include "atcd/errors.hpp"
#include "atcd/features.hpp"
#include "atcd/graph.hpp"
#include "atcd/indicators.hpp"
#include "atcd/report.hpp"
#include "atcd/synth.hpp"
#include "atcd/train.hpp"
#include "atcd/types.hpp"

namespace {

using nlohmann::json;
using namespace atcd;

std::string iso8601_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Shared metadata comment, suppressed under --deterministic so outputs are
// byte-identical across runs.
void stamp(report::CsvWriter& csv, bool deterministic) {
    if (!deterministic) csv.comment("generated_at " + iso8601_now());
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw data_error("cannot open output file: " + path);
    return out;
}

std::string num(double v) { return report::format_number(v); }

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw config_error("malformed config " + path + ": " + e.what());
    }
}

template <typename T>
void maybe_set(const json& j, const char* key, T& target) {
    if (j.contains(key)) target = j.at(key).get<T>();
}

synth::SynthConfig load_synth_config(const std::string& path, std::uint64_t seed) {
    synth::SynthConfig cfg = synth::default_config(seed);
    if (path.empty()) return cfg;
    const json j = load_json_file(path);
    maybe_set(j, "arrival_rate_per_hour", cfg.arrival_rate_per_hour);
    maybe_set(j, "duration_s", cfg.duration_s);
    maybe_set(j, "snapshot_interval_s", cfg.snapshot_interval_s);
    maybe_set(j, "horizon_s", cfg.horizon_s);
    if (j.contains("sector")) {
        const json& js = j.at("sector");
        maybe_set(js, "id", cfg.sector.id);
        maybe_set(js, "buffer_deg", cfg.sector.buffer_deg);
        maybe_set(js, "fl_lo", cfg.sector.fl_band.lo);
        maybe_set(js, "fl_hi", cfg.sector.fl_band.hi);
        if (js.contains("polygon")) {
            cfg.sector.polygon.clear();
            for (const auto& v : js.at("polygon"))
                cfg.sector.polygon.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
            cfg.routes = synth::default_route_templates(cfg.sector);
        }
    }
    if (j.contains("knobs")) {
        const json& jk = j.at("knobs");
        auto& kn = cfg.knobs;
        maybe_set(jk, "blocker_radius_nm", kn.blocker_radius_nm);
        maybe_set(jk, "caution_radius_nm", kn.caution_radius_nm);
        maybe_set(jk, "caution_step_fl", kn.caution_step_fl);
        maybe_set(jk, "cpa_threshold_nm", kn.cpa_threshold_nm);
        maybe_set(jk, "cpa_lookahead_s", kn.cpa_lookahead_s);
        maybe_set(jk, "vector_turn_deg", kn.vector_turn_deg);
        maybe_set(jk, "vector_cooldown_s", kn.vector_cooldown_s);
        maybe_set(jk, "restore_clear_nm", kn.restore_clear_nm);
        maybe_set(jk, "intrail_gap_nm", kn.intrail_gap_nm);
        maybe_set(jk, "intrail_track_dot", kn.intrail_track_dot);
        maybe_set(jk, "speed_factor", kn.speed_factor);
        maybe_set(jk, "handoff_tte_s", kn.handoff_tte_s);
        maybe_set(jk, "force_clear_tte_s", kn.force_clear_tte_s);
    }
    return cfg;
}

std::map<std::string, double> load_weights(const std::string& path) {
    const json j = load_json_file(path);
    std::map<std::string, double> weights;
    for (const auto& [key, value] : j.items()) weights[key] = value.get<double>();
    return weights;
}

const char* kind_name(NormKind k) {
    switch (k) {
        case NormKind::zscore: return "zscore";
        case NormKind::maxabs: return "maxabs";
        case NormKind::integer_class: return "class";
        case NormKind::passthrough: return "passthrough";
    }
    return "?";
}

// Minimal CSV reader for the report subcommand (inputs are our own files).
std::vector<std::string> parse_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else {
            cell += c;
        }
    }
    cells.push_back(cell);
    return cells;
}

struct CommonOpts {
    std::uint64_t seed = 0;
    bool deterministic = false;
    int threads = 1;
};

void cmd_generate(const CommonOpts& common, const std::string& config_path, double hours,
                  double rate, double interval, const std::string& out) {
    synth::SynthConfig cfg = load_synth_config(config_path, common.seed);
    if (hours > 0.0) cfg.duration_s = hours * 3600.0;
    if (rate > 0.0) cfg.arrival_rate_per_hour = rate;
    if (interval > 0.0) cfg.snapshot_interval_s = interval;
    const auto stream = synth::generate_stream(cfg);
    const auto labeled = synth::oracle_controller(stream, cfg.sector, cfg.horizon_s, cfg.knobs);
    synth::write_dataset(out, labeled);
    std::size_t rows = 0;
    for (const auto& s : labeled) rows += s.aircraft.size();
    std::cout << "wrote " << labeled.size() << " scenarios (" << rows << " aircraft rows) to "
              << out << "\n";
}

void cmd_features(const CommonOpts& common, bool manifest, const std::string& data,
                  const std::string& out) {
    if (manifest) {
        std::cout << "slot,name,kind\n";
        const auto& names = node_feature_names();
        for (std::size_t i = 0; i < names.size(); ++i) {
            const int slot = static_cast<int>(i);
            std::string kind = kind_name(node_feature_kind(slot));
            if (node_feature_kind(slot) == NormKind::integer_class)
                kind += std::to_string(node_feature_classes(slot));
            std::cout << i << "," << names[i] << "," << kind << "\n";
        }
        std::cout << "edge,edge_separation,zscore\nedge,edge_closing,maxabs\n";
        return;
    }
    if (data.empty() || out.empty())
        throw config_error("features needs --data and --out (or --manifest)");
    const auto scenarios = synth::read_dataset(data);
    const auto stats = fit_normalization(scenarios);
    auto file = open_out(out);
    report::CsvWriter csv(file);
    stamp(csv, common.deterministic);
    std::vector<std::string> header = {"timestamp", "callsign"};
    for (const auto& name : node_feature_names()) header.push_back(name);
    csv.row(header);
    for (const auto& s : scenarios)
        for (const auto& a : s.aircraft) {
            const auto enc = encode_node_features(a, stats);
            std::vector<std::string> row = {num(s.timestamp), a.callsign};
            for (double v : enc) row.push_back(num(v));
            csv.row(row);
        }
}

void cmd_train(const CommonOpts& common, const std::string& data, int folds, int epochs,
               const std::string& out_dir) {
    const auto scenarios = synth::read_dataset(data);
    gnn::TrainConfig cfg;
    cfg.seed = common.seed;
    if (epochs >= 0) cfg.epochs = epochs;
    const auto result = cross_validate(scenarios, folds, cfg, common.threads);
    save_ensemble(out_dir, result.ensemble);

    auto metrics = open_out(out_dir + "/metrics.csv");
    report::CsvWriter csv(metrics);
    stamp(csv, common.deterministic);
    csv.row({"fold", "epoch", "train_loss", "val_loss", "val_mae"});
    for (const auto& member : result.ensemble.members)
        for (const auto& point : member.trace)
            csv.row({std::to_string(member.fold_id), std::to_string(point.epoch),
                     num(point.train_loss), num(point.val_loss), num(point.val_mae)});
    auto folds_file = open_out(out_dir + "/folds.csv");
    report::CsvWriter fcsv(folds_file);
    stamp(fcsv, common.deterministic);
    fcsv.row({"fold", "test_mae", "test_ci95", "best_epoch", "best_val_loss"});
    for (const auto& fold : result.folds) {
        fcsv.row({std::to_string(fold.fold_id), num(fold.test_mae), num(fold.test_ci95),
                  std::to_string(fold.best_epoch), num(fold.best_val_loss)});
        std::cout << "fold " << fold.fold_id << ": test MAE " << num(fold.test_mae) << " +/- "
                  << num(fold.test_ci95) << "\n";
    }
    std::cout << "ensemble written to " << out_dir << "\n";
}

void cmd_evaluate(const CommonOpts& common, const std::string& checkpoint_dir,
                  const std::string& data, const std::string& out, const std::string& buckets_out,
                  const std::string& svg_out, const std::string& weights_path) {
    const auto ensemble = load_ensemble(checkpoint_dir);
    const auto scenarios = synth::read_dataset(data);
    const auto graphs = analysis::build_eval_graphs(ensemble, scenarios);
    const auto eval = analysis::ensemble_eval_vectors(ensemble, graphs);

    struct Method {
        std::string name;
        std::vector<double> preds;
    };
    std::vector<Method> methods;
    methods.push_back({"gnn_ensemble", eval.preds});
    Method min_c{"min_clearance", {}};
    for (const auto& s : scenarios)
        min_c.preds.push_back(static_cast<double>(baselines::minimum_clearance(s)));
    methods.push_back(std::move(min_c));
    if (!weights_path.empty()) {
        const auto weights = load_weights(weights_path);
        Method lin{"linear", {}};
        for (const auto& s : scenarios) lin.preds.push_back(baselines::linear_complexity(s, weights));
        methods.push_back(std::move(lin));
    }

    auto file = open_out(out);
    report::CsvWriter csv(file);
    stamp(csv, common.deterministic);
    csv.row({"method", "mae", "ci95", "n"});
    for (const auto& m : methods) {
        const auto [mae, ci] = analysis::mae_with_ci(m.preds, eval.targets);
        csv.row({m.name, num(mae), num(ci), std::to_string(eval.targets.size())});
    }
    // Paired test of the model against the minimum-clearance heuristic.
    std::vector<double> err_gnn(eval.preds.size()), err_min(eval.preds.size());
    for (std::size_t i = 0; i < eval.preds.size(); ++i) {
        err_gnn[i] = std::abs(methods[0].preds[i] - eval.targets[i]);
        err_min[i] = std::abs(methods[1].preds[i] - eval.targets[i]);
    }
    csv.comment("wilcoxon_p_gnn_vs_min_clearance " +
                num(analysis::wilcoxon_signed_rank(err_gnn, err_min)));

    auto bfile = open_out(buckets_out);
    report::CsvWriter bcsv(bfile);
    stamp(bcsv, common.deterministic);
    bcsv.row({"method", "bucket", "lo", "hi", "count", "mae", "median_signed_error"});
    std::vector<report::Series> series;
    for (const auto& m : methods) {
        const auto buckets = analysis::bucketed_errors(m.preds, eval.targets);
        report::Series s{m.name, {}, {}};
        for (std::size_t b = 0; b < buckets.size(); ++b) {
            bcsv.row({m.name, std::to_string(b), num(buckets[b].lo), num(buckets[b].hi),
                      std::to_string(buckets[b].count), num(buckets[b].mae),
                      num(buckets[b].median_signed_error)});
            s.xs.push_back(static_cast<double>(b));
            s.ys.push_back(buckets[b].mae);
        }
        series.push_back(std::move(s));
    }
    report::write_line_chart(svg_out, "MAE by target bucket", "target percentile bucket", "MAE",
                             series);
    for (const auto& m : methods) {
        const auto [mae, ci] = analysis::mae_with_ci(m.preds, eval.targets);
        std::cout << m.name << ": MAE " << num(mae) << " +/- " << num(ci) << "\n";
    }
}

void cmd_importance(const CommonOpts& common, const std::string& checkpoint_dir,
                    const std::string& data, int repeats, const std::string& out,
                    const std::string& svg_out) {
    const auto ensemble = load_ensemble(checkpoint_dir);
    const auto scenarios = synth::read_dataset(data);
    analysis::PermutationOptions opt;
    opt.repeats = repeats;
    opt.seed = common.seed;

    auto file = open_out(out);
    report::CsvWriter csv(file);
    stamp(csv, common.deterministic);
    csv.row({"feature", "delta_mae", "ci95", "base_mae"});
    std::vector<std::string> labels;
    std::vector<double> deltas, errors;
    for (const auto& feature : analysis::importance_feature_names()) {
        const auto d = analysis::permutation_importance(ensemble, scenarios, feature, opt);
        csv.row({feature, num(d.delta_mae), num(d.ci95), num(d.base_mae)});
        labels.push_back(feature);
        deltas.push_back(d.delta_mae);
        errors.push_back(d.ci95);
        std::cout << feature << ": delta MAE " << num(d.delta_mae) << " +/- " << num(d.ci95)
                  << "\n";
    }
    analysis::AblationOptions aopt;
    aopt.seed = common.seed;
    const auto rand_d = analysis::structure_ablation_eval(ensemble, scenarios,
                                                          analysis::AblationMode::random_edges, aopt);
    const auto none_d = analysis::structure_ablation_eval(ensemble, scenarios,
                                                          analysis::AblationMode::edgeless, aopt);
    csv.row({"structure:random", num(rand_d.delta_mae), num(rand_d.ci95), num(rand_d.base_mae)});
    csv.row({"structure:edgeless", num(none_d.delta_mae), num(none_d.ci95), num(none_d.base_mae)});
    std::cout << "structure:random: delta MAE " << num(rand_d.delta_mae) << " +/- "
              << num(rand_d.ci95) << "\n";
    std::cout << "structure:edgeless: delta MAE " << num(none_d.delta_mae) << " +/- "
              << num(none_d.ci95) << "\n";
    labels.insert(labels.end(), {"structure:random", "structure:edgeless"});
    deltas.insert(deltas.end(), {rand_d.delta_mae, none_d.delta_mae});
    errors.insert(errors.end(), {rand_d.ci95, none_d.ci95});
    if (!svg_out.empty())
        report::write_bar_chart(svg_out, "Permutation importance", "delta MAE", labels, deltas,
                                errors);
}

void cmd_ablate(const CommonOpts& common, const std::string& checkpoint_dir,
                const std::string& scenario_file, const std::string& out) {
    const auto ensemble = load_ensemble(checkpoint_dir);
    const auto scenarios = synth::read_dataset(scenario_file);
    if (ensemble.members.empty()) throw data_error("empty ensemble");
    const auto& stats_ref = ensemble.members.front().stats;

    auto file = open_out(out);
    report::CsvWriter csv(file);
    stamp(csv, common.deterministic);
    csv.row({"timestamp", "callsign", "phi", "C_of_G", "p10", "p90"});
    for (const auto& s : scenarios) {
        const auto rep = demand::scenario_demand(ensemble, build_graph(s, stats_ref));
        for (const auto& [callsign, phi] : rep.per_aircraft)
            csv.row({num(rep.timestamp), callsign, num(phi), num(rep.baseline_prediction),
                     num(rep.p10), num(rep.p90)});
    }
}

void cmd_indicators(const CommonOpts& common, const std::string& scenario_file,
                    const std::string& out) {
    const auto scenarios = synth::read_dataset(scenario_file);
    auto file = open_out(out);
    report::CsvWriter csv(file);
    stamp(csv, common.deterministic);
    csv.row({"timestamp", "aircraft_count", "edge_density", "mean_strength", "mean_clustering",
             "mean_nnd"});
    for (const auto& s : scenarios) {
        const auto set = indicators::compute_indicators(indicators::build_indicator_graph(s));
        csv.row({num(s.timestamp), std::to_string(s.aircraft.size()), num(set.edge_density),
                 num(set.strength), num(set.clustering_coefficient),
                 num(set.nearest_neighbour_degree)});
    }
}

void cmd_timeline(const CommonOpts& common, const std::string& checkpoint_dir,
                  const std::string& data, double interval, const std::string& out) {
    const auto ensemble = load_ensemble(checkpoint_dir);
    const auto scenarios = synth::read_dataset(data);
    const auto timeline = demand::demand_timeline(ensemble, scenarios, interval);
    auto file = open_out(out);
    report::CsvWriter csv(file);
    stamp(csv, common.deterministic);
    csv.row({"t", "total_phi", "C_of_G", "p10", "p90", "aircraft_count"});
    for (const auto& point : timeline) {
        if (!point.report) {
            csv.row({num(point.t), "", "", "", "", ""});
            continue;
        }
        const auto& r = *point.report;
        csv.row({num(point.t), num(r.scenario_total), num(r.baseline_prediction), num(r.p10),
                 num(r.p90), std::to_string(r.per_aircraft.size())});
    }
}

void cmd_baseline(const CommonOpts& common, const std::string& data, const std::string& method,
                  const std::string& weights_path, const std::string& out) {
    const auto scenarios = synth::read_dataset(data);
    std::map<std::string, double> weights;
    if (method == "linear") {
        if (weights_path.empty())
            throw config_error("linear method needs --config with factor weights");
        weights = load_weights(weights_path);
    }
    auto file = open_out(out);
    report::CsvWriter csv(file);
    stamp(csv, common.deterministic);
    const bool labeled = !scenarios.empty() && scenarios.front().has_labels();
    csv.row(labeled ? std::vector<std::string>{"timestamp", "value", "label_total"}
                    : std::vector<std::string>{"timestamp", "value"});
    for (const auto& s : scenarios) {
        const double value = method == "linear"
                                 ? baselines::linear_complexity(s, weights)
                                 : static_cast<double>(baselines::minimum_clearance(s));
        if (s.has_labels())
            csv.row({num(s.timestamp), num(value), std::to_string(s.label_total())});
        else
            csv.row({num(s.timestamp), num(value)});
    }
}

void cmd_report(const std::string& buckets_csv, const std::string& out) {
    std::ifstream in(buckets_csv);
    if (!in) throw data_error("cannot open bucket CSV: " + buckets_csv);
    std::string line;
    bool header_seen = false;
    std::map<std::string, report::Series> by_method;
    std::vector<std::string> order;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;  // method,bucket,lo,hi,count,mae,...
            continue;
        }
        const auto cells = parse_csv_line(line);
        if (cells.size() < 6) throw data_error("bucket CSV row too short: " + line);
        const std::string& method = cells[0];
        if (!by_method.count(method)) {
            by_method[method] = report::Series{method, {}, {}};
            order.push_back(method);
        }
        by_method[method].xs.push_back(std::stod(cells[1]));
        by_method[method].ys.push_back(std::stod(cells[5]));
    }
    if (order.empty()) throw data_error("bucket CSV has no data rows: " + buckets_csv);
    std::vector<report::Series> series;
    for (const auto& name : order) series.push_back(by_method[name]);
    report::write_line_chart(out, "MAE by target bucket", "target percentile bucket", "MAE",
                             series);
    std::cout << "wrote " << out << " with " << series.size() << " series\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"air-traffic interaction graphs, attention model and task demand analysis"};
    app.require_subcommand(1);
    app.fallthrough();  // lets --seed and friends appear after the subcommand

    CommonOpts common;
    app.add_option("--seed", common.seed, "master random seed");
    app.add_flag("--deterministic", common.deterministic,
                 "suppress timestamps in output metadata");
    app.add_option("--threads", common.threads, "worker threads where supported");

    auto* gen = app.add_subcommand("generate", "generate a labeled synthetic dataset");
    std::string gen_config, gen_out = "data.jsonl";
    double gen_hours = 0.0, gen_rate = 0.0, gen_interval = 0.0;
    gen->add_option("--config", gen_config, "synth config JSON");
    gen->add_option("--hours", gen_hours, "stream duration in hours");
    gen->add_option("--rate", gen_rate, "arrivals per hour");
    gen->add_option("--interval", gen_interval, "snapshot interval seconds");
    gen->add_option("--out", gen_out, "output JSONL path");

    auto* feat_cmd = app.add_subcommand("features", "encode node features / print the manifest");
    bool feat_manifest = false;
    std::string feat_data, feat_out;
    feat_cmd->add_flag("--manifest", feat_manifest, "print the feature manifest");
    feat_cmd->add_option("--data", feat_data, "dataset JSONL");
    feat_cmd->add_option("--out", feat_out, "output CSV");

    auto* tr = app.add_subcommand("train", "k-fold cross-validated training");
    std::string tr_data, tr_out = "ensemble";
    int tr_folds = 5, tr_epochs = -1;
    tr->add_option("--data", tr_data, "dataset JSONL")->required();
    tr->add_option("--folds", tr_folds, "fold count");
    tr->add_option("--epochs", tr_epochs, "epoch cap");
    tr->add_option("--out-dir", tr_out, "checkpoint directory");

    auto* ev = app.add_subcommand("evaluate", "MAE tables and bucket profiles");
    std::string ev_ckpt, ev_data, ev_out = "evaluate.csv", ev_buckets = "evaluate_buckets.csv",
                ev_svg = "evaluate_buckets.svg", ev_weights;
    ev->add_option("--checkpoint-dir", ev_ckpt, "ensemble directory")->required();
    ev->add_option("--data", ev_data, "dataset JSONL")->required();
    ev->add_option("--out", ev_out, "methods CSV");
    ev->add_option("--buckets-out", ev_buckets, "bucket CSV");
    ev->add_option("--svg-out", ev_svg, "bucket chart SVG");
    ev->add_option("--config", ev_weights, "linear baseline weights JSON");

    auto* imp = app.add_subcommand("importance", "permutation feature importance");
    std::string imp_ckpt, imp_data, imp_out = "importance.csv", imp_svg;
    int imp_repeats = 20;
    imp->add_option("--checkpoint,--checkpoint-dir", imp_ckpt, "ensemble directory")->required();
    imp->add_option("--data", imp_data, "dataset JSONL")->required();
    imp->add_option("--repeats", imp_repeats, "permutation repeats");
    imp->add_option("--out", imp_out, "output CSV");
    imp->add_option("--svg-out", imp_svg, "optional bar chart SVG");

    auto* ab = app.add_subcommand("ablate", "per-aircraft task demand by node ablation");
    std::string ab_ckpt, ab_data, ab_out = "demand.csv";
    ab->add_option("--checkpoint-dir", ab_ckpt, "ensemble directory")->required();
    ab->add_option("--scenario-file,--data", ab_data, "dataset JSONL")->required();
    ab->add_option("--out", ab_out, "output CSV");

    auto* ind = app.add_subcommand("indicators", "threshold-graph complexity indicators");
    std::string ind_data, ind_out = "indicators.csv";
    ind->add_option("--scenario-file,--data", ind_data, "dataset JSONL")->required();
    ind->add_option("--out", ind_out, "output CSV");

    auto* tl = app.add_subcommand("timeline", "demand totals on a fixed interval grid");
    std::string tl_ckpt, tl_data, tl_out = "timeline.csv";
    double tl_interval = 60.0;
    tl->add_option("--checkpoint-dir", tl_ckpt, "ensemble directory")->required();
    tl->add_option("--data", tl_data, "dataset JSONL")->required();
    tl->add_option("--interval", tl_interval, "tick interval seconds");
    tl->add_option("--out", tl_out, "output CSV");

    auto* bl = app.add_subcommand("baseline", "heuristic baseline predictions");
    std::string bl_data, bl_method = "min-clearance", bl_weights, bl_out = "baseline.csv";
    bl->add_option("--data", bl_data, "dataset JSONL")->required();
    bl->add_option("--method", bl_method, "min-clearance or linear")
        ->check(CLI::IsMember({"min-clearance", "linear"}));
    bl->add_option("--config", bl_weights, "linear weights JSON");
    bl->add_option("--out", bl_out, "output CSV");

    auto* rep = app.add_subcommand("report", "chart from evaluation bucket CSV");
    std::string rep_in, rep_out = "report.svg";
    rep->add_option("--buckets", rep_in, "bucket CSV from evaluate")->required();
    rep->add_option("--out", rep_out, "output SVG");

    try {
        app.parse(argc, argv);
        if (*gen) cmd_generate(common, gen_config, gen_hours, gen_rate, gen_interval, gen_out);
        else if (*feat_cmd) cmd_features(common, feat_manifest, feat_data, feat_out);
        else if (*tr) cmd_train(common, tr_data, tr_folds, tr_epochs, tr_out);
        else if (*ev) cmd_evaluate(common, ev_ckpt, ev_data, ev_out, ev_buckets, ev_svg, ev_weights);
        else if (*imp) cmd_importance(common, imp_ckpt, imp_data, imp_repeats, imp_out, imp_svg);
        else if (*ab) cmd_ablate(common, ab_ckpt, ab_data, ab_out);
        else if (*ind) cmd_indicators(common, ind_data, ind_out);
        else if (*tl) cmd_timeline(common, tl_ckpt, tl_data, tl_interval, tl_out);
        else if (*bl) cmd_baseline(common, bl_data, bl_method, bl_weights, bl_out);
        else if (*rep) cmd_report(rep_in, rep_out);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    } catch (const numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
