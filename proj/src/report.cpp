#include "eyetap/report.hpp"

#include "eyetap/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace eyetap {

using nlohmann::json;

std::vector<NamedLog> load_logs(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw InvalidInput("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });
    std::vector<NamedLog> out;
    for (const auto& f : files) {
        try {
            out.push_back({f.filename().string(), read_session_log(f)});
        } catch (const ParseError& e) {
            throw ParseError(f.filename().string() + ": " + e.what());
        }
    }
    return out;
}

std::optional<Millis> completion_time(const SessionLog& log, int block) {
    for (const auto& e : log.events) {
        if (const auto* r = std::get_if<LevelCompleteRecord>(&e); r && r->block.block == block)
            return r->block.end_t - r->block.start_t;
    }
    return std::nullopt;
}

std::vector<Point> error_locations(const SessionLog& log) {
    std::vector<Point> out;
    for (const auto& e : log.events) {
        if (const auto* r = std::get_if<JudgeRecord>(&e); r && r->outcome.kind == "error") out.push_back(r->outcome.endpoint);
    }
    return out;
}

std::optional<PathCostResult> matrix_path_cost(const SessionLog& log) {
    std::vector<Point> targets;
    std::optional<Millis> first, last;
    for (const auto& e : log.events) {
        const auto* r = std::get_if<JudgeRecord>(&e);
        if (!r || (r->outcome.kind != "advance" && r->outcome.kind != "complete")) continue;
        if (!first) first = r->outcome.sel_t;
        last = r->outcome.sel_t;
    }
    // The ideal path visits the labeled targets in order.
    for (const auto& e : log.events) {
        if (const auto* s = std::get_if<TaskShownRecord>(&e)) targets.push_back(s->shown.goal.center);
    }
    if (!first || !last || *last <= *first || targets.size() < 2) return std::nullopt;
    std::vector<GazeSample> path;
    for (const auto& e : log.events) {
        if (const auto* g = std::get_if<GazeSample>(&e); g && g->valid && g->t >= *first && g->t <= *last)
            path.push_back(*g);
    }
    if (path.size() < 2) return std::nullopt;
    const double span = static_cast<double>(path.back().t - path.front().t);
    if (span <= 0.0) return std::nullopt;
    const double rate = static_cast<double>(path.size() - 1) * 1000.0 / span;
    return path_cost(path, targets, rate);
}

std::vector<TrialOutcome> fitts_trials(const SessionLog& log) {
    std::vector<TrialOutcome> out;
    for (const auto& e : log.events) {
        if (const auto* r = std::get_if<JudgeRecord>(&e); r && r->outcome.trial) out.push_back(*r->outcome.trial);
    }
    return out;
}

std::vector<double> dart_distances(const SessionLog& log) {
    std::vector<double> out;
    for (const auto& e : log.events) {
        if (const auto* r = std::get_if<JudgeRecord>(&e); r && r->outcome.distance) out.push_back(*r->outcome.distance);
    }
    return out;
}

namespace {

std::string cfg_value(const SessionLog& log, const std::string& key) {
    const auto& c = log.header.config;
    if (c.is_object() && c.contains(key) && c.at(key).is_string()) return c.at(key).get<std::string>();
    return {};
}

double mean(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

json stats(const std::vector<double>& v) {
    if (v.empty()) return {{"n", 0}};
    double ss = 0.0;
    const double m = mean(v);
    for (double x : v) ss += (x - m) * (x - m);
    const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    return {{"n", v.size()}, {"mean", m}, {"sd", sd}};
}

std::string num(double v) { return format_double(v); }

json throughput_json(const ThroughputResult& r) {
    json rows = json::array();
    for (const auto& c : r.per_condition) {
        rows.push_back({{"distance", c.distance}, {"width", c.width}, {"n", c.n},       {"sd", c.sd},
                        {"de", c.de},             {"we", c.we},       {"ide", c.ide},   {"mt_ms", c.mt_ms},
                        {"tp", c.tp},             {"excluded", c.excluded}});
    }
    return {{"variant", to_string(r.variant)}, {"mean_tp", r.mean_tp}, {"conditions", rows}};
}

json heatmap_json(const Heatmap& h) {
    json grid = json::array();
    for (int r = 0; r < h.rows; ++r) {
        json row = json::array();
        for (int c = 0; c < h.cols; ++c) row.push_back(h.at(c, r));
        grid.push_back(row);
    }
    return {{"cols", h.cols},   {"rows", h.rows},     {"counts", grid}, {"left", h.left},
            {"right", h.right}, {"top", h.top},       {"bottom", h.bottom}, {"total", h.total}};
}

struct TechniqueAgg {
    std::map<int, std::vector<double>> level_ms;
    std::map<int, std::vector<double>> level_per_target_ms;
    int matrix_selections = 0;
    int matrix_errors = 0;
    std::vector<double> path_cost;
    std::vector<Point> error_points;
    std::vector<double> dart;
    std::map<std::string, std::vector<TrialOutcome>> fitts;  // by task
    std::vector<double> tlx;
    int sessions = 0;
    int incomplete = 0;
};

}  // namespace

Report analyze_logs(const std::vector<NamedLog>& logs) {
    Report rep;
    std::map<std::string, TechniqueAgg> agg;
    json per_log = json::array();
    std::ostringstream trials;
    trials << "log,participant,technique,task,condition,distance,width,trial,mt_ms,hit,errors,"
              "from_x,from_y,target_x,target_y,endpoint_x,endpoint_y\n";
    ScreenSpec screen;
    int heat_cols = 11, heat_rows = 7;

    for (const auto& [name, log] : logs) {
        const std::string technique = cfg_value(log, "technique");
        const std::string task = cfg_value(log, "task");
        const std::string participant = cfg_value(log, "participant.id");
        auto& a = agg[technique];
        ++a.sessions;
        if (!log.complete()) ++a.incomplete;
        json entry{{"log", name}, {"participant", participant}, {"technique", technique}, {"task", task},
                   {"status", log.status()}};

        if (const auto w = cfg_value(log, "screen.width"); !w.empty()) screen.width = std::stoi(w);
        if (const auto h = cfg_value(log, "screen.height"); !h.empty()) screen.height = std::stoi(h);

        if (task == "matrix") {
            const int level = std::stoi(cfg_value(log, "matrix.level"));
            heat_cols = std::stoi(cfg_value(log, "matrix.cols"));
            heat_rows = std::stoi(cfg_value(log, "matrix.rows"));
            entry["level"] = level;
            int selections = 0, errors = 0;
            for (const auto& e : log.events) {
                if (const auto* r = std::get_if<JudgeRecord>(&e)) {
                    ++selections;
                    if (r->outcome.kind == "error") ++errors;
                }
            }
            entry["selections"] = selections;
            entry["errors"] = errors;
            a.matrix_selections += selections;
            a.matrix_errors += errors;
            for (const auto& p : error_locations(log)) a.error_points.push_back(p);
            if (log.complete()) {
                if (const auto ct = completion_time(log)) {
                    const double ms = static_cast<double>(*ct);
                    entry["completion_ms"] = ms;
                    entry["per_target_ms"] = ms / matrix_target_count(level);
                    a.level_ms[level].push_back(ms);
                    a.level_per_target_ms[level].push_back(ms / matrix_target_count(level));
                }
                if (const auto pc = matrix_path_cost(log)) {
                    entry["path_cost"] = {{"dtw_x", pc->dtw_x},           {"dtw_y", pc->dtw_y},
                                          {"path_len_x", pc->path_len_x}, {"path_len_y", pc->path_len_y},
                                          {"combined", pc->combined}};
                    a.path_cost.push_back(pc->combined);
                }
            }
        } else if (task == "dart") {
            const auto d = dart_distances(log);
            entry["distances"] = d;
            for (double x : d) a.dart.push_back(x);
        } else if (task == "ribbon" || task == "circle") {
            const auto tr = fitts_trials(log);
            entry["trials"] = tr.size();
            for (const auto& t : tr) {
                a.fitts[task].push_back(t);
                trials << name << ',' << participant << ',' << technique << ',' << task << ',' << t.condition << ','
                       << num(t.distance) << ',' << num(t.width) << ',' << t.trial_id << ',' << t.movement_time << ','
                       << (t.hit ? 1 : 0) << ',' << t.errors_in_trial << ',' << num(t.from.x) << ',' << num(t.from.y)
                       << ',' << num(t.target.x) << ',' << num(t.target.y) << ',' << num(t.endpoint.x) << ','
                       << num(t.endpoint.y) << '\n';
            }
        }
        for (const auto& e : log.events) {
            if (const auto* r = std::get_if<TlxRecord>(&e)) {
                a.tlx.push_back(tlx_overall(r->scales));
                entry["tlx"] = tlx_overall(r->scales);
            }
        }
        per_log.push_back(entry);
    }

    std::ostringstream conds;
    conds << "technique,task,variant,distance,width,n,sd,de,we,ide,mt_ms,tp,excluded\n";
    json techniques = json::object();
    json tp_rows = json::array();
    for (const auto& [technique, a] : agg) {
        json t{{"sessions", a.sessions}, {"incomplete", a.incomplete}};
        if (a.matrix_selections > 0 || !a.level_ms.empty()) {
            json levels = json::object();
            std::vector<double> all_per_target;
            for (const auto& [level, v] : a.level_ms) {
                levels["l" + std::to_string(level)] = {{"completion_ms", stats(v)},
                                                      {"per_target_ms", stats(a.level_per_target_ms.at(level))}};
                for (double x : a.level_per_target_ms.at(level)) all_per_target.push_back(x);
            }
            t["matrix"] = {{"levels", levels},
                           {"per_target_ms", stats(all_per_target)},
                           {"selections", a.matrix_selections},
                           {"errors", a.matrix_errors},
                           {"error_rate", a.matrix_selections ? static_cast<double>(a.matrix_errors) /
                                                                    a.matrix_selections
                                                              : 0.0},
                           {"path_cost", stats(a.path_cost)},
                           {"heatmap", heatmap_json(error_heatmap(a.error_points, heat_cols, heat_rows, screen))}};
        }
        if (!a.dart.empty()) t["dart"] = {{"distance", stats(a.dart)}};
        if (!a.fitts.empty()) {
            json fitts = json::object();
            std::vector<double> mts, tp_uni, tp_bi;
            std::vector<TrialOutcome> all;
            for (const auto& [task, trials_v] : a.fitts) {
                std::vector<double> mt;
                for (const auto& tr : trials_v) {
                    mt.push_back(static_cast<double>(tr.movement_time));
                    mts.push_back(static_cast<double>(tr.movement_time));
                    all.push_back(tr);
                }
                const auto uni = throughput(trials_v, TpVariant::univariate);
                const auto bi = throughput(trials_v, TpVariant::bivariate);
                fitts[task] = {{"movement_time_ms", stats(mt)},
                               {"error_rate", error_rate(trials_v)},
                               {"univariate", throughput_json(uni)},
                               {"bivariate", throughput_json(bi)}};
                tp_uni.push_back(uni.mean_tp);
                tp_bi.push_back(bi.mean_tp);
                for (const auto* r : {&uni, &bi}) {
                    for (const auto& c : r->per_condition) {
                        conds << technique << ',' << task << ',' << to_string(r->variant) << ',' << num(c.distance)
                              << ',' << num(c.width) << ',' << c.n << ',' << num(c.sd) << ',' << num(c.de) << ','
                              << num(c.we) << ',' << num(c.ide) << ',' << num(c.mt_ms) << ',' << num(c.tp) << ','
                              << (c.excluded ? 1 : 0) << '\n';
                    }
                }
                for (std::size_t i = 0; i < uni.per_condition.size(); ++i) {
                    const auto& u = uni.per_condition[i];
                    const auto& b = bi.per_condition[i];
                    tp_rows.push_back({{"technique", technique}, {"task", task}, {"distance", u.distance},
                                       {"width", u.width},       {"n", u.n},       {"mt_ms", u.mt_ms},
                                       {"tp_univariate", u.tp},  {"tp_bivariate", b.tp},
                                       {"excluded", u.excluded || b.excluded}});
                }
            }
            fitts["overall"] = {{"movement_time_ms", stats(mts)},
                                {"error_rate", error_rate(all)},
                                {"tp_univariate", mean(tp_uni)},
                                {"tp_bivariate", mean(tp_bi)}};
            t["fitts"] = fitts;
        }
        if (!a.tlx.empty()) t["tlx"] = stats(a.tlx);
        techniques[technique] = t;
    }

    rep.summary = {{"version", kLogVersion},
                   {"logs", per_log},
                   {"techniques", techniques},
                   {"throughput", tp_rows},
                   {"notes",
                    {{"error_rate", "Fitts: fraction of trials ending in a miss (one selection per trial, so "
                                    "equal to errors per trial). Matrix: error selections over all selections."},
                     {"path_cost", "combined = mean of per-axis DTW cost divided by warp-path length, pixels"},
                     {"throughput", "We = 4.133 * SD; TP = IDe / MT; mean over included (D, W) conditions"}}}};
    rep.trials_csv = trials.str();
    rep.conditions_csv = conds.str();
    return rep;
}

void write_report(const Report& report, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto write = [&](const char* name, const std::string& text) {
        std::ofstream f(out_dir / name, std::ios::binary);
        if (!f) throw InvalidInput("cannot write " + (out_dir / name).string());
        f << text;
    };
    write("report.json", report.summary.dump(2) + "\n");
    write("trials.csv", report.trials_csv);
    write("conditions.csv", report.conditions_csv);
}

}  // namespace eyetap
