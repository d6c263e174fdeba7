#ifndef UNCON_EXPERIMENT_HPP
#define UNCON_EXPERIMENT_HPP

// Experiment driver: generate, censor, unconstrain with each method, score,
// and write report.csv / per_curve.csv / forecasts.csv / config.json / SVGs.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "uncon/baselines.hpp"
#include "uncon/curves.hpp"
#include "uncon/metrics.hpp"
#include "uncon/svg.hpp"
#include "uncon/unconstrainer.hpp"

namespace uncon {

// ---------------------------------------------------------------------------
// Worker pool

inline unsigned worker_count() {
    if (const char* env = std::getenv("UNCON_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) {
            return static_cast<unsigned>(v);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Runs body(i) for i in [0, n). Results must be written by index so the
// outcome does not depend on scheduling. The first exception is rethrown.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                         unsigned threads = worker_count()) {
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

// ---------------------------------------------------------------------------
// Configuration

inline const std::vector<std::string>& known_methods() {
    static const std::vector<std::string> m{"em", "pd", "em_daily", "pd_daily", "des", "gp", "gp_cp", "mean_impute"};
    return m;
}

inline GridConfig named_grid(const std::string& name) {
    GridConfig g;
    if (name == "default") {
        return g;
    }
    if (name == "coarse") {
        g.log_sigma.points = 4;
        g.log_c.points = 3;
        g.p.points = 4;
        g.cp_side_points = 2;
        return g;
    }
    throw InvalidArgument("unknown grid name: " + name);
}

inline void to_json(nlohmann::json& j, const AxisRange& a) { j = {{"lo", a.lo}, {"hi", a.hi}, {"points", a.points}}; }
inline void from_json(const nlohmann::json& j, AxisRange& a) {
    a.lo = j.at("lo").get<double>();
    a.hi = j.at("hi").get<double>();
    a.points = j.at("points").get<int>();
}

inline void to_json(nlohmann::json& j, const GridConfig& g) {
    j = {{"log_sigma", g.log_sigma}, {"log_c", g.log_c}, {"p", g.p},
         {"cp_side_points", g.cp_side_points}, {"xc_points", g.xc_points}};
}
inline void from_json(const nlohmann::json& j, GridConfig& g) {
    g = GridConfig{};
    if (j.contains("log_sigma")) g.log_sigma = j.at("log_sigma").get<AxisRange>();
    if (j.contains("log_c")) g.log_c = j.at("log_c").get<AxisRange>();
    if (j.contains("p")) g.p = j.at("p").get<AxisRange>();
    if (j.contains("cp_side_points")) g.cp_side_points = j.at("cp_side_points").get<int>();
    if (j.contains("xc_points")) g.xc_points = j.at("xc_points").get<int>();
}

// Grid from "default", "coarse", or a path to a JSON file in the
// GridConfig schema.
inline GridConfig resolve_grid(const std::string& spec) {
    if (spec == "default" || spec == "coarse") {
        return named_grid(spec);
    }
    std::ifstream in(spec);
    if (!in) {
        throw InvalidArgument("cannot open grid file: " + spec);
    }
    return nlohmann::json::parse(in).get<GridConfig>();
}

struct RunConfig {
    std::string experiment = "exp1";  // exp1 | exp2 | exp3 | changepoint
    std::string shape = "convex";     // convex | concave | homogeneous | scenario1..3
    std::vector<double> censor;       // limit fractions (exp1) or window days (exp2, exp3)
    std::vector<std::string> methods;
    int repeats = 5;
    std::uint64_t seed = 1;
    std::string grid = "default";
    std::optional<GridConfig> grid_config;  // resolved grid; takes precedence over `grid`
    std::string forecast_mode = "plugin";   // plugin | integrated
    std::string out = "out";
    int curves = 100;            // exp1 population size
    int window_per_family = 15;  // constrained curves per family of 30 (exp2, exp3)

    // Fills defaults that depend on the experiment and checks the result.
    void resolve() {
        if (experiment != "exp1" && experiment != "exp2" && experiment != "exp3" && experiment != "changepoint") {
            throw InvalidArgument("unknown experiment: " + experiment);
        }
        if (censor.empty()) {
            if (experiment == "exp1") censor = {0.2, 0.6, 0.98};
            else if (experiment == "changepoint") censor = {static_cast<double>(kScenarioWindow)};
            else censor = {5, 10, 20};
        }
        if (methods.empty()) {
            methods = experiment == "changepoint" ? std::vector<std::string>{"gp", "gp_cp"}
                                                  : std::vector<std::string>{"em", "pd", "em_daily", "pd_daily", "des", "gp"};
        }
        for (const auto& m : methods) {
            if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end()) {
                throw InvalidArgument("unknown method: " + m);
            }
        }
        if (repeats < 1) {
            throw InvalidArgument("repeats must be at least 1");
        }
        if (curves < 1) {
            throw InvalidArgument("curves must be at least 1");
        }
        if (forecast_mode != "plugin" && forecast_mode != "integrated") {
            throw InvalidArgument("forecast_mode must be plugin or integrated");
        }
        if (experiment == "changepoint") {
            scenario_id();
        } else if (experiment == "exp3") {
            shape = "convex";
        } else {
            parse_shape(shape);
            if (experiment == "exp2" && shape == "homogeneous") {
                throw InvalidArgument("exp2 supports convex and concave only");
            }
        }
        if (!grid_config) {
            grid_config = resolve_grid(grid);
        }
    }

    int scenario_id() const {
        if (shape == "scenario1") return 1;
        if (shape == "scenario2") return 2;
        if (shape == "scenario3") return 3;
        throw InvalidArgument("changepoint experiment needs shape scenario1, scenario2 or scenario3");
    }
};

inline void to_json(nlohmann::json& j, const RunConfig& c) {
    j = {{"experiment", c.experiment}, {"shape", c.shape},   {"censor", c.censor},
         {"methods", c.methods},       {"repeats", c.repeats}, {"seed", c.seed},
         {"grid", c.grid},             {"forecast_mode", c.forecast_mode},
         {"out", c.out},               {"curves", c.curves}, {"window_per_family", c.window_per_family}};
    if (c.grid_config) {
        j["grid_config"] = *c.grid_config;
    }
}

inline void from_json(const nlohmann::json& j, RunConfig& c) {
    c = RunConfig{};
    if (j.contains("experiment")) c.experiment = j.at("experiment").get<std::string>();
    if (j.contains("shape")) c.shape = j.at("shape").get<std::string>();
    if (j.contains("censor")) c.censor = j.at("censor").get<std::vector<double>>();
    if (j.contains("methods")) c.methods = j.at("methods").get<std::vector<std::string>>();
    if (j.contains("repeats")) c.repeats = j.at("repeats").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("grid")) c.grid = j.at("grid").get<std::string>();
    if (j.contains("grid_config")) c.grid_config = j.at("grid_config").get<GridConfig>();
    if (j.contains("forecast_mode")) c.forecast_mode = j.at("forecast_mode").get<std::string>();
    if (j.contains("out")) c.out = j.at("out").get<std::string>();
    if (j.contains("curves")) c.curves = j.at("curves").get<int>();
    if (j.contains("window_per_family")) c.window_per_family = j.at("window_per_family").get<int>();
}

// ---------------------------------------------------------------------------
// Results

struct CurveEstimate {
    int curve_id = 0;
    double actual_total = 0.0;
    double estimate_total = 0.0;
    std::vector<double> cumulative;  // over the censored window; empty for total-only methods
    std::vector<double> daily;
};

struct MethodResult {
    std::string method;
    double e1 = 0.0;
    std::optional<double> e2;
    double e3 = 0.0;
    std::optional<double> forecast_mae;  // changepoint scenarios only
    std::optional<double> xc_map;        // gp_cp only
    int failures = 0;                    // curves left at their observed value
    std::vector<CurveEstimate> curves;   // constrained curves only
};

struct CellResult {
    int repeat = 0;
    std::uint64_t seed = 0;
    std::string censor_spec;
    std::vector<BookingCurve> population;
    std::vector<MethodResult> methods;
    std::vector<double> true_rates;  // changepoint scenarios only
};

struct SummaryRow {
    std::string censor_spec;
    std::string method;
    double e1_mean = 0.0;  // signed, averaged over repeats
    std::optional<double> e2_mean;
    double e3_mean = 0.0;
    std::optional<double> forecast_mae_mean;
};

struct RunResult {
    RunConfig config;
    std::vector<CellResult> cells;
    std::vector<SummaryRow> summary;
    std::optional<std::string> error;  // set when the run stopped early; cells hold what finished

    const SummaryRow& row(const std::string& censor_spec, const std::string& method) const {
        for (const auto& r : summary) {
            if (r.censor_spec == censor_spec && r.method == method) {
                return r;
            }
        }
        throw InvalidArgument("no summary row for " + censor_spec + "/" + method);
    }
};

inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

inline std::string censor_label(const std::string& experiment, double value) {
    if (experiment == "exp1") {
        char buf[32];
        std::snprintf(buf, sizeof buf, "limit:%.2f", value);
        return buf;
    }
    return "window:" + std::to_string(static_cast<int>(std::lround(value)));
}

// ---------------------------------------------------------------------------
// Method application

using ProgressFn = std::function<void(const std::string&)>;

namespace detail {

inline MethodResult score(const std::string& method, const std::vector<BookingCurve>& pop,
                          std::vector<CurveEstimate> est, bool has_paths) {
    MethodResult r;
    r.method = method;
    std::vector<double> dhat;
    std::vector<double> actual;
    std::size_t k = 0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        actual.push_back(pop[i].total());
        if (pop[i].constrained()) {
            dhat.push_back(est[k++].estimate_total);
        } else {
            dhat.push_back(pop[i].total());
        }
    }
    r.e1 = e1(dhat, actual);
    std::vector<double> ut;
    std::vector<double> at;
    std::vector<std::vector<double>> uc;
    std::vector<std::vector<double>> ac;
    for (const auto& e : est) {
        ut.push_back(e.estimate_total);
        at.push_back(e.actual_total);
        if (has_paths) {
            const auto& curve = pop[static_cast<std::size_t>(e.curve_id)];
            const auto cum = curve.cumulative();
            uc.push_back(e.cumulative);
            ac.emplace_back(cum.begin() + *curve.constrained_from, cum.end());
        }
    }
    r.e3 = e3(ut, at);
    if (has_paths) {
        r.e2 = e2(uc, ac);
    }
    r.curves = std::move(est);
    return r;
}

inline std::vector<std::size_t> constrained_indices(const std::vector<BookingCurve>& pop) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        if (pop[i].constrained()) {
            idx.push_back(i);
        }
    }
    return idx;
}

inline CurveEstimate observed_only(const BookingCurve& c, int id) {
    CurveEstimate e;
    e.curve_id = id;
    e.actual_total = c.total();
    e.estimate_total = c.observed_total();
    e.daily.assign(static_cast<std::size_t>(c.censored_days()), 0.0);
    e.cumulative.assign(static_cast<std::size_t>(c.censored_days()), c.observed_total());
    return e;
}

}  // namespace detail

inline MethodResult apply_method(const std::string& method, const std::vector<BookingCurve>& pop,
                                 const RunConfig& cfg) {
    const auto idx = detail::constrained_indices(pop);
    std::vector<CurveEstimate> est(idx.size());
    int failures = 0;

    if (method == "em" || method == "pd" || method == "mean_impute") {
        if (!idx.empty()) {
            const UnorderedTask task = totals_task(pop);
            const UnconstrainOutput out = method == "em"   ? em(task)
                                          : method == "pd" ? pd(task, 0.5)
                                                           : mean_impute(task);
            for (std::size_t k = 0; k < idx.size(); ++k) {
                est[k].curve_id = static_cast<int>(idx[k]);
                est[k].actual_total = pop[idx[k]].total();
                est[k].estimate_total = out.unconstrained[k];
            }
        }
        auto r = detail::score(method, pop, std::move(est), false);
        return r;
    }
    if (method == "em_daily" || method == "pd_daily") {
        const auto outs = method == "em_daily" ? em_daily(pop) : pd_daily(pop);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            const auto& o = outs[idx[k]];
            est[k].curve_id = static_cast<int>(idx[k]);
            est[k].actual_total = pop[idx[k]].total();
            est[k].daily = o.daily;
            est[k].cumulative = reconstruct_cumulative(pop[idx[k]], o.daily);
            est[k].estimate_total = est[k].cumulative.back();
        }
        return detail::score(method, pop, std::move(est), true);
    }

    GpUnconstrainConfig gcfg;
    gcfg.grid = *cfg.grid_config;
    gcfg.inference.mode = cfg.forecast_mode == "integrated" ? ForecastMode::integrated : ForecastMode::plugin;
    std::vector<double> xc(idx.size(), 0.0);
    std::vector<char> failed(idx.size(), 0);
    auto one = [&](std::size_t k) {
        const BookingCurve& c = pop[idx[k]];
        try {
            UnconstrainOutput out;
            if (method == "des") {
                out = des_unconstrain(c);
            } else if (method == "gp") {
                out = gp_unconstrain(c, gcfg);
            } else {
                const auto res = gp_unconstrain_cp(c, gcfg);
                out = res.output;
                xc[k] = res.xc_map;
            }
            est[k].curve_id = static_cast<int>(idx[k]);
            est[k].actual_total = c.total();
            est[k].daily = out.daily;
            est[k].cumulative = out.unconstrained;
            est[k].estimate_total = out.unconstrained.back();
        } catch (const Error&) {
            est[k] = detail::observed_only(c, static_cast<int>(idx[k]));
            failed[k] = 1;
        }
    };
    if (method == "des") {
        for (std::size_t k = 0; k < idx.size(); ++k) {
            one(k);
        }
    } else {
        parallel_for(idx.size(), one);
    }
    for (char f : failed) {
        failures += f;
    }
    auto r = detail::score(method, pop, std::move(est), true);
    r.failures = failures;
    if (method == "gp_cp" && !xc.empty()) {
        r.xc_map = xc.front();
    }
    return r;
}

// ---------------------------------------------------------------------------
// Running

inline std::vector<BookingCurve> generate_population(const RunConfig& cfg, Seed seed, std::vector<double>* rates = nullptr) {
    if (cfg.experiment == "exp1") return gen_exp1(parse_shape(cfg.shape), cfg.curves, seed);
    if (cfg.experiment == "exp2") return gen_exp2(parse_shape(cfg.shape), seed);
    if (cfg.experiment == "exp3") return gen_dpp(seed);
    Scenario s = gen_scenario(cfg.scenario_id(), seed);
    if (rates != nullptr) {
        *rates = s.rates;
    }
    return {s.curve};
}

inline std::vector<BookingCurve> censor_population(const RunConfig& cfg, std::vector<BookingCurve> pop, double spec,
                                                   Seed seed) {
    if (cfg.experiment == "exp1") return constrain_by_limits(std::move(pop), spec, seed).curves;
    if (cfg.experiment == "changepoint") return pop;  // generated with its censoring window
    return constrain_window(std::move(pop), static_cast<int>(std::lround(spec)), cfg.window_per_family, seed);
}

namespace detail {

inline std::vector<SummaryRow> summarize(const RunConfig& cfg, const std::vector<CellResult>& cells) {
    std::vector<SummaryRow> summary;
    for (std::size_t s = 0; s < cfg.censor.size(); ++s) {
        const std::string label = censor_label(cfg.experiment, cfg.censor[s]);
        for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
            SummaryRow row;
            row.censor_spec = label;
            row.method = cfg.methods[m];
            int n = 0;
            double e2sum = 0.0;
            double maesum = 0.0;
            bool has_e2 = true;
            bool has_mae = true;
            for (const auto& cell : cells) {
                if (cell.censor_spec != label) {
                    continue;
                }
                const MethodResult& r = cell.methods[m];
                row.e1_mean += r.e1;
                row.e3_mean += r.e3;
                has_e2 = has_e2 && r.e2.has_value();
                has_mae = has_mae && r.forecast_mae.has_value();
                e2sum += r.e2.value_or(0.0);
                maesum += r.forecast_mae.value_or(0.0);
                ++n;
            }
            if (n == 0) {
                continue;
            }
            row.e1_mean /= n;
            row.e3_mean /= n;
            if (has_e2) row.e2_mean = e2sum / n;
            if (has_mae) row.forecast_mae_mean = maesum / n;
            summary.push_back(row);
        }
    }
    return summary;
}

}  // namespace detail

// Runs every repeat and censoring level. An error inside a cell stops the run;
// finished cells are kept, summarized, and the message is stored in `error`.
// Configuration errors still throw.
inline RunResult run_experiment_partial(RunConfig cfg, const ProgressFn& progress = {}) {
    cfg.resolve();
    RunResult result;
    const Seed master{cfg.seed};
    try {
        for (int rep = 0; rep < cfg.repeats; ++rep) {
            const Seed rep_seed = derive_seed(master, static_cast<std::uint64_t>(rep));
            std::vector<double> rates;
            const auto clean = generate_population(cfg, derive_seed(rep_seed, 1), &rates);
            for (std::size_t s = 0; s < cfg.censor.size(); ++s) {
                CellResult cell;
                cell.repeat = rep;
                cell.seed = rep_seed.value;
                cell.censor_spec = censor_label(cfg.experiment, cfg.censor[s]);
                cell.population = censor_population(cfg, clean, cfg.censor[s], derive_seed(rep_seed, 100 + s));
                cell.true_rates = rates;
                for (const auto& m : cfg.methods) {
                    if (progress) {
                        progress("repeat " + std::to_string(rep + 1) + "/" + std::to_string(cfg.repeats) + " " +
                                 cell.censor_spec + " " + m);
                    }
                    MethodResult r = apply_method(m, cell.population, cfg);
                    if (!rates.empty() && !r.curves.empty() && !r.curves.front().daily.empty()) {
                        const auto& curve = cell.population.front();
                        const auto& daily = r.curves.front().daily;
                        double sum = 0.0;
                        for (std::size_t k = 0; k < daily.size(); ++k) {
                            sum += std::fabs(daily[k] - rates[static_cast<std::size_t>(*curve.constrained_from) + k]);
                        }
                        r.forecast_mae = sum / static_cast<double>(daily.size());
                    }
                    cell.methods.push_back(std::move(r));
                }
                result.cells.push_back(std::move(cell));
            }
        }
    } catch (const Error& e) {
        result.error = e.what();
    }
    result.summary = detail::summarize(cfg, result.cells);
    result.config = std::move(cfg);
    return result;
}

inline RunResult run_experiment(RunConfig cfg, const ProgressFn& progress = {}) {
    RunResult r = run_experiment_partial(std::move(cfg), progress);
    if (r.error) {
        throw Error(*r.error);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Output

inline void write_report_csv(std::ostream& os, const RunResult& res) {
    const RunConfig& c = res.config;
    os << "experiment,shape,censor_spec,method,metric,value,seed\n";
    auto row = [&](const std::string& spec, const std::string& method, const std::string& metric,
                   const std::optional<double>& v, std::uint64_t seed) {
        os << c.experiment << ',' << c.shape << ',' << spec << ',' << method << ',' << metric << ','
           << (v ? format_number(*v) : "null") << ',' << seed << '\n';
    };
    for (const auto& cell : res.cells) {
        for (const auto& m : cell.methods) {
            row(cell.censor_spec, m.method, "e1", m.e1, cell.seed);
            row(cell.censor_spec, m.method, "e2", m.e2, cell.seed);
            row(cell.censor_spec, m.method, "e3", m.e3, cell.seed);
            row(cell.censor_spec, m.method, "n_constrained", static_cast<double>(m.curves.size()), cell.seed);
            row(cell.censor_spec, m.method, "failures", static_cast<double>(m.failures), cell.seed);
            if (m.forecast_mae) row(cell.censor_spec, m.method, "forecast_mae", m.forecast_mae, cell.seed);
            if (m.xc_map) row(cell.censor_spec, m.method, "xc_map", m.xc_map, cell.seed);
        }
    }
    for (const auto& s : res.summary) {
        row(s.censor_spec, s.method, "e1_mean", s.e1_mean, c.seed);
        row(s.censor_spec, s.method, "abs_e1_mean", std::fabs(s.e1_mean), c.seed);
        row(s.censor_spec, s.method, "e2_mean", s.e2_mean, c.seed);
        row(s.censor_spec, s.method, "e3_mean", s.e3_mean, c.seed);
        if (s.forecast_mae_mean) row(s.censor_spec, s.method, "forecast_mae_mean", s.forecast_mae_mean, c.seed);
    }
}

inline void write_per_curve_csv(std::ostream& os, const RunResult& res) {
    const RunConfig& c = res.config;
    os << "experiment,shape,censor_spec,method,seed,curve_id,actual_total,estimate_total,abs_error\n";
    for (const auto& cell : res.cells) {
        for (const auto& m : cell.methods) {
            for (const auto& e : m.curves) {
                os << c.experiment << ',' << c.shape << ',' << cell.censor_spec << ',' << m.method << ','
                   << cell.seed << ',' << e.curve_id << ',' << format_number(e.actual_total) << ','
                   << format_number(e.estimate_total) << ',' << format_number(std::fabs(e.estimate_total - e.actual_total))
                   << '\n';
            }
        }
    }
}

// The plotted example for a cell: its first constrained curve.
inline std::optional<std::size_t> sample_curve(const CellResult& cell) {
    for (std::size_t i = 0; i < cell.population.size(); ++i) {
        if (cell.population[i].constrained()) {
            return i;
        }
    }
    return std::nullopt;
}

inline std::vector<SeriesForecast> sample_forecasts(const CellResult& cell, std::size_t curve) {
    std::vector<SeriesForecast> out;
    for (const auto& m : cell.methods) {
        for (const auto& e : m.curves) {
            if (static_cast<std::size_t>(e.curve_id) == curve && !e.cumulative.empty()) {
                out.push_back({m.method, e.cumulative});
            }
        }
    }
    return out;
}

inline void write_forecasts_csv(std::ostream& os, const RunResult& res) {
    const RunConfig& c = res.config;
    os << "experiment,shape,censor_spec,method,seed,curve_id,day_before_departure,cumulative\n";
    for (const auto& cell : res.cells) {
        if (cell.repeat != 0) {
            continue;
        }
        const auto which = sample_curve(cell);
        if (!which) {
            continue;
        }
        const BookingCurve& curve = cell.population[*which];
        for (const auto& f : sample_forecasts(cell, *which)) {
            for (std::size_t k = 0; k < f.cumulative.size(); ++k) {
                os << c.experiment << ',' << c.shape << ',' << cell.censor_spec << ',' << f.method << ',' << cell.seed
                   << ',' << *which << ',' << curve.horizon() - *curve.constrained_from - static_cast<int>(k) << ','
                   << format_number(f.cumulative[k]) << '\n';
            }
        }
    }
}

inline std::string svg_file_name(const RunConfig& c, const std::string& censor_spec) {
    std::string s = c.experiment + "_" + c.shape + "_" + censor_spec + ".svg";
    std::replace(s.begin(), s.end(), ':', '_');
    return s;
}

inline void write_outputs(const RunResult& res, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&](const std::string& name) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) {
            throw Error("cannot write " + (dir / name).string());
        }
        return f;
    };
    {
        auto f = open("report.csv");
        write_report_csv(f, res);
    }
    {
        auto f = open("per_curve.csv");
        write_per_curve_csv(f, res);
    }
    {
        auto f = open("forecasts.csv");
        write_forecasts_csv(f, res);
    }
    {
        auto f = open("config.json");
        f << nlohmann::json(res.config).dump(2) << '\n';
    }
    for (const auto& cell : res.cells) {
        if (cell.repeat != 0) {
            continue;
        }
        const auto which = sample_curve(cell);
        if (!which) {
            continue;
        }
        auto f = open(svg_file_name(res.config, cell.censor_spec));
        f << plot_curve(cell.population[*which], sample_forecasts(cell, *which),
                        res.config.experiment + " " + res.config.shape + " " + cell.censor_spec + " curve " +
                            std::to_string(*which));
    }
}

}  // namespace uncon

#endif  // UNCON_EXPERIMENT_HPP
