// uncon: generate synthetic booking curves, run unconstraining experiments,
// plot a curve with forecasts.

#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "uncon/uncon.hpp"

namespace {

using namespace uncon;

std::vector<BookingCurve> generate(const std::string& experiment, const std::string& shape, int curves, Seed seed) {
    if (experiment == "exp1") return gen_exp1(parse_shape(shape), curves, seed);
    if (experiment == "exp2") return gen_exp2(parse_shape(shape), seed);
    if (experiment == "exp3") return gen_dpp(seed);
    if (experiment == "changepoint") {
        const int id = shape == "scenario1" ? 1 : shape == "scenario2" ? 2 : shape == "scenario3" ? 3 : 0;
        return {gen_scenario(id, seed).curve};
    }
    throw InvalidArgument("unknown experiment: " + experiment);
}

// method,day_before_departure,cumulative rows; other columns are ignored if
// the header names them (forecasts.csv from `run` works as is).
std::vector<SeriesForecast> read_forecasts(std::istream& in, int curve_id) {
    std::string line;
    std::getline(in, line);
    const auto header = split_csv_line(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) {
        col[header[i]] = i;
    }
    for (const char* need : {"method", "day_before_departure", "cumulative"}) {
        if (!col.count(need)) {
            throw InvalidArgument(std::string("forecast file lacks column ") + need);
        }
    }
    std::vector<SeriesForecast> out;
    std::map<std::string, std::vector<std::pair<int, double>>> rows;
    std::vector<std::string> order;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (col.count("curve_id") && std::stoi(f[col["curve_id"]]) != curve_id) continue;
        const std::string m = f[col["method"]];
        if (!rows.count(m)) order.push_back(m);
        rows[m].emplace_back(std::stoi(f[col["day_before_departure"]]), std::stod(f[col["cumulative"]]));
    }
    for (const auto& m : order) {
        auto r = rows[m];
        std::sort(r.begin(), r.end(), [](auto a, auto b) { return a.first > b.first; });
        SeriesForecast s{m, {}};
        for (auto [d, v] : r) s.cumulative.push_back(v);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unconstrain censored booking curves with Gaussian processes and classical baselines"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Write synthetic curves (optionally censored) as CSV");
    std::string g_experiment = "exp1", g_shape = "convex", g_out = "curves.csv";
    std::uint64_t g_seed = 1;
    int g_curves = 100;
    double g_censor = 0.0;
    int g_per_family = 15;
    gen->add_option("--experiment", g_experiment, "exp1 | exp2 | exp3 | changepoint");
    gen->add_option("--shape", g_shape, "convex | concave | homogeneous | scenario1..3");
    gen->add_option("--seed", g_seed);
    gen->add_option("--curves", g_curves, "population size for exp1");
    gen->add_option("--censor", g_censor, "limit fraction (exp1) or window days (exp2, exp3); 0 = none");
    gen->add_option("--per-family", g_per_family, "censored curves per family of 30 (window censoring)");
    gen->add_option("--out", g_out, "output CSV path");

    // run
    auto* run = app.add_subcommand("run", "Run an experiment and write reports");
    std::string r_config;
    RunConfig rc;
    std::string censor_list, methods_list;
    run->add_option("--config", r_config, "JSON config; flags given on the command line override it");
    run->add_option("--experiment", rc.experiment, "exp1 | exp2 | exp3 | changepoint");
    run->add_option("--shape", rc.shape, "convex | concave | homogeneous | scenario1..3");
    run->add_option("--censor", censor_list, "comma-separated limit fractions or window days");
    run->add_option("--methods", methods_list, "comma-separated: em,pd,em_daily,pd_daily,des,gp,gp_cp,mean_impute");
    run->add_option("--repeats", rc.repeats);
    run->add_option("--seed", rc.seed);
    run->add_option("--grid", rc.grid, "default | coarse | path to grid JSON");
    run->add_option("--out", rc.out, "output directory");
    run->add_option("--curves", rc.curves, "exp1 population size");
    run->add_option("--forecast-mode", rc.forecast_mode, "plugin | integrated");
    bool quiet = false;
    run->add_flag("--quiet", quiet, "no progress output");

    // plot
    auto* plot = app.add_subcommand("plot", "Render one curve and forecasts as SVG");
    std::string p_curves, p_forecasts, p_out = "curve.svg";
    int p_id = 0;
    plot->add_option("--curves", p_curves, "curves CSV from generate")->required();
    plot->add_option("--curve-id", p_id);
    plot->add_option("--forecasts", p_forecasts, "CSV with method,day_before_departure,cumulative");
    plot->add_option("--out", p_out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            auto curves = generate(g_experiment, g_shape, g_curves, Seed{g_seed});
            const Seed cs = derive_seed(Seed{g_seed}, 100);
            if (g_censor > 0.0 && g_experiment == "exp1") {
                curves = constrain_by_limits(std::move(curves), g_censor, cs).curves;
            } else if (g_censor > 0.0) {
                curves = constrain_window(std::move(curves), static_cast<int>(g_censor), g_per_family, cs);
            }
            std::ofstream out(g_out, std::ios::binary);
            if (!out) throw Error("cannot write " + g_out);
            write_curves_csv(out, curves);
            return 0;
        }
        if (*run) {
            RunConfig cfg;
            if (!r_config.empty()) {
                std::ifstream in(r_config);
                if (!in) throw InvalidArgument("cannot open config " + r_config);
                cfg = nlohmann::json::parse(in).get<RunConfig>();
            }
            auto given = [&](const char* name) { return run->get_option(name)->count() > 0; };
            if (given("--experiment")) cfg.experiment = rc.experiment;
            if (given("--shape")) cfg.shape = rc.shape;
            if (given("--repeats")) cfg.repeats = rc.repeats;
            if (given("--seed")) cfg.seed = rc.seed;
            if (given("--grid")) {
                cfg.grid = rc.grid;
                cfg.grid_config.reset();
            }
            if (given("--out")) cfg.out = rc.out;
            if (given("--curves")) cfg.curves = rc.curves;
            if (given("--forecast-mode")) cfg.forecast_mode = rc.forecast_mode;
            if (given("--censor")) {
                cfg.censor.clear();
                for (const auto& s : split_csv_line(censor_list)) cfg.censor.push_back(std::stod(s));
            }
            if (given("--methods")) cfg.methods = split_csv_line(methods_list);
            ProgressFn progress;
            if (!quiet) progress = [](const std::string& s) { std::clog << "[uncon] " << s << '\n'; };
            const RunResult res = run_experiment_partial(cfg, progress);
            write_outputs(res, res.config.out);
            if (res.error) {
                std::cerr << "uncon: error: " << *res.error << " (partial results written to " << res.config.out
                          << ")\n";
                return 1;
            }
            for (const auto& s : res.summary) {
                std::cout << s.censor_spec << ' ' << s.method << " |E1|=" << format_number(std::fabs(s.e1_mean))
                          << " E2=" << (s.e2_mean ? format_number(*s.e2_mean) : std::string("-"))
                          << " E3=" << format_number(s.e3_mean) << '\n';
            }
            return 0;
        }
        if (*plot) {
            std::ifstream in(p_curves);
            if (!in) throw InvalidArgument("cannot open " + p_curves);
            const auto curves = read_curves_csv(in);
            if (p_id < 0 || static_cast<std::size_t>(p_id) >= curves.size()) throw InvalidArgument("curve id out of range");
            std::vector<SeriesForecast> fc;
            if (!p_forecasts.empty()) {
                std::ifstream fin(p_forecasts);
                if (!fin) throw InvalidArgument("cannot open " + p_forecasts);
                fc = read_forecasts(fin, p_id);
            }
            std::ofstream out(p_out, std::ios::binary);
            if (!out) throw Error("cannot write " + p_out);
            out << plot_curve(curves[static_cast<std::size_t>(p_id)], fc, "curve " + std::to_string(p_id));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "uncon: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
