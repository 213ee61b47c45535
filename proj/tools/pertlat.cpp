// Reproducible experiment driver: every subcommand resolves its options
// into a config JSON (written next to the outputs, hashed into every
// file), runs the experiment, and writes CSV curves / JSON reports.
// Exit codes: 0 ok, 2 bad config, 3 model error, 4 unresolvable statistics.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "pertlat/analytics.hpp"
#include "pertlat/cover.hpp"
#include "pertlat/errors.hpp"
#include "pertlat/matching.hpp"
#include "pertlat/oned.hpp"
#include "pertlat/report.hpp"

using nlohmann::json;
using namespace pertlat;

namespace {

struct CommonOpts {
    std::string law = "gaussian:sigma=1";
    int d = 1;
    uint64_t seed = 1;
    int threads = 0;
    std::string out;
    std::string config_path;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--law", opts.law, "law spec, e.g. gaussian:sigma=1 | poly-coord:alpha=0.5");
    cmd->add_option("--d", opts.d, "lattice dimension");
    cmd->add_option("--seed", opts.seed, "master seed");
    cmd->add_option("--threads", opts.threads, "worker threads (0 = hardware)");
    cmd->add_option("--out", opts.out, "output directory (default $PERTLAT_OUT or .)");
    cmd->add_option("--config", opts.config_path, "JSON config file; explicit flags override");
}

std::filesystem::path out_dir(const CommonOpts& opts) {
    std::string dir = opts.out;
    if (dir.empty()) {
        const char* env = std::getenv("PERTLAT_OUT");
        dir = env && *env ? env : ".";
    }
    std::filesystem::create_directories(dir);
    return dir;
}

// Config-file values act as defaults for options the user did not pass.
template <typename T>
void maybe_from_config(const json& cfg, CLI::App* cmd, const std::string& flag,
                       const std::string& key, T& value) {
    if (!cfg.contains(key)) return;
    auto* opt = cmd->get_option_no_throw("--" + flag);
    if (opt && opt->count() > 0) return;
    value = cfg.at(key).get<T>();
}

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config: " + path);
    json cfg;
    in >> cfg;
    return cfg;
}

void write_json(const std::filesystem::path& path, const json& doc) {
    write_text_file(path.string(), doc.dump(2) + "\n");
}

struct RunContext {
    json config; // resolved, canonical
    std::string hash;
    std::filesystem::path dir;

    void finalize(const CommonOpts& opts, const std::string& subcommand) {
        config["subcommand"] = subcommand;
        config["law"] = opts.law;
        config["d"] = opts.d;
        config["seed"] = opts.seed;
        hash = hash_hex(config.dump());
        dir = out_dir(opts);
        write_json(dir / (subcommand + "_config.json"), config);
    }
};

json fit_to_json(const FitResult& fit) {
    return json{{"slope", fit.slope},
                {"intercept", fit.intercept},
                {"r2", fit.r2},
                {"points_used", fit.points_used}};
}

int guarded(const std::string& subcommand, const CommonOpts& opts,
            const std::function<int()>& body) {
    try {
        return body();
    } catch (const ValidationError& e) {
        try {
            write_json(out_dir(opts) / (subcommand + "_error.json"),
                       json{{"code", e.code()}, {"message", e.what()}});
        } catch (...) {
        }
        std::cerr << "error (" << e.code() << "): " << e.what() << "\n";
        return 2;
    } catch (const ModelError& e) {
        try {
            write_json(out_dir(opts) / (subcommand + "_error.json"),
                       json{{"code", e.code()}, {"message", e.what()}});
        } catch (...) {
        }
        std::cerr << "error (" << e.code() << "): " << e.what() << "\n";
        return 3;
    }
}

std::vector<double> default_geometric(double lo, double hi) {
    std::vector<double> grid;
    for (double r = lo; r <= hi * (1.0 + 1e-12); r *= 2.0) grid.push_back(r);
    return grid;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"perturbed-lattice simulation and exact-numerics toolkit"};
    app.require_subcommand(1);

    int exit_code = 0;
    std::function<int()> action;

    // ---------------------------------------------------------- hole-exact
    {
        auto* cmd = app.add_subcommand("hole-exact", "exact log hole probability on an r grid");
        auto opts = std::make_shared<CommonOpts>();
        auto r_grid = std::make_shared<std::vector<double>>();
        auto tolerance = std::make_shared<double>(1e-6);
        add_common(cmd, *opts);
        cmd->add_option("--r", *r_grid, "r grid")->delimiter(',');
        cmd->add_option("--tolerance", *tolerance, "bound on |log h error|");
        cmd->callback([=, &exit_code] {
            exit_code = guarded("hole-exact", *opts, [&]() -> int {
                json cfg = load_config(opts->config_path);
                maybe_from_config(cfg, cmd, "law", "law", opts->law);
                maybe_from_config(cfg, cmd, "d", "d", opts->d);
                maybe_from_config(cfg, cmd, "seed", "seed", opts->seed);
                maybe_from_config(cfg, cmd, "r", "r", *r_grid);
                maybe_from_config(cfg, cmd, "tolerance", "tolerance", *tolerance);
                if (r_grid->empty()) *r_grid = default_geometric(1.0, 32.0);

                RunContext ctx;
                ctx.config["r"] = *r_grid;
                ctx.config["tolerance"] = *tolerance;
                ctx.finalize(*opts, "hole-exact");

                auto law = PerturbationLaw::parse(opts->law, opts->d);
                TailCurve curve;
                curve.law = opts->law;
                curve.d = opts->d;
                curve.trials = 0;
                curve.seed = opts->seed;
                curve.estimator = "exact";
                json points = json::array();
                for (double r : *r_grid) {
                    auto h = hole_probability_exact(law, r, *tolerance);
                    curve.points.push_back({r, h.log_h, 0.0});
                    points.push_back(json{{"r", r},
                                          {"log_h", h.log_h},
                                          {"bound", h.bound},
                                          {"zero", h.zero},
                                          {"grid_half_width", h.grid_half_width}});
                }
                write_tail_curve_csv((ctx.dir / "hole-exact.csv").string(), curve, ctx.hash);
                json report{{"config_hash", ctx.hash}, {"points", points}};
                try {
                    report["fit_log_neg_log_h"] = fit_to_json(fit_loglog(curve, FitTransform::LogNeg));
                } catch (const DegenerateFit&) {
                    report["fit_log_neg_log_h"] = nullptr;
                }
                write_json(ctx.dir / "hole-exact_report.json", report);
                return 0;
            });
        });
    }

    // ------------------------------------------------------------- hole-mc
    {
        auto* cmd = app.add_subcommand("hole-mc", "Monte Carlo hole probability");
        auto opts = std::make_shared<CommonOpts>();
        auto r_grid = std::make_shared<std::vector<double>>();
        auto trials = std::make_shared<int64_t>(100000);
        add_common(cmd, *opts);
        cmd->add_option("--r", *r_grid, "r grid")->delimiter(',');
        cmd->add_option("--trials", *trials, "independent realizations per r");
        cmd->callback([=, &exit_code] {
            exit_code = guarded("hole-mc", *opts, [&]() -> int {
                json cfg = load_config(opts->config_path);
                maybe_from_config(cfg, cmd, "law", "law", opts->law);
                maybe_from_config(cfg, cmd, "d", "d", opts->d);
                maybe_from_config(cfg, cmd, "seed", "seed", opts->seed);
                maybe_from_config(cfg, cmd, "r", "r", *r_grid);
                maybe_from_config(cfg, cmd, "trials", "trials", *trials);
                if (r_grid->empty()) *r_grid = {1.0};

                RunContext ctx;
                ctx.config["r"] = *r_grid;
                ctx.config["trials"] = *trials;
                ctx.finalize(*opts, "hole-mc");

                auto law = PerturbationLaw::parse(opts->law, opts->d);
                TailCurve curve;
                curve.law = opts->law;
                curve.d = opts->d;
                curve.trials = *trials;
                curve.seed = opts->seed;
                curve.estimator = "monte-carlo";
                json points = json::array();
                bool all_unresolved = true;
                for (double r : *r_grid) {
                    auto mc = hole_probability_mc(law, r, *trials, opts->seed, opts->threads);
                    curve.points.push_back({r, mc.estimate, mc.stderr_});
                    points.push_back(json{{"r", r},
                                          {"estimate", mc.estimate},
                                          {"stderr", mc.stderr_},
                                          {"all_misses", mc.all_misses}});
                    if (!mc.all_misses) all_unresolved = false;
                }
                write_tail_curve_csv((ctx.dir / "hole-mc.csv").string(), curve, ctx.hash);
                write_json(ctx.dir / "hole-mc_report.json",
                           json{{"config_hash", ctx.hash},
                                {"points", points},
                                {"all_misses", all_unresolved}});
                return all_unresolved ? 4 : 0;
            });
        });
    }

    // --------------------------------------------------------- hole-bounds
    {
        auto* cmd = app.add_subcommand("hole-bounds", "h(r) vs p(r)^{r^d} sandwich report");
        auto opts = std::make_shared<CommonOpts>();
        auto r_grid = std::make_shared<std::vector<double>>();
        auto ratio_cap = std::make_shared<double>(10.0);
        add_common(cmd, *opts);
        cmd->add_option("--r", *r_grid, "r grid")->delimiter(',');
        cmd->add_option("--ratio-cap", *ratio_cap, "pass iff rho_max/rho_min <= cap");
        cmd->callback([=, &exit_code] {
            exit_code = guarded("hole-bounds", *opts, [&]() -> int {
                json cfg = load_config(opts->config_path);
                maybe_from_config(cfg, cmd, "law", "law", opts->law);
                maybe_from_config(cfg, cmd, "d", "d", opts->d);
                maybe_from_config(cfg, cmd, "r", "r", *r_grid);
                maybe_from_config(cfg, cmd, "ratio-cap", "ratio_cap", *ratio_cap);
                if (r_grid->empty()) *r_grid = default_geometric(2.0, 32.0);

                RunContext ctx;
                ctx.config["r"] = *r_grid;
                ctx.config["ratio_cap"] = *ratio_cap;
                ctx.finalize(*opts, "hole-bounds");

                auto law = PerturbationLaw::parse(opts->law, opts->d);
                auto rep = hole_bounds_check(law, *r_grid, *ratio_cap);
                TailCurve curve;
                curve.law = opts->law;
                curve.d = opts->d;
                curve.seed = opts->seed;
                curve.estimator = "exact";
                for (size_t i = 0; i < rep.r.size(); ++i)
                    curve.points.push_back({rep.r[i], rep.rho[i], 0.0});
                write_tail_curve_csv((ctx.dir / "hole-bounds.csv").string(), curve, ctx.hash);
                write_json(ctx.dir / "hole-bounds_report.json",
                           json{{"config_hash", ctx.hash},
                                {"rho_min", rep.rho_min},
                                {"rho_max", rep.rho_max},
                                {"pass", rep.pass}});
                return rep.pass ? 0 : 3;
            });
        });
    }

    // --------------------------------------------------------- assumptions
    {
        auto* cmd = app.add_subcommand("assumptions", "validate (Int) and (Reg)");
        auto opts = std::make_shared<CommonOpts>();
        auto r_grid = std::make_shared<std::vector<double>>();
        auto k_list = std::make_shared<std::vector<double>>(std::vector<double>{2.0, 3.0});
        add_common(cmd, *opts);
        cmd->add_option("--r", *r_grid, "r grid")->delimiter(',');
        cmd->add_option("--k", *k_list, "scaling factors for (Reg)")->delimiter(',');
        cmd->callback([=, &exit_code] {
            exit_code = guarded("assumptions", *opts, [&]() -> int {
                json cfg = load_config(opts->config_path);
                maybe_from_config(cfg, cmd, "law", "law", opts->law);
                maybe_from_config(cfg, cmd, "d", "d", opts->d);
                maybe_from_config(cfg, cmd, "r", "r", *r_grid);
                maybe_from_config(cfg, cmd, "k", "k", *k_list);
                if (r_grid->empty()) *r_grid = {1.5, 2.0, 3.0, 4.0, 8.0, 16.0, 32.0};

                RunContext ctx;
                ctx.config["r"] = *r_grid;
                ctx.config["k"] = *k_list;
                ctx.finalize(*opts, "assumptions");

                auto law = PerturbationLaw::parse(opts->law, opts->d);
                auto int_rep = assumption_int_check(law, *r_grid);
                auto reg_rep = assumption_reg_check(law, *k_list, *r_grid);
                json doc{{"config_hash", ctx.hash},
                         {"int", json{{"divergent", int_rep.divergent},
                                      {"pass", int_rep.pass},
                                      {"max_ratio", int_rep.max_ratio},
                                      {"r", int_rep.r},
                                      {"ratio", int_rep.ratio}}},
                         {"reg", json{{"pass", reg_rep.pass},
                                      {"k", reg_rep.k},
                                      {"max_ratio", reg_rep.max_ratio},
                                      {"max_ratio_refined", reg_rep.max_ratio_refined}}}};
                write_json(ctx.dir / "assumptions_report.json", doc);
                return 0;
            });
        });
    }

    // -------------------------------------------------------- cover-verify
    {
        auto* cmd = app.add_subcommand("cover-verify", "cover construction properties per trial");
        auto opts = std::make_shared<CommonOpts>();
        auto L = std::make_shared<int64_t>(16);
        auto margin = std::make_shared<int64_t>(-1);
        auto trials = std::make_shared<int64_t>(1);
        add_common(cmd, *opts);
        cmd->add_option("--L", *L, "core half-width");
        cmd->add_option("--M", *margin, "margin (-1 = default)");
        cmd->add_option("--trials", *trials, "independent realizations");
        cmd->callback([=, &exit_code] {
            exit_code = guarded("cover-verify", *opts, [&]() -> int {
                json cfg = load_config(opts->config_path);
                maybe_from_config(cfg, cmd, "law", "law", opts->law);
                maybe_from_config(cfg, cmd, "d", "d", opts->d);
                maybe_from_config(cfg, cmd, "seed", "seed", opts->seed);
                maybe_from_config(cfg, cmd, "L", "L", *L);
                maybe_from_config(cfg, cmd, "M", "M", *margin);
                maybe_from_config(cfg, cmd, "trials", "trials", *trials);

                RunContext ctx;
                ctx.config["L"] = *L;
                ctx.config["M"] = *margin;
                ctx.config["trials"] = *trials;
                ctx.finalize(*opts, "cover-verify");

                auto law = PerturbationLaw::parse(opts->law, opts->d);
                int64_t failures = 0, retries = 0;
                json sample_violations = json::array();
                for (int64_t i = 0; i < *trials; ++i) {
                    CoverWithRetry run(law, *L, trial_seed(opts->seed, static_cast<uint64_t>(i)),
                                       *margin);
                    retries += run.retries();
                    auto report = run.computation().verify();
                    if (!report.all_ok()) {
                        ++failures;
                        for (const auto& v : report.violations)
                            if (sample_violations.size() < 10) sample_violations.push_back(v);
                    }
                    if (i == 0) {
                        write_text_file((ctx.dir / "cover_export.json").string(),
                                        cover_to_json(run.realization().window(),
                                                      run.computation().fields()));
                    }
                }
                write_json(ctx.dir / "cover-verify_report.json",
                           json{{"config_hash", ctx.hash},
                                {"trials", *trials},
                                {"failures", failures},
                                {"retries", retries},
                                {"all_pass", failures == 0},
                                {"violations", sample_violations}});
                return failures == 0 ? 0 : 3;
            });
        });
    }

    // ---------------------------------------------------------- match-tail
    {
        auto* cmd = app.add_subcommand("match-tail", "cover matching distance tail at the center");
        auto opts = std::make_shared<CommonOpts>();
        auto L = std::make_shared<int64_t>(16);
        auto trials = std::make_shared<int64_t>(1000);
        auto r_grid = std::make_shared<std::vector<double>>();
        add_common(cmd, *opts);
        cmd->add_option("--L", *L, "core half-width");
        cmd->add_option("--trials", *trials, "independent realizations");
        cmd->add_option("--r", *r_grid, "r grid")->delimiter(',');
        cmd->callback([=, &exit_code] {
            exit_code = guarded("match-tail", *opts, [&]() -> int {
                json cfg = load_config(opts->config_path);
                maybe_from_config(cfg, cmd, "law", "law", opts->law);
                maybe_from_config(cfg, cmd, "d", "d", opts->d);
                maybe_from_config(cfg, cmd, "seed", "seed", opts->seed);
                maybe_from_config(cfg, cmd, "L", "L", *L);
                maybe_from_config(cfg, cmd, "trials", "trials", *trials);
                maybe_from_config(cfg, cmd, "r", "r", *r_grid);
                if (r_grid->empty()) *r_grid = default_geometric(1.0, static_cast<double>(*L) / 2.0);

                RunContext ctx;
                ctx.config["L"] = *L;
                ctx.config["trials"] = *trials;
                ctx.config["r"] = *r_grid;
                ctx.finalize(*opts, "match-tail");

                auto law = PerturbationLaw::parse(opts->law, opts->d);
                auto rep = match_tail_curve(law, *L, *trials, opts->seed, *r_grid, opts->threads);
                write_tail_curve_csv((ctx.dir / "match-tail.csv").string(), rep.curve, ctx.hash);

                // one full matching export from the first trial
                CoverWithRetry run(law, *L, trial_seed(opts->seed, 0));
                auto match = match_window(run.realization(), run.computation().fields());
                write_match_csv((ctx.dir / "match_export.csv").string(), match, ctx.hash);

                json report{{"config_hash", ctx.hash},
                            {"retries", rep.retries},
                            {"max_distance", rep.max_distance}};
                try {
                    report["fit_loglog"] = fit_to_json(fit_loglog(rep.curve, FitTransform::LogLog));
                } catch (const DegenerateFit&) {
                    report["fit_loglog"] = nullptr;
                }
                write_json(ctx.dir / "match-tail_report.json", report);
                return 0;
            });
        });
    }

    // --------------------------------------------------------- radius-tail
    {
        auto* cmd = app.add_subcommand("radius-tail", "cover radius tail vs hole probability");
        auto opts = std::make_shared<CommonOpts>();
        auto L = std::make_shared<int64_t>(64);
        auto trials = std::make_shared<int64_t>(10000);
        auto r_grid = std::make_shared<std::vector<double>>(std::vector<double>{1.0, 2.0, 4.0});
        add_common(cmd, *opts);
        cmd->add_option("--L", *L, "core half-width per trial");
        cmd->add_option("--trials", *trials, "independent realizations");
        cmd->add_option("--r", *r_grid, "r grid")->delimiter(',');
        cmd->callback([=, &exit_code] {
            exit_code = guarded("radius-tail", *opts, [&]() -> int {
                json cfg = load_config(opts->config_path);
                maybe_from_config(cfg, cmd, "law", "law", opts->law);
                maybe_from_config(cfg, cmd, "d", "d", opts->d);
                maybe_from_config(cfg, cmd, "seed", "seed", opts->seed);
                maybe_from_config(cfg, cmd, "L", "L", *L);
                maybe_from_config(cfg, cmd, "trials", "trials", *trials);
                maybe_from_config(cfg, cmd, "r", "r", *r_grid);

                RunContext ctx;
                ctx.config["L"] = *L;
                ctx.config["trials"] = *trials;
                ctx.config["r"] = *r_grid;
                ctx.finalize(*opts, "radius-tail");

                auto law = PerturbationLaw::parse(opts->law, opts->d);
                auto rep = radius_tail_vs_hole(law, *L, *trials, opts->seed, *r_grid,
                                               opts->threads);
                write_tail_curve_csv((ctx.dir / "radius-tail.csv").string(), rep.curve, ctx.hash);
                write_json(ctx.dir / "radius-tail_report.json",
                           json{{"config_hash", ctx.hash},
                                {"c_star", rep.c_star},
                                {"pass", rep.pass},
                                {"unresolvable", rep.unresolvable},
                                {"log_h", rep.log_h},
                                {"retries", rep.retries}});
                return rep.unresolvable ? 4 : (rep.pass ? 0 : 3);
            });
        });
    }

    // ----------------------------------------------------------- oned-tail
    {
        auto* cmd = app.add_subcommand("oned-tail", "greedy matching distance tail in d=1");
        auto opts = std::make_shared<CommonOpts>();
        auto alpha = std::make_shared<double>(0.5);
        auto L = std::make_shared<int64_t>(10000);
        auto trials = std::make_shared<int64_t>(20000);
        auto r_grid = std::make_shared<std::vector<double>>();
        auto min_hits = std::make_shared<int64_t>(50);
        add_common(cmd, *opts);
        cmd->add_option("--alpha", *alpha, "polynomial tail exponent (0,1)");
        cmd->add_option("--L", *L, "core half-width");
        cmd->add_option("--trials", *trials, "independent realizations");
        cmd->add_option("--r", *r_grid, "r grid")->delimiter(',');
        cmd->add_option("--min-hits", *min_hits, "resolvable-range cutoff for the fit");
        cmd->callback([=, &exit_code] {
            exit_code = guarded("oned-tail", *opts, [&]() -> int {
                json cfg = load_config(opts->config_path);
                maybe_from_config(cfg, cmd, "alpha", "alpha", *alpha);
                maybe_from_config(cfg, cmd, "seed", "seed", opts->seed);
                maybe_from_config(cfg, cmd, "L", "L", *L);
                maybe_from_config(cfg, cmd, "trials", "trials", *trials);
                maybe_from_config(cfg, cmd, "r", "r", *r_grid);
                maybe_from_config(cfg, cmd, "min-hits", "min_hits", *min_hits);
                opts->law = "poly-coord:alpha=" + format_g17(*alpha);
                opts->d = 1;
                if (r_grid->empty())
                    *r_grid = default_geometric(1.0, static_cast<double>(*L) / 4.0);

                RunContext ctx;
                ctx.config["alpha"] = *alpha;
                ctx.config["L"] = *L;
                ctx.config["trials"] = *trials;
                ctx.config["r"] = *r_grid;
                ctx.config["min_hits"] = *min_hits;
                ctx.finalize(*opts, "oned-tail");

                auto law = PerturbationLaw::poly_coord(*alpha, 1);
                auto out = tail_curve_M0(law, *L, *trials, opts->seed, *r_grid, opts->threads);
                write_tail_curve_csv((ctx.dir / "oned-tail.csv").string(), out.curve, ctx.hash);

                // fit over the resolvable range: r >= 2 with enough tail hits
                TailCurve resolvable;
                for (const auto& p : out.curve.points) {
                    double hits = p.value * static_cast<double>(*trials);
                    if (p.r >= 2.0 && hits >= static_cast<double>(*min_hits))
                        resolvable.points.push_back(p);
                }
                json report{{"config_hash", ctx.hash},
                            {"flagged", out.flagged},
                            {"expected_slope", -(1.0 + *alpha) / 2.0}};
                try {
                    report["fit_loglog"] =
                        fit_to_json(fit_loglog(resolvable, FitTransform::LogLog));
                } catch (const DegenerateFit&) {
                    report["fit_loglog"] = nullptr;
                }
                write_json(ctx.dir / "oned-tail_report.json", report);
                return 0;
            });
        });
    }

    // ------------------------------------------------------- oned-variance
    {
        auto* cmd = app.add_subcommand("oned-variance", "exact Var(Pi[0,t)) scaling");
        auto opts = std::make_shared<CommonOpts>();
        auto alphas = std::make_shared<std::vector<double>>(std::vector<double>{0.3, 0.5, 0.7});
        auto t_grid = std::make_shared<std::vector<double>>();
        add_common(cmd, *opts);
        cmd->add_option("--alpha", *alphas, "tail exponents")->delimiter(',');
        cmd->add_option("--t", *t_grid, "integer t grid")->delimiter(',');
        cmd->callback([=, &exit_code] {
            exit_code = guarded("oned-variance", *opts, [&]() -> int {
                json cfg = load_config(opts->config_path);
                maybe_from_config(cfg, cmd, "alpha", "alpha", *alphas);
                maybe_from_config(cfg, cmd, "t", "t", *t_grid);
                if (t_grid->empty()) *t_grid = default_geometric(16.0, 16384.0);
                opts->d = 1;
                opts->law = "poly-coord";

                RunContext ctx;
                ctx.config["alpha"] = *alphas;
                ctx.config["t"] = *t_grid;
                ctx.finalize(*opts, "oned-variance");

                json per_alpha = json::array();
                for (double a : *alphas) {
                    auto law = PerturbationLaw::poly_coord(a, 1);
                    TailCurve curve;
                    curve.law = law.to_string();
                    curve.d = 1;
                    curve.seed = opts->seed;
                    curve.estimator = "exact";
                    std::vector<double> tv, vv;
                    for (double t : *t_grid) {
                        double var = variance_exact(law, static_cast<int64_t>(t));
                        curve.points.push_back({t, var, 0.0});
                        tv.push_back(t);
                        vv.push_back(var);
                    }
                    std::string name = "oned-variance_alpha=" + format_g17(a) + ".csv";
                    write_tail_curve_csv((ctx.dir / name).string(), curve, ctx.hash);
                    auto fit = fit_loglog(curve, FitTransform::LogLog);
                    json entry{{"alpha", a},
                               {"expected_slope", 1.0 - a},
                               {"fit", fit_to_json(fit)}};
                    if (tv.size() >= 4) {
                        auto po = fit_power_offset(tv, vv);
                        entry["fit_power_offset"] = json{{"exponent", po.exponent},
                                                         {"scale", po.scale},
                                                         {"offset", po.offset},
                                                         {"rms", po.rms}};
                    }
                    per_alpha.push_back(std::move(entry));
                }
                write_json(ctx.dir / "oned-variance_report.json",
                           json{{"config_hash", ctx.hash}, {"curves", per_alpha}});
                return 0;
            });
        });
    }

    // ---------------------------------------------------------- oned-moment
    {
        auto* cmd = app.add_subcommand("oned-moment", "normalized truncated-mean diagnostic");
        auto opts = std::make_shared<CommonOpts>();
        auto alpha = std::make_shared<double>(0.5);
        auto L = std::make_shared<int64_t>(10000);
        auto trials = std::make_shared<int64_t>(20000);
        auto t_grid = std::make_shared<std::vector<double>>(
            std::vector<double>{100.0, 178.0, 316.0, 562.0, 1000.0});
        auto bootstrap = std::make_shared<int64_t>(1000);
        add_common(cmd, *opts);
        cmd->add_option("--alpha", *alpha, "polynomial tail exponent (0,1)");
        cmd->add_option("--L", *L, "core half-width");
        cmd->add_option("--trials", *trials, "independent realizations");
        cmd->add_option("--t", *t_grid, "truncation grid")->delimiter(',');
        cmd->add_option("--bootstrap", *bootstrap, "bootstrap resamples");
        cmd->callback([=, &exit_code] {
            exit_code = guarded("oned-moment", *opts, [&]() -> int {
                json cfg = load_config(opts->config_path);
                maybe_from_config(cfg, cmd, "alpha", "alpha", *alpha);
                maybe_from_config(cfg, cmd, "seed", "seed", opts->seed);
                maybe_from_config(cfg, cmd, "L", "L", *L);
                maybe_from_config(cfg, cmd, "trials", "trials", *trials);
                maybe_from_config(cfg, cmd, "t", "t", *t_grid);
                maybe_from_config(cfg, cmd, "bootstrap", "bootstrap", *bootstrap);
                opts->law = "poly-coord:alpha=" + format_g17(*alpha);
                opts->d = 1;

                RunContext ctx;
                ctx.config["alpha"] = *alpha;
                ctx.config["L"] = *L;
                ctx.config["trials"] = *trials;
                ctx.config["t"] = *t_grid;
                ctx.config["bootstrap"] = *bootstrap;
                ctx.finalize(*opts, "oned-moment");

                auto law = PerturbationLaw::poly_coord(*alpha, 1);
                auto tail = tail_curve_M0(law, *L, *trials, opts->seed,
                                          {static_cast<double>(*L) / 2.0}, opts->threads);
                auto curve = truncated_moment_curve(tail.samples, *alpha, *t_grid,
                                                    static_cast<int>(*bootstrap), opts->seed);

                // synthetic finite-moment control with the same low-t mean
                double scale = curve.value.front() * std::pow(t_grid->front(),
                                                              (1.0 - *alpha) / 2.0);
                std::vector<double> control(tail.samples.size());
                SiteRng rng(opts->seed ^ 0xC0117701u);
                for (auto& s : control) s = -scale * std::log(rng.uniform01());
                auto control_curve = truncated_moment_curve(control, *alpha, *t_grid,
                                                            static_cast<int>(*bootstrap),
                                                            opts->seed + 1);

                std::ostringstream csv;
                csv << "# config_hash=" << ctx.hash << "\n";
                csv << "t,normalized_mean,ci_lo,ci_hi\n";
                for (size_t i = 0; i < curve.t.size(); ++i)
                    csv << format_g17(curve.t[i]) << ',' << format_g17(curve.value[i]) << ','
                        << format_g17(curve.lo[i]) << ',' << format_g17(curve.hi[i]) << "\n";
                write_text_file((ctx.dir / "oned-moment.csv").string(), csv.str());
                std::ostringstream ctl;
                ctl << "# config_hash=" << ctx.hash << "\n";
                ctl << "t,normalized_mean,ci_lo,ci_hi\n";
                for (size_t i = 0; i < control_curve.t.size(); ++i)
                    ctl << format_g17(control_curve.t[i]) << ','
                        << format_g17(control_curve.value[i]) << ','
                        << format_g17(control_curve.lo[i]) << ','
                        << format_g17(control_curve.hi[i]) << "\n";
                write_text_file((ctx.dir / "oned-moment_control.csv").string(), ctl.str());

                write_json(ctx.dir / "oned-moment_report.json",
                           json{{"config_hash", ctx.hash},
                                {"verdict", curve.verdict},
                                {"slope", curve.slope},
                                {"control_verdict", control_curve.verdict},
                                {"control_slope", control_curve.slope},
                                {"flagged", tail.flagged}});
                return 0;
            });
        });
    }

    CLI11_PARSE(app, argc, argv);
    return exit_code;
}
