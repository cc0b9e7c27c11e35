// ntr: run, sweep and verify trust-region experiments from JSON configs.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "ntr/harness.hpp"
#include "ntr/io.hpp"
#include "ntr/verify.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kConfigError = 2;

struct CommonFlags {
    int jobs = 1;
    std::string out_dir;
    std::uint64_t seed_offset = 0;
};

/// --out-dir, then $NTR_OUT_DIR, then the config's output_dir.
std::string output_dir(const CommonFlags& flags, const std::string& from_config) {
    if (!flags.out_dir.empty()) return flags.out_dir;
    if (const char* env = std::getenv("NTR_OUT_DIR"); env && *env) return env;
    return from_config;
}

struct Prepared {
    ntr::ExperimentConfig cfg;
    ntr::Problem problem;
    std::optional<ntr::Schedule> sched;
};

/// Loads a config and builds its problem; every failure here is a config error.
Prepared prepare(const std::string& path, const CommonFlags& flags) {
    std::string text;
    try {
        text = ntr::read_file(path);
    } catch (const std::exception& e) {
        throw ntr::ConfigError(e.what(), 1);
    }
    Prepared p{ntr::parse_config(text), {}, std::nullopt};
    for (auto& s : p.cfg.seeds) s += flags.seed_offset;
    try {
        p.problem = ntr::build_problem(p.cfg.problem);
        p.sched = ntr::resolve_schedule(p.cfg, p.problem);
        p.cfg.optimizer.validate(p.problem.shape);
    } catch (const std::exception& e) {
        const bool sched = p.cfg.schedule.has_value();
        throw ntr::ConfigError(e.what(), ntr::detail::line_of_path(text, sched ? std::vector<std::string>{"optimizer", "schedule"}
                                                                               : std::vector<std::string>{"optimizer"}));
    }
    return p;
}

std::vector<ntr::BoundReport> evaluate_checks(const Prepared& p, const std::vector<ntr::RunRecord>& recs,
                                              std::vector<std::string>& skipped) {
    std::vector<ntr::BoundReport> out;
    const auto consts = ntr::constants_for(p.problem, p.cfg.optimizer);
    if (auto t = ntr::applicable_theorem(p.cfg.optimizer, p.problem.star_convex)) {
        try {
            out.push_back(ntr::check_bound(*t, recs, consts));
        } catch (const std::invalid_argument& e) {
            skipped.push_back(ntr::to_string(*t) + ": " + e.what());
        }
    }
    if (!ntr::is_deterministic(p.cfg.optimizer.variant) && p.cfg.optimizer.variant != ntr::Variant::OSGDMRef) {
        try {
            out.push_back(ntr::momentum_error_check(recs, consts));
        } catch (const std::invalid_argument& e) {
            skipped.push_back(std::string("momentum error: ") + e.what());
        }
    }
    return out;
}

/// Writes run CSVs, summary.json and residual.svg into dir.
void write_group(const fs::path& dir, const Prepared& p, const std::vector<ntr::RunRecord>& recs,
                 const std::vector<ntr::BoundReport>& checks) {
    fs::create_directories(dir);
    for (const auto& r : recs) ntr::write_file((dir / ntr::run_csv_name(r.seed)).string(), ntr::run_csv(r));
    ntr::ExperimentConfig snapshot = p.cfg;
    snapshot.output_dir = dir.string();
    ntr::write_file((dir / "summary.json").string(), ntr::summary_json(snapshot, p.sched, recs, checks).dump(2) + "\n");
    ntr::write_file((dir / "residual.svg").string(),
                    ntr::residual_svg(recs, ntr::to_string(p.cfg.optimizer.variant) + " residual"));
}

bool print_checks(const std::vector<ntr::BoundReport>& checks, const std::vector<std::string>& skipped) {
    bool ok = true;
    for (const auto& c : checks) {
        std::cout << (c.holds ? "PASS  " : "FAIL  ") << c.id << "  " << ntr::vdetail::report_detail(c) << "\n";
        ok = ok && c.holds;
    }
    for (const auto& s : skipped) std::cout << "SKIP  " << s << "\n";
    return ok;
}

int cmd_run(const std::string& path, const CommonFlags& flags) {
    Prepared p = prepare(path, flags);
    for (const auto& w : p.cfg.optimizer.warnings()) std::cerr << "warning: " << w << "\n";
    const auto recs = ntr::run_seeds(p.cfg.optimizer, p.problem, p.cfg.seeds, flags.jobs);
    std::vector<std::string> skipped;
    const auto checks = evaluate_checks(p, recs, skipped);
    const fs::path dir = output_dir(flags, p.cfg.output_dir);
    write_group(dir, p, recs, checks);
    std::cout << ntr::to_string(p.cfg.optimizer.variant) << " on " << p.problem.name << ": " << recs.size()
              << " run(s), K=" << p.cfg.optimizer.K << ", eta=" << ntr::format_double(p.cfg.optimizer.eta) << "\n";
    for (const auto& r : recs) {
        std::cout << "seed " << r.seed << "  min_residual=" << ntr::sci(r.summary.min_residual)
                  << "  final_F=" << ntr::sci(r.summary.final_F) << "\n";
    }
    const bool ok = print_checks(checks, skipped);
    std::cout << "wrote " << dir.string() << "\n";
    return ok ? kOk : kFailure;
}

int cmd_sweep(const std::string& path, const std::string& param, const std::vector<std::string>& values,
              const CommonFlags& flags) {
    static const std::vector<std::string> params{"eta", "alpha", "beta", "gamma", "K", "sigma"};
    if (std::find(params.begin(), params.end(), param) == params.end()) {
        std::cerr << "config error: unknown sweep parameter '" << param << "' (eta, alpha, beta, gamma, K, sigma)\n";
        return kConfigError;
    }
    std::vector<double> vals;
    for (const auto& v : values) {
        try {
            vals.push_back(ntr::parse_double(v));
        } catch (const std::exception&) {
            std::cerr << "config error: bad sweep value '" << v << "'\n";
            return kConfigError;
        }
    }
    const Prepared base = prepare(path, flags);
    const fs::path root = output_dir(flags, base.cfg.output_dir);
    fs::create_directories(root);

    std::string csv = param + ",seeds,mean_min_residual,mean_final_F,mean_final_gap\n";
    bool ok = true;
    for (double v : vals) {
        Prepared p = base;
        if (param == "sigma") {
            p.cfg.problem.sigma = v;
            p.problem.sigma = v;
            if (p.cfg.schedule) p.sched = ntr::resolve_schedule(p.cfg, p.problem);
        } else if (param == "eta") {
            p.cfg.optimizer.eta = v;
        } else if (param == "alpha") {
            p.cfg.optimizer.alpha = v;
        } else if (param == "beta") {
            p.cfg.optimizer.beta = v;
        } else if (param == "gamma") {
            p.cfg.optimizer.gamma = v;
        } else {
            p.cfg.optimizer.K = static_cast<int>(v);
        }
        if (param != "sigma") {
            p.cfg.schedule.reset();
            p.sched.reset();
        }
        try {
            p.cfg.optimizer.validate(p.problem.shape);
        } catch (const std::exception& e) {
            std::cerr << "config error: " << param << "=" << ntr::format_double(v) << ": " << e.what() << "\n";
            return kConfigError;
        }
        for (const auto& w : p.cfg.optimizer.warnings()) {
            std::cerr << "warning: " << param << "=" << ntr::format_double(v) << ": " << w << "\n";
        }
        const auto recs = ntr::run_seeds(p.cfg.optimizer, p.problem, p.cfg.seeds, flags.jobs);
        std::vector<std::string> skipped;
        const auto checks = evaluate_checks(p, recs, skipped);
        write_group(root / (param + "_" + ntr::format_double(v)), p, recs, checks);

        double min_res = 0.0, final_F = 0.0, gap = 0.0;
        bool have_gap = true;
        for (const auto& r : recs) {
            min_res += r.summary.min_residual;
            final_F += r.summary.final_F;
            if (r.summary.final_gap) {
                gap += *r.summary.final_gap;
            } else {
                have_gap = false;
            }
        }
        const double n = static_cast<double>(recs.size());
        csv += ntr::format_double(v) + ',' + std::to_string(recs.size()) + ',' + ntr::format_double(min_res / n) + ',' +
               ntr::format_double(final_F / n) + ',' + (have_gap ? ntr::format_double(gap / n) : std::string()) + '\n';
        std::cout << param << "=" << ntr::format_double(v) << "  runs=" << recs.size()
                  << "  mean_min_residual=" << ntr::sci(min_res / n) << "\n";
        ok = print_checks(checks, skipped) && ok;
    }
    ntr::write_file((root / ("sweep_" + param + ".csv")).string(), csv);
    std::cout << "wrote " << root.string() << "\n";
    return ok ? kOk : kFailure;
}

int cmd_verify(const std::string& suite, const CommonFlags& flags) {
    const auto& suites = ntr::verify_suites();
    if (suite != "all" && std::find(suites.begin(), suites.end(), suite) == suites.end()) {
        std::cerr << "unknown suite '" << suite << "' (geometry, trstep, lemmas, theorems, all)\n";
        return kConfigError;
    }
    ntr::ComparisonTable table;
    const auto rep = ntr::run_verify(suite, {flags.jobs}, &table);
    const std::string text = ntr::format_report(rep);
    std::cout << text;
    std::string dir = flags.out_dir;
    if (dir.empty()) {
        if (const char* env = std::getenv("NTR_OUT_DIR"); env && *env) dir = env;
    }
    if (!dir.empty()) {
        fs::create_directories(dir);
        ntr::write_file((fs::path(dir) / ("verify_" + suite + ".txt")).string(), text);
        if (!table.rows.empty()) {
            ntr::write_file((fs::path(dir) / "muon_vs_osgdm.csv").string(), ntr::vdetail::comparison_csv(table));
        }
    }
    if (!rep.all_pass()) {
        std::cerr << "failing checks:\n";
        for (const auto& c : rep.items)
            if (!c.pass) std::cerr << "  " << c.suite << "/" << c.name << "\n";
        return kFailure;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trust-region gradient methods under non-Euclidean norms"};
    app.require_subcommand(1);
    CommonFlags flags;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--jobs", flags.jobs, "parallel runs")->check(CLI::PositiveNumber);
        sub->add_option("--out-dir", flags.out_dir, "output directory (overrides $NTR_OUT_DIR and the config)");
        sub->add_option("--seed-offset", flags.seed_offset, "added to every config seed");
    };

    std::string config_path, suite, param;
    std::vector<std::string> values;

    auto* run = app.add_subcommand("run", "run a config file");
    run->add_option("config", config_path, "experiment config (JSON)")->required();
    add_common(run);

    auto* verify = app.add_subcommand("verify", "run an invariant suite");
    verify->add_option("suite", suite, "geometry | trstep | lemmas | theorems | all")->required();
    add_common(verify);

    auto* sweep = app.add_subcommand("sweep", "run a config over a parameter grid");
    sweep->add_option("config", config_path, "experiment config (JSON)")->required();
    sweep->add_option("--param", param, "eta | alpha | beta | gamma | K | sigma")->required();
    sweep->add_option("--values", values, "comma-separated values")->required()->delimiter(',');
    add_common(sweep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (*run) return cmd_run(config_path, flags);
        if (*sweep) return cmd_sweep(config_path, param, values, flags);
        return cmd_verify(suite, flags);
    } catch (const ntr::ConfigError& e) {
        std::cerr << "config error: " << config_path << ": " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
}
