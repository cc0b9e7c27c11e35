// Acceptance gate: one PASS/FAIL line per criterion. Exit status 0 iff all pass.

#include <array>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "ntr/verify.hpp"

namespace {

// Pinned budgets (seconds).
constexpr double kGeometryBudget = 10.0;
constexpr double kTheorem1Budget = 5.0;
constexpr double kTheorem2Budget = 60.0;
constexpr double kVerifyAllBudget = 300.0;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(const ntr::CheckItem* item) {
        if (!item) {
            pass = false;
            detail += "missing item; ";
            return;
        }
        pass = pass && item->pass;
        detail += item->name + (item->pass ? " ok" : " FAILED") + " [" + item->detail + "]; ";
    }
    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        detail += what + (ok ? " ok" : " FAILED") + "; ";
    }
};

struct ProcessResult {
    int status = -1;
    std::string out;
};

ProcessResult capture(const std::string& cmd) {
    ProcessResult r;
    FILE* f = popen(cmd.c_str(), "r");
    if (!f) return r;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), f)) > 0) r.out.append(buf.data(), n);
    r.status = pclose(f);
    return r;
}

std::string secs(double s) { return ntr::fixed(s, 2) + "s"; }

}  // namespace

int main() {
    const int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    ntr::ComparisonTable table;
    const auto rep = ntr::run_verify("all", {jobs}, &table);

    std::map<std::string, const ntr::CheckItem*> by_name;
    double geometry_seconds = 0.0;
    bool geometry_all = true;
    int geometry_count = 0;
    for (const auto& c : rep.items) {
        by_name[c.suite + "/" + c.name] = &c;
        if (c.suite == "geometry") {
            geometry_seconds += c.seconds;
            geometry_all = geometry_all && c.pass;
            ++geometry_count;
        }
    }
    auto item = [&](const std::string& key) -> const ntr::CheckItem* {
        auto it = by_name.find(key);
        return it == by_name.end() ? nullptr : it->second;
    };
    auto seconds_of = [&](std::initializer_list<const char*> keys) {
        double s = 0.0;
        for (const char* k : keys)
            if (const auto* i = item(k)) s += i->seconds;
        return s;
    };

    std::vector<std::pair<std::string, Outcome>> results;

    {
        Outcome o;
        for (const char* k : {"geometry/orth_properties", "geometry/lmo_vs_sampled_ball", "geometry/holder_inequality",
                              "geometry/rho_witness_tight"})
            o.require(item(k));
        o.require(geometry_all && geometry_count > 0, "all " + std::to_string(geometry_count) + " geometry checks");
        o.require(geometry_seconds < kGeometryBudget, "time " + secs(geometry_seconds) + " < " + secs(kGeometryBudget));
        results.emplace_back("geometry suite", o);
    }
    {
        Outcome o;
        for (const char* k : {"trstep/spectral_step_is_orth_update", "trstep/euclidean_step_is_normalized_gradient",
                              "trstep/infinity_step_is_sign_update", "trstep/brute_force_vector_subproblem",
                              "trstep/brute_force_spectral_2x2"})
            o.require(item(k));
        results.emplace_back("trust-region step equivalences", o);
    }
    {
        Outcome o;
        o.require(item("theorems/T1_quadratic_d10"));
        o.require(item("theorems/T1_matrix_layer_4x4"));
        const double t = seconds_of({"theorems/T1_quadratic_d10", "theorems/T1_matrix_layer_4x4"});
        o.require(t < kTheorem1Budget, "time " + secs(t) + " < " + secs(kTheorem1Budget));
        results.emplace_back("T1 deterministic bound", o);
    }
    {
        Outcome o;
        o.require(item("theorems/T2_momentum_C2_eps0.5"));
        const double t = seconds_of({"theorems/T2_momentum_C2_eps0.5"});
        o.require(t < kTheorem2Budget, "time " + secs(t) + " < " + secs(kTheorem2Budget));
        results.emplace_back("T2 stochastic bound, 20 seeds", o);
    }
    {
        Outcome o;
        o.require(item("lemmas/L2_momentum_error_envelope"));
        o.require(item("lemmas/L2_sigma0_per_run"));
        results.emplace_back("momentum-error envelope", o);
    }
    {
        Outcome o;
        o.require(item("theorems/T4_decay_C4_eps0.1"));
        o.require(item("lemmas/decay_iterates_bounded"));
        results.emplace_back("T4 weight decay and iterate bounds", o);
    }
    {
        Outcome o;
        o.require(item("theorems/T5_momentum_decay"));
        o.require(item("theorems/T7_extrapolation_decay"));
        o.require(item("theorems/T6_extrapolation_logistic"));
        results.emplace_back("T5, T7 star-convex and T6 extrapolation", o);
    }
    {
        Outcome o;
        o.require(item("theorems/T9_D_clipped_momentum"));
        o.require(item("trstep/residual_brute_force"));
        results.emplace_back("weight clipping T9_D and residual", o);
    }
    {
        Outcome o;
        o.require(item("lemmas/smoothness_constants"));
        o.require(item("lemmas/gradient_finite_differences"));
        results.emplace_back("example-problem constants", o);
    }
    {
        Outcome o;
        o.require(item("theorems/muon_vs_osgdm_table"));
        bool muon = false, osgdm = false;
        for (const auto& r : table.rows) {
            if (r.sigma <= 0.0 || r.momentum_err_trace.empty() || r.final_residual.empty()) continue;
            muon = muon || r.algorithm == "muon";
            osgdm = osgdm || r.algorithm == "osgdm";
        }
        o.require(muon && osgdm, "noisy grid point reported for both algorithms");
        results.emplace_back("Muon vs OSGDM comparison table", o);
    }
    {
        Outcome o;
        const std::string cmd = std::string("\"") + NTR_CLI_PATH + "\" verify all --jobs " + std::to_string(jobs);
        const auto t0 = std::chrono::steady_clock::now();
        const auto a = capture(cmd);
        const double first = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const auto b = capture(cmd);
        o.require(a.status == 0 && b.status == 0, "exit status 0");
        o.require(!a.out.empty() && a.out == b.out, "byte-identical reports (" + std::to_string(a.out.size()) + " bytes)");
        o.require(a.out == ntr::format_report(rep), "matches in-process report");
        o.require(first < kVerifyAllBudget, "time " + secs(first) + " < " + secs(kVerifyAllBudget));
        results.emplace_back("determinism of verify all", o);
    }

    int failed = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& [name, o] = results[i];
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << (i + 1) << ": " << name << "  " << o.detail
                  << "\n";
        failed += o.pass ? 0 : 1;
    }
    std::cout << (results.size() - failed) << "/" << results.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
