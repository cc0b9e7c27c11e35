#pragma once

// Experiment config files (JSON), per-run CSV, summary JSON and SVG plots.

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "ntr/geometry.hpp"
#include "ntr/harness.hpp"
#include "ntr/optimizers.hpp"
#include "ntr/problems.hpp"
#include "ntr/trstep.hpp"

namespace ntr {

using Json = nlohmann::json;

/// Invalid configuration; `line` is 1-based within the config text.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& msg, int line)
        : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
    [[nodiscard]] int line() const { return line_; }

private:
    int line_;
};

struct ProblemSpec {
    std::string kind = "quadratic";  // quadratic | matrix_layer
    std::vector<std::size_t> shape{2};
    double condition = 10.0;
    std::size_t samples = 16;
    LossKind loss = LossKind::Quadratic;
    std::uint64_t seed = 0;
    double sigma = 0.0;
    std::optional<std::vector<double>> x0;
    std::optional<std::vector<double>> x_star;
};

struct ScheduleRef {
    Corollary corollary = Corollary::C1;
    double eps = 0.1;
};

struct ExperimentConfig {
    ProblemSpec problem;
    OptimizerConfig optimizer;
    std::optional<ScheduleRef> schedule;
    std::vector<std::uint64_t> seeds{0};
    std::string output_dir = "out";
};

// ---------------------------------------------------------------------------
// Number formatting: shortest round-trip, '.' decimal, locale independent.

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

inline double parse_double(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("bad number '" + s + "'");
    return v;
}

/// Fixed-precision formatting for reports and plots.
inline std::string fixed(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

inline std::string sci(double v, int digits = 6) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*e", digits, v);
    return buf;
}

// ---------------------------------------------------------------------------
// Config parsing.

namespace detail {

inline int line_of_offset(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

/// Line of the last key in `path`, searched in nesting order; falls back to
/// the deepest key found.
inline int line_of_path(const std::string& text, const std::vector<std::string>& path) {
    std::size_t pos = 0;
    std::size_t found = std::string::npos;
    for (const auto& key : path) {
        const std::size_t p = text.find('"' + key + '"', pos);
        if (p == std::string::npos) break;
        found = pos = p;
    }
    return found == std::string::npos ? 1 : line_of_offset(text, found);
}

class ConfigReader {
public:
    explicit ConfigReader(const std::string& text) : text_(text) {}

    [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& msg) const {
        std::string dotted;
        for (const auto& p : path) dotted += (dotted.empty() ? "" : ".") + p;
        throw ConfigError((dotted.empty() ? "" : dotted + ": ") + msg, line_of_path(text_, path));
    }

    void only_keys(const Json& obj, const std::vector<std::string>& path,
                   std::initializer_list<const char*> allowed) const {
        if (!obj.is_object()) fail(path, "expected an object");
        for (const auto& [key, _] : obj.items()) {
            bool ok = false;
            for (const char* a : allowed) ok = ok || key == a;
            if (!ok) {
                auto p = path;
                p.push_back(key);
                fail(p, "unknown key");
            }
        }
    }

    double number(const Json& v, const std::vector<std::string>& path) const {
        if (!v.is_number()) fail(path, "expected a number");
        return v.get<double>();
    }

    std::uint64_t unsigned_int(const Json& v, const std::vector<std::string>& path) const {
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
            fail(path, "expected a non-negative integer");
        return v.get<std::uint64_t>();
    }

    std::string string(const Json& v, const std::vector<std::string>& path) const {
        if (!v.is_string()) fail(path, "expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const Json& v, const std::vector<std::string>& path) const {
        if (!v.is_array()) fail(path, "expected an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) out.push_back(number(e, path));
        return out;
    }

    template <class F>
    auto wrap(const std::vector<std::string>& path, F&& f) const -> decltype(f()) {
        try {
            return f();
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            fail(path, e.what());
        }
    }

private:
    const std::string& text_;
};

inline Regularizer parse_regularizer(const ConfigReader& rd, const Json& j) {
    const std::vector<std::string> path{"optimizer", "regularizer"};
    rd.only_keys(j, path, {"kind", "norm", "radius"});
    const std::string kind = j.contains("kind") ? rd.string(j["kind"], {"optimizer", "regularizer", "kind"}) : "none";
    if (kind == "none") return Regularizer::none();
    if (kind != "clip_ball") rd.fail({"optimizer", "regularizer", "kind"}, "expected 'none' or 'clip_ball'");
    const NormKind norm = rd.wrap({"optimizer", "regularizer", "norm"}, [&] {
        return norm_kind_from_string(j.contains("norm") ? j["norm"].get<std::string>() : "infinity");
    });
    if (!j.contains("radius")) rd.fail(path, "clip_ball requires 'radius'");
    const double radius = rd.number(j["radius"], {"optimizer", "regularizer", "radius"});
    return rd.wrap({"optimizer", "regularizer", "radius"}, [&] { return Regularizer::clip_ball(norm, radius); });
}

inline OrthConfig parse_orth(const ConfigReader& rd, const Json& j) {
    rd.only_keys(j, {"optimizer", "orth"}, {"method", "ns_steps", "rank_tol"});
    OrthConfig cfg;
    if (j.contains("method")) {
        const std::string m = rd.string(j["method"], {"optimizer", "orth", "method"});
        if (m == "exact_svd") {
            cfg.method = OrthMethod::ExactSVD;
        } else if (m == "newton_schulz") {
            cfg.method = OrthMethod::NewtonSchulz;
        } else {
            rd.fail({"optimizer", "orth", "method"}, "expected 'exact_svd' or 'newton_schulz'");
        }
    }
    if (j.contains("ns_steps")) cfg.ns_steps = static_cast<int>(rd.unsigned_int(j["ns_steps"], {"optimizer", "orth", "ns_steps"}));
    if (j.contains("rank_tol")) cfg.rank_tol = rd.number(j["rank_tol"], {"optimizer", "orth", "rank_tol"});
    rd.wrap({"optimizer", "orth"}, [&] { cfg.validate(); return 0; });
    return cfg;
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text) {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what(), detail::line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1));
    }
    const detail::ConfigReader rd(text);
    rd.only_keys(root, {}, {"problem", "optimizer", "seeds", "output_dir"});
    if (!root.contains("problem")) rd.fail({}, "missing 'problem'");
    if (!root.contains("optimizer")) rd.fail({}, "missing 'optimizer'");

    ExperimentConfig cfg;

    const Json& pj = root["problem"];
    rd.only_keys(pj, {"problem"}, {"kind", "shape", "condition", "samples", "loss", "seed", "sigma", "x0", "x_star"});
    ProblemSpec& ps = cfg.problem;
    if (pj.contains("kind")) ps.kind = rd.string(pj["kind"], {"problem", "kind"});
    if (ps.kind != "quadratic" && ps.kind != "matrix_layer")
        rd.fail({"problem", "kind"}, "expected 'quadratic' or 'matrix_layer'");
    if (!pj.contains("shape")) rd.fail({"problem"}, "missing 'shape'");
    {
        const Json& sj = pj["shape"];
        if (!sj.is_array() || sj.empty() || sj.size() > 2) rd.fail({"problem", "shape"}, "expected [d] or [m, n]");
        ps.shape.clear();
        for (const auto& e : sj) {
            const auto v = rd.unsigned_int(e, {"problem", "shape"});
            if (v == 0) rd.fail({"problem", "shape"}, "dimensions must be positive");
            ps.shape.push_back(static_cast<std::size_t>(v));
        }
        if (ps.kind == "matrix_layer" && ps.shape.size() != 2)
            rd.fail({"problem", "shape"}, "matrix_layer requires [m, n]");
    }
    if (pj.contains("condition")) {
        ps.condition = rd.number(pj["condition"], {"problem", "condition"});
        if (!(ps.condition >= 1.0)) rd.fail({"problem", "condition"}, "condition must be >= 1");
    }
    if (pj.contains("samples")) {
        ps.samples = static_cast<std::size_t>(rd.unsigned_int(pj["samples"], {"problem", "samples"}));
        if (ps.samples == 0) rd.fail({"problem", "samples"}, "samples must be positive");
    }
    if (pj.contains("loss"))
        ps.loss = rd.wrap({"problem", "loss"}, [&] { return loss_kind_from_string(pj["loss"].get<std::string>()); });
    if (pj.contains("seed")) ps.seed = rd.unsigned_int(pj["seed"], {"problem", "seed"});
    if (pj.contains("sigma")) {
        ps.sigma = rd.number(pj["sigma"], {"problem", "sigma"});
        if (!(ps.sigma >= 0.0)) rd.fail({"problem", "sigma"}, "sigma must be non-negative");
    }
    std::size_t numel = 1;
    for (auto d : ps.shape) numel *= d;
    if (pj.contains("x0")) {
        ps.x0 = rd.numbers(pj["x0"], {"problem", "x0"});
        if (ps.x0->size() != numel) rd.fail({"problem", "x0"}, "length does not match shape");
    }
    if (pj.contains("x_star")) {
        if (ps.kind != "quadratic") rd.fail({"problem", "x_star"}, "only quadratic problems accept x_star");
        ps.x_star = rd.numbers(pj["x_star"], {"problem", "x_star"});
        if (ps.x_star->size() != numel) rd.fail({"problem", "x_star"}, "length does not match shape");
    }

    const Json& oj = root["optimizer"];
    rd.only_keys(oj, {"optimizer"},
                 {"variant", "geometry", "regularizer", "eta", "alpha", "beta", "gamma", "K", "schedule", "orth"});
    OptimizerConfig& oc = cfg.optimizer;
    if (!oj.contains("variant")) rd.fail({"optimizer"}, "missing 'variant'");
    oc.variant = rd.wrap({"optimizer", "variant"}, [&] { return variant_from_string(oj["variant"].get<std::string>()); });
    oc.geometry = is_reference(oc.variant) ? NormKind::Spectral : NormKind::Euclidean;
    if (oj.contains("geometry"))
        oc.geometry = rd.wrap({"optimizer", "geometry"}, [&] { return norm_kind_from_string(oj["geometry"].get<std::string>()); });
    if (oj.contains("regularizer")) oc.regularizer = detail::parse_regularizer(rd, oj["regularizer"]);
    if (oj.contains("orth")) oc.orth = detail::parse_orth(rd, oj["orth"]);

    if (oj.contains("schedule")) {
        const Json& sj = oj["schedule"];
        rd.only_keys(sj, {"optimizer", "schedule"}, {"corollary", "eps"});
        for (const char* k : {"eta", "alpha", "beta", "gamma", "K"}) {
            if (oj.contains(k)) rd.fail({"optimizer", k}, "cannot be combined with 'schedule'");
        }
        ScheduleRef ref;
        if (!sj.contains("corollary")) rd.fail({"optimizer", "schedule"}, "missing 'corollary'");
        ref.corollary = rd.wrap({"optimizer", "schedule", "corollary"},
                                [&] { return corollary_from_string(sj["corollary"].get<std::string>()); });
        if (!sj.contains("eps")) rd.fail({"optimizer", "schedule"}, "missing 'eps'");
        ref.eps = rd.number(sj["eps"], {"optimizer", "schedule", "eps"});
        if (!(ref.eps > 0.0)) rd.fail({"optimizer", "schedule", "eps"}, "eps must be positive");
        cfg.schedule = ref;
    } else {
        if (!oj.contains("eta")) rd.fail({"optimizer"}, "missing 'eta' (or 'schedule')");
        if (!oj.contains("K")) rd.fail({"optimizer"}, "missing 'K' (or 'schedule')");
        oc.eta = rd.number(oj["eta"], {"optimizer", "eta"});
        oc.K = static_cast<int>(rd.unsigned_int(oj["K"], {"optimizer", "K"}));
        if (oj.contains("alpha")) oc.alpha = rd.number(oj["alpha"], {"optimizer", "alpha"});
        if (oj.contains("beta")) oc.beta = rd.number(oj["beta"], {"optimizer", "beta"});
        oc.gamma = oj.contains("gamma") ? rd.number(oj["gamma"], {"optimizer", "gamma"}) : 1.0 / oc.alpha;
        const Shape shape = ps.shape.size() == 1 ? Shape::vector(ps.shape[0]) : Shape::matrix(ps.shape[0], ps.shape[1]);
        rd.wrap({"optimizer"}, [&] { oc.validate(shape); return 0; });
    }

    if (root.contains("seeds")) {
        const Json& sj = root["seeds"];
        if (!sj.is_array() || sj.empty()) rd.fail({"seeds"}, "expected a non-empty array");
        cfg.seeds.clear();
        for (const auto& e : sj) cfg.seeds.push_back(rd.unsigned_int(e, {"seeds"}));
    }
    if (root.contains("output_dir")) cfg.output_dir = rd.string(root["output_dir"], {"output_dir"});
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'", 1);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

inline Shape shape_of(const ProblemSpec& ps) {
    return ps.shape.size() == 1 ? Shape::vector(ps.shape[0]) : Shape::matrix(ps.shape[0], ps.shape[1]);
}

inline Problem build_problem(const ProblemSpec& ps) {
    const Shape shape = shape_of(ps);
    Problem p;
    if (ps.kind == "quadratic") {
        std::optional<ParamPoint> xs;
        if (ps.x_star) xs = ParamPoint(shape, *ps.x_star);
        p = make_quadratic(shape, ps.condition, ps.seed, xs);
    } else {
        p = make_matrix_layer(ps.shape[0], ps.shape[1], ps.samples, ps.loss, ps.seed).problem;
    }
    if (ps.x0) p.x0 = ParamPoint(shape, *ps.x0);
    p.sigma = ps.sigma;
    return p;
}

/// Schedule inputs from the problem's analytic constants. D is the domain
/// diameter under a clip regularizer, otherwise max(||x0||, ||x*||).
inline ScheduleInputs schedule_inputs(const Problem& p, const OptimizerConfig& oc, double eps) {
    const BoundConstants c = constants_for(p, oc);
    ScheduleInputs in;
    in.eps = eps;
    in.L = c.L;
    in.H = c.H;
    in.sigma = c.sigma;
    in.rho = c.rho;
    in.delta0 = c.delta0;
    if (c.D) {
        in.D = c.D;
    } else if (c.x_star_norm) {
        in.D = std::max(*c.x0_norm, *c.x_star_norm);
    }
    return in;
}

/// Applies a schedule reference (if any) to the optimizer parameters.
inline std::optional<Schedule> resolve_schedule(ExperimentConfig& cfg, const Problem& p) {
    if (!cfg.schedule) return std::nullopt;
    const Schedule s = schedule(cfg.schedule->corollary, schedule_inputs(p, cfg.optimizer, cfg.schedule->eps));
    cfg.optimizer.eta = s.eta;
    cfg.optimizer.alpha = s.alpha;
    cfg.optimizer.beta = s.beta;
    cfg.optimizer.gamma = s.gamma;
    cfg.optimizer.K = s.K;
    cfg.optimizer.validate(p.shape);
    return s;
}

// ---------------------------------------------------------------------------
// Serialization.

inline Json to_json(const OptimizerConfig& oc) {
    Json j;
    j["variant"] = to_string(oc.variant);
    j["geometry"] = to_string(oc.geometry);
    if (oc.regularizer.is_none()) {
        j["regularizer"] = {{"kind", "none"}};
    } else {
        j["regularizer"] = {
            {"kind", "clip_ball"}, {"norm", to_string(oc.regularizer.clip_norm)}, {"radius", oc.regularizer.radius}};
    }
    j["eta"] = oc.eta;
    j["alpha"] = oc.alpha;
    j["beta"] = oc.beta;
    j["gamma"] = oc.gamma;
    j["K"] = oc.K;
    j["orth"] = {{"method", oc.orth.method == OrthMethod::ExactSVD ? "exact_svd" : "newton_schulz"},
                 {"ns_steps", oc.orth.ns_steps},
                 {"rank_tol", oc.orth.rank_tol}};
    return j;
}

inline Json to_json(const ProblemSpec& ps) {
    Json j;
    j["kind"] = ps.kind;
    j["shape"] = ps.shape;
    if (ps.kind == "quadratic") {
        j["condition"] = ps.condition;
    } else {
        j["samples"] = ps.samples;
        j["loss"] = to_string(ps.loss);
    }
    j["seed"] = ps.seed;
    j["sigma"] = ps.sigma;
    if (ps.x0) j["x0"] = *ps.x0;
    if (ps.x_star) j["x_star"] = *ps.x_star;
    return j;
}

/// Config with resolved optimizer parameters; parse_config accepts it back.
inline Json to_json(const ExperimentConfig& cfg) {
    return {{"problem", to_json(cfg.problem)},
            {"optimizer", to_json(cfg.optimizer)},
            {"seeds", cfg.seeds},
            {"output_dir", cfg.output_dir}};
}

namespace detail {

/// JSON has no infinities; they are written as null.
inline Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline double from_nullable(const Json& j, double if_null) { return j.is_null() ? if_null : j.get<double>(); }

}  // namespace detail

inline Json to_json(const RunSummary& s) {
    Json j;
    j["min_residual"] = detail::finite_or_null(s.min_residual);
    j["final_F"] = detail::finite_or_null(s.final_F);
    j["final_gap"] = s.final_gap ? detail::finite_or_null(*s.final_gap) : Json(nullptr);
    j["max_step"] = s.max_step;
    j["max_decay_norm"] = s.max_decay_norm;
    j["min_prox_slack"] = detail::finite_or_null(s.min_prox_slack);
    j["bounds"] = Json::object();
    for (const auto& [k, v] : s.bounds) j["bounds"][k] = v;
    return j;
}

inline RunSummary summary_from_json(const Json& j) {
    const double inf = std::numeric_limits<double>::infinity();
    RunSummary s;
    s.min_residual = detail::from_nullable(j.at("min_residual"), inf);
    s.final_F = detail::from_nullable(j.at("final_F"), inf);
    if (!j.at("final_gap").is_null()) s.final_gap = j.at("final_gap").get<double>();
    s.max_step = j.at("max_step").get<double>();
    s.max_decay_norm = j.at("max_decay_norm").get<double>();
    s.min_prox_slack = detail::from_nullable(j.at("min_prox_slack"), inf);
    for (const auto& [k, v] : j.at("bounds").items()) s.bounds[k] = v.get<double>();
    return s;
}

inline Json to_json(const BoundReport& r) {
    Json j{{"id", r.id},     {"lhs", r.lhs},       {"rhs", r.rhs},
           {"holds", r.holds}, {"margin", r.margin}, {"seeds", r.seeds}};
    if (r.worst_k >= 0) j["worst_k"] = r.worst_k;
    return j;
}

inline const char* kCsvHeader = "k,F,residual,x_norm,momentum_err,wall_ms";

inline std::string run_csv(const RunRecord& rec) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& r : rec.rows) {
        out += std::to_string(r.k) + ',' + format_double(r.F) + ',' + format_double(r.residual) + ',' +
               format_double(r.x_norm) + ',' + format_double(r.momentum_err) + ',' + format_double(r.wall_ms) + '\n';
    }
    return out;
}

inline std::vector<RunRow> parse_run_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw std::invalid_argument("unexpected CSV header");
    std::vector<RunRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                f.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        }
        if (f.size() != 6) throw std::invalid_argument("CSV row with " + std::to_string(f.size()) + " fields");
        RunRow r;
        r.k = std::stoi(f[0]);
        r.F = parse_double(f[1]);
        r.residual = parse_double(f[2]);
        r.x_norm = parse_double(f[3]);
        r.momentum_err = parse_double(f[4]);
        r.wall_ms = parse_double(f[5]);
        rows.push_back(r);
    }
    return rows;
}

/// Static line chart of residual against k on a log axis, one polyline per run.
inline std::string residual_svg(const std::vector<RunRecord>& records, const std::string& title = "residual") {
    const double W = 640, H = 400, left = 70, right = 20, top = 30, bottom = 50;
    const double pw = W - left - right, ph = H - top - bottom;
    int kmax = 1;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& r : records) {
        for (const auto& row : r.rows) {
            kmax = std::max(kmax, row.k);
            if (row.residual > 0.0 && std::isfinite(row.residual)) {
                lo = std::min(lo, row.residual);
                hi = std::max(hi, row.residual);
            }
        }
    }
    if (!(hi > 0.0)) {
        lo = 1e-1;
        hi = 1.0;
    }
    double ylo = std::floor(std::log10(lo)), yhi = std::ceil(std::log10(hi));
    if (yhi <= ylo) yhi = ylo + 1.0;
    auto px = [&](double k) { return left + pw * k / kmax; };
    auto py = [&](double v) {
        const double lv = std::log10(std::max(v, std::pow(10.0, ylo)));
        return top + ph * (yhi - lv) / (yhi - ylo);
    };
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
    s += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
    s += "<text x=\"320\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" + title +
         "</text>\n";
    s += "<rect x=\"" + fixed(left, 2) + "\" y=\"" + fixed(top, 2) + "\" width=\"" + fixed(pw, 2) + "\" height=\"" +
         fixed(ph, 2) + "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int e = static_cast<int>(ylo); e <= static_cast<int>(yhi); ++e) {
        const double y = py(std::pow(10.0, e));
        s += "<line x1=\"" + fixed(left, 2) + "\" y1=\"" + fixed(y, 2) + "\" x2=\"" + fixed(left + pw, 2) +
             "\" y2=\"" + fixed(y, 2) + "\" stroke=\"#dddddd\"/>\n";
        s += "<text x=\"" + fixed(left - 6, 2) + "\" y=\"" + fixed(y + 4, 2) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" + std::to_string(e) + "</text>\n";
    }
    for (int t = 0; t <= 4; ++t) {
        const double k = kmax * t / 4.0;
        s += "<text x=\"" + fixed(px(k), 2) + "\" y=\"" + fixed(top + ph + 16, 2) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + fixed(k, 0) + "</text>\n";
    }
    s += "<text x=\"" + fixed(left + pw / 2, 2) + "\" y=\"" + fixed(H - 10, 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">k</text>\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        s += "<polyline fill=\"none\" stroke-width=\"1.2\" stroke=\"" + std::string(palette[i % 10]) + "\" points=\"";
        for (std::size_t j = 0; j < records[i].rows.size(); ++j) {
            const auto& row = records[i].rows[j];
            if (j) s += ' ';
            s += fixed(px(row.k), 2) + "," + fixed(py(row.residual), 2);
        }
        s += "\"/>\n";
    }
    s += "</svg>\n";
    return s;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string run_csv_name(std::uint64_t seed) { return "run_seed" + std::to_string(seed) + ".csv"; }

/// Summary document for a group of runs of one config.
inline Json summary_json(const ExperimentConfig& cfg, const std::optional<Schedule>& sched,
                         const std::vector<RunRecord>& records, const std::vector<BoundReport>& checks) {
    Json j;
    j["config"] = to_json(cfg);
    if (sched && cfg.schedule) {
        j["schedule"] = {{"corollary", to_string(cfg.schedule->corollary)},
                         {"eps", cfg.schedule->eps},
                         {"eta", sched->eta},
                         {"alpha", sched->alpha},
                         {"beta", sched->beta},
                         {"gamma", sched->gamma},
                         {"K", sched->K}};
    }
    j["warnings"] = cfg.optimizer.warnings();
    j["runs"] = Json::array();
    for (const auto& r : records) {
        j["runs"].push_back({{"seed", r.seed}, {"csv", run_csv_name(r.seed)}, {"summary", to_json(r.summary)}});
    }
    j["checks"] = Json::array();
    for (const auto& c : checks) j["checks"].push_back(to_json(c));
    return j;
}

/// (seed, summary) pairs stored in a summary document.
inline std::vector<std::pair<std::uint64_t, RunSummary>> read_summaries(const Json& j) {
    std::vector<std::pair<std::uint64_t, RunSummary>> out;
    for (const auto& r : j.at("runs")) out.emplace_back(r.at("seed").get<std::uint64_t>(), summary_from_json(r.at("summary")));
    return out;
}

/// Recomputes the row-derived summary fields from CSV rows.
inline RunSummary summary_from_rows(const std::vector<RunRow>& rows, const RunSummary& stored) {
    RunSummary s = stored;
    s.min_residual = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < rows.size(); ++i) s.min_residual = std::min(s.min_residual, rows[i].residual);
    s.final_F = rows.back().F;
    return s;
}

}  // namespace ntr
