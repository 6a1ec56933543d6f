// Command-line front end. Talks to the library only through the C API.

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lsfbm/lsfbm.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 2, kData = 3, kNumerical = 4 };

// Carries a library status up to main, which maps it onto an exit code.
struct Failure : std::runtime_error {
    lsfbm_status status;
    Failure(lsfbm_status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

int exit_code(lsfbm_status s) {
    switch (s) {
        case LSFBM_OK: return kOk;
        case LSFBM_E_INVALID:
        case LSFBM_E_RESOURCE: return kUsage;
        case LSFBM_E_DATA:
        case LSFBM_E_IO: return kData;
        default: return kNumerical;
    }
}

void check(lsfbm_status s, const std::string& context = "") {
    if (s == LSFBM_OK) return;
    std::string msg = lsfbm_last_error();
    if (!context.empty()) msg = context + ": " + msg;
    throw Failure(s, msg);
}

void usage_error(const std::string& what) { throw Failure(LSFBM_E_INVALID, what); }

std::string fmt(double x) {
    if (std::isnan(x)) return "NA";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json parse_json(const char* s) { return json::parse(s ? s : "null"); }

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Failure(LSFBM_E_IO, "cannot write " + path.string());
    out << text;
    if (!out) throw Failure(LSFBM_E_IO, "write failed: " + path.string());
}

void write_json_file(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
    fs::path out = p;
    out.replace_extension();
    out += suffix;
    return out;
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        double v = 0.0;
        const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (r.ec != std::errc() || r.ptr != tok.data() + tok.size()) usage_error("not a number: " + tok);
        out.push_back(v);
    }
    return out;
}

std::vector<long> parse_lags(const std::string& s) {
    std::vector<long> out;
    for (double v : parse_doubles(s)) {
        if (v != std::floor(v) || v < 0) usage_error("lags must be nonnegative integers");
        out.push_back(static_cast<long>(v));
    }
    return out;
}

// Everything a command needs to write its manifest.
struct Run {
    std::string command;
    std::vector<std::string> argv;
    std::string started = utc_now();
    json parameters = json::object();
    json outputs = json::array();

    void output(const fs::path& p) { outputs.push_back(p.string()); }

    void finish(const fs::path& manifest) {
        json j = {{"command", command},
                  {"argv", argv},
                  {"parameters", parameters},
                  {"code_version", lsfbm_version()},
                  {"started_utc", started},
                  {"finished_utc", utc_now()},
                  {"outputs", outputs}};
        if (parameters.contains("seed")) j["seed"] = parameters["seed"];
        write_json_file(manifest, j);
    }
};

struct Series {
    lsfbm_series* p = nullptr;
    ~Series() { lsfbm_series_free(p); }
};

// ---------------------------------------------------------------- simulate

struct SimArgs {
    double H = 0.1, lambda2 = 0.05, T = 131072.0, L = 16384.0, delta = 1.0, sigma2 = 1.0;
    int subdivisions = 32;
    std::uint64_t seed = 0;
    bool emit_price = false;
    long max_fine_points = 1L << 24;
    std::string out;
};

void add_model_flags(CLI::App* c, SimArgs& a) {
    c->add_option("--H", a.H, "Hurst exponent, 0 <= H < 1/2")->capture_default_str();
    c->add_option("--lambda2", a.lambda2, "intermittency coefficient")->capture_default_str();
    c->add_option("--T", a.T, "integral scale")->capture_default_str();
    c->add_option("--sigma2", a.sigma2, "mean variance per unit time")->capture_default_str();
}

void add_sim_flags(CLI::App* c, SimArgs& a) {
    add_model_flags(c, a);
    c->add_option("--L", a.L, "observation length")->capture_default_str();
    c->add_option("--delta", a.delta, "cell size")->capture_default_str();
    c->add_option("--subdivisions", a.subdivisions, "fine steps per cell")->capture_default_str();
    c->add_option("--seed", a.seed, "random seed")->capture_default_str();
    c->add_option("--max-fine-points", a.max_fine_points, "refuse larger fine grids")->capture_default_str();
}

lsfbm_sim_config sim_config(const SimArgs& a) {
    lsfbm_sim_config c;
    lsfbm_sim_config_default(&c);
    c.params = {a.H, a.lambda2, a.T, a.sigma2};
    c.L = a.L;
    c.delta = a.delta;
    c.subdivisions = a.subdivisions;
    c.seed = a.seed;
    c.emit_price = a.emit_price ? 1 : 0;
    c.max_fine_points = a.max_fine_points;
    return c;
}

json sim_json(const SimArgs& a) {
    return {{"H", a.H},           {"lambda2", a.lambda2}, {"T", a.T},
            {"sigma2", a.sigma2}, {"L", a.L},             {"delta", a.delta},
            {"subdivisions", a.subdivisions}, {"seed", a.seed}, {"emit_price", a.emit_price},
            {"max_fine_points", a.max_fine_points}};
}

void cmd_simulate(const SimArgs& a, Run& run) {
    run.parameters = sim_json(a);
    const lsfbm_sim_config cfg = sim_config(a);
    lsfbm_simulation* sim = nullptr;
    check(lsfbm_simulate(&cfg, &sim));
    std::unique_ptr<lsfbm_simulation, void (*)(lsfbm_simulation*)> guard(sim, lsfbm_simulation_free);
    const fs::path dir(a.out);
    fs::create_directories(dir);

    Series m;
    check(lsfbm_simulation_measure(sim, &m.p));
    check(lsfbm_series_write_csv(m.p, (dir / "measure.csv").string().c_str()));
    run.output(dir / "measure.csv");
    if (a.emit_price) {
        Series rv;
        check(lsfbm_simulation_rv(sim, &rv.p));
        check(lsfbm_series_write_csv(rv.p, (dir / "rv.csv").string().c_str()));
        run.output(dir / "rv.csv");
        const double* r = nullptr;
        size_t n = 0;
        double dt = 0.0;
        check(lsfbm_simulation_price(sim, &r, &n, &dt));
        std::string text = "index,log_return\n";
        text.reserve(n * 28);
        for (size_t i = 0; i < n; ++i) text += std::to_string(i) + "," + fmt(r[i]) + "\n";
        write_text(dir / "price.csv", text);
        run.output(dir / "price.csv");
    }
    run.parameters["resolved"] = parse_json(lsfbm_simulation_config_json(sim));
    run.finish(dir / "manifest.json");
}

// ---------------------------------------------------------------- theory

struct TheoryArgs {
    SimArgs model;
    std::string curve;
    double z = std::nan("");
    double x_min = 1.0, x_max = 1000.0;
    int points = 50;
    bool log_grid = false;
    double tau_min = 10.0, tau_max = 500.0;
    long n_max = 64;
    double q = 2.0;
    bool anchored = false;
    std::string out;
};

std::vector<double> grid(const TheoryArgs& a) {
    if (!std::isnan(a.z)) return {a.z};
    if (a.points < 1) usage_error("--points must be positive");
    if (!(a.x_max >= a.x_min)) usage_error("--x-max must not be below --x-min");
    if (a.log_grid && !(a.x_min > 0.0)) usage_error("--log needs a positive --x-min");
    std::vector<double> xs;
    for (int i = 0; i < a.points; ++i) {
        const double t = a.points == 1 ? 0.0 : static_cast<double>(i) / (a.points - 1);
        xs.push_back(a.log_grid ? a.x_min * std::pow(a.x_max / a.x_min, t) : a.x_min + t * (a.x_max - a.x_min));
    }
    return xs;
}

void cmd_theory(const TheoryArgs& a, Run& run) {
    const SimArgs& m = a.model;
    const lsfbm_params p{m.H, m.lambda2, m.T, m.sigma2};
    run.parameters = {{"curve", a.curve}, {"H", m.H},         {"lambda2", m.lambda2}, {"T", m.T},
                      {"sigma2", m.sigma2}, {"delta", m.delta}, {"q", a.q},           {"anchored", a.anchored}};
    std::vector<std::pair<double, double>> rows;
    std::string header = "x,y";
    json sidecar;
    // f writes the curve value at x through its pointer argument
    auto eval = [&](double x, auto&& f) {
        double y = 0.0;
        check(f(&y), a.curve + " at x = " + fmt(x));
        rows.emplace_back(x, y);
    };
    if (a.curve == "gh") {
        header = "z,g_H";
        for (double z : grid(a)) eval(z, [&](double* y) { return lsfbm_g_h(m.H, z, y); });
    } else if (a.curve == "bias") {
        header = "ln_tau_over_delta,ln_g_H";
        std::vector<double> taus;
        for (long t = std::lround(std::ceil(a.tau_min)); t <= std::lround(std::floor(a.tau_max)); ++t)
            taus.push_back(static_cast<double>(t) * m.delta);
        if (taus.size() < 2) usage_error("bias needs at least two lags in [--tau-min, --tau-max]");
        for (double t : taus) {
            eval(std::log(t / m.delta), [&](double* y) {
                const lsfbm_status st = lsfbm_g_h(m.H, m.delta / t, y);
                *y = std::log(*y);
                return st;
            });
        }
        double slope = 0.0, intercept = 0.0;
        check(lsfbm_scaling_bias(m.H, m.delta, taus.data(), taus.size(), &slope, &intercept));
        sidecar = {{"H", m.H},           {"delta", m.delta}, {"tau_min", a.tau_min}, {"tau_max", a.tau_max},
                   {"B", slope},         {"intercept", intercept},
                   {"implied_H", m.H + 0.5 * slope}};
        run.parameters["tau_min"] = a.tau_min;
        run.parameters["tau_max"] = a.tau_max;
    } else if (a.curve == "cm") {
        header = "tau,corr_M";
        for (double t : grid(a)) eval(t, [&](double* y) { return lsfbm_corr_M(&p, m.delta, t, y); });
    } else if (a.curve == "clnm") {
        header = "tau,cov_lnM";
        for (double t : grid(a)) eval(t, [&](double* y) { return lsfbm_cov_lnM(&p, m.delta, t, y); });
    } else if (a.curve == "mq") {
        header = "tau,m_q";
        for (double t : grid(a)) eval(t, [&](double* y) { return lsfbm_m_q(&p, a.q, t, m.delta, y); });
    } else if (a.curve == "dtilde") {
        header = a.anchored ? "n,dtilde_anchored" : "n,dtilde";
        const double nu2 = lsfbm_nu2_from_lambda2(m.H, m.lambda2);
        for (long n = a.anchored ? 0 : 1; n <= a.n_max; ++n)
            eval(static_cast<double>(n), [&](double* y) {
                return a.anchored ? lsfbm_dtilde_lnM_anchored(m.H, m.lambda2, n, y) : lsfbm_dtilde_lnM(m.H, nu2, n, y);
            });
    } else if (a.curve == "rtilde") {
        header = "n,rtilde";
        for (long n = 0; n <= a.n_max; ++n)
            eval(static_cast<double>(n), [&](double* y) { return lsfbm_rtilde_M(m.H, m.lambda2, n, y); });
    } else {
        usage_error("unknown curve '" + a.curve + "' (expected gh, bias, cm, clnm, dtilde, rtilde or mq)");
    }
    std::string text = header + "\n";
    for (const auto& [x, v] : rows) text += fmt(x) + "," + fmt(v) + "\n";
    const fs::path out(a.out);
    write_text(out, text);
    run.output(out);
    if (!sidecar.is_null()) {
        write_json_file(with_suffix(out, ".json"), sidecar);
        run.output(with_suffix(out, ".json"));
    }
    run.finish(with_suffix(out, ".manifest.json"));
}

// ---------------------------------------------------------------- estimate

struct GmmArgs {
    std::string lags;
    long hac_lag = -1;
    double H_max = 0.499, lambda2_max = 5.0;
    int restarts = 3;
    bool iterate = false;
};

void add_gmm_flags(CLI::App* c, GmmArgs& g) {
    c->add_option("--lags", g.lags, "comma-separated lags (default: 0 and floor(sqrt(2^k)))");
    c->add_option("--hac-lag", g.hac_lag, "Bartlett lag; negative selects floor(N^(1/3))")->capture_default_str();
    c->add_option("--H-max", g.H_max, "upper bound on H")->capture_default_str();
    c->add_option("--lambda2-max", g.lambda2_max, "upper bound on lambda2")->capture_default_str();
    c->add_option("--restarts", g.restarts, "extra deterministic starting points")->capture_default_str();
    c->add_flag("--iterate", g.iterate, "iterated GMM instead of two steps");
}

lsfbm_gmm_spec gmm_spec(const GmmArgs& g, lsfbm_gmm_method method, std::vector<long>& lag_store) {
    lsfbm_gmm_spec s;
    lsfbm_gmm_spec_default(&s);
    s.method = method;
    if (!g.lags.empty()) {
        lag_store = parse_lags(g.lags);
        s.lags = lag_store.data();
        s.lag_count = lag_store.size();
    }
    s.hac_lag = g.hac_lag;
    s.H_max = g.H_max;
    s.lambda2_max = g.lambda2_max;
    s.restarts = g.restarts;
    s.iterate = g.iterate ? 1 : 0;
    return s;
}

json gmm_json(const GmmArgs& g) {
    return {{"lags", g.lags.empty() ? json("default") : json(parse_lags(g.lags))},
            {"hac_lag", g.hac_lag}, {"H_max", g.H_max}, {"lambda2_max", g.lambda2_max},
            {"restarts", g.restarts}, {"iterate", g.iterate}};
}

struct EstimateArgs {
    std::string input, method = "gmm-lnm", out;
    double delta = 1.0;
    GmmArgs gmm;
    double q = 2.0, tau_min = 10.0, tau_max = 500.0;
};

void cmd_estimate(const EstimateArgs& a, Run& run) {
    run.parameters = {{"input", a.input}, {"method", a.method}, {"delta", a.delta}};
    Series s;
    check(lsfbm_series_read_csv(a.input.c_str(), a.delta, &s.p), a.input);
    lsfbm_fit* fit = nullptr;
    if (a.method == "scaling") {
        run.parameters.update({{"q", a.q}, {"tau_min", a.tau_min}, {"tau_max", a.tau_max}});
        check(lsfbm_estimate_scaling(s.p, a.q, a.tau_min, a.tau_max, &fit), a.input);
    } else if (a.method == "gmm-lnm" || a.method == "gmm-m") {
        run.parameters["gmm"] = gmm_json(a.gmm);
        std::vector<long> lags;
        const lsfbm_gmm_spec spec = gmm_spec(a.gmm, a.method == "gmm-m" ? LSFBM_GMM_M : LSFBM_GMM_LNM, lags);
        check(lsfbm_estimate_gmm(s.p, &spec, &fit), a.input);
    } else {
        usage_error("unknown method '" + a.method + "' (expected gmm-lnm, gmm-m or scaling)");
    }
    std::unique_ptr<lsfbm_fit, void (*)(lsfbm_fit*)> guard(fit, lsfbm_fit_free);
    json j = parse_json(lsfbm_fit_json(fit));
    j["input"] = a.input;
    const fs::path out(a.out);
    write_json_file(out, j);
    run.output(out);
    run.finish(with_suffix(out, ".manifest.json"));
}

// ---------------------------------------------------------------- montecarlo

struct McArgs {
    std::string H = "0.1", lambda2 = "0.05";
    bool zip = false;
    int reps = 50;
    double L = 16384.0, T = 131072.0, delta = 1.0, sigma2 = 1.0;
    int subdivisions = 32;
    std::string method = "gmm-lnm", proxy = "rv";
    GmmArgs gmm;
    double tau_min = 10.0, tau_max = 500.0;
    std::uint64_t seed = 1;
    int threads = 0;
    double memory_cap_gib = 4.0;
    bool progress = false;
    std::string out;
};

void report_progress(size_t cell, size_t cells, const lsfbm_mc_summary* s, void*) {
    std::fprintf(stderr, "cell %zu/%zu H=%g lambda2=%g ok=%d failed=%d mean_H=%.4f %.1fs\n", cell + 1, cells, s->H,
                 s->lambda2, s->ok, s->failed, s->mean_H, s->seconds);
}

void cmd_montecarlo(const McArgs& a, Run& run) {
    const auto hs = parse_doubles(a.H), ls = parse_doubles(a.lambda2);
    if (hs.empty() || ls.empty()) usage_error("--H and --lambda2 need at least one value");
    std::vector<double> cell_h, cell_l;
    if (a.zip) {
        if (hs.size() != ls.size()) usage_error("--zip needs lists of equal length");
        cell_h = hs;
        cell_l = ls;
    } else {
        for (double h : hs)
            for (double l : ls) {
                cell_h.push_back(h);
                cell_l.push_back(l);
            }
    }
    lsfbm_mc_config c;
    lsfbm_mc_config_default(&c);
    c.H = cell_h.data();
    c.lambda2 = cell_l.data();
    c.cell_count = cell_h.size();
    c.reps = a.reps;
    c.L = a.L;
    c.T = a.T;
    c.delta = a.delta;
    c.subdivisions = a.subdivisions;
    c.sigma2 = a.sigma2;
    if (a.method == "gmm-lnm") c.estimator = LSFBM_MC_GMM_LNM;
    else if (a.method == "gmm-m") c.estimator = LSFBM_MC_GMM_M;
    else if (a.method == "scaling") c.estimator = LSFBM_MC_SCALING;
    else usage_error("unknown method '" + a.method + "'");
    if (a.proxy == "rv") c.proxy = LSFBM_MC_RV;
    else if (a.proxy == "measure") c.proxy = LSFBM_MC_MEASURE;
    else usage_error("unknown proxy '" + a.proxy + "' (expected rv or measure)");
    std::vector<long> lags;
    c.gmm = gmm_spec(a.gmm, LSFBM_GMM_LNM, lags);
    c.tau_min = a.tau_min;
    c.tau_max = a.tau_max;
    c.seed = a.seed;
    c.threads = a.threads;
    c.memory_cap_bytes = a.memory_cap_gib * 1024.0 * 1024.0 * 1024.0;

    run.parameters = {{"H", hs},           {"lambda2", ls},     {"zip", a.zip},     {"reps", a.reps},
                      {"L", a.L},          {"T", a.T},          {"delta", a.delta}, {"sigma2", a.sigma2},
                      {"subdivisions", a.subdivisions}, {"method", a.method}, {"proxy", a.proxy},
                      {"gmm", gmm_json(a.gmm)}, {"tau_min", a.tau_min}, {"tau_max", a.tau_max},
                      {"seed", a.seed},    {"threads", a.threads}, {"memory_cap_gib", a.memory_cap_gib}};
    lsfbm_mc_result* res = nullptr;
    check(lsfbm_montecarlo(&c, a.progress ? report_progress : nullptr, nullptr, &res));
    std::unique_ptr<lsfbm_mc_result, void (*)(lsfbm_mc_result*)> guard(res, lsfbm_mc_result_free);

    const fs::path dir(a.out);
    fs::create_directories(dir);
    std::string text =
        "H,lambda2,ok,failed,mean_H,sd_H,rms_H,mean_lambda2,sd_lambda2,rms_lambda2,mean_nu2,sd_nu2,finite_nu2\n";
    for (size_t i = 0; i < lsfbm_mc_cell_count(res); ++i) {
        lsfbm_mc_summary s;
        check(lsfbm_mc_summary_at(res, i, &s));
        text += fmt(s.H) + "," + fmt(s.lambda2) + "," + std::to_string(s.ok) + "," + std::to_string(s.failed) + "," +
                fmt(s.mean_H) + "," + fmt(s.sd_H) + "," + fmt(s.rms_H) + "," + fmt(s.mean_lambda2) + "," +
                fmt(s.sd_lambda2) + "," + fmt(s.rms_lambda2) + "," + fmt(s.mean_nu2) + "," + fmt(s.sd_nu2) + "," +
                std::to_string(s.finite_nu2) + "\n";
    }
    write_text(dir / "summary.csv", text);
    run.output(dir / "summary.csv");
    text = "cell,H,lambda2,rep,seed,H_hat,lambda2_hat,nu2_hat,converged,failed\n";
    for (size_t i = 0; i < lsfbm_mc_replication_count(res); ++i) {
        lsfbm_mc_replication r;
        check(lsfbm_mc_replication_at(res, i, &r));
        text += std::to_string(r.cell) + "," + fmt(cell_h[r.cell]) + "," + fmt(cell_l[r.cell]) + "," +
                std::to_string(r.rep) + "," + std::to_string(r.seed) + "," + fmt(r.H_hat) + "," +
                fmt(r.lambda2_hat) + "," + fmt(r.nu2_hat) + "," + std::to_string(r.converged) + "," +
                std::to_string(r.failed) + "\n";
    }
    write_text(dir / "replications.csv", text);
    run.output(dir / "replications.csv");
    run.parameters["resolved"] = parse_json(lsfbm_mc_config_json(res));
    run.finish(dir / "manifest.json");
}

// ---------------------------------------------------------------- ingest

struct IngestArgs {
    std::string ohlc, intraday, estimator = "gk", cleaning = "drop", out;
    double floor = 1e-12;
};

void cmd_ingest(const IngestArgs& a, Run& run) {
    run.parameters = {{"ohlc", a.ohlc}, {"intraday", a.intraday}, {"estimator", a.estimator},
                      {"cleaning", a.cleaning}, {"floor", a.floor}};
    lsfbm_cleaning cl = LSFBM_CLEAN_DROP;
    if (a.cleaning == "floor") cl = LSFBM_CLEAN_FLOOR;
    else if (a.cleaning != "drop") usage_error("unknown cleaning '" + a.cleaning + "' (expected drop or floor)");
    if (a.ohlc.empty() == a.intraday.empty()) usage_error("give exactly one of --ohlc and --intraday");
    Series s;
    if (!a.ohlc.empty()) {
        if (a.estimator != "gk") usage_error("OHLC input supports only --estimator gk");
        check(lsfbm_ingest_ohlc(a.ohlc.c_str(), cl, a.floor, &s.p), a.ohlc);
    } else {
        lsfbm_proxy px = LSFBM_PROXY_RV;
        if (a.estimator == "bv") px = LSFBM_PROXY_BV;
        else if (a.estimator != "rv") usage_error("intraday input supports --estimator rv or bv");
        check(lsfbm_ingest_intraday(a.intraday.c_str(), px, cl, a.floor, &s.p), a.intraday);
    }
    const fs::path out(a.out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    check(lsfbm_series_write_csv(s.p, out.string().c_str()));
    run.output(out);
    write_json_file(with_suffix(out, ".json"), parse_json(lsfbm_series_meta_json(s.p)));
    run.output(with_suffix(out, ".json"));
    run.finish(with_suffix(out, ".manifest.json"));
}

// ---------------------------------------------------------------- synth-ohlc

struct SynthArgs {
    SimArgs sim;
    double start_price = 100.0;
    std::string start_date = "2000-01-03";
};

void cmd_synth(const SynthArgs& a, Run& run) {
    run.parameters = sim_json(a.sim);
    run.parameters["start_price"] = a.start_price;
    run.parameters["start_date"] = a.start_date;
    SimArgs s = a.sim;
    s.emit_price = true;
    const lsfbm_sim_config cfg = sim_config(s);
    const fs::path out(a.sim.out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    check(lsfbm_synth_ohlc(&cfg, a.start_price, a.start_date.c_str(), out.string().c_str()));
    run.output(out);
    run.finish(with_suffix(out, ".manifest.json"));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and estimation of log S-fBM volatility models"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(lsfbm_version()));
    Run run;
    for (int i = 0; i < argc; ++i) run.argv.emplace_back(argv[i]);

    SimArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "simulate a log S-fBM measure (and optionally a price path)");
    add_sim_flags(c_sim, sim);
    c_sim->add_flag("--emit-price", sim.emit_price, "also write fine log-returns and the realized-variance proxy");
    c_sim->add_option("--out", sim.out, "output directory")->required();

    TheoryArgs th;
    th.model.L = 0.0;
    auto* c_th = app.add_subcommand("theory", "evaluate a closed-form curve on a grid");
    c_th->add_option("--curve", th.curve, "gh, bias, cm, clnm, dtilde, rtilde or mq")->required();
    add_model_flags(c_th, th.model);
    c_th->add_option("--delta", th.model.delta, "cell size")->capture_default_str();
    c_th->add_option("--z", th.z, "single grid point (gh: z = delta / tau)");
    c_th->add_option("--x-min", th.x_min, "grid start")->capture_default_str();
    c_th->add_option("--x-max", th.x_max, "grid end")->capture_default_str();
    c_th->add_option("--points", th.points, "grid size")->capture_default_str();
    c_th->add_flag("--log", th.log_grid, "logarithmic grid");
    c_th->add_option("--tau-min", th.tau_min, "bias: smallest lag")->capture_default_str();
    c_th->add_option("--tau-max", th.tau_max, "bias: largest lag")->capture_default_str();
    c_th->add_option("--n-max", th.n_max, "dtilde/rtilde: largest lag")->capture_default_str();
    c_th->add_option("--q", th.q, "mq: moment order")->capture_default_str();
    c_th->add_flag("--anchored", th.anchored, "dtilde: subtract the lag-0 value");
    c_th->add_option("--out", th.out, "output CSV; bias also writes <out>.json")->required();

    EstimateArgs est;
    auto* c_est = app.add_subcommand("estimate", "estimate H and lambda2 from a series");
    c_est->add_option("--input", est.input, "index,value CSV")->required();
    c_est->add_option("--method", est.method, "gmm-lnm, gmm-m or scaling")->capture_default_str();
    c_est->add_option("--delta", est.delta, "sampling interval of the series")->capture_default_str();
    add_gmm_flags(c_est, est.gmm);
    c_est->add_option("--q", est.q, "scaling: moment order")->capture_default_str();
    c_est->add_option("--tau-min", est.tau_min, "scaling: smallest lag")->capture_default_str();
    c_est->add_option("--tau-max", est.tau_max, "scaling: largest lag")->capture_default_str();
    c_est->add_option("--out", est.out, "output JSON")->required();

    McArgs mc;
    auto* c_mc = app.add_subcommand("montecarlo", "Monte Carlo sweep over a (H, lambda2) grid");
    c_mc->add_option("--H", mc.H, "comma-separated H values")->capture_default_str();
    c_mc->add_option("--lambda2", mc.lambda2, "comma-separated lambda2 values")->capture_default_str();
    c_mc->add_flag("--zip", mc.zip, "pair the lists instead of taking their product");
    c_mc->add_option("--reps", mc.reps, "replications per cell")->capture_default_str();
    c_mc->add_option("--L", mc.L, "observation length")->capture_default_str();
    c_mc->add_option("--T", mc.T, "integral scale")->capture_default_str();
    c_mc->add_option("--delta", mc.delta, "cell size")->capture_default_str();
    c_mc->add_option("--sigma2", mc.sigma2, "mean variance per unit time")->capture_default_str();
    c_mc->add_option("--subdivisions", mc.subdivisions, "fine steps per cell")->capture_default_str();
    c_mc->add_option("--method", mc.method, "gmm-lnm, gmm-m or scaling")->capture_default_str();
    c_mc->add_option("--proxy", mc.proxy, "rv (realized variance) or measure")->capture_default_str();
    add_gmm_flags(c_mc, mc.gmm);
    c_mc->add_option("--tau-min", mc.tau_min, "scaling: smallest lag")->capture_default_str();
    c_mc->add_option("--tau-max", mc.tau_max, "scaling: largest lag")->capture_default_str();
    c_mc->add_option("--seed", mc.seed, "replication r uses seed + r")->capture_default_str();
    c_mc->add_option("--threads", mc.threads, "worker threads (default: LSFBM_THREADS or 1)");
    c_mc->add_option("--memory-cap", mc.memory_cap_gib, "refuse runs projected above this many GiB")
        ->capture_default_str();
    c_mc->add_flag("--progress", mc.progress, "per-cell timing on standard error");
    c_mc->add_option("--out", mc.out, "output directory")->required();

    IngestArgs ing;
    auto* c_ing = app.add_subcommand("ingest", "build a daily variance series from market data");
    c_ing->add_option("--ohlc", ing.ohlc, "date,open,high,low,close CSV");
    c_ing->add_option("--intraday", ing.intraday, "date,return or date,rv,bv CSV");
    c_ing->add_option("--estimator", ing.estimator, "gk, rv or bv")->capture_default_str();
    c_ing->add_option("--cleaning", ing.cleaning, "drop or floor nonpositive values")->capture_default_str();
    c_ing->add_option("--floor", ing.floor, "floor value")->capture_default_str();
    c_ing->add_option("--out", ing.out, "output series CSV; provenance in <out>.json")->required();

    SynthArgs syn;
    syn.sim.T = 1024.0;
    syn.sim.L = 1000.0;
    syn.sim.sigma2 = 1e-4;
    syn.sim.subdivisions = 390;
    auto* c_syn = app.add_subcommand("synth-ohlc", "daily OHLC bars of a price with log S-fBM variance");
    add_sim_flags(c_syn, syn.sim);
    c_syn->add_option("--start-price", syn.start_price, "first open")->capture_default_str();
    c_syn->add_option("--start-date", syn.start_date, "first trading day")->capture_default_str();
    c_syn->add_option("--out", syn.sim.out, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*c_sim) run.command = "simulate", cmd_simulate(sim, run);
        else if (*c_th) run.command = "theory", cmd_theory(th, run);
        else if (*c_est) run.command = "estimate", cmd_estimate(est, run);
        else if (*c_mc) run.command = "montecarlo", cmd_montecarlo(mc, run);
        else if (*c_ing) run.command = "ingest", cmd_ingest(ing, run);
        else if (*c_syn) run.command = "synth-ohlc", cmd_synth(syn, run);
    } catch (const Failure& f) {
        std::cerr << "error: " << f.what() << "\n";
        return exit_code(f.status);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumerical;
    }
    return kOk;
}
