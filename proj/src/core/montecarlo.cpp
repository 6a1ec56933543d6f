#include "core/montecarlo.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <thread>

#include "core/error.hpp"

namespace lsfbm {

McEstimator parse_mc_estimator(const std::string& s) {
    if (s == "gmm-lnm" || s == "gmm_lnM" || s == "gmm_lnm") return McEstimator::GmmLnM;
    if (s == "gmm-m" || s == "gmm_M" || s == "gmm_m") return McEstimator::GmmM;
    if (s == "scaling") return McEstimator::Scaling;
    throw_invalid("unknown method '" + s + "' (expected gmm-lnm, gmm-m or scaling)");
}

std::string to_string(McEstimator e) {
    switch (e) {
        case McEstimator::GmmLnM: return "gmm_lnM";
        case McEstimator::GmmM: return "gmm_M";
        case McEstimator::Scaling: return "scaling";
    }
    return "?";
}

McProxy parse_mc_proxy(const std::string& s) {
    if (s == "measure") return McProxy::Measure;
    if (s == "rv") return McProxy::RealizedVariance;
    throw_invalid("unknown proxy '" + s + "' (expected measure or rv)");
}

void McConfig::validate() const {
    if (cells.empty()) throw_invalid("Monte Carlo grid is empty");
    if (reps < 1) throw_invalid("reps must be >= 1");
    if (!(tau_min > 0.0 && tau_max > tau_min)) throw_invalid("bad scaling tau range");
    for (const auto& c : cells) {
        SimConfig sc;
        sc.params = {c.H, c.lambda2, T, sigma2};
        sc.L = L;
        sc.delta = delta;
        sc.subdivisions = subdivisions;
        sc.max_fine_points = std::numeric_limits<long>::max();
        sc.validate();
    }
    if (estimator != McEstimator::Scaling) {
        GmmSpec g = gmm;
        g.method = estimator == McEstimator::GmmM ? GmmMethod::M : GmmMethod::LnM;
        g.validate();
    }
    const double need = projected_memory_bytes();
    if (need > memory_cap_bytes) {
        std::ostringstream os;
        os << "projected memory " << need / (1 << 20) << " MiB exceeds the cap of " << memory_cap_bytes / (1 << 20)
           << " MiB";
        throw Error(ErrorKind::Resource, os.str());
    }
}

double McConfig::projected_memory_bytes() const {
    const double n = std::round(L / delta) * subdivisions;
    double m = 1.0;
    while (m < 2.0 * (n - 1.0)) m *= 2.0;
    const double shared = 8.0 * m + 8.0 * n;                  // sqrt eigenvalues, covariance
    const double per_thread = 2.0 * 16.0 * m + 4.0 * 8.0 * n;  // FFT buffers, paths, returns
    return shared + std::max(1, threads) * per_thread;
}

nlohmann::json McConfig::to_json() const {
    auto gmm_lags = [&] {
        GmmSpec g = gmm;
        g.method = estimator == McEstimator::GmmM ? GmmMethod::M : GmmMethod::LnM;
        return g.resolved_lags();
    };
    nlohmann::json grid = nlohmann::json::array();
    for (const auto& c : cells) grid.push_back({{"H", c.H}, {"lambda2", c.lambda2}});
    return {{"grid", grid},          {"reps", reps},       {"L", L},
            {"T", T},                {"delta", delta},     {"subdivisions", subdivisions},
            {"sigma2", sigma2},      {"method", to_string(estimator)},
            {"proxy", proxy == McProxy::Measure ? "measure" : "rv"},
            {"lags", gmm_lags()},      {"hac_lag", gmm.hac_lag}, {"tau_min", tau_min},
            {"tau_max", tau_max},    {"seed", seed},       {"iterate", gmm.iterate}};
}

McReplication run_replication(const OmegaSampler& sampler, const McConfig& cfg, std::uint64_t seed) {
    McReplication rep;
    rep.seed = seed;
    try {
        SimConfig sc = sampler.config();
        sc.emit_price = cfg.proxy == McProxy::RealizedVariance;
        const std::vector<double> omega = sampler.sample(seed);
        sc.seed = seed;
        VolSeries series = sc.emit_price ? build_price_and_rv(omega, sc).rv : build_measure(omega, sc);
        if (cfg.estimator == McEstimator::Scaling) {
            const double hi = std::min(cfg.tau_max, 0.25 * cfg.L);
            const auto taus = integer_tau_grid(cfg.tau_min, hi, cfg.delta);
            const ScalingFit f = scaling_estimate_H(series, 2.0, taus);
            rep.H_hat = f.H_hat;
            rep.lambda2_hat = std::numeric_limits<double>::quiet_NaN();
            rep.nu2_hat = std::numeric_limits<double>::quiet_NaN();
            rep.converged = true;
        } else {
            GmmSpec g = cfg.gmm;
            g.method = cfg.estimator == McEstimator::GmmM ? GmmMethod::M : GmmMethod::LnM;
            const GmmFit f = fit(series, g);
            rep.H_hat = f.H;
            rep.lambda2_hat = f.lambda2;
            rep.nu2_hat = f.nu2;
            rep.converged = f.converged;
        }
    } catch (const std::exception& e) {
        rep.error = e.what();
    }
    return rep;
}

McSummary summarize(const McCell& cell, const std::vector<McReplication>& reps) {
    McSummary s;
    s.cell = cell;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    double sh = 0, shh = 0, el = 0, sl = 0, sll = 0, eh = 0, sn = 0, snn = 0;
    int nl = 0;
    for (const auto& r : reps) {
        if (!r.error.empty()) {
            ++s.failed;
            continue;
        }
        ++s.ok;
        sh += r.H_hat;
        shh += r.H_hat * r.H_hat;
        eh += (r.H_hat - cell.H) * (r.H_hat - cell.H);
        if (std::isfinite(r.lambda2_hat)) {
            ++nl;
            sl += r.lambda2_hat;
            sll += r.lambda2_hat * r.lambda2_hat;
            el += (r.lambda2_hat - cell.lambda2) * (r.lambda2_hat - cell.lambda2);
        }
        if (std::isfinite(r.nu2_hat)) {
            ++s.finite_nu2;
            sn += r.nu2_hat;
            snn += r.nu2_hat * r.nu2_hat;
        }
    }
    auto sd = [](double sum, double sq, int n) {
        if (n < 2) return std::numeric_limits<double>::quiet_NaN();
        const double m = sum / n;
        return std::sqrt(std::max(0.0, (sq - n * m * m) / (n - 1)));
    };
    s.mean_H = s.ok ? sh / s.ok : nan;
    s.sd_H = sd(sh, shh, s.ok);
    s.rms_H = s.ok ? std::sqrt(eh / s.ok) : nan;
    s.mean_lambda2 = nl ? sl / nl : nan;
    s.sd_lambda2 = sd(sl, sll, nl);
    s.rms_lambda2 = nl ? std::sqrt(el / nl) : nan;
    s.mean_nu2 = s.finite_nu2 ? sn / s.finite_nu2 : nan;
    s.sd_nu2 = sd(sn, snn, s.finite_nu2);
    return s;
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("LSFBM_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    }
    return 1;
}

McResult run_montecarlo(const McConfig& cfg, const McProgress& progress) {
    cfg.validate();
    const int threads = std::max(1, cfg.threads);
    McResult result;
    for (std::size_t c = 0; c < cfg.cells.size(); ++c) {
        const auto t0 = std::chrono::steady_clock::now();
        SimConfig sc;
        sc.params = {cfg.cells[c].H, cfg.cells[c].lambda2, cfg.T, cfg.sigma2};
        sc.L = cfg.L;
        sc.delta = cfg.delta;
        sc.subdivisions = cfg.subdivisions;
        sc.max_fine_points = std::numeric_limits<long>::max();
        const OmegaSampler sampler(sc);

        std::vector<McReplication> reps(cfg.reps);
        std::atomic<int> next{0};
        auto worker = [&] {
            for (int r = next++; r < cfg.reps; r = next++) {
                reps[r] = run_replication(sampler, cfg, cfg.seed + static_cast<std::uint64_t>(r));
                reps[r].cell = c;
                reps[r].rep = r;
            }
        };
        if (threads == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < std::min(threads, cfg.reps); ++t) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }
        McSummary s = summarize(cfg.cells[c], reps);
        s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (progress) progress(c, cfg.cells.size(), s);
        result.summaries.push_back(s);
        result.replications.insert(result.replications.end(), reps.begin(), reps.end());
    }
    return result;
}

}  // namespace lsfbm
