#include "lsfbm/lsfbm.h"

#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/dataio.hpp"
#include "core/error.hpp"
#include "core/estimators.hpp"
#include "core/fixtures.hpp"
#include "core/gmm.hpp"
#include "core/kernels.hpp"
#include "core/montecarlo.hpp"
#include "core/simulate.hpp"
#include "core/specfun.hpp"

struct lsfbm_series {
    lsfbm::VolSeries series;
    std::string meta;
};

struct lsfbm_simulation {
    lsfbm::Simulation sim;
    std::string config;
};

struct lsfbm_fit {
    double H = 0.0;
    double lambda2 = 0.0;
    double nu2 = 0.0;
    std::string json;
};

struct lsfbm_mc_result {
    lsfbm::McResult result;
    std::string config;
};

namespace {

thread_local std::string last_error;

lsfbm_status status_of(lsfbm::ErrorKind k) {
    switch (k) {
        case lsfbm::ErrorKind::InvalidArgument: return LSFBM_E_INVALID;
        case lsfbm::ErrorKind::Data: return LSFBM_E_DATA;
        case lsfbm::ErrorKind::Numerical: return LSFBM_E_NUMERICAL;
        case lsfbm::ErrorKind::Io: return LSFBM_E_IO;
        case lsfbm::ErrorKind::Resource: return LSFBM_E_RESOURCE;
    }
    return LSFBM_E_INTERNAL;
}

// Runs f, translating exceptions into status codes and the thread-local message.
template <class F>
lsfbm_status guard(F&& f) {
    try {
        f();
        return LSFBM_OK;
    } catch (const lsfbm::Error& e) {
        last_error = e.what();
        return status_of(e.kind());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return LSFBM_E_RESOURCE;
    } catch (const std::exception& e) {
        last_error = e.what();
        return LSFBM_E_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return LSFBM_E_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    if (!p) lsfbm::throw_invalid(std::string(what) + " must not be NULL");
}

lsfbm::ModelParams to_params(const lsfbm_params* p) {
    need(p, "params");
    return {p->H, p->lambda2, p->T, p->sigma2};
}

lsfbm::SimConfig to_sim_config(const lsfbm_sim_config* c) {
    need(c, "config");
    lsfbm::SimConfig s;
    s.params = to_params(&c->params);
    s.L = c->L;
    s.delta = c->delta;
    s.subdivisions = c->subdivisions;
    s.seed = c->seed;
    s.emit_price = c->emit_price != 0;
    s.max_fine_points = c->max_fine_points;
    return s;
}

lsfbm::GmmSpec to_gmm_spec(const lsfbm_gmm_spec* g) {
    lsfbm::GmmSpec s;
    if (!g) return s;
    s.method = g->method == LSFBM_GMM_M ? lsfbm::GmmMethod::M : lsfbm::GmmMethod::LnM;
    if (g->lags && g->lag_count > 0) s.lags.assign(g->lags, g->lags + g->lag_count);
    s.hac_lag = g->hac_lag;
    s.H_max = g->H_max;
    s.lambda2_max = g->lambda2_max;
    s.restarts = g->restarts;
    s.iterate = g->iterate != 0;
    return s;
}

lsfbm::CleaningPolicy to_policy(lsfbm_cleaning c, double floor_value) {
    lsfbm::CleaningPolicy p;
    p.kind = c == LSFBM_CLEAN_FLOOR ? lsfbm::Cleaning::Floor : lsfbm::Cleaning::Drop;
    p.floor = floor_value;
    return p;
}

lsfbm_series* wrap(lsfbm::VolSeries s) {
    auto* out = new lsfbm_series{std::move(s), {}};
    out->meta = out->series.meta.dump();
    return out;
}

void fill_summary(const lsfbm::McSummary& s, lsfbm_mc_summary* out) {
    *out = {s.cell.H,      s.cell.lambda2, s.ok,          s.failed,    s.mean_H,
            s.sd_H,        s.rms_H,        s.mean_lambda2, s.sd_lambda2, s.rms_lambda2,
            s.mean_nu2,    s.sd_nu2,       s.finite_nu2,  s.seconds};
}

template <class F>
lsfbm_status scalar(double* out, F&& f) {
    return guard([&] {
        need(out, "out");
        *out = f();
    });
}

}  // namespace

extern "C" {

LSFBM_API const char* lsfbm_last_error(void) { return last_error.c_str(); }

LSFBM_API const char* lsfbm_version(void) { return LSFBM_VERSION_STRING; }

LSFBM_API lsfbm_status lsfbm_params_validate(const lsfbm_params* p) {
    return guard([&] { to_params(p).validate(); });
}

LSFBM_API double lsfbm_nu2_from_lambda2(double H, double lambda2) { return lsfbm::nu2_from_lambda2(H, lambda2); }

LSFBM_API double lsfbm_lambda2_from_nu2(double H, double nu2) { return lsfbm::lambda2_from_nu2(H, nu2); }

LSFBM_API lsfbm_status lsfbm_cov_omega(const lsfbm_params* p, double tau, double* out) {
    return scalar(out, [&] { return lsfbm::kernels::cov_omega(to_params(p), tau); });
}

LSFBM_API lsfbm_status lsfbm_cov_omega_mrm(double lambda2, double T, double ell, double tau, double* out) {
    return scalar(out, [&] { return lsfbm::kernels::cov_omega_mrm(lambda2, T, ell, tau); });
}

LSFBM_API lsfbm_status lsfbm_g_h(double H, double z, double* out) {
    return scalar(out, [&] { return lsfbm::kernels::g_h(H, z); });
}

LSFBM_API lsfbm_status lsfbm_cov_lnM(const lsfbm_params* p, double delta, double tau, double* out) {
    return scalar(out, [&] { return lsfbm::kernels::cov_lnM(to_params(p), delta, tau); });
}

LSFBM_API lsfbm_status lsfbm_m_q(const lsfbm_params* p, double q, double tau, double delta, double* out) {
    return scalar(out, [&] { return lsfbm::kernels::m_q(to_params(p), q, tau, delta); });
}

LSFBM_API lsfbm_status lsfbm_f_of_z(double H, double lambda2, double z, double* out) {
    return scalar(out, [&] { return lsfbm::kernels::f_of_z(H, lambda2, z); });
}

LSFBM_API lsfbm_status lsfbm_f_of_z_incomplete_gamma(double H, double lambda2, double z, double* out) {
    return scalar(out, [&] { return lsfbm::kernels::f_of_z_incomplete_gamma(H, lambda2, z); });
}

LSFBM_API lsfbm_status lsfbm_corr_M(const lsfbm_params* p, double delta, double tau, double* out) {
    return scalar(out, [&] { return lsfbm::kernels::corr_M(to_params(p), delta, tau); });
}

LSFBM_API lsfbm_status lsfbm_dtilde_lnM(double H, double nu2, long n, double* out) {
    return scalar(out, [&] { return lsfbm::kernels::dtilde_lnM(H, nu2, n); });
}

LSFBM_API lsfbm_status lsfbm_dtilde_lnM_anchored(double H, double lambda2, long n, double* out) {
    return scalar(out, [&] { return lsfbm::kernels::dtilde_lnM_anchored(H, lambda2, n); });
}

LSFBM_API lsfbm_status lsfbm_rtilde_M(double H, double lambda2, long n, double* out) {
    return scalar(out, [&] { return lsfbm::kernels::rtilde_M(H, lambda2, n); });
}

LSFBM_API lsfbm_status lsfbm_scaling_bias(double H, double delta, const double* taus, size_t count, double* slope,
                                          double* intercept) {
    return guard([&] {
        need(taus, "taus");
        need(slope, "slope");
        const auto b = lsfbm::kernels::scaling_bias(H, delta, {taus, count});
        *slope = b.slope;
        if (intercept) *intercept = b.intercept;
    });
}

LSFBM_API lsfbm_status lsfbm_lower_incomplete_gamma(double a, double z, double* value, double* rel_error,
                                                    int* accuracy_loss) {
    return guard([&] {
        need(value, "value");
        const auto r = lsfbm::specfun::lower_incomplete_gamma(a, z);
        *value = r.value;
        if (rel_error) *rel_error = r.rel_error;
        if (accuracy_loss) *accuracy_loss = r.accuracy_loss;
    });
}

LSFBM_API lsfbm_status lsfbm_kummer_m1(double b, double z, double* value, double* rel_error, int* accuracy_loss) {
    return guard([&] {
        need(value, "value");
        const auto r = lsfbm::specfun::kummer_m1(b, z);
        *value = r.value;
        if (rel_error) *rel_error = r.rel_error;
        if (accuracy_loss) *accuracy_loss = r.accuracy_loss;
    });
}

LSFBM_API lsfbm_status lsfbm_series_create(const double* values, size_t count, double delta, lsfbm_series** out) {
    return guard([&] {
        need(out, "out");
        need(values, "values");
        if (!(delta > 0.0)) lsfbm::throw_invalid("delta must be positive");
        lsfbm::VolSeries s;
        s.delta = delta;
        s.values.assign(values, values + count);
        s.validate();
        *out = wrap(std::move(s));
    });
}

LSFBM_API lsfbm_status lsfbm_series_read_csv(const char* path, double delta, lsfbm_series** out) {
    return guard([&] {
        need(out, "out");
        need(path, "path");
        *out = wrap(lsfbm::read_series_csv(path, delta));
    });
}

LSFBM_API lsfbm_status lsfbm_series_write_csv(const lsfbm_series* s, const char* path) {
    return guard([&] {
        need(s, "series");
        need(path, "path");
        lsfbm::write_series_csv(path, s->series.values);
    });
}

LSFBM_API size_t lsfbm_series_size(const lsfbm_series* s) { return s ? s->series.values.size() : 0; }

LSFBM_API double lsfbm_series_delta(const lsfbm_series* s) {
    return s ? s->series.delta : std::numeric_limits<double>::quiet_NaN();
}

LSFBM_API const double* lsfbm_series_data(const lsfbm_series* s) { return s ? s->series.values.data() : nullptr; }

LSFBM_API const char* lsfbm_series_meta_json(const lsfbm_series* s) { return s ? s->meta.c_str() : nullptr; }

LSFBM_API void lsfbm_series_free(lsfbm_series* s) { delete s; }

LSFBM_API void lsfbm_sim_config_default(lsfbm_sim_config* cfg) {
    if (!cfg) return;
    const lsfbm::SimConfig d;
    *cfg = {{d.params.H, d.params.lambda2, d.params.T, d.params.sigma2},
            d.L, d.delta, d.subdivisions, d.seed, 0, d.max_fine_points};
}

LSFBM_API lsfbm_status lsfbm_simulate(const lsfbm_sim_config* cfg, lsfbm_simulation** out) {
    return guard([&] {
        need(out, "out");
        const lsfbm::SimConfig c = to_sim_config(cfg);
        auto sim = std::make_unique<lsfbm_simulation>(lsfbm_simulation{lsfbm::simulate(c), c.to_json().dump()});
        *out = sim.release();
    });
}

LSFBM_API lsfbm_status lsfbm_simulation_measure(const lsfbm_simulation* sim, lsfbm_series** out) {
    return guard([&] {
        need(sim, "simulation");
        need(out, "out");
        *out = wrap(sim->sim.measure);
    });
}

LSFBM_API lsfbm_status lsfbm_simulation_rv(const lsfbm_simulation* sim, lsfbm_series** out) {
    return guard([&] {
        need(sim, "simulation");
        need(out, "out");
        if (!sim->sim.rv) lsfbm::throw_invalid("the simulation was run without a price path");
        *out = wrap(*sim->sim.rv);
    });
}

LSFBM_API lsfbm_status lsfbm_simulation_price(const lsfbm_simulation* sim, const double** data, size_t* count,
                                              double* fine_dt) {
    return guard([&] {
        need(sim, "simulation");
        need(data, "data");
        need(count, "count");
        if (!sim->sim.price) lsfbm::throw_invalid("the simulation was run without a price path");
        *data = sim->sim.price->log_returns.data();
        *count = sim->sim.price->log_returns.size();
        if (fine_dt) *fine_dt = sim->sim.price->fine_dt;
    });
}

LSFBM_API const char* lsfbm_simulation_config_json(const lsfbm_simulation* sim) {
    return sim ? sim->config.c_str() : nullptr;
}

LSFBM_API void lsfbm_simulation_free(lsfbm_simulation* sim) { delete sim; }

LSFBM_API lsfbm_status lsfbm_correlogram(const lsfbm_series* s, lsfbm_correlogram_kind kind, long max_lag,
                                         double* out) {
    return guard([&] {
        need(s, "series");
        need(out, "out");
        const auto c = kind == LSFBM_CORR_LNM ? lsfbm::correlogram_lnM(s->series, max_lag)
                                              : lsfbm::correlogram_M(s->series, max_lag);
        for (std::size_t k = 0; k < c.values.size(); ++k) out[k] = c.values[k];
    });
}

LSFBM_API void lsfbm_gmm_spec_default(lsfbm_gmm_spec* spec) {
    if (!spec) return;
    const lsfbm::GmmSpec d;
    *spec = {LSFBM_GMM_LNM, nullptr, 0, d.hac_lag, d.H_max, d.lambda2_max, d.restarts, d.iterate ? 1 : 0};
}

LSFBM_API lsfbm_status lsfbm_estimate_gmm(const lsfbm_series* s, const lsfbm_gmm_spec* spec, lsfbm_fit** out) {
    return guard([&] {
        need(s, "series");
        need(out, "out");
        const lsfbm::GmmFit f = lsfbm::fit(s->series, to_gmm_spec(spec));
        *out = new lsfbm_fit{f.H, f.lambda2, f.nu2, f.to_json().dump()};
    });
}

LSFBM_API lsfbm_status lsfbm_estimate_scaling(const lsfbm_series* s, double q, double tau_min, double tau_max,
                                              lsfbm_fit** out) {
    return guard([&] {
        need(s, "series");
        need(out, "out");
        const auto taus = lsfbm::integer_tau_grid(tau_min, tau_max, s->series.delta);
        const lsfbm::ScalingFit f = lsfbm::scaling_estimate_H(s->series, q, taus);
        const nlohmann::json j = {{"method", "scaling"}, {"q", f.q},       {"H", f.H_hat},
                                  {"intercept", f.intercept}, {"r2", f.r2}, {"tau_min", tau_min},
                                  {"tau_max", tau_max},   {"taus", f.taus}, {"m_hat", f.m_hat},
                                  {"provenance", s->series.meta}};
        const double nan = std::numeric_limits<double>::quiet_NaN();
        *out = new lsfbm_fit{f.H_hat, nan, nan, j.dump()};
    });
}

LSFBM_API double lsfbm_fit_H(const lsfbm_fit* f) { return f ? f->H : std::numeric_limits<double>::quiet_NaN(); }

LSFBM_API double lsfbm_fit_lambda2(const lsfbm_fit* f) {
    return f ? f->lambda2 : std::numeric_limits<double>::quiet_NaN();
}

LSFBM_API double lsfbm_fit_nu2(const lsfbm_fit* f) { return f ? f->nu2 : std::numeric_limits<double>::quiet_NaN(); }

LSFBM_API const char* lsfbm_fit_json(const lsfbm_fit* f) { return f ? f->json.c_str() : nullptr; }

LSFBM_API void lsfbm_fit_free(lsfbm_fit* f) { delete f; }

LSFBM_API void lsfbm_mc_config_default(lsfbm_mc_config* cfg) {
    if (!cfg) return;
    const lsfbm::McConfig d;
    lsfbm_gmm_spec g;
    lsfbm_gmm_spec_default(&g);
    *cfg = {nullptr,     nullptr,        0,          d.reps,     d.L,       d.T,
            d.delta,     d.subdivisions, d.sigma2,   LSFBM_MC_GMM_LNM, LSFBM_MC_RV, g,
            d.tau_min,   d.tau_max,      d.seed,     0,          d.memory_cap_bytes};
}

LSFBM_API lsfbm_status lsfbm_montecarlo(const lsfbm_mc_config* cfg, lsfbm_progress_fn progress, void* user,
                                        lsfbm_mc_result** out) {
    return guard([&] {
        need(cfg, "config");
        need(out, "out");
        if (cfg->cell_count > 0) {
            need(cfg->H, "H");
            need(cfg->lambda2, "lambda2");
        }
        lsfbm::McConfig c;
        for (size_t i = 0; i < cfg->cell_count; ++i) c.cells.push_back({cfg->H[i], cfg->lambda2[i]});
        c.reps = cfg->reps;
        c.L = cfg->L;
        c.T = cfg->T;
        c.delta = cfg->delta;
        c.subdivisions = cfg->subdivisions;
        c.sigma2 = cfg->sigma2;
        c.estimator = cfg->estimator == LSFBM_MC_GMM_M     ? lsfbm::McEstimator::GmmM
                      : cfg->estimator == LSFBM_MC_SCALING ? lsfbm::McEstimator::Scaling
                                                           : lsfbm::McEstimator::GmmLnM;
        c.proxy = cfg->proxy == LSFBM_MC_MEASURE ? lsfbm::McProxy::Measure : lsfbm::McProxy::RealizedVariance;
        c.gmm = to_gmm_spec(&cfg->gmm);
        c.tau_min = cfg->tau_min;
        c.tau_max = cfg->tau_max;
        c.seed = cfg->seed;
        c.threads = lsfbm::resolve_threads(cfg->threads);
        c.memory_cap_bytes = cfg->memory_cap_bytes;
        lsfbm::McProgress cb;
        if (progress) {
            cb = [&](std::size_t cell, std::size_t cells, const lsfbm::McSummary& s) {
                lsfbm_mc_summary cs;
                fill_summary(s, &cs);
                progress(cell, cells, &cs, user);
            };
        }
        auto res = std::make_unique<lsfbm_mc_result>();
        res->result = lsfbm::run_montecarlo(c, cb);
        res->config = c.to_json().dump();
        *out = res.release();
    });
}

LSFBM_API size_t lsfbm_mc_cell_count(const lsfbm_mc_result* r) { return r ? r->result.summaries.size() : 0; }

LSFBM_API lsfbm_status lsfbm_mc_summary_at(const lsfbm_mc_result* r, size_t cell, lsfbm_mc_summary* out) {
    return guard([&] {
        need(r, "result");
        need(out, "out");
        if (cell >= r->result.summaries.size()) lsfbm::throw_invalid("cell index out of range");
        fill_summary(r->result.summaries[cell], out);
    });
}

LSFBM_API size_t lsfbm_mc_replication_count(const lsfbm_mc_result* r) {
    return r ? r->result.replications.size() : 0;
}

LSFBM_API lsfbm_status lsfbm_mc_replication_at(const lsfbm_mc_result* r, size_t index, lsfbm_mc_replication* out) {
    return guard([&] {
        need(r, "result");
        need(out, "out");
        if (index >= r->result.replications.size()) lsfbm::throw_invalid("replication index out of range");
        const auto& x = r->result.replications[index];
        *out = {x.cell, x.rep, x.seed, x.H_hat, x.lambda2_hat, x.nu2_hat, x.converged ? 1 : 0, x.error.empty() ? 0 : 1};
    });
}

LSFBM_API const char* lsfbm_mc_config_json(const lsfbm_mc_result* r) { return r ? r->config.c_str() : nullptr; }

LSFBM_API void lsfbm_mc_result_free(lsfbm_mc_result* r) { delete r; }

LSFBM_API lsfbm_status lsfbm_ingest_ohlc(const char* path, lsfbm_cleaning cleaning, double floor_value,
                                         lsfbm_series** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        *out = wrap(lsfbm::ingest_ohlc(path, to_policy(cleaning, floor_value)).series);
    });
}

LSFBM_API lsfbm_status lsfbm_ingest_intraday(const char* path, lsfbm_proxy proxy, lsfbm_cleaning cleaning,
                                             double floor_value, lsfbm_series** out) {
    return guard([&] {
        need(path, "path");
        need(out, "out");
        if (proxy == LSFBM_PROXY_GK) lsfbm::throw_invalid("Garman-Klass needs OHLC input");
        const auto est =
            proxy == LSFBM_PROXY_BV ? lsfbm::ProxyEstimator::BipowerVariation : lsfbm::ProxyEstimator::RealizedVariance;
        *out = wrap(lsfbm::ingest_intraday(path, est, to_policy(cleaning, floor_value)).series);
    });
}

LSFBM_API lsfbm_status lsfbm_synth_ohlc(const lsfbm_sim_config* cfg, double start_price, const char* start_date,
                                        const char* path) {
    return guard([&] {
        need(path, "path");
        const lsfbm::SimConfig c = to_sim_config(cfg);
        const lsfbm::OmegaSampler sampler(c);
        const auto bars = lsfbm::synthetic_ohlc(sampler, c.seed, start_price, start_date ? start_date : "2000-01-03");
        lsfbm::write_ohlc_csv(path, bars);
    });
}

}  // extern "C"
