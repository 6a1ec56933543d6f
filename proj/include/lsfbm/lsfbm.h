#ifndef LSFBM_LSFBM_H
#define LSFBM_LSFBM_H

/* C interface to the log S-fBM library: kernels, simulation, estimation and data ingestion.
 *
 * Every function returns an lsfbm_status. On failure the message is available from
 * lsfbm_last_error() on the calling thread until the next failing call. Handles are
 * opaque; each *_free accepts NULL. Strings returned by accessors stay valid until the
 * handle is freed. */

#include <stddef.h>
#include <stdint.h>

#if defined(LSFBM_BUILDING_LIBRARY)
#define LSFBM_API __attribute__((visibility("default")))
#else
#define LSFBM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lsfbm_status {
    LSFBM_OK = 0,
    LSFBM_E_INVALID = 1,    /* bad argument or parameter combination */
    LSFBM_E_DATA = 2,       /* malformed or insufficient data */
    LSFBM_E_NUMERICAL = 3,  /* a numerical routine failed */
    LSFBM_E_IO = 4,         /* file could not be read or written */
    LSFBM_E_RESOURCE = 5,   /* refused by a size or memory guard */
    LSFBM_E_INTERNAL = 6
} lsfbm_status;

LSFBM_API const char* lsfbm_last_error(void);
LSFBM_API const char* lsfbm_version(void);

/* Model parameters; T and sigma2 default to 1. */
typedef struct lsfbm_params {
    double H;
    double lambda2;
    double T;
    double sigma2;
} lsfbm_params;

LSFBM_API lsfbm_status lsfbm_params_validate(const lsfbm_params* p);
/* nu2 = lambda2 / (H (1 - 2H)); +inf at H = 0. */
LSFBM_API double lsfbm_nu2_from_lambda2(double H, double lambda2);
LSFBM_API double lsfbm_lambda2_from_nu2(double H, double nu2);

/* Kernels */
LSFBM_API lsfbm_status lsfbm_cov_omega(const lsfbm_params* p, double tau, double* out);
LSFBM_API lsfbm_status lsfbm_cov_omega_mrm(double lambda2, double T, double ell, double tau, double* out);
LSFBM_API lsfbm_status lsfbm_g_h(double H, double z, double* out);
LSFBM_API lsfbm_status lsfbm_cov_lnM(const lsfbm_params* p, double delta, double tau, double* out);
LSFBM_API lsfbm_status lsfbm_m_q(const lsfbm_params* p, double q, double tau, double delta, double* out);
LSFBM_API lsfbm_status lsfbm_f_of_z(double H, double lambda2, double z, double* out);
LSFBM_API lsfbm_status lsfbm_f_of_z_incomplete_gamma(double H, double lambda2, double z, double* out);
LSFBM_API lsfbm_status lsfbm_corr_M(const lsfbm_params* p, double delta, double tau, double* out);
LSFBM_API lsfbm_status lsfbm_dtilde_lnM(double H, double nu2, long n, double* out);
LSFBM_API lsfbm_status lsfbm_dtilde_lnM_anchored(double H, double lambda2, long n, double* out);
LSFBM_API lsfbm_status lsfbm_rtilde_M(double H, double lambda2, long n, double* out);
/* OLS of ln g_H(delta / tau) on ln(tau / delta) over taus[0..count). */
LSFBM_API lsfbm_status lsfbm_scaling_bias(double H, double delta, const double* taus, size_t count,
                                          double* slope, double* intercept);

/* Special functions; rel_error and accuracy_loss may be NULL. */
LSFBM_API lsfbm_status lsfbm_lower_incomplete_gamma(double a, double z, double* value, double* rel_error,
                                                    int* accuracy_loss);
LSFBM_API lsfbm_status lsfbm_kummer_m1(double b, double z, double* value, double* rel_error, int* accuracy_loss);

/* Series: equally spaced integrated-variance observations. */
typedef struct lsfbm_series lsfbm_series;

LSFBM_API lsfbm_status lsfbm_series_create(const double* values, size_t count, double delta, lsfbm_series** out);
LSFBM_API lsfbm_status lsfbm_series_read_csv(const char* path, double delta, lsfbm_series** out);
LSFBM_API lsfbm_status lsfbm_series_write_csv(const lsfbm_series* s, const char* path);
LSFBM_API size_t lsfbm_series_size(const lsfbm_series* s);
LSFBM_API double lsfbm_series_delta(const lsfbm_series* s);
LSFBM_API const double* lsfbm_series_data(const lsfbm_series* s);
/* Provenance metadata as a JSON object. */
LSFBM_API const char* lsfbm_series_meta_json(const lsfbm_series* s);
LSFBM_API void lsfbm_series_free(lsfbm_series* s);

/* Simulation */
typedef struct lsfbm_sim_config {
    lsfbm_params params;
    double L;
    double delta;
    int subdivisions;
    uint64_t seed;
    int emit_price;
    long max_fine_points;
} lsfbm_sim_config;

typedef struct lsfbm_simulation lsfbm_simulation;

LSFBM_API void lsfbm_sim_config_default(lsfbm_sim_config* cfg);
LSFBM_API lsfbm_status lsfbm_simulate(const lsfbm_sim_config* cfg, lsfbm_simulation** out);
/* Cell masses M over each cell of size delta. The returned handle is owned by the caller. */
LSFBM_API lsfbm_status lsfbm_simulation_measure(const lsfbm_simulation* sim, lsfbm_series** out);
/* Realized-variance proxy; LSFBM_E_INVALID when the price was not requested. */
LSFBM_API lsfbm_status lsfbm_simulation_rv(const lsfbm_simulation* sim, lsfbm_series** out);
/* Fine log-returns; *data stays owned by sim. */
LSFBM_API lsfbm_status lsfbm_simulation_price(const lsfbm_simulation* sim, const double** data, size_t* count,
                                              double* fine_dt);
/* The resolved configuration as JSON. */
LSFBM_API const char* lsfbm_simulation_config_json(const lsfbm_simulation* sim);
LSFBM_API void lsfbm_simulation_free(lsfbm_simulation* sim);

/* Estimation */
typedef enum lsfbm_correlogram_kind { LSFBM_CORR_M = 0, LSFBM_CORR_LNM = 1 } lsfbm_correlogram_kind;

/* out[k] for k = 0..max_lag, divisor N at every lag. */
LSFBM_API lsfbm_status lsfbm_correlogram(const lsfbm_series* s, lsfbm_correlogram_kind kind, long max_lag,
                                         double* out);

typedef enum lsfbm_gmm_method { LSFBM_GMM_M = 0, LSFBM_GMM_LNM = 1 } lsfbm_gmm_method;

/* lags == NULL selects the default lag set; hac_lag < 0 selects floor(N^(1/3)). */
typedef struct lsfbm_gmm_spec {
    lsfbm_gmm_method method;
    const long* lags;
    size_t lag_count;
    long hac_lag;
    double H_max;
    double lambda2_max;
    int restarts;
    int iterate;
} lsfbm_gmm_spec;

typedef struct lsfbm_fit lsfbm_fit;

LSFBM_API void lsfbm_gmm_spec_default(lsfbm_gmm_spec* spec);
LSFBM_API lsfbm_status lsfbm_estimate_gmm(const lsfbm_series* s, const lsfbm_gmm_spec* spec, lsfbm_fit** out);
/* Slope of ln E|ln M(t + tau) - ln M(t)|^q on ln tau over the integer grid [tau_min, tau_max], over q. */
LSFBM_API lsfbm_status lsfbm_estimate_scaling(const lsfbm_series* s, double q, double tau_min, double tau_max,
                                              lsfbm_fit** out);
LSFBM_API double lsfbm_fit_H(const lsfbm_fit* f);
/* NaN for scaling fits. */
LSFBM_API double lsfbm_fit_lambda2(const lsfbm_fit* f);
/* +inf when H = 0, NaN for scaling fits. */
LSFBM_API double lsfbm_fit_nu2(const lsfbm_fit* f);
LSFBM_API const char* lsfbm_fit_json(const lsfbm_fit* f);
LSFBM_API void lsfbm_fit_free(lsfbm_fit* f);

/* Monte Carlo */
typedef enum lsfbm_mc_estimator { LSFBM_MC_GMM_LNM = 0, LSFBM_MC_GMM_M = 1, LSFBM_MC_SCALING = 2 } lsfbm_mc_estimator;
typedef enum lsfbm_mc_proxy { LSFBM_MC_MEASURE = 0, LSFBM_MC_RV = 1 } lsfbm_mc_proxy;

/* Cells are the pairs (H[i], lambda2[i]). threads <= 0 reads LSFBM_THREADS, else 1. */
typedef struct lsfbm_mc_config {
    const double* H;
    const double* lambda2;
    size_t cell_count;
    int reps;
    double L;
    double T;
    double delta;
    int subdivisions;
    double sigma2;
    lsfbm_mc_estimator estimator;
    lsfbm_mc_proxy proxy;
    lsfbm_gmm_spec gmm;
    double tau_min;
    double tau_max;
    uint64_t seed;
    int threads;
    double memory_cap_bytes;
} lsfbm_mc_config;

/* sd fields are NaN when fewer than two replications succeeded. */
typedef struct lsfbm_mc_summary {
    double H;
    double lambda2;
    int ok;
    int failed;
    double mean_H, sd_H, rms_H;
    double mean_lambda2, sd_lambda2, rms_lambda2;
    double mean_nu2, sd_nu2;
    int finite_nu2;
    double seconds;
} lsfbm_mc_summary;

typedef struct lsfbm_mc_replication {
    size_t cell;
    int rep;
    uint64_t seed;
    double H_hat;
    double lambda2_hat;
    double nu2_hat;
    int converged;
    int failed;
} lsfbm_mc_replication;

typedef void (*lsfbm_progress_fn)(size_t cell, size_t cell_count, const lsfbm_mc_summary* summary, void* user);
typedef struct lsfbm_mc_result lsfbm_mc_result;

LSFBM_API void lsfbm_mc_config_default(lsfbm_mc_config* cfg);
LSFBM_API lsfbm_status lsfbm_montecarlo(const lsfbm_mc_config* cfg, lsfbm_progress_fn progress, void* user,
                                        lsfbm_mc_result** out);
LSFBM_API size_t lsfbm_mc_cell_count(const lsfbm_mc_result* r);
LSFBM_API lsfbm_status lsfbm_mc_summary_at(const lsfbm_mc_result* r, size_t cell, lsfbm_mc_summary* out);
LSFBM_API size_t lsfbm_mc_replication_count(const lsfbm_mc_result* r);
LSFBM_API lsfbm_status lsfbm_mc_replication_at(const lsfbm_mc_result* r, size_t index, lsfbm_mc_replication* out);
LSFBM_API const char* lsfbm_mc_config_json(const lsfbm_mc_result* r);
LSFBM_API void lsfbm_mc_result_free(lsfbm_mc_result* r);

/* Data ingestion */
typedef enum lsfbm_cleaning { LSFBM_CLEAN_DROP = 0, LSFBM_CLEAN_FLOOR = 1 } lsfbm_cleaning;
typedef enum lsfbm_proxy { LSFBM_PROXY_GK = 0, LSFBM_PROXY_RV = 1, LSFBM_PROXY_BV = 2 } lsfbm_proxy;

/* Garman-Klass series from a date,open,high,low,close file. Rejected rows are listed in the metadata. */
LSFBM_API lsfbm_status lsfbm_ingest_ohlc(const char* path, lsfbm_cleaning cleaning, double floor_value,
                                         lsfbm_series** out);
/* RV or BV series from date,return or date,rv,bv files. */
LSFBM_API lsfbm_status lsfbm_ingest_intraday(const char* path, lsfbm_proxy proxy, lsfbm_cleaning cleaning,
                                             double floor_value, lsfbm_series** out);
/* Daily OHLC bars of a price driven by the simulated volatility of cfg, written as CSV. */
LSFBM_API lsfbm_status lsfbm_synth_ohlc(const lsfbm_sim_config* cfg, double start_price, const char* start_date,
                                        const char* path);

#ifdef __cplusplus
}
#endif

#endif
