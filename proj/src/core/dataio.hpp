#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "core/simulate.hpp"

namespace lsfbm {

struct OhlcBar {
    std::string date;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
};

struct IntradayReturns {
    std::string date;
    std::vector<double> returns;
};

/// Empty string when the bar is usable, otherwise the reason it is not.
std::string check_bar(const OhlcBar& bar);

/// 0.5 ln(H/L)^2 - (2 ln 2 - 1) ln(C/O)^2. Throws Error(Data) for an invalid bar.
double garman_klass(const OhlcBar& bar);
double realized_variance(const IntradayReturns& day);
/// (pi / 2) sum |r_i| |r_{i+1}|.
double bipower_variation(const IntradayReturns& day);

enum class Cleaning { Drop, Floor };

struct CleaningPolicy {
    Cleaning kind = Cleaning::Drop;
    double floor = 1e-12;
};

Cleaning parse_cleaning(const std::string& s);

/// Daily series (delta = 1) from per-day variances; NaN marks a missing day.
/// Records the policy, the dropped/floored positions and a warning when more than 20% were dropped.
VolSeries to_vol_series(const std::vector<double>& daily, const CleaningPolicy& policy,
                        const std::vector<std::string>& dates = {});

struct RowRejection {
    long line = 0;
    std::string reason;
};

struct OhlcTable {
    std::vector<OhlcBar> bars;          // accepted and rejected rows, in file order
    std::vector<bool> valid;
    std::vector<RowRejection> rejected;
};

/// Reads `date,open,high,low,close`. Header mismatches throw Error(Data); bad rows are reported.
OhlcTable read_ohlc_csv(const std::string& path);

struct IntradayTable {
    bool precomputed = false;           // `date,rv,bv` instead of `date,return`
    std::vector<IntradayReturns> days;
    std::vector<std::string> dates;     // precomputed form
    std::vector<double> rv;
    std::vector<double> bv;
    std::vector<RowRejection> rejected;
};

IntradayTable read_intraday_csv(const std::string& path);

enum class ProxyEstimator { GarmanKlass, RealizedVariance, BipowerVariation };
ProxyEstimator parse_estimator(const std::string& s);
std::string to_string(ProxyEstimator e);

struct IngestResult {
    VolSeries series;
    std::vector<RowRejection> rejected;
};

IngestResult ingest_ohlc(const std::string& path, const CleaningPolicy& policy);
IngestResult ingest_intraday(const std::string& path, ProxyEstimator est, const CleaningPolicy& policy);

/// `index,value` CSV.
void write_series_csv(const std::string& path, const std::vector<double>& values);
VolSeries read_series_csv(const std::string& path, double delta = 1.0);
void write_json(const std::string& path, const nlohmann::json& j);

/// Writes rows of bars as `date,open,high,low,close`.
void write_ohlc_csv(const std::string& path, const std::vector<OhlcBar>& bars);

}  // namespace lsfbm
