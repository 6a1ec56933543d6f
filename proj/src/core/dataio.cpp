#include "core/dataio.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "core/error.hpp"

namespace lsfbm {
namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? pos : pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* b = s.data();
    if (*b == '+') ++b;
    const auto [ptr, ec] = std::from_chars(b, s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool is_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
        if (s[i] < '0' || s[i] > '9') return false;
    const int month = std::stoi(s.substr(5, 2)), day = std::stoi(s.substr(8, 2));
    return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
    return in;
}

void check_header(const std::string& path, const std::string& line, const std::vector<std::string>& expected) {
    const auto cols = split_csv(line);
    for (std::size_t i = 0; i < std::max(cols.size(), expected.size()); ++i) {
        const std::string got = i < cols.size() ? cols[i] : "<missing>";
        const std::string want = i < expected.size() ? expected[i] : "<none>";
        if (got != want)
            throw_data(path + ":1: header column " + std::to_string(i + 1) + " is '" + got + "', expected '" +
                       want + "'");
    }
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string check_bar(const OhlcBar& b) {
    if (!(b.open > 0.0 && b.high > 0.0 && b.low > 0.0 && b.close > 0.0)) return "prices must be positive";
    if (b.low > std::min(b.open, b.close)) return "low exceeds min(open, close)";
    if (b.high < std::max(b.open, b.close)) return "high is below max(open, close)";
    return {};
}

double garman_klass(const OhlcBar& bar) {
    const std::string why = check_bar(bar);
    if (!why.empty()) throw_data("garman_klass: " + why);
    const double hl = std::log(bar.high / bar.low);
    const double co = std::log(bar.close / bar.open);
    return 0.5 * hl * hl - (2.0 * std::numbers::ln2 - 1.0) * co * co;
}

double realized_variance(const IntradayReturns& day) {
    if (day.returns.empty()) throw_data("realized_variance: no returns for " + day.date);
    double s = 0.0;
    for (double r : day.returns) s += r * r;
    return s;
}

double bipower_variation(const IntradayReturns& day) {
    if (day.returns.size() < 2) throw_data("bipower_variation: need at least two returns for " + day.date);
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < day.returns.size(); ++i) s += std::abs(day.returns[i]) * std::abs(day.returns[i + 1]);
    return 0.5 * std::numbers::pi * s;
}

Cleaning parse_cleaning(const std::string& s) {
    if (s == "drop") return Cleaning::Drop;
    if (s == "floor") return Cleaning::Floor;
    throw_invalid("unknown cleaning policy '" + s + "' (expected drop or floor)");
}

VolSeries to_vol_series(const std::vector<double>& daily, const CleaningPolicy& policy,
                        const std::vector<std::string>& dates) {
    if (policy.kind == Cleaning::Floor && !(policy.floor > 0.0)) throw_invalid("floor value must be positive");
    VolSeries out;
    out.delta = 1.0;
    std::vector<long> touched;
    std::vector<std::string> touched_dates;
    for (std::size_t i = 0; i < daily.size(); ++i) {
        const double v = daily[i];
        if (v > 0.0 && std::isfinite(v)) {
            out.values.push_back(v);
            continue;
        }
        touched.push_back(static_cast<long>(i));
        if (i < dates.size()) touched_dates.push_back(dates[i]);
        if (policy.kind == Cleaning::Floor) out.values.push_back(policy.floor);
    }
    if (out.values.empty()) throw_data("no usable observations after cleaning");
    const double frac = daily.empty() ? 0.0 : static_cast<double>(touched.size()) / static_cast<double>(daily.size());
    nlohmann::json meta;
    meta["cleaning"] = policy.kind == Cleaning::Drop ? "drop" : "floor";
    if (policy.kind == Cleaning::Floor) meta["floor"] = policy.floor;
    meta["input_count"] = daily.size();
    meta["output_count"] = out.values.size();
    meta[policy.kind == Cleaning::Drop ? "dropped" : "floored"] = touched.size();
    meta["affected_index"] = touched;
    if (!touched_dates.empty()) meta["affected_dates"] = touched_dates;
    if (policy.kind == Cleaning::Drop && frac > 0.2)
        meta["warning"] = "more than 20% of the observations were dropped";
    out.meta = std::move(meta);
    return out;
}

OhlcTable read_ohlc_csv(const std::string& path) {
    std::ifstream in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw_data(path + ": empty file");
    check_header(path, line, {"date", "open", "high", "low", "close"});
    OhlcTable table;
    long lineno = 1;
    std::string last_date;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cols = split_csv(line);
        OhlcBar bar;
        std::string why;
        if (cols.size() != 5) {
            why = "expected 5 columns, found " + std::to_string(cols.size());
        } else {
            bar.date = cols[0];
            if (!is_iso_date(bar.date)) why = "date '" + bar.date + "' is not YYYY-MM-DD";
            const char* names[4] = {"open", "high", "low", "close"};
            double* fields[4] = {&bar.open, &bar.high, &bar.low, &bar.close};
            for (int k = 0; k < 4 && why.empty(); ++k)
                if (!parse_double(cols[k + 1], *fields[k])) why = std::string("column ") + names[k] + " is not a number";
            if (why.empty()) why = check_bar(bar);
            if (why.empty() && !last_date.empty() && bar.date < last_date) why = "date is out of order";
        }
        table.bars.push_back(bar);
        table.valid.push_back(why.empty());
        if (!why.empty()) table.rejected.push_back({lineno, why});
        else last_date = bar.date;
    }
    return table;
}

IntradayTable read_intraday_csv(const std::string& path) {
    std::ifstream in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw_data(path + ": empty file");
    IntradayTable table;
    const auto header = split_csv(line);
    if (header.size() == 3) {
        check_header(path, line, {"date", "rv", "bv"});
        table.precomputed = true;
    } else {
        check_header(path, line, {"date", "return"});
    }
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cols = split_csv(line);
        const std::size_t want = table.precomputed ? 3 : 2;
        std::string why;
        if (cols.size() != want) why = "expected " + std::to_string(want) + " columns, found " + std::to_string(cols.size());
        else if (!is_iso_date(cols[0])) why = "date '" + cols[0] + "' is not YYYY-MM-DD";
        double a = 0.0, b = 0.0;
        if (why.empty() && !parse_double(cols[1], a)) why = "column " + header[1] + " is not a number";
        if (why.empty() && table.precomputed && !parse_double(cols[2], b)) why = "column bv is not a number";
        if (!why.empty()) {
            table.rejected.push_back({lineno, why});
            continue;
        }
        if (table.precomputed) {
            if (!table.dates.empty() && cols[0] < table.dates.back()) {
                table.rejected.push_back({lineno, "date is out of order"});
                continue;
            }
            table.dates.push_back(cols[0]);
            table.rv.push_back(a);
            table.bv.push_back(b);
        } else {
            if (table.days.empty() || table.days.back().date != cols[0]) {
                if (!table.days.empty() && cols[0] < table.days.back().date) {
                    table.rejected.push_back({lineno, "date is out of order"});
                    continue;
                }
                table.days.push_back({cols[0], {}});
            }
            table.days.back().returns.push_back(a);
        }
    }
    return table;
}

ProxyEstimator parse_estimator(const std::string& s) {
    if (s == "gk") return ProxyEstimator::GarmanKlass;
    if (s == "rv") return ProxyEstimator::RealizedVariance;
    if (s == "bv") return ProxyEstimator::BipowerVariation;
    throw_invalid("unknown estimator '" + s + "' (expected gk, rv or bv)");
}

std::string to_string(ProxyEstimator e) {
    switch (e) {
        case ProxyEstimator::GarmanKlass: return "gk";
        case ProxyEstimator::RealizedVariance: return "rv";
        case ProxyEstimator::BipowerVariation: return "bv";
    }
    return "?";
}

namespace {

nlohmann::json rejection_json(const std::vector<RowRejection>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) arr.push_back({{"line", r.line}, {"reason", r.reason}});
    return arr;
}

}  // namespace

IngestResult ingest_ohlc(const std::string& path, const CleaningPolicy& policy) {
    const OhlcTable table = read_ohlc_csv(path);
    std::vector<double> daily;
    std::vector<std::string> dates;
    for (std::size_t i = 0; i < table.bars.size(); ++i) {
        daily.push_back(table.valid[i] ? garman_klass(table.bars[i]) : std::nan(""));
        dates.push_back(table.bars[i].date);
    }
    IngestResult res;
    res.series = to_vol_series(daily, policy, dates);
    res.rejected = table.rejected;
    res.series.meta["source"] = path;
    res.series.meta["estimator"] = "gk";
    res.series.meta["rejected_rows"] = rejection_json(table.rejected);
    return res;
}

IngestResult ingest_intraday(const std::string& path, ProxyEstimator est, const CleaningPolicy& policy) {
    if (est == ProxyEstimator::GarmanKlass) throw_invalid("the gk estimator needs an OHLC file");
    const IntradayTable table = read_intraday_csv(path);
    std::vector<double> daily;
    std::vector<std::string> dates;
    std::vector<RowRejection> rejected = table.rejected;
    if (table.precomputed) {
        daily = est == ProxyEstimator::RealizedVariance ? table.rv : table.bv;
        dates = table.dates;
    } else {
        for (const auto& day : table.days) {
            dates.push_back(day.date);
            if (est == ProxyEstimator::BipowerVariation && day.returns.size() < 2) {
                daily.push_back(std::nan(""));
                continue;
            }
            daily.push_back(est == ProxyEstimator::RealizedVariance ? realized_variance(day) : bipower_variation(day));
        }
    }
    IngestResult res;
    res.series = to_vol_series(daily, policy, dates);
    res.rejected = rejected;
    res.series.meta["source"] = path;
    res.series.meta["estimator"] = to_string(est);
    res.series.meta["rejected_rows"] = rejection_json(rejected);
    return res;
}

void write_series_csv(const std::string& path, const std::vector<double>& values) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
    out << "index,value\n";
    for (std::size_t i = 0; i < values.size(); ++i) out << i << ',' << format_double(values[i]) << '\n';
    if (!out) throw Error(ErrorKind::Io, "write failed for '" + path + "'");
}

VolSeries read_series_csv(const std::string& path, double delta) {
    std::ifstream in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw_data(path + ": empty file");
    check_header(path, line, {"index", "value"});
    VolSeries s;
    s.delta = delta;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cols = split_csv(line);
        double v = 0.0;
        if (cols.size() != 2 || !parse_double(cols[1], v))
            throw_data(path + ":" + std::to_string(lineno) + ": malformed row");
        s.values.push_back(v);
    }
    s.meta = {{"source", path}};
    return s;
}

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
    out << j.dump(2) << '\n';
    if (!out) throw Error(ErrorKind::Io, "write failed for '" + path + "'");
}

void write_ohlc_csv(const std::string& path, const std::vector<OhlcBar>& bars) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
    out << "date,open,high,low,close\n";
    for (const auto& b : bars)
        out << b.date << ',' << format_double(b.open) << ',' << format_double(b.high) << ',' << format_double(b.low)
            << ',' << format_double(b.close) << '\n';
    if (!out) throw Error(ErrorKind::Io, "write failed for '" + path + "'");
}

}  // namespace lsfbm
