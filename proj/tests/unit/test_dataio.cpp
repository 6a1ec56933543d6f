#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "core/dataio.hpp"
#include "core/error.hpp"
#include "core/fixtures.hpp"

using namespace lsfbm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "lsfbm_unit";
    fs::create_directories(dir);
    return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

}  // namespace

TEST_SUITE("dataio") {

TEST_CASE("Garman-Klass values") {
    CHECK(garman_klass({"2020-01-02", 1.0, std::numbers::e, 1.0, 1.0}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(garman_klass({"2020-01-02", 3.0, 3.0, 3.0, 3.0}) == 0.0);
    const double hl = std::log(102.0 / 99.0), co = std::log(1.01);
    const double gk = garman_klass({"2020-01-02", 100.0, 102.0, 99.0, 101.0});
    CHECK(gk == doctest::Approx(0.5 * hl * hl - (2 * std::numbers::ln2 - 1) * co * co).epsilon(1e-14));
    CHECK(std::abs(gk - 4.0733e-4) < 1e-7);
    CHECK(garman_klass({"d", 250.0, 255.0, 247.5, 252.5}) == doctest::Approx(gk).epsilon(1e-12));
    CHECK_THROWS_AS(garman_klass({"d", 100.0, 99.0, 98.0, 100.0}), Error);
    CHECK_THROWS_AS(garman_klass({"d", 0.0, 1.0, 0.0, 1.0}), Error);
    CHECK(check_bar({"d", 100.0, 102.0, 101.0, 100.5}) == "low exceeds min(open, close)");
}

TEST_CASE("realized and bipower variation") {
    CHECK(realized_variance({"d", {0.01, -0.01}}) == doctest::Approx(2e-4));
    CHECK_THROWS_AS(realized_variance({"d", {}}), Error);
    CHECK(bipower_variation({"d", {0.02, 0.02}}) == doctest::Approx(0.5 * std::numbers::pi * 4e-4));
    CHECK_THROWS_AS(bipower_variation({"d", {0.02}}), Error);
    IntradayReturns jump{"d", std::vector<double>(78, 0.0)};
    jump.returns[40] = 0.05;
    for (std::size_t i = 0; i < jump.returns.size(); ++i)
        if (i != 40) jump.returns[i] = (i % 2 ? 1 : -1) * 0.001;
    // the jump leaves the difference RV - BV and barely touches BV
    CHECK(realized_variance(jump) - bipower_variation(jump) == doctest::Approx(0.05 * 0.05).epsilon(0.1));
    CHECK(bipower_variation(jump) < 0.15 * realized_variance(jump));
    CHECK(bipower_variation(jump) >= 0.0);

    // iid N(0, v / n) returns: both estimators target v
    std::mt19937_64 eng(4);
    const double v = 2e-4;
    const int n = 390;
    std::normal_distribution<double> normal(0.0, std::sqrt(v / n));
    double rv = 0.0, bv = 0.0;
    const int days = 2000;
    for (int d = 0; d < days; ++d) {
        IntradayReturns day{"d", std::vector<double>(n)};
        for (double& r : day.returns) r = normal(eng);
        rv += realized_variance(day) / days;
        bv += bipower_variation(day) / days;
    }
    CHECK(rv == doctest::Approx(v).epsilon(0.01));
    CHECK(bv == doctest::Approx(v).epsilon(0.02));
}

TEST_CASE("cleaning policies") {
    CleaningPolicy drop;
    CleaningPolicy floor{Cleaning::Floor, 1e-12};
    CHECK(to_vol_series({1, 2, 3}, drop).values == std::vector<double>{1, 2, 3});
    CHECK(to_vol_series({1, 0, 3}, floor).values == std::vector<double>{1, 1e-12, 3});
    const auto d = to_vol_series({1, 0, 3, 4, 5, 6}, drop, {"a", "b", "c", "d", "e", "f"});
    CHECK(d.values == std::vector<double>{1, 3, 4, 5, 6});
    CHECK(d.meta["dropped"] == 1);
    CHECK(d.meta["affected_dates"][0] == "b");
    CHECK(d.delta == 1.0);
    CHECK_FALSE(d.meta.contains("warning"));
    const auto many = to_vol_series({1, -1, std::nan(""), 4, 5}, drop);
    CHECK(many.meta.contains("warning"));
    CHECK_THROWS_AS(to_vol_series({0, -1}, drop), Error);
    // idempotent on clean input
    const auto once = to_vol_series({1, 0, 3, 7}, drop);
    CHECK(to_vol_series(once.values, drop).values == once.values);
}

TEST_CASE("OHLC CSV ingestion with rejected rows") {
    const auto p = scratch("ohlc.csv");
    write_text(p,
               "date,open,high,low,close\n"
               "2020-01-02,100,102,99,101\n"
               "2020-01-03,101,101,101,101\n"
               "2020-01-06,0,102,99,101\n"
               "2020-01-07,101,abc,99,101\n"
               "2020-01-08,101,103,100,102\n");
    const auto table = read_ohlc_csv(p.string());
    CHECK(table.bars.size() == 5u);
    REQUIRE(table.rejected.size() == 2u);
    CHECK(table.rejected[0].line == 4);
    CHECK(table.rejected[0].reason == "prices must be positive");
    CHECK(table.rejected[1].line == 5);
    const auto res = ingest_ohlc(p.string(), {});
    CHECK(res.series.values.size() == 2u);  // flat bar gives 0 and is dropped too
    CHECK(res.series.meta["dropped"] == 3);
    CHECK(res.series.meta["estimator"] == "gk");
    CHECK(res.series.meta["rejected_rows"].size() == 2u);
    for (double v : res.series.values) CHECK(v > 0.0);
}

TEST_CASE("schema mismatch names the column") {
    const auto p = scratch("bad_header.csv");
    write_text(p, "date,open,hi,low,close\n2020-01-02,1,1,1,1\n");
    try {
        read_ohlc_csv(p.string());
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Data);
        CHECK(std::string(e.what()).find("'hi'") != std::string::npos);
    }
    CHECK_THROWS_AS(read_ohlc_csv(scratch("missing.csv").string() + ".none"), Error);
}

TEST_CASE("intraday files") {
    const auto p = scratch("intraday.csv");
    write_text(p,
               "date,return\n"
               "2020-01-02,0.01\n2020-01-02,-0.01\n2020-01-02,0.02\n"
               "2020-01-03,0.005\n"
               "2020-01-06,nan?\n"
               "2020-01-06,0.01\n2020-01-06,0.01\n");
    const auto t = read_intraday_csv(p.string());
    CHECK(t.days.size() == 3u);
    CHECK(t.rejected.size() == 1u);
    const auto rv = ingest_intraday(p.string(), ProxyEstimator::RealizedVariance, {});
    CHECK(rv.series.values.size() == 3u);
    CHECK(rv.series.values[0] == doctest::Approx(6e-4));
    const auto bv = ingest_intraday(p.string(), ProxyEstimator::BipowerVariation, {});
    CHECK(bv.series.values.size() == 2u);  // single-return day is dropped
    CHECK(bv.series.values[0] == doctest::Approx(0.5 * std::numbers::pi * (1e-4 + 2e-4)));

    const auto q = scratch("om.csv");
    write_text(q, "date,rv,bv\n2020-01-02,1e-4,9e-5\n2020-01-03,2e-4,0\n");
    const auto pre = ingest_intraday(q.string(), ProxyEstimator::BipowerVariation, {Cleaning::Floor, 1e-9});
    CHECK(pre.series.values == std::vector<double>{9e-5, 1e-9});
    CHECK_THROWS_AS(ingest_intraday(q.string(), ProxyEstimator::GarmanKlass, {}), Error);
}

TEST_CASE("series CSV round trip") {
    const auto p = scratch("series.csv");
    const std::vector<double> v{1.0 / 3.0, 2e-300, 123456.789, std::nextafter(1.0, 2.0)};
    write_series_csv(p.string(), v);
    CHECK(read_series_csv(p.string()).values == v);
}

TEST_CASE("synthetic OHLC from a constant-volatility path") {
    // lambda2 -> 0 leaves a GBM with daily variance sigma2 = 1e-4
    SimConfig cfg;
    cfg.params.H = 0.1;
    cfg.params.lambda2 = 1e-12;
    cfg.params.T = 8192.0;
    cfg.params.sigma2 = 1e-4;
    cfg.L = 4000.0;
    cfg.subdivisions = 4096;
    const OmegaSampler sampler(cfg);
    const auto bars = synthetic_ohlc(sampler, 5);
    REQUIRE(bars.size() == 4000u);
    CHECK(bars[0].date == "2000-01-03");
    CHECK(bars[4].date == "2000-01-07");
    CHECK(bars[5].date == "2000-01-10");
    double mean = 0.0;
    for (const auto& b : bars) {
        CHECK(check_bar(b).empty());
        mean += garman_klass(b) / bars.size();
    }
    // discrete monitoring of the range biases GK down by about 3% at 4096 steps
    CHECK(mean == doctest::Approx(1e-4).epsilon(0.06));
    const auto p = scratch("synthetic_ohlc.csv");
    write_ohlc_csv(p.string(), bars);
    const auto res = ingest_ohlc(p.string(), {});
    CHECK(res.rejected.empty());
    CHECK(res.series.values.size() + res.series.meta["dropped"].get<std::size_t>() == 4000u);
}

TEST_CASE("weekday calendar") {
    const auto d = weekday_dates("2021-12-31", 3);
    CHECK(d == std::vector<std::string>{"2021-12-31", "2022-01-03", "2022-01-04"});
    CHECK(weekday_dates("2022-01-01", 1)[0] == "2022-01-03");
    CHECK_THROWS_AS(weekday_dates("2022-13-01", 1), Error);
}

}
