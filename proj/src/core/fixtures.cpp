#include "core/fixtures.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "core/error.hpp"

namespace lsfbm {

std::vector<std::string> weekday_dates(const std::string& start, std::size_t count) {
    using namespace std::chrono;
    int y = 0;
    unsigned m = 0, d = 0;
    if (std::sscanf(start.c_str(), "%d-%u-%u", &y, &m, &d) != 3) throw_invalid("bad start date '" + start + "'");
    const year_month_day ymd{year{y}, month{m}, day{d}};
    if (!ymd.ok()) throw_invalid("bad start date '" + start + "'");
    sys_days day_point{ymd};
    std::vector<std::string> out;
    out.reserve(count);
    while (out.size() < count) {
        const weekday wd{day_point};
        if (wd != Saturday && wd != Sunday) {
            const year_month_day cur{day_point};
            char buf[16];
            std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(cur.year()),
                          static_cast<unsigned>(cur.month()), static_cast<unsigned>(cur.day()));
            out.emplace_back(buf);
        }
        day_point += days{1};
    }
    return out;
}

std::vector<OhlcBar> synthetic_ohlc(const OmegaSampler& sampler, std::uint64_t seed, double start_price,
                                    const std::string& start_date) {
    if (!(start_price > 0.0)) throw_invalid("start price must be positive");
    SimConfig cfg = sampler.config();
    cfg.emit_price = true;
    cfg.seed = seed;
    const std::vector<double> omega = sampler.sample(seed);
    const PriceAndRv pr = build_price_and_rv(omega, cfg);
    const long n = cfg.subdivisions;
    const std::size_t days = omega.size() / n;
    const auto dates = weekday_dates(start_date, days);
    std::vector<OhlcBar> bars(days);
    double logp = std::log(start_price);
    for (std::size_t k = 0; k < days; ++k) {
        OhlcBar& b = bars[k];
        b.date = dates[k];
        double hi = logp, lo = logp;
        const double open = logp;
        for (long i = 0; i < n; ++i) {
            logp += pr.price.log_returns[k * n + i];
            hi = std::max(hi, logp);
            lo = std::min(lo, logp);
        }
        b.open = std::exp(open);
        b.close = std::exp(logp);
        b.high = std::exp(hi);
        b.low = std::exp(lo);
    }
    return bars;
}

}  // namespace lsfbm
