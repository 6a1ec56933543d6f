#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/dataio.hpp"
#include "core/simulate.hpp"

namespace lsfbm {

/// Daily bars of a price whose log follows the simulated fine returns of `sampler`
/// (one bar per coarse cell, weekday dates from start_date). High and low are the
/// extremes of the fine path inside the day; the open equals the previous close.
std::vector<OhlcBar> synthetic_ohlc(const OmegaSampler& sampler, std::uint64_t seed, double start_price = 100.0,
                                    const std::string& start_date = "2000-01-03");

/// Consecutive weekday dates (YYYY-MM-DD) starting at `start` (moved forward to a weekday).
std::vector<std::string> weekday_dates(const std::string& start, std::size_t count);

}  // namespace lsfbm
