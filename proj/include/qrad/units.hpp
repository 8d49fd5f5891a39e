#pragma once

#include <cmath>
#include <limits>

namespace qrad::units {

inline double watts_to_dbm(double watts)
{
    if (watts <= 0.0)
        return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(watts / 1e-3);
}

inline double dbm_to_watts(double dbm)
{
    if (std::isinf(dbm) && dbm < 0.0)
        return 0.0;
    return 1e-3 * std::pow(10.0, dbm / 10.0);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double ratio) { return 10.0 * std::log10(ratio); }

}  // namespace qrad::units
