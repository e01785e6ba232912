#include "syncookie/cookie_layout.hpp"

#include <stdexcept>
#include <string>

namespace syncookie {

void CookieLayout::validate() const {
    if (timer_bits < 1) throw std::invalid_argument("timer_bits must be >= 1");
    if (mss_bits < 1) throw std::invalid_argument("mss_bits must be >= 1");
    if (hash_bits < 4) throw std::invalid_argument("hash_bits must be >= 4");
    if (width() > 32) {
        throw std::invalid_argument("cookie layout is " + std::to_string(width()) + " bits wide, limit is 32");
    }
}

void MssTable::validate(const CookieLayout& layout) const {
    if (values.empty()) throw std::invalid_argument("MSS table is empty");
    if (values.size() > (std::size_t{1} << layout.mss_bits)) {
        throw std::invalid_argument("MSS table has " + std::to_string(values.size()) + " entries, " +
                                    std::to_string(layout.mss_bits) + " MSS bits hold at most " +
                                    std::to_string(1u << layout.mss_bits));
    }
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] <= values[i - 1]) throw std::invalid_argument("MSS table must be strictly increasing");
    }
}

void AcceptWindow::validate(const CookieLayout& layout) const {
    if (deltas < 1) throw std::invalid_argument("accept window must admit at least one counter delta");
    // Timer reconstruction is only unambiguous inside one timer-field period.
    if (deltas > (1u << layout.timer_bits)) {
        throw std::invalid_argument("accept window wider than the timer field period");
    }
}

}  // namespace syncookie
