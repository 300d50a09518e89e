#ifndef DRMCMC_POINT_HPP
#define DRMCMC_POINT_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace drmcmc {

// A state of the chain; one coordinate per updated parameter.
using Point = std::vector<double>;

inline void check_dims(const Point& x, std::size_t expected, const char* where) {
    if (x.size() != expected) {
        throw std::invalid_argument(std::string(where) + ": dimension mismatch");
    }
}

}  // namespace drmcmc

#endif
