#include "pwtl/parallel.hpp"

#include <cstdlib>
#include <string>

namespace pwtl {

std::size_t default_workers() {
    if (const char* env = std::getenv("PWTL_JOBS")) {
        try {
            const long jobs = std::stol(env);
            if (jobs > 0) {
                return static_cast<std::size_t>(jobs);
            }
        } catch (const std::exception&) {
            // fall through to hardware concurrency
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace pwtl
