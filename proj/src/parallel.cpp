#include "fresnel/parallel.hpp"

#include <atomic>

namespace fresnel {

namespace {
std::atomic<unsigned> configured{0};
}

void set_thread_count(unsigned count) { configured = count; }

unsigned thread_count() {
    const unsigned c = configured.load();
    if (c > 0) return c;
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace fresnel
