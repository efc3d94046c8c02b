#include "burstnet/parallel.hpp"

#include <cstdlib>
#include <string>

namespace burstnet {

namespace {
std::atomic<int> g_default_threads{0};
}

int resolve_threads(int requested) {
    if (requested > 0) {
        return requested;
    }
    if (const char* env = std::getenv("BURSTNET_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) {
                return n;
            }
        } catch (const std::exception&) {
            // fall through to hardware concurrency
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_default_threads(int threads) {
    g_default_threads.store(threads);
}

int default_threads() {
    const int n = g_default_threads.load();
    return n > 0 ? n : resolve_threads(0);
}

}  // namespace burstnet
