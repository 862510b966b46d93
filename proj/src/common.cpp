#include "agrisuit/common.hpp"

#include <fstream>
#include <functional>
#include <mutex>

namespace agrisuit {

std::string digest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("MissingArtifact", "cannot open file for digest: " + path);
    }
    Fnv1a64 hasher;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        hasher.update(buf, static_cast<std::size_t>(in.gcount()));
    }
    return hasher.hex();
}

int effective_threads(int requested) {
    if (requested > 0) {
        return requested;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn) {
    int t = effective_threads(threads);
    if (t <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(t), n);
    std::vector<std::thread> workers;
    workers.reserve(n_workers);
    std::size_t chunk = (n + n_workers - 1) / n_workers;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (std::size_t w = 0; w < n_workers; ++w) {
        std::size_t begin = w * chunk;
        std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) {
            break;
        }
        workers.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) {
                    fn(i);
                }
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& worker : workers) {
        worker.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

} // namespace agrisuit
