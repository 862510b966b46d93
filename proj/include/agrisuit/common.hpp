#ifndef AGRISUIT_COMMON_HPP
#define AGRISUIT_COMMON_HPP

#include <Eigen/Dense>

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace agrisuit {

using Matrix = Eigen::MatrixXd; // rows = samples, cols = features
using Vector = Eigen::VectorXd;

// Error taxonomy. `kind` maps onto the CLI exit codes (config=2, data=3,
// estimation=4); `code` is a stable machine-readable identifier such as
// "DuplicateRecord" or "SingleClass".
enum class ErrorKind { config, data, estimation };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string code, const std::string& message)
        : std::runtime_error("[" + code + "] " + message),
          kind_(kind),
          code_(std::move(code)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& code() const noexcept { return code_; }

private:
    ErrorKind kind_;
    std::string code_;
};

class ConfigError : public Error {
public:
    ConfigError(std::string code, const std::string& message)
        : Error(ErrorKind::config, std::move(code), message) {}
};

class DataError : public Error {
public:
    DataError(std::string code, const std::string& message)
        : Error(ErrorKind::data, std::move(code), message) {}
};

class EstimationError : public Error {
public:
    EstimationError(std::string code, const std::string& message)
        : Error(ErrorKind::estimation, std::move(code), message) {}
};

// Shortest round-trip decimal rendering; parsing the result reproduces the
// exact double, which keeps exported files byte-stable across runs.
inline std::string format_double(double value) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

// splitmix64: derives independent per-item seeds from a master seed so that
// parallel workers stay deterministic regardless of scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// FNV-1a 64-bit, used for input/output digests in run manifests.
class Fnv1a64 {
public:
    void update(const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001b3ULL;
        }
    }
    void update(const std::string& s) { update(s.data(), s.size()); }

    std::uint64_t value() const noexcept { return state_; }

    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(state_));
        return std::string(buf);
    }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string digest_file(const std::string& path);

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks; results
// must be written to preallocated slots so the outcome does not depend on
// thread count.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn);

int effective_threads(int requested);

} // namespace agrisuit

#endif
