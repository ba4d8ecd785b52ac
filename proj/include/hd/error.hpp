#ifndef HD_ERROR_HPP
#define HD_ERROR_HPP

#include <stdexcept>
#include <string>

namespace hd {

// Single exception type for the whole library. `kind` is a stable
// machine-readable tag ("invalid-spec", "level-empty", "no-convergence", ...);
// what() carries the human-readable diagnostic.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

[[noreturn]] inline void fail(const std::string& kind, const std::string& message) {
    throw Error(kind, message);
}

} // namespace hd

#endif
