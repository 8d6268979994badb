#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace bpinn {

// Exit-code mapping used by the CLI: usage 1, IoError 2, DivergenceError 3,
// ValidationError 4.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

template <typename... Args>
std::string msg(Args&&... args)
{
    std::ostringstream os;
    (os << ... << args);
    return os.str();
}

} // namespace detail

} // namespace bpinn
