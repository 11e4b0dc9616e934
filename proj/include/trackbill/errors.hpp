#ifndef TRACKBILL_ERRORS_HPP
#define TRACKBILL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace trackbill {

/// Machine-readable failure codes surfaced by construction and analysis
/// operations. Orbit iteration reports termination through status values
/// instead (see dynamics.hpp); exceptions are reserved for contract
/// violations on inputs.
enum class ErrorCode {
    closure_fail,
    adjacency_fail,
    self_intersect,
    singular_angle,
    no_root,
    unclassified,
    degenerate_transfer,
    bound_violation,
    parse_error,
    unsupported,
    io_error,
};

class TrackError : public std::runtime_error {
public:
    TrackError(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace trackbill

#endif
