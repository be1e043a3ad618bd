#ifndef FINRAY_ERROR_HPP
#define FINRAY_ERROR_HPP

#include <stdexcept>
#include <string>

namespace finray {

// Error categories map 1:1 onto CLI exit codes and C-API status values.
enum class ErrorCode {
    config = 1,         // bad input, invalid parameter, unusable configuration
    unknown_entity = 2, // name lookup failed (material, design id, scenario id)
    numeric = 3,        // solver or contact resolution failure
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const { return code_; }

    static Error config(const std::string& what) { return {ErrorCode::config, what}; }
    static Error unknown(const std::string& what) { return {ErrorCode::unknown_entity, what}; }
    static Error numeric(const std::string& what) { return {ErrorCode::numeric, what}; }

private:
    ErrorCode code_;
};

} // namespace finray

#endif
