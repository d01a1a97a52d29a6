#ifndef ECX_ERRORS_HPP
#define ECX_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ecx {

// Base class for everything thrown by the toolkit.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Bad configuration or parameter values, detected before any computation.
// The CLI maps this to exit code 2.
class config_error : public error {
public:
    explicit config_error(const std::string& what) : error(what) {}
};

// Defective input data (malformed rows, scheme mismatches, empty periods).
// The CLI maps this to exit code 3.
class data_error : public error {
public:
    explicit data_error(const std::string& what) : error(what) {}
};

// A parse failure knows which input lines were bad.
class parse_error : public data_error {
public:
    struct bad_line {
        std::size_t line;     // 1-based, header is line 1
        std::string message;
    };

    parse_error(const std::string& what, std::vector<bad_line> lines)
        : data_error(what), lines_(std::move(lines)) {}

    const std::vector<bad_line>& lines() const { return lines_; }

private:
    std::vector<bad_line> lines_;
};

// An iterative solver ran out of iterations or produced values outside the
// machine range.  The CLI maps this to exit code 4.
class convergence_error : public error {
public:
    explicit convergence_error(const std::string& what) : error(what) {}
};

}  // namespace ecx

#endif  // ECX_ERRORS_HPP
