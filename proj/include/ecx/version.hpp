#ifndef ECX_VERSION_HPP
#define ECX_VERSION_HPP

namespace ecx {

inline constexpr const char* version = "0.1.0";

}  // namespace ecx

#endif  // ECX_VERSION_HPP
