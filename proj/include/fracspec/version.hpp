#ifndef FRACSPEC_VERSION_HPP
#define FRACSPEC_VERSION_HPP

namespace fracspec {

inline constexpr const char* version = "0.1.0";

}  // namespace fracspec

#endif  // FRACSPEC_VERSION_HPP
