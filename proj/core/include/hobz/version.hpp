#ifndef HOBZ_VERSION_HPP
#define HOBZ_VERSION_HPP

#include <cstdint>

namespace hobz {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr std::uint32_t kDrawFileVersion = 1;

}  // namespace hobz

#endif
