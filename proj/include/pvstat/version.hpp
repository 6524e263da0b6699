#ifndef PVSTAT_VERSION_HPP
#define PVSTAT_VERSION_HPP

namespace pvstat {

inline constexpr const char* version = "0.1.0";

} // namespace pvstat

#endif // PVSTAT_VERSION_HPP
