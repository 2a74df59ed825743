#ifndef SMP_VERSION_HPP
#define SMP_VERSION_HPP

namespace smp {

inline constexpr const char* kVersion = "0.1.0";

}

#endif
