#ifndef MFSPEAK_VERSION_HPP
#define MFSPEAK_VERSION_HPP

namespace mfspeak {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mfspeak

#endif  // MFSPEAK_VERSION_HPP
