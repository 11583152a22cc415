// SPDX-License-Identifier: Apache-2.0
#ifndef LEAFLYAP_VERSION_HPP
#define LEAFLYAP_VERSION_HPP

namespace leaflyap {

inline constexpr const char* kVersion = "leaflyap 0.1.0";

}

#endif
