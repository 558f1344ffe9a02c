#pragma once

#define DIPOLELETS_VERSION_MAJOR 1
#define DIPOLELETS_VERSION_MINOR 0
#define DIPOLELETS_VERSION_PATCH 0

namespace dipolelets {

inline const char* version_string() { return "1.0.0"; }

} // namespace dipolelets
