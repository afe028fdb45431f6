#pragma once

namespace qahyst {
inline constexpr const char* kVersion = "0.1.0";
}
