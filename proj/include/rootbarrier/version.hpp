#pragma once

namespace rootbarrier {
inline constexpr const char* kVersion = "1.0.0";
}
