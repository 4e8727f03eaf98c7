#pragma once

namespace genformer {
inline constexpr const char* kVersion = "0.1.0";
}
