#pragma once

namespace frctsim {
inline constexpr const char *kVersion = "0.3.0";
}
