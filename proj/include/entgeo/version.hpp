#pragma once

namespace entgeo {

inline constexpr const char* kVersion = "entgeo 0.1.0";

}  // namespace entgeo
