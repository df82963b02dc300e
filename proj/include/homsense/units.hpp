#pragma once

namespace homsense {

inline constexpr char kArtifactVersion[] = "1.0.0";

// Speed of light, exact by definition, expressed as optical path per time.
inline constexpr double kSpeedOfLightNmPerAs = 0.299792458;
inline constexpr double kAsPerNm = 1.0 / kSpeedOfLightNmPerAs;
inline constexpr double kAsPerPs = 1.0e6;
inline constexpr double kAsPerFs = 1.0e3;

constexpr double ps_to_as(double ps) { return ps * kAsPerPs; }
constexpr double as_to_ps(double as) { return as / kAsPerPs; }
constexpr double fs_to_as(double fs) { return fs * kAsPerFs; }
constexpr double as_to_fs(double as) { return as / kAsPerFs; }

// Optical path length to propagation delay (vacuum, n = 1).
constexpr double nm_to_as(double nm) { return nm * kAsPerNm; }
constexpr double as_to_nm(double as) { return as * kSpeedOfLightNmPerAs; }

}  // namespace homsense
