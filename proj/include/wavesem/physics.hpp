#pragma once

#include <string>

#include "errors.hpp"

namespace wavesem {

/// Gravitational acceleration [m/s^2].
inline constexpr double kGravity = 9.82;

/// Linear potential flow (surface frozen at z = 0) or fully nonlinear.
enum class FlowModel { LPF, FNPF };

inline FlowModel parse_flow_model(const std::string& s)
{
    if (s == "LPF" || s == "lpf") return FlowModel::LPF;
    if (s == "FNPF" || s == "fnpf") return FlowModel::FNPF;
    throw ValidationError("wave.mode", "expected LPF or FNPF, got '" + s + "'");
}

inline const char* to_string(FlowModel m)
{
    return m == FlowModel::LPF ? "LPF" : "FNPF";
}

} // namespace wavesem
