#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mqed/error.hpp"

namespace mqed {

using Vec3 = Eigen::Vector3d;

/// A two-level molecule: position (nm), transition energy (eV) and a real
/// transition dipole (Debye).
struct Emitter {
  Vec3 position{0.0, 0.0, 0.0};
  double transition_energy = 0.0;
  Vec3 dipole{0.0, 0.0, 1.0};

  double dipole_magnitude() const { return dipole.norm(); }
};

enum class EnvironmentKind { FreeSpace, DrudeHalfSpace };

/// Free space, optionally with a Drude half-space filling z < interface_z.
struct Environment {
  EnvironmentKind kind = EnvironmentKind::FreeSpace;
  double plasma_energy = 0.0;   // eV
  double damping_energy = 0.0;  // eV
  double eps_inf = 1.0;
  double interface_z = 0.0;     // nm

  static Environment free_space() { return {}; }

  static Environment drude(double plasma_eV, double damping_eV, double eps_inf = 1.0,
                           double interface_z_nm = 0.0) {
    return {EnvironmentKind::DrudeHalfSpace, plasma_eV, damping_eV, eps_inf, interface_z_nm};
  }

  bool has_interface() const { return kind == EnvironmentKind::DrudeHalfSpace; }
};

/// Emitters plus environment after geometric validation. Only
/// validate_scenario() produces one.
class Scenario {
 public:
  const std::vector<Emitter>& emitters() const { return emitters_; }
  const Environment& environment() const { return environment_; }
  std::size_t size() const { return emitters_.size(); }
  const Emitter& operator[](std::size_t i) const { return emitters_[i]; }

  /// Mean transition energy (eV).
  double mean_energy() const {
    double sum = 0.0;
    for (const auto& e : emitters_) sum += e.transition_energy;
    return sum / static_cast<double>(emitters_.size());
  }

  bool degenerate(double tol = 1e-12) const {
    for (const auto& e : emitters_)
      if (std::abs(e.transition_energy - emitters_.front().transition_energy) > tol) return false;
    return true;
  }

  /// FNV-1a over a fixed-precision textual form; stable across runs and platforms.
  std::uint64_t hash() const {
    std::string text;
    char buf[64];
    auto put = [&](double v) {
      std::snprintf(buf, sizeof buf, "%.12g;", v);
      text += buf;
    };
    for (const auto& e : emitters_) {
      for (int i = 0; i < 3; ++i) put(e.position[i]);
      put(e.transition_energy);
      for (int i = 0; i < 3; ++i) put(e.dipole[i]);
    }
    put(static_cast<double>(environment_.kind));
    put(environment_.plasma_energy);
    put(environment_.damping_energy);
    put(environment_.eps_inf);
    put(environment_.interface_z);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
      h ^= ch;
      h *= 1099511628211ULL;
    }
    return h;
  }

 private:
  friend Scenario validate_scenario(std::vector<Emitter>, Environment);
  std::vector<Emitter> emitters_;
  Environment environment_;
};

inline constexpr double kCoincidenceTolerance_nm = 1e-6;

inline Scenario validate_scenario(std::vector<Emitter> emitters, Environment env) {
  if (emitters.empty()) throw Error(ErrorCode::InvalidEmitter, "scenario needs at least one emitter");
  if (env.damping_energy < 0.0)
    throw Error(ErrorCode::InvalidEnvironment, "damping energy must be non-negative");
  if (env.has_interface() && !(env.plasma_energy > 0.0))
    throw Error(ErrorCode::InvalidEnvironment, "Drude half-space needs a positive plasma energy");

  for (std::size_t i = 0; i < emitters.size(); ++i) {
    const auto& e = emitters[i];
    if (!(e.transition_energy > 0.0) || !std::isfinite(e.transition_energy))
      throw Error(ErrorCode::InvalidEmitter,
                  "emitter " + std::to_string(i + 1) + " needs a positive transition energy");
    if (!(e.dipole.norm() > 0.0))
      throw Error(ErrorCode::InvalidEmitter, "emitter " + std::to_string(i + 1) + " has a zero dipole");
    if (!e.position.allFinite())
      throw Error(ErrorCode::InvalidEmitter, "emitter " + std::to_string(i + 1) + " has a non-finite position");
    if (env.has_interface() && !(e.position.z() > env.interface_z))
      throw Error(ErrorCode::EmitterBelowInterface,
                  "emitter " + std::to_string(i + 1) + " at z=" + std::to_string(e.position.z()) +
                      " nm is not above the interface at z=" + std::to_string(env.interface_z) + " nm");
  }
  for (std::size_t i = 0; i < emitters.size(); ++i)
    for (std::size_t j = i + 1; j < emitters.size(); ++j)
      if ((emitters[i].position - emitters[j].position).norm() < kCoincidenceTolerance_nm)
        throw Error(ErrorCode::CoincidentEmitters,
                    "emitters " + std::to_string(i + 1) + " and " + std::to_string(j + 1) + " coincide");

  Scenario s;
  s.emitters_ = std::move(emitters);
  s.environment_ = env;
  return s;
}

}  // namespace mqed
