// Truth trajectory for signal synthesis: Kepler-propagated knots joined by
// cubic Hermite segments, plus the path/direction functions built on it.
#pragma once

#include "odbd/signal.hpp"

#include <vector>

namespace odbd {

class EphemerisTrack {
 public:
  /// Knots cover [t_begin, t_end] (scenario time) at `knot_spacing`.
  EphemerisTrack(const KeplerianElements<>& el, double t_begin, double t_end, double knot_spacing,
                 const GravityModel<>& g);

  Vector3d position(double t) const;
  Vector3d velocity(double t) const;
  double begin() const { return t0_; }
  double end() const { return t0_ + h_ * double(r_.size() - 1); }

 private:
  std::size_t segment(double t, double& s) const;

  double t0_ = 0;
  double h_ = 0;
  std::vector<Vector3d> r_;
  std::vector<Vector3d> v_;
};

/// Exact site position at scenario time t (uniform Earth rotation).
Vector3d site_position(const GeodeticSite<>& site, double t, const GravityModel<>& g);

/// Receiver range (monostatic: twice it) or transmitter + receiver range.
PathFunction truth_path(const EphemerisTrack& track, const GeodeticSite<>& receiver,
                        const std::optional<GeodeticSite<>>& transmitter, const GravityModel<>& g);

DirectionFunction truth_direction(const EphemerisTrack& track, const GeodeticSite<>& receiver,
                                  const GravityModel<>& g);

}  // namespace odbd
