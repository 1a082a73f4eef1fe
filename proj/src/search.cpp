#include "odbd/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <thread>

namespace odbd {

std::string to_string(HypothesisKind kind) {
  return kind == HypothesisKind::shape ? "shape" : "circular_zero_doppler";
}

std::vector<Vector3d> volume_positions(const SearchVolume& vol, const Vector3d& sensor_position) {
  if (!(vol.angular_step > 0.0) || !(vol.range_step > 0.0))
    throw std::invalid_argument("search grid steps must be positive");
  if (!(vol.half_angle >= 0.0) || !(vol.range_max >= vol.range_min) || !(vol.range_min > 0.0))
    throw std::invalid_argument("search volume is malformed");

  const Vector3d centre = direction_unit_vector(vol.centre);
  Vector3d e1 = Vector3d::UnitZ().cross(centre);
  if (e1.norm() < 1e-12) e1 = Vector3d::UnitX().cross(centre);
  e1.normalize();
  const Vector3d e2 = centre.cross(e1);

  const auto half_cells = static_cast<int>(std::floor(vol.half_angle / vol.angular_step + 1e-9));
  const double limit2 = vol.half_angle * vol.half_angle * (1.0 + 1e-9);
  const auto range_cells = static_cast<int>(std::floor((vol.range_max - vol.range_min) / vol.range_step + 1e-9));

  std::vector<Vector3d> dirs;
  for (int j = -half_cells; j <= half_cells; ++j)
    for (int i = -half_cells; i <= half_cells; ++i) {
      const double x = i * vol.angular_step, y = j * vol.angular_step;
      if (x * x + y * y > limit2) continue;
      dirs.push_back((centre + std::tan(x) * e1 + std::tan(y) * e2).normalized());
    }

  std::vector<Vector3d> out;
  out.reserve(dirs.size() * std::size_t(range_cells + 1));
  for (int k = 0; k <= range_cells; ++k) {
    const double rho = vol.range_min + k * vol.range_step;
    for (const Vector3d& d : dirs) out.push_back(sensor_position + rho * d);
  }
  return out;
}

std::vector<OrbitHypothesis> enumerate_hypotheses(const SearchVolume& vol, const SearchMode& mode,
                                                  const SensorState<>& sensor,
                                                  const PeriapsisLimits& limits, const GravityModel<>& g,
                                                  double lambda, const EnumerationOptions& opts) {
  std::vector<OrbitHypothesis> out;
  std::size_t candidates = 0;
  auto push = [&](OrbitHypothesis&& h) {
    if (h.candidates.empty()) return;
    candidates += h.candidates.size();
    if (candidates > opts.max_candidates)
      throw SearchCapExceeded("hypothesis bank exceeds the configured cap of " +
                              std::to_string(opts.max_candidates));
    out.push_back(std::move(h));
  };

  for (const Vector3d& r : volume_positions(vol, sensor.q)) {
    const double r_mag = r.norm();
    if (r_mag <= g.earth_radius) continue;

    if (const auto* circ = std::get_if<CircularMode>(&mode)) {
      if (!semi_major_bounds(r_mag, 0.0, limits).contains(r_mag)) continue;
      for (double fd : circ->doppler_hz) {
        OrbitHypothesis h;
        h.r = r;
        h.kind = HypothesisKind::circular_zero_doppler;
        h.doppler_hz = fd;
        h.a = r_mag;
        h.candidates = circular_zero_doppler(r, sensor, fd, lambda, g);
        push(std::move(h));
      }
      continue;
    }

    const auto& shape = std::get<ShapeMode>(mode);
    for (double e : shape.e) {
      const Interval bounds = semi_major_bounds(r_mag, e, limits);
      if (bounds.empty()) continue;
      for (double a : shape.a) {
        if (!bounds.contains(a)) continue;
        for (double raan : shape.raan) {
          OrbitHypothesis h;
          h.r = r;
          h.kind = HypothesisKind::shape;
          h.e = e;
          h.a = a;
          h.raan = raan;
          h.candidates = solve_velocities(OrbitShapeHypothesis{r, e, a, raan}, g);
          push(std::move(h));
        }
      }
    }
  }
  return out;
}

std::size_t candidate_count(std::span<const OrbitHypothesis> hypotheses) {
  std::size_t n = 0;
  for (const auto& h : hypotheses) n += h.candidates.size();
  return n;
}

double estimate_noise_floor(std::span<const double> statistics) {
  std::vector<double> v;
  v.reserve(statistics.size());
  for (double s : statistics)
    if (std::isfinite(s)) v.push_back(s);
  if (v.size() < 100) throw std::invalid_argument("noise floor needs at least 100 statistics");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double median = v[mid];
  if (v.size() % 2 == 0) median = (median + *std::max_element(v.begin(), v.begin() + mid)) / 2.0;
  return median / std::numbers::ln2;
}

PathPolynomial hypothesis_path(const Vector3d& r, const Vector3d& v, const SearchScene& scene) {
  const StateDerivatives<> target = make_state(r, v, scene.gravity, 0.0);
  const SlantSeries<> rx =
      slant_series(target, site_to_sensor_state(scene.receiver, 0.0, scene.gravity), scene.radar.cpi);
  if (!scene.radar.transmitter) return PathPolynomial::monostatic(rx);
  const SlantSeries<> tx = slant_series(
      target, site_to_sensor_state(*scene.radar.transmitter, 0.0, scene.gravity), scene.radar.cpi);
  return PathPolynomial::bistatic(rx, tx);
}

unsigned resolve_thread_count(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ODBD_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct FlatCandidate {
  Vector3d r;
  const VelocitySolution* solution;
  HypothesisKind kind;
};

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

SearchResult run_search(std::span<const SignalBuffer> elements, const FractionalDelayLine& ref,
                        std::span<const OrbitHypothesis> hypotheses, const SearchScene& scene,
                        const SearchOptions& opts) {
  std::vector<FlatCandidate> flat;
  for (const auto& h : hypotheses)
    for (const auto& s : h.candidates.solutions) flat.push_back({h.r, &s, h.kind});

  const double nan = std::numeric_limits<double>::quiet_NaN();
  SearchResult result;
  result.statistics.assign(flat.size(), nan);
  const unsigned threads = resolve_thread_count(opts.threads);

  auto evaluate = [&](const Vector3d& r, const Vector3d& v, double extra_path) {
    PathPolynomial path = hypothesis_path(r, v, scene);
    if (extra_path != 0.0) {
      auto c = path.coefficients();
      c[0] += extra_path;
      path = PathPolynomial(c, path.cpi());
    }
    const LineOfSight los(make_state(r, v, scene.gravity, 0.0), scene.receiver, scene.gravity);
    const DirectionFunction dir = [&los](double t) { return los(t); };
    return std::norm(matched_filter_orbit_array(elements, scene.array, ref, path, dir, scene.radar));
  };

  parallel_for(flat.size(), threads, [&](std::size_t i) {
    try {
      result.statistics[i] = evaluate(flat[i].r, flat[i].solution->v, 0.0);
    } catch (const SignalError&) {
    } catch (const GeometryError&) {
    }
  });
  for (double s : result.statistics) (std::isfinite(s) ? result.evaluated : result.skipped)++;

  // Too few cells for a floor: add delay-offset copies of the evaluated
  // hypotheses, which land on uncorrelated reference lags.
  std::vector<double> bank;
  for (double s : result.statistics)
    if (std::isfinite(s)) bank.push_back(s);
  if (bank.size() < opts.min_floor_samples) {
    const double lag = 16.0 * scene.radar.c / scene.radar.sample_rate;
    std::vector<std::size_t> usable;
    for (std::size_t i = 0; i < flat.size(); ++i)
      if (std::isfinite(result.statistics[i])) usable.push_back(i);
    if (usable.empty()) throw SignalError("no hypothesis could be evaluated against the signal");
    const std::size_t needed = opts.min_floor_samples - bank.size();
    const std::size_t attempts = needed * 4;
    std::vector<double> probes(attempts, nan);
    parallel_for(attempts, threads, [&](std::size_t k) {
      const FlatCandidate& c = flat[usable[k % usable.size()]];
      const double shift = lag * double(1 + k / usable.size());
      try {
        probes[k] = evaluate(c.r, c.solution->v, shift);
      } catch (const SignalError&) {
      }
    });
    for (double p : probes)
      if (std::isfinite(p) && bank.size() < opts.min_floor_samples) {
        bank.push_back(p);
        ++result.floor_probes;
      }
  }
  result.noise_floor = estimate_noise_floor(bank);

  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double stat = result.statistics[i];
    if (!std::isfinite(stat)) continue;
    const double snr_db = 10.0 * std::log10(stat / result.noise_floor);
    if (snr_db < opts.threshold_db) continue;
    Detection d;
    d.statistic = stat;
    d.noise_floor = result.noise_floor;
    d.snr_db = snr_db;
    d.r = flat[i].r;
    d.v = flat[i].solution->v;
    d.elements = flat[i].solution->elements;
    d.epoch = 0.0;
    d.kind = flat[i].kind;
    d.candidate_index = i;
    result.detections.push_back(d);
  }
  std::stable_sort(result.detections.begin(), result.detections.end(),
                   [](const Detection& a, const Detection& b) { return a.snr_db > b.snr_db; });
  return result;
}

KeplerianElements<> iod_from_detection(const Detection& d, const GravityModel<>& g) {
  return state_to_elements(make_state(d.r, d.v, g, d.epoch), g);
}

}  // namespace odbd
