#include "odbd/signal.hpp"

#include "odbd/fft.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace odbd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kReferenceGuard = 8;

}  // namespace

std::size_t RadarConfig::cpi_samples() const {
  return static_cast<std::size_t>(std::llround(cpi * sample_rate));
}

std::size_t RadarConfig::reference_margin() const {
  return static_cast<std::size_t>(std::ceil(max_path / c * sample_rate)) + kReferenceGuard;
}

void RadarConfig::validate() const {
  if (!(carrier_freq > 0) || !(c > 0) || !(sample_rate > 0) || !(cpi > 0) || !(max_path >= 0))
    throw SignalError("radar configuration values must be positive");
  if (!(bandwidth > 0) || bandwidth > sample_rate)
    throw SignalError("bandwidth must be positive and no larger than the sample rate");
  const double n = cpi * sample_rate;
  if (std::abs(n - std::round(n)) > 1e-6 * std::max(1.0, n))
    throw SignalError("cpi * sample_rate must be an integer sample count");
  if (transmitter) validate_site(*transmitter);
}

double SignalBuffer::power() const {
  if (samples.size() == 0) return 0.0;
  return samples.squaredNorm() / double(samples.size());
}

double ArrayGeometry::max_extent() const {
  double extent = 0;
  for (const Vector3d& a : positions)
    for (const Vector3d& b : positions) extent = std::max(extent, (a - b).norm());
  return extent;
}

ArrayGeometry ArrayGeometry::from_enu(const std::vector<Vector3d>& enu, const GeodeticSite<>& site,
                                      double epoch, const GravityModel<>& g) {
  const Eigen::Matrix3d axes = enu_axes(site, epoch, g);
  ArrayGeometry geom;
  for (const Vector3d& p : enu) geom.positions.push_back(axes * p);
  return geom;
}

double sample_offset(const SignalBuffer& from, const SignalBuffer& to) {
  if (from.sample_rate != to.sample_rate) throw SignalError("sample rates differ");
  const double offset = (from.epoch - to.epoch) * to.sample_rate;
  const double nearest = std::round(offset);
  return std::abs(offset - nearest) < 1e-6 ? nearest : offset;
}

FractionalDelayLine::FractionalDelayLine(const SignalBuffer& reference) : reference_(reference) {
  const Eigen::Index n = reference.size();
  if (n < 4) throw SignalError("reference too short to interpolate");
  const Eigen::Index m = n * kOversample;

  Eigen::VectorXcd spectrum = reference.samples;
  fft::forward(spectrum);
  Eigen::VectorXcd padded = Eigen::VectorXcd::Zero(m);
  if (n % 2 == 0) {
    const Eigen::Index half = n / 2;
    padded.head(half) = spectrum.head(half);
    padded.tail(half - 1) = spectrum.tail(half - 1);
    // Nyquist bin split evenly between the two new frequencies.
    padded(half) = spectrum(half) / 2.0;
    padded(m - half) = spectrum(half) / 2.0;
  } else {
    const Eigen::Index positive = (n + 1) / 2;
    padded.head(positive) = spectrum.head(positive);
    padded.tail(n - positive) = spectrum.tail(n - positive);
  }
  fft::inverse(padded);
  data_ = padded / double(n);
  // Original samples are kept bit-exact on the fine grid.
  for (Eigen::Index k = 0; k < n; ++k) data_(k * kOversample) = reference.samples(k);
}

PathPolynomial PathPolynomial::monostatic(const SlantSeries<>& rx) {
  return {{2.0 * rx.rho, 2.0 * rx.rhod, rx.rhodd, rx.rhoddd / 3.0}, rx.cpi};
}

PathPolynomial PathPolynomial::bistatic(const SlantSeries<>& rx, const SlantSeries<>& tx) {
  return {{rx.rho + tx.rho, rx.rhod + tx.rhod, (rx.rhodd + tx.rhodd) / 2.0,
           (rx.rhoddd + tx.rhoddd) / 6.0},
          rx.cpi};
}

PathPolynomial PathPolynomial::truncated(int order) const {
  std::array<double, 4> c = coeffs_;
  for (int k = std::max(order + 1, 0); k < 4; ++k) c[k] = 0.0;
  return {c, cpi_};
}

SignalBuffer make_cpi_buffer(const RadarConfig& cfg) {
  SignalBuffer out;
  out.sample_rate = cfg.sample_rate;
  out.epoch = -cfg.cpi / 2.0;
  out.samples = Eigen::VectorXcd::Zero(Eigen::Index(cfg.cpi_samples()));
  return out;
}

SignalBuffer synthesize_reference(const RadarConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const std::size_t margin = cfg.reference_margin();
  const std::size_t wanted = cfg.cpi_samples() + margin + kReferenceGuard;
  const auto n = Eigen::Index(fft::good_size(wanted));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXcd spectrum = Eigen::VectorXcd::Zero(n);
  const double half_band = cfg.bandwidth / 2.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index signed_k = k <= n / 2 ? k : k - n;
    const double freq = double(signed_k) * cfg.sample_rate / double(n);
    const double re = normal(rng);
    const double im = normal(rng);
    if (std::abs(freq) < half_band) spectrum(k) = cdouble(re, im);
  }
  fft::inverse(spectrum);

  SignalBuffer ref;
  ref.sample_rate = cfg.sample_rate;
  ref.epoch = -cfg.cpi / 2.0 - double(margin) / cfg.sample_rate;
  const double p = spectrum.squaredNorm() / double(n);
  ref.samples = spectrum / std::sqrt(p);
  return ref;
}

void add_echo(SignalBuffer& out, const FractionalDelayLine& ref, const PathFunction& path,
              const RadarConfig& cfg, double amplitude, const DirectionFunction* direction,
              const Vector3d& element_position) {
  const double offset = sample_offset(out, ref.reference());
  const double fs = out.sample_rate;
  const double inv_lambda = 1.0 / cfg.wavelength();
  const double k_scale = kTwoPi * inv_lambda;
  for (Eigen::Index n = 0; n < out.size(); ++n) {
    const double t = out.time_of(n);
    const double p = path(t);
    const double index = double(n) + offset - p / cfg.c * fs;
    if (!ref.valid(index)) throw SignalError("echo delay leaves the reference support");
    double phase = -kTwoPi * (p * inv_lambda);
    if (direction) phase += k_scale * (*direction)(t).dot(element_position);
    out.samples(n) += amplitude * ref.at(index) * std::polar(1.0, phase);
  }
}

void add_noise(SignalBuffer& out, double noise_power, std::uint64_t seed) {
  if (!(noise_power > 0.0)) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(noise_power / 2.0));
  for (Eigen::Index n = 0; n < out.size(); ++n) {
    const double re = normal(rng);
    const double im = normal(rng);
    out.samples(n) += cdouble(re, im);
  }
}

std::vector<std::uint64_t> element_seeds(std::uint64_t seed, std::size_t count) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32)};
  std::vector<std::uint32_t> words(2 * count);
  seq.generate(words.begin(), words.end());
  std::vector<std::uint64_t> out(count);
  for (std::size_t n = 0; n < count; ++n) out[n] = (std::uint64_t(words[2 * n]) << 32) | words[2 * n + 1];
  return out;
}

SignalBuffer synthesize_echo(const SignalBuffer& ref, const PathFunction& path, const RadarConfig& cfg,
                             double amplitude, double noise_power, std::uint64_t seed) {
  const FractionalDelayLine line(ref);
  SignalBuffer out = make_cpi_buffer(cfg);
  add_echo(out, line, path, cfg, amplitude);
  add_noise(out, noise_power, seed);
  return out;
}

std::vector<SignalBuffer> synthesize_array_echo(const SignalBuffer& ref, const PathFunction& path,
                                                const DirectionFunction& direction,
                                                const ArrayGeometry& geom, const RadarConfig& cfg,
                                                double amplitude, double noise_power,
                                                std::uint64_t seed) {
  const FractionalDelayLine line(ref);
  std::vector<SignalBuffer> out;
  const std::vector<std::uint64_t> seeds = element_seeds(seed, geom.size());
  for (std::size_t n = 0; n < geom.size(); ++n) {
    SignalBuffer element = make_cpi_buffer(cfg);
    add_echo(element, line, path, cfg, amplitude, &direction, geom.positions[n]);
    add_noise(element, noise_power, seeds[n]);
    out.push_back(std::move(element));
  }
  return out;
}

}  // namespace odbd
