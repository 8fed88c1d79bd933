#pragma once

// Hypothesis generators: white noise (H0) and FIR-filtered sources plus
// noise (H1), together with the SNR bookkeeping used to mix them.

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "eigsense/errors.hpp"
#include "eigsense/rng.hpp"
#include "eigsense/sample_block.hpp"

namespace eigsense {

/// White noise with an optional power-uncertainty spread.
struct NoiseModel {
  double variance = 1.0;
  /// B in dB; the realized variance is variance * 10^(a/10), a ~ U[-B, B].
  double uncertainty_db = 0.0;

  void validate() const {
    if (!(variance > 0.0) || !std::isfinite(variance)) {
      throw DomainError("noise variance must be positive and finite");
    }
    if (!(uncertainty_db >= 0.0) || !std::isfinite(uncertainty_db)) {
      throw DomainError("noise uncertainty must be a finite, non-negative dB value");
    }
  }
};

/// Realized variance for one trial. B = 0 consumes no randomness.
inline double realized_noise_variance(const NoiseModel& model, Engine& engine) {
  model.validate();
  if (model.uncertainty_db == 0.0) return model.variance;
  std::uniform_real_distribution<double> alpha_db(-model.uncertainty_db, model.uncertainty_db);
  return model.variance * std::pow(10.0, alpha_db(engine) / 10.0);
}

/// The variance generate_noise(model, ..., seed) realizes.
inline double draw_noise_variance(const NoiseModel& model, std::uint64_t seed) {
  Engine engine(seed);
  return realized_noise_variance(model, engine);
}

/// iid zero-mean Gaussian noise. Complex samples split the variance evenly
/// between the real and imaginary parts.
template <typename Scalar = double>
SampleBlock<Scalar> generate_noise(const NoiseModel& model, Index channels, Index length,
                                   std::uint64_t seed, double sample_rate = 0.0) {
  if (channels < 1 || length < 1) {
    throw DimensionError("noise block needs M >= 1 and T >= 1, got M=" + std::to_string(channels) +
                         ", T=" + std::to_string(length));
  }
  Engine engine(seed);
  const double variance = realized_noise_variance(model, engine);
  Matrix<Scalar> samples(channels, length);
  if constexpr (is_complex_v<Scalar>) {
    std::normal_distribution<double> gauss(0.0, std::sqrt(variance / 2.0));
    for (Index n = 0; n < length; ++n) {
      for (Index i = 0; i < channels; ++i) {
        const double re = gauss(engine);
        samples(i, n) = Scalar(re, gauss(engine));
      }
    }
  } else {
    std::normal_distribution<double> gauss(0.0, std::sqrt(variance));
    for (Index n = 0; n < length; ++n) {
      for (Index i = 0; i < channels; ++i) samples(i, n) = gauss(engine);
    }
  }
  return SampleBlock<Scalar>(std::move(samples), sample_rate);
}

/**
 * FIR responses h_ij(k) from each of P sources to each of M channels.
 *
 * Taps are indexed [source][channel][k]. Shorter responses are implicitly
 * zero-padded to the per-source order N_j = max_i N_ij.
 */
class FirChannelSet {
 public:
  using Taps = std::vector<std::vector<std::vector<double>>>;

  FirChannelSet() = default;

  explicit FirChannelSet(Taps taps) : taps_(std::move(taps)) {
    if (taps_.empty()) throw DimensionError("channel set needs at least one source");
    const std::size_t m = taps_.front().size();
    if (m == 0) throw DimensionError("channel set needs at least one receive channel");
    for (std::size_t j = 0; j < taps_.size(); ++j) {
      if (taps_[j].size() != m) {
        throw DimensionError("source " + std::to_string(j) + " has " +
                             std::to_string(taps_[j].size()) + " channels, expected " +
                             std::to_string(m));
      }
      std::size_t longest = 0;
      for (std::size_t i = 0; i < m; ++i) {
        const auto& h = taps_[j][i];
        bool nonzero = false;
        for (double v : h) {
          if (!std::isfinite(v)) throw NumericError("non-finite channel tap");
          nonzero = nonzero || v != 0.0;
        }
        if (!nonzero) {
          throw DegenerateInputError("channel (" + std::to_string(i) + ", " + std::to_string(j) +
                                     ") has no nonzero tap");
        }
        longest = std::max(longest, h.size());
      }
      orders_.push_back(static_cast<Index>(longest) - 1);
    }
  }

  /// iid standard Gaussian taps, the whole set scaled to unit total power.
  static FirChannelSet random(Index sources, Index channels, Index order, Engine& engine) {
    if (sources < 1 || channels < 1 || order < 0) {
      throw DimensionError("random channel set needs P >= 1, M >= 1, N >= 0");
    }
    std::normal_distribution<double> gauss(0.0, 1.0);
    Taps taps(static_cast<std::size_t>(sources),
              std::vector<std::vector<double>>(static_cast<std::size_t>(channels),
                                               std::vector<double>(static_cast<std::size_t>(order + 1))));
    double power = 0.0;
    for (auto& per_source : taps) {
      for (auto& h : per_source) {
        for (double& v : h) {
          v = gauss(engine);
          power += v * v;
        }
      }
    }
    const double norm = 1.0 / std::sqrt(power);
    for (auto& per_source : taps) {
      for (auto& h : per_source) {
        for (double& v : h) v *= norm;
      }
    }
    return FirChannelSet(std::move(taps));
  }

  Index sources() const { return static_cast<Index>(taps_.size()); }
  Index channels() const { return taps_.empty() ? 0 : static_cast<Index>(taps_.front().size()); }
  /// N_j for source j.
  Index order(Index source) const { return orders_.at(static_cast<std::size_t>(source)); }
  /// N = sum_j N_j.
  Index total_order() const {
    Index n = 0;
    for (Index o : orders_) n += o;
    return n;
  }

  double tap(Index channel, Index source, Index k) const {
    const auto& h = taps_.at(static_cast<std::size_t>(source)).at(static_cast<std::size_t>(channel));
    return k >= 0 && k < static_cast<Index>(h.size()) ? h[static_cast<std::size_t>(k)] : 0.0;
  }

  double total_power() const {
    double p = 0.0;
    for (const auto& per_source : taps_) {
      for (const auto& h : per_source) {
        for (double v : h) p += v * v;
      }
    }
    return p;
  }

  const Taps& taps() const { return taps_; }

 private:
  Taps taps_;
  std::vector<Index> orders_;
};

enum class SourceKind { iid_bpsk, iid_gaussian, fm_microphone };

enum class Baseband { tone, silence };

/**
 * FM wireless-microphone model. None of these defaults are measured values;
 * they describe a narrowband FM carrier sampled at a TV-channel rate.
 */
struct FmParams {
  double sample_rate_hz = 6e6;
  double carrier_offset_hz = 100e3;
  double deviation_hz = 4e3;
  double tone_hz = 3e3;
  Baseband baseband = Baseband::tone;
  double amplitude = 1.0;
};

struct SourceSpec {
  SourceKind kind = SourceKind::iid_bpsk;
  Index sources = 1;
  FmParams fm{};

  void validate() const {
    if (sources < 1) throw DimensionError("source count must be >= 1");
    if (kind == SourceKind::fm_microphone) {
      if (!(fm.sample_rate_hz > 0.0)) throw DomainError("fm sample rate must be positive");
      if (!(fm.amplitude > 0.0)) throw DomainError("fm amplitude must be positive");
      if (!(fm.deviation_hz >= 0.0)) throw DomainError("fm deviation must be >= 0");
      if (fm.baseband == Baseband::tone && !(fm.tone_hz > 0.0)) {
        throw DomainError("fm baseband tone frequency must be positive");
      }
      if (std::abs(fm.carrier_offset_hz) >= fm.sample_rate_hz / 2.0) {
        throw DomainError("fm carrier offset must lie inside the Nyquist band");
      }
    }
  }
};

inline std::string to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::iid_bpsk:
      return "iid-bpsk";
    case SourceKind::iid_gaussian:
      return "iid-gaussian";
    case SourceKind::fm_microphone:
      return "fm-microphone";
  }
  return "unknown";
}

namespace detail {

// 2*pi*frac(cycles): keeps the phase argument small for long records.
inline double cycles_to_radians(double cycles) {
  return 2.0 * std::numbers::pi * (cycles - std::floor(cycles));
}

}  // namespace detail

/// P x T matrix of source samples s_j(n).
template <typename Scalar = double>
Matrix<Scalar> generate_sources(const SourceSpec& spec, Index length, std::uint64_t seed) {
  spec.validate();
  if (length < 1) throw DimensionError("source length must be >= 1");
  Engine engine(seed);
  Matrix<Scalar> s(spec.sources, length);
  switch (spec.kind) {
    case SourceKind::iid_bpsk: {
      std::bernoulli_distribution bit(0.5);
      for (Index n = 0; n < length; ++n) {
        for (Index j = 0; j < spec.sources; ++j) s(j, n) = Scalar(bit(engine) ? 1.0 : -1.0);
      }
      break;
    }
    case SourceKind::iid_gaussian: {
      if constexpr (is_complex_v<Scalar>) {
        std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
        for (Index n = 0; n < length; ++n) {
          for (Index j = 0; j < spec.sources; ++j) {
            const double re = gauss(engine);
            s(j, n) = Scalar(re, gauss(engine));
          }
        }
      } else {
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (Index n = 0; n < length; ++n) {
          for (Index j = 0; j < spec.sources; ++j) s(j, n) = gauss(engine);
        }
      }
      break;
    }
    case SourceKind::fm_microphone: {
      const FmParams& fm = spec.fm;
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (Index j = 0; j < spec.sources; ++j) {
        const double carrier_phase = detail::cycles_to_radians(unit(engine));
        const double tone_phase = detail::cycles_to_radians(unit(engine));
        // Phase of FM by a sinusoid: integral of deviation*sin is -beta*cos.
        const double beta = fm.baseband == Baseband::tone ? fm.deviation_hz / fm.tone_hz : 0.0;
        for (Index n = 0; n < length; ++n) {
          const double t = static_cast<double>(n) / fm.sample_rate_hz;
          double phase = carrier_phase + detail::cycles_to_radians(fm.carrier_offset_hz * t);
          if (beta != 0.0) {
            phase -= beta * std::cos(detail::cycles_to_radians(fm.tone_hz * t) + tone_phase);
          }
          if constexpr (is_complex_v<Scalar>) {
            s(j, n) = std::polar(fm.amplitude, phase);
          } else {
            s(j, n) = fm.amplitude * std::cos(phase);
          }
        }
      }
      break;
    }
  }
  return s;
}

/// x_i(n) = sum_j sum_k h_ij(k) s_j(n-k), with s_j(n) = 0 for n < 0.
template <typename Scalar>
Matrix<Scalar> apply_channels(const FirChannelSet& channels, const Matrix<Scalar>& sources) {
  if (sources.rows() != channels.sources()) {
    throw DimensionError("channel set expects " + std::to_string(channels.sources()) +
                         " sources, got " + std::to_string(sources.rows()));
  }
  const Index m = channels.channels();
  const Index length = sources.cols();
  Matrix<Scalar> x = Matrix<Scalar>::Zero(m, length);
  for (Index j = 0; j < channels.sources(); ++j) {
    const Index taps = channels.order(j) + 1;
    for (Index i = 0; i < m; ++i) {
      for (Index k = 0; k < taps; ++k) {
        const double h = channels.tap(i, j, k);
        if (h == 0.0) continue;
        for (Index n = k; n < length; ++n) x(i, n) += h * sources(j, n - k);
      }
    }
  }
  return x;
}

/// Noiseless received signal for a source model through a channel set.
template <typename Scalar = double>
SampleBlock<Scalar> generate_signal(const SourceSpec& spec, const FirChannelSet& channels,
                                    Index oversample, Index length, std::uint64_t seed) {
  spec.validate();
  if (channels.sources() != spec.sources || channels.channels() != oversample) {
    throw DimensionError("channel set is " + std::to_string(channels.sources()) + " sources x " +
                         std::to_string(channels.channels()) + " channels, scenario asks for P=" +
                         std::to_string(spec.sources) + ", M=" + std::to_string(oversample));
  }
  const double rate = spec.kind == SourceKind::fm_microphone ? spec.fm.sample_rate_hz : 0.0;
  return SampleBlock<Scalar>(apply_channels(channels, generate_sources<Scalar>(spec, length, seed)),
                             rate);
}

/// Per-channel FIR filtering with zero pre-history.
template <typename Scalar>
SampleBlock<Scalar> filter_block(const SampleBlock<Scalar>& block, const std::vector<double>& taps) {
  if (taps.empty()) throw DimensionError("filter needs at least one tap");
  Matrix<Scalar> y = Matrix<Scalar>::Zero(block.channels(), block.length());
  const auto& x = block.samples();
  for (std::size_t k = 0; k < taps.size(); ++k) {
    const Index shift = static_cast<Index>(k);
    if (shift >= block.length()) break;
    y.rightCols(block.length() - shift) += taps[k] * x.leftCols(block.length() - shift);
  }
  return SampleBlock<Scalar>(std::move(y), block.sample_rate());
}

/// Mean received power per time instant, E||x(n)||^2, estimated over the block.
template <typename Scalar>
double average_power(const SampleBlock<Scalar>& block) {
  double total = 0.0;
  const auto& x = block.samples();
  for (Index n = 0; n < x.cols(); ++n) {
    for (Index i = 0; i < x.rows(); ++i) total += squared_magnitude(x(i, n));
  }
  return total / static_cast<double>(x.cols());
}

template <typename Scalar>
void require_same_shape(const SampleBlock<Scalar>& a, const SampleBlock<Scalar>& b) {
  if (a.channels() != b.channels() || a.length() != b.length()) {
    throw DimensionError("signal is " + std::to_string(a.channels()) + "x" +
                         std::to_string(a.length()) + " but noise is " +
                         std::to_string(b.channels()) + "x" + std::to_string(b.length()));
  }
}

/// 10 log10 of the empirical signal-to-noise power ratio; -inf for a silent signal.
template <typename Scalar>
double measure_snr(const SampleBlock<Scalar>& signal, const SampleBlock<Scalar>& noise) {
  require_same_shape(signal, noise);
  const double pn = average_power(noise);
  if (pn == 0.0) throw DegenerateInputError("noise block has zero power");
  const double ps = average_power(signal);
  if (ps == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(ps / pn);
}

template <typename Scalar>
struct MixResult {
  SampleBlock<Scalar> block;
  /// Amplitude factor applied to the signal.
  double scale = 0.0;
};

/// scale * signal + noise with scale chosen so measure_snr hits the target.
template <typename Scalar>
MixResult<Scalar> mix_at_snr(const SampleBlock<Scalar>& signal, const SampleBlock<Scalar>& noise,
                             double target_snr_db) {
  require_same_shape(signal, noise);
  if (!std::isfinite(target_snr_db)) throw DomainError("target SNR must be finite");
  const double ps = average_power(signal);
  if (ps == 0.0) throw DegenerateInputError("cannot scale a zero-power signal to a target SNR");
  const double pn = average_power(noise);
  if (pn == 0.0) throw DegenerateInputError("noise block has zero power");
  const double scale = std::sqrt(std::pow(10.0, target_snr_db / 10.0) * pn / ps);
  Matrix<Scalar> mixed = signal.samples() * Scalar(scale) + noise.samples();
  return {SampleBlock<Scalar>(std::move(mixed), signal.sample_rate()), scale};
}

}  // namespace eigsense
