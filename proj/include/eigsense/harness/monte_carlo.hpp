#pragma once

// Monte Carlo engine. Every trial draws its channel, signal and noise from
// RNG streams keyed by (seed, trial), evaluates all detectors on the same
// blocks, and writes one row of statistics. Rows are reduced in trial order
// afterwards, so results do not depend on the worker count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "eigsense/covariance.hpp"
#include "eigsense/detectors.hpp"
#include "eigsense/eig.hpp"
#include "eigsense/errors.hpp"
#include "eigsense/harness/iq_io.hpp"
#include "eigsense/harness/parallel.hpp"
#include "eigsense/harness/scenario.hpp"
#include "eigsense/prewhiten.hpp"
#include "eigsense/rmt.hpp"
#include "eigsense/rng.hpp"
#include "eigsense/signal_gen.hpp"

namespace eigsense::harness {

struct Cell {
  std::string detector;
  /// Empty for noise-only (H0) rows.
  std::optional<double> snr_db;
  Index samples = 0;
  double threshold = 0.0;
  Index successes = 0;
  Index trials = 0;
  double rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double mean_statistic = 0.0;
  /// Analytic prediction averaged over trials rather than a counted rate.
  bool theoretical = false;
};

struct RunResult {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<Cell> cells;

  /// First cell matching the label, condition and Ns; throws if absent.
  const Cell& find(const std::string& detector, std::optional<double> snr_db, Index samples) const {
    for (const auto& c : cells) {
      if (c.detector == detector && c.snr_db == snr_db && c.samples == samples) return c;
    }
    throw ConfigError("no result cell for " + detector + " at Ns=" + std::to_string(samples));
  }
};

struct RunOptions {
  /// 0 uses every hardware thread.
  std::size_t workers = 0;
};

inline constexpr double kWilsonZ = 1.959964;

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

inline Interval wilson_interval(Index successes, Index trials, double z = kWilsonZ) {
  if (trials < 1) throw DomainError("Wilson interval needs at least one trial");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

/// One column of the per-trial statistics table.
struct Slot {
  Index samples = 0;
  std::optional<double> snr_db;
  std::size_t detector = 0;
};

/// Analytic Pd columns, averaged rather than thresholded.
struct TheorySlot {
  Index samples = 0;
  double snr_db = 0.0;
  TestKind kind = TestKind::mme;
  double threshold = 0.0;
};

struct StatisticTable {
  std::vector<Slot> slots;
  /// Threshold each slot is judged against by default.
  std::vector<double> thresholds;
  std::vector<TheorySlot> theory;
  Index trials = 0;
  /// trials x slots, row-major.
  std::vector<double> values;
  /// trials x theory, row-major.
  std::vector<double> theory_values;

  double value(Index trial, std::size_t slot) const {
    return values[static_cast<std::size_t>(trial) * slots.size() + slot];
  }
};

namespace detail {

inline double default_threshold(const Scenario& s, const DetectorSpec& d, Index ns) {
  switch (d.kind) {
    case TestKind::mme:
      return mme_threshold(ns, s.channels, s.smoothing, s.pfa);
    case TestKind::eme:
      return eme_threshold(ns, s.channels, s.smoothing, s.pfa);
    case TestKind::energy:
      return energy_threshold(s.channels, ns, s.pfa);
    case TestKind::coin:
      return 1.0 - s.pfa;
  }
  return 0.0;
}

inline bool needs_eigen(const Scenario& s) {
  for (const auto& d : s.detectors) {
    if (d.kind == TestKind::mme || d.kind == TestKind::eme) return true;
  }
  return false;
}

inline bool has_detector(const Scenario& s, TestKind kind) {
  for (const auto& d : s.detectors) {
    if (d.kind == kind) return true;
  }
  return false;
}

/// The analytic curves assume iid sources and white noise.
inline bool theory_applies(const Scenario& s) {
  return (s.signal == SignalKind::iid_bpsk || s.signal == SignalKind::iid_gaussian) && s.noise_filter.empty();
}

inline std::string resolve_relative(const std::string& path, const std::string& base_dir) {
  std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p.string();
  return (std::filesystem::path(base_dir) / p).string();
}

/// The recording named by the scenario, with sidecar and inline format reconciled.
inline AnyBlock load_recording(const Scenario& s) {
  const std::string path = resolve_relative(s.iq.path, s.base_dir);
  const std::string side = sidecar_path(path);
  std::optional<IqFormat> from_sidecar;
  if (std::filesystem::exists(side)) from_sidecar = read_iq_format(side);
  if (s.iq.format && from_sidecar && !(*s.iq.format == *from_sidecar)) {
    throw ConfigError("signal.iq.format disagrees with the sidecar " + side);
  }
  if (!s.iq.format && !from_sidecar) {
    throw ConfigError("signal.iq: no format given and no sidecar at " + side);
  }
  const IqFormat format = s.iq.format ? *s.iq.format : *from_sidecar;
  const Index expected = s.iq.polyphase > 1 ? 1 : s.channels;
  if (format.channels != expected) {
    throw ConfigError("signal.iq: recording has " + std::to_string(format.channels) +
                      " channels, scenario needs " + std::to_string(expected));
  }
  if (s.iq.polyphase > 1 && s.iq.polyphase != s.channels) {
    throw ConfigError("signal.iq.polyphase must equal channels");
  }
  return ingest_iq(path, format);
}

template <typename Scalar>
class TrialRunner {
 public:
  TrialRunner(const Scenario& s, const StatisticTable& table, const SampleBlock<Scalar>* recording)
      : s_(s), table_(table), recording_(recording) {
    span_ = s.max_samples() + s.smoothing - 1;
    if (!s.noise_filter.empty()) {
      double gain = 0.0;
      for (double f : s.noise_filter) gain += f * f;
      noise_power_ = s.noise_variance * gain;
      if (s.prewhiten) whitener_ = build_whitener(s.noise_filter, s.smoothing);
    } else {
      noise_power_ = s.noise_variance;
    }
    if (recording_ != nullptr) {
      const Index need = span_ * s.iq.polyphase;
      if (recording_->length() < need) {
        throw ConfigError("signal.iq: recording has " + std::to_string(recording_->length()) +
                          " samples per channel, each trial needs " + std::to_string(need));
      }
    }
  }

  void run(Index trial, double* row, double* theory_row) const {
    const std::uint64_t seed = s_.seed;
    const auto t = static_cast<std::uint64_t>(trial);

    // Assumed noise power per ED detector for this trial.
    Engine uncertainty = make_engine(seed, t, Stream::uncertainty);
    std::vector<double> assumed(s_.detectors.size(), noise_power_);
    for (std::size_t d = 0; d < s_.detectors.size(); ++d) {
      if (s_.detectors[d].kind != TestKind::energy) continue;
      assumed[d] = realized_noise_variance(NoiseModel{noise_power_, s_.detectors[d].uncertainty_db}, uncertainty);
    }
    Engine control = make_engine(seed, t, Stream::control);

    const SampleBlock<Scalar> null_noise = make_noise(derive_seed(seed, t, Stream::null_noise));
    std::optional<SampleBlock<Scalar>> noise;
    std::optional<SampleBlock<Scalar>> signal;
    std::optional<SignalSpectrumSummary> unit_summary;
    if (s_.has_signal()) {
      noise = make_noise(derive_seed(seed, t, Stream::noise));
      if (s_.signal == SignalKind::iq_file) {
        signal = segment(trial);
      } else {
        Engine channel_engine = make_engine(seed, t, Stream::channel);
        const FirChannelSet channels =
            FirChannelSet::random(s_.source.sources, s_.channels, s_.channel_order, channel_engine);
        signal = generate_signal<Scalar>(s_.source_spec(), channels, s_.channels, span_,
                                         derive_seed(seed, t, Stream::source));
        if (!table_.theory.empty()) {
          unit_summary = signal_spectrum_summary(
              channels, std::vector<double>(static_cast<std::size_t>(s_.source.sources), 1.0), s_.smoothing,
              s_.noise_variance);
        }
      }
    }

    std::size_t slot = 0;
    std::size_t theory_slot = 0;
    for (Index ns : s_.samples) {
      const Index used = ns + s_.smoothing - 1;
      evaluate(null_noise, ns, assumed, control, row + slot);
      slot += s_.detectors.size();
      if (!s_.has_signal()) continue;
      const SampleBlock<Scalar> sig = signal->prefix(used);
      const SampleBlock<Scalar> noi = noise->prefix(used);
      for (double snr : s_.snr_db) {
        const MixResult<Scalar> mixed = mix_at_snr(sig, noi, snr);
        evaluate(mixed.block, ns, assumed, control, row + slot);
        slot += s_.detectors.size();
        while (theory_slot < table_.theory.size() && table_.theory[theory_slot].samples == ns &&
               table_.theory[theory_slot].snr_db == snr) {
          theory_row[theory_slot] = predict(table_.theory[theory_slot], *unit_summary, mixed.scale);
          ++theory_slot;
        }
      }
    }
  }

 private:
  SampleBlock<Scalar> make_noise(std::uint64_t stream_seed) const {
    const Index k = static_cast<Index>(s_.noise_filter.size()) - 1;
    if (s_.noise_filter.empty()) {
      return generate_noise<Scalar>(NoiseModel{s_.noise_variance, 0.0}, s_.channels, span_, stream_seed);
    }
    // Run the filter over K extra samples so the kept part is stationary.
    const auto raw = generate_noise<Scalar>(NoiseModel{s_.noise_variance, 0.0}, s_.channels, span_ + k, stream_seed);
    const auto filtered = filter_block(raw, s_.noise_filter);
    return SampleBlock<Scalar>(Matrix<Scalar>(filtered.samples().rightCols(span_)));
  }

  SampleBlock<Scalar> segment(Index trial) const {
    Engine engine = make_engine(s_.seed, static_cast<std::uint64_t>(trial), Stream::segment);
    const Index need = span_ * s_.iq.polyphase;
    std::uniform_int_distribution<Index> offset(0, recording_->length() - need);
    const Index start = offset(engine);
    SampleBlock<Scalar> piece(Matrix<Scalar>(recording_->samples().middleCols(start, need)),
                              recording_->sample_rate());
    if (s_.iq.polyphase > 1) return polyphase_split(piece, s_.iq.polyphase);
    return piece;
  }

  void evaluate(const SampleBlock<Scalar>& block, Index ns, const std::vector<double>& assumed, Engine& control,
                double* out) const {
    const double t = energy(block, ns).value;
    EigenStatistics stats;
    if (needs_eigen(s_)) {
      auto cov = sample_covariance(block, s_.smoothing, ns);
      if (whitener_) {
        cov = whiten_covariance(*whitener_, cov);
        stats = eigen_statistics(cov, eigen_average(cov));
      } else {
        stats = eigen_statistics(cov, t);
      }
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t d = 0; d < s_.detectors.size(); ++d) {
      switch (s_.detectors[d].kind) {
        case TestKind::mme:
          out[d] = stats.mme();
          break;
        case TestKind::eme:
          out[d] = stats.eme();
          break;
        case TestKind::energy:
          out[d] = t / assumed[d];
          break;
        case TestKind::coin:
          out[d] = unit(control);
          break;
      }
    }
  }

  double predict(const TheorySlot& slot, const SignalSpectrumSummary& unit, double scale) const {
    SignalSpectrumSummary s = unit;
    const double gain = scale * scale;
    s.rho_max *= gain;
    s.rho_min *= gain;
    s.trace_over_dim *= gain;
    if (slot.kind == TestKind::mme) {
      return predict_pd_mme(s, slot.samples, s_.channels, s_.smoothing, slot.threshold);
    }
    return predict_pd_eme(s, slot.samples, s_.channels, s_.smoothing, slot.threshold);
  }

  const Scenario& s_;
  const StatisticTable& table_;
  const SampleBlock<Scalar>* recording_ = nullptr;
  Index span_ = 0;
  double noise_power_ = 1.0;
  std::optional<WhiteningTransform> whitener_;
};

inline StatisticTable layout(const Scenario& s, bool with_theory) {
  StatisticTable table;
  table.trials = s.trials;
  const bool theory = with_theory && theory_applies(s);
  for (Index ns : s.samples) {
    std::vector<std::optional<double>> conditions{std::nullopt};
    if (s.has_signal()) conditions.insert(conditions.end(), s.snr_db.begin(), s.snr_db.end());
    for (const auto& c : conditions) {
      for (std::size_t d = 0; d < s.detectors.size(); ++d) {
        table.slots.push_back({ns, c, d});
        table.thresholds.push_back(default_threshold(s, s.detectors[d], ns));
      }
      if (!theory || !c) continue;
      if (has_detector(s, TestKind::mme)) {
        table.theory.push_back({ns, *c, TestKind::mme, mme_threshold(ns, s.channels, s.smoothing, s.pfa)});
      }
      if (has_detector(s, TestKind::eme)) {
        table.theory.push_back({ns, *c, TestKind::eme, eme_threshold(ns, s.channels, s.smoothing, s.pfa)});
      }
    }
  }
  return table;
}

template <typename Scalar>
void fill(const Scenario& s, StatisticTable& table, const SampleBlock<Scalar>* recording, const RunOptions& opt) {
  table.values.assign(static_cast<std::size_t>(s.trials) * table.slots.size(), 0.0);
  table.theory_values.assign(static_cast<std::size_t>(s.trials) * table.theory.size(), 0.0);
  const TrialRunner<Scalar> runner(s, table, recording);
  parallel_for(static_cast<std::size_t>(s.trials), opt.workers, [&](std::size_t trial) {
    runner.run(static_cast<Index>(trial), table.values.data() + trial * table.slots.size(),
               table.theory_values.data() + trial * table.theory.size());
  });
}

}  // namespace detail

/// Per-trial statistics for every (Ns, condition, detector) slot.
inline StatisticTable collect_statistics(const Scenario& s, const RunOptions& opt = {}, bool with_theory = false) {
  s.validate();
  default_tw_table();  // build once before the workers start
  StatisticTable table = detail::layout(s, with_theory);
  if (s.signal == SignalKind::iq_file) {
    const AnyBlock recording = detail::load_recording(s);
    std::visit([&](const auto& block) { detail::fill(s, table, &block, opt); }, recording);
  } else if (s.complex_samples) {
    detail::fill<std::complex<double>>(s, table, nullptr, opt);
  } else {
    detail::fill<double>(s, table, nullptr, opt);
  }
  return table;
}

/// Counts exceedances of `threshold` in one slot, in trial order.
inline Cell summarize_slot(const Scenario& s, const StatisticTable& table, std::size_t slot, double threshold) {
  const Slot& sl = table.slots[slot];
  Cell c;
  c.detector = s.detectors[sl.detector].label();
  c.snr_db = sl.snr_db;
  c.samples = sl.samples;
  c.threshold = threshold;
  c.trials = table.trials;
  double sum = 0.0;
  for (Index t = 0; t < table.trials; ++t) {
    const double v = table.value(t, slot);
    sum += v;
    if (v > threshold) ++c.successes;
  }
  c.rate = static_cast<double>(c.successes) / static_cast<double>(c.trials);
  const Interval ci = wilson_interval(c.successes, c.trials);
  c.ci_low = ci.low;
  c.ci_high = ci.high;
  c.mean_statistic = sum / static_cast<double>(c.trials);
  return c;
}

inline RunResult make_result(const Scenario& s) {
  RunResult r;
  r.scenario = s.name;
  r.seed = s.seed;
  r.config_hash = config_hash(s);
  return r;
}

/// Rates at the scenario's target-Pfa thresholds: Pfa rows for H0, Pd rows per SNR.
inline RunResult run_scenario(const Scenario& s, const RunOptions& opt = {}) {
  const StatisticTable table = collect_statistics(s, opt);
  RunResult r = make_result(s);
  for (std::size_t i = 0; i < table.slots.size(); ++i) r.cells.push_back(summarize_slot(s, table, i, table.thresholds[i]));
  return r;
}

/// run_scenario plus the analytic MME-theo / EME-theo curves where they apply.
inline RunResult sweep_pd_vs_snr(const Scenario& s, const RunOptions& opt = {}) {
  if (!s.has_signal() || s.snr_db.empty()) throw ConfigError("snr_db: a Pd sweep needs a signal and an SNR grid");
  const StatisticTable table = collect_statistics(s, opt, true);
  RunResult r = make_result(s);
  for (std::size_t i = 0; i < table.slots.size(); ++i) r.cells.push_back(summarize_slot(s, table, i, table.thresholds[i]));
  for (std::size_t k = 0; k < table.theory.size(); ++k) {
    const TheorySlot& th = table.theory[k];
    Cell c;
    c.detector = th.kind == TestKind::mme ? "MME-theo" : "EME-theo";
    c.snr_db = th.snr_db;
    c.samples = th.samples;
    c.threshold = th.threshold;
    c.trials = table.trials;
    double sum = 0.0;
    for (Index t = 0; t < table.trials; ++t) {
      sum += table.theory_values[static_cast<std::size_t>(t) * table.theory.size() + k];
    }
    c.rate = sum / static_cast<double>(table.trials);
    c.ci_low = c.rate;
    c.ci_high = c.rate;
    c.mean_statistic = c.rate;
    c.theoretical = true;
    r.cells.push_back(c);
  }
  return r;
}

/// Threshold whose exceedance rate over `values` is the largest not above p.
inline double empirical_threshold(std::vector<double> values, double p) {
  if (values.empty()) throw DomainError("no statistics to calibrate against");
  std::sort(values.begin(), values.end(), std::greater<>());
  const auto n = values.size();
  const auto k = static_cast<std::size_t>(std::floor(p * static_cast<double>(n) + 1e-9));
  if (k >= n) return std::nextafter(values.back(), -std::numeric_limits<double>::infinity());
  return values[k];
}

/**
 * ROC points per detector and Ns. Thresholds come from the explicit grid for
 * that detector if one is given, otherwise from the empirical H0 quantiles at
 * each pfa_grid value. Every threshold yields one H0 row and one row per SNR.
 */
inline RunResult sweep_roc(const Scenario& s, const RocSpec& grid, const RunOptions& opt = {}) {
  if (!s.has_signal()) throw ConfigError("roc: needs a signal for the detection rows");
  const StatisticTable table = collect_statistics(s, opt);
  RunResult r = make_result(s);
  const std::size_t per_condition = s.detectors.size();
  const std::size_t per_ns = per_condition * (1 + s.snr_db.size());
  for (std::size_t n = 0; n < s.samples.size(); ++n) {
    for (std::size_t d = 0; d < s.detectors.size(); ++d) {
      const std::size_t h0 = n * per_ns + d;
      std::vector<double> thresholds;
      const auto label = s.detectors[d].label();
      if (auto it = grid.thresholds.find(label); it != grid.thresholds.end()) {
        thresholds = it->second;
      } else if (!grid.pfa_grid.empty()) {
        std::vector<double> null_stats;
        null_stats.reserve(static_cast<std::size_t>(table.trials));
        for (Index t = 0; t < table.trials; ++t) null_stats.push_back(table.value(t, h0));
        for (double p : grid.pfa_grid) thresholds.push_back(empirical_threshold(null_stats, p));
      } else {
        throw ConfigError("roc: no thresholds or pfa_grid for detector " + label);
      }
      for (double th : thresholds) {
        r.cells.push_back(summarize_slot(s, table, h0, th));
        for (std::size_t c = 0; c < s.snr_db.size(); ++c) {
          r.cells.push_back(summarize_slot(s, table, h0 + (c + 1) * per_condition, th));
        }
      }
    }
  }
  return r;
}

inline RunResult sweep_roc(const Scenario& s, const RunOptions& opt = {}) { return sweep_roc(s, s.roc, opt); }

}  // namespace eigsense::harness
