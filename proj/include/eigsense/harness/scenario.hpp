#pragma once

// Monte Carlo experiment descriptions and their JSON form. Every key is
// checked; unknown keys are errors so typos never silently fall back to a
// default. The schema is described in docs/scenario-format.md.

#include <charconv>
#include <filesystem>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "eigsense/detectors.hpp"
#include "eigsense/errors.hpp"
#include "eigsense/harness/iq_io.hpp"
#include "eigsense/signal_gen.hpp"

namespace eigsense::harness {

enum class SignalKind { none, iid_bpsk, iid_gaussian, fm_microphone, iq_file };

enum class TestKind {
  mme,
  eme,
  energy,
  /// Uniform random statistic; a calibration control that ignores the data.
  coin,
};

struct DetectorSpec {
  TestKind kind = TestKind::mme;
  /// Noise-power uncertainty B in dB; energy detection only.
  double uncertainty_db = 0.0;

  std::string label() const;
  friend bool operator==(const DetectorSpec&, const DetectorSpec&) = default;
};

struct IqSourceSpec {
  std::string path;
  /// Overrides the sidecar when set; must agree with it if both exist.
  std::optional<IqFormat> format;
  /// Single-stream recordings are split into this many polyphase channels.
  Index polyphase = 1;
};

struct RocSpec {
  /// Thresholds placed at these empirical H0 exceedance rates.
  std::vector<double> pfa_grid;
  /// Explicit thresholds per detector label; takes precedence over pfa_grid.
  std::map<std::string, std::vector<double>> thresholds;
};

struct Scenario {
  std::string name = "scenario";
  SignalKind signal = SignalKind::none;
  /// Source count and FM knobs; the kind always follows `signal`.
  SourceSpec source{};
  /// N_j for every randomly drawn channel (N_j + 1 taps).
  Index channel_order = 0;
  IqSourceSpec iq{};
  bool complex_samples = false;

  Index channels = 1;
  Index smoothing = 1;
  std::vector<Index> samples{10000};
  std::vector<double> snr_db;
  std::vector<DetectorSpec> detectors;
  double pfa = 0.1;
  Index trials = 1000;
  std::uint64_t seed = 1;

  double noise_variance = 1.0;
  /// Receive filter applied to the noise; empty for white noise.
  std::vector<double> noise_filter;
  /// Whiten the covariance with the known noise filter before detection.
  bool prewhiten = false;

  RocSpec roc{};

  /// Directory relative recording paths are resolved against; not hashed.
  std::string base_dir;

  Index max_samples() const {
    Index m = 0;
    for (Index n : samples) m = std::max(m, n);
    return m;
  }
  bool has_signal() const { return signal != SignalKind::none; }

  SourceSpec source_spec() const {
    SourceSpec out = source;
    if (signal == SignalKind::iid_gaussian) out.kind = SourceKind::iid_gaussian;
    if (signal == SignalKind::fm_microphone) out.kind = SourceKind::fm_microphone;
    if (signal == SignalKind::iid_bpsk) out.kind = SourceKind::iid_bpsk;
    return out;
  }

  void validate() const;
};

namespace detail {

inline std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

inline std::string DetectorSpec::label() const {
  switch (kind) {
    case TestKind::mme:
      return "MME";
    case TestKind::eme:
      return "EME";
    case TestKind::energy:
      return "ED-" + detail::shortest(uncertainty_db) + "dB";
    case TestKind::coin:
      return "COIN";
  }
  return "unknown";
}

inline std::string to_string(SignalKind kind) {
  switch (kind) {
    case SignalKind::none:
      return "none";
    case SignalKind::iid_bpsk:
      return "iid-bpsk";
    case SignalKind::iid_gaussian:
      return "iid-gaussian";
    case SignalKind::fm_microphone:
      return "fm-microphone";
    case SignalKind::iq_file:
      return "iq-file";
  }
  return "unknown";
}

inline void Scenario::validate() const {
  auto fail = [](const std::string& field, const std::string& msg) {
    throw ConfigError(field + ": " + msg);
  };
  if (name.empty()) fail("name", "must not be empty");
  if (name.find_first_of(",\"\n\r") != std::string::npos) {
    fail("name", "must not contain commas, quotes or newlines");
  }
  if (channels < 1) fail("channels", "must be >= 1");
  if (smoothing < 1) fail("smoothing", "must be >= 1");
  if (trials < 1) fail("trials", "must be >= 1");
  if (!(pfa > 0.0 && pfa < 1.0)) fail("pfa", "must lie in (0, 1)");
  if (!(noise_variance > 0.0)) fail("noise.variance", "must be positive");
  if (samples.empty()) fail("samples", "needs at least one value");
  for (Index n : samples) {
    if (n <= channels * smoothing) {
      fail("samples", "every Ns must exceed ML=" + std::to_string(channels * smoothing) + ", got " +
                          std::to_string(n));
    }
  }
  if (detectors.empty()) fail("detectors", "needs at least one detector");
  std::set<std::string> labels;
  for (const auto& d : detectors) {
    if (!(d.uncertainty_db >= 0.0)) fail("detectors", "uncertainty_db must be >= 0");
    if (d.kind != TestKind::energy && d.uncertainty_db != 0.0) {
      fail("detectors", "uncertainty_db applies to ED only");
    }
    if (!labels.insert(d.label()).second) fail("detectors", "duplicate detector " + d.label());
  }
  if (has_signal() && snr_db.empty()) fail("snr_db", "needs at least one value when a signal is present");
  for (double s : snr_db) {
    if (!std::isfinite(s)) fail("snr_db", "values must be finite");
  }
  if (signal == SignalKind::iid_bpsk || signal == SignalKind::iid_gaussian ||
      signal == SignalKind::fm_microphone) {
    try {
      source_spec().validate();
    } catch (const Error& e) {
      fail("signal", e.what());
    }
    if (channel_order < 0) fail("signal.channel_order", "must be >= 0");
  }
  if (signal == SignalKind::iq_file) {
    if (iq.path.empty()) fail("signal.iq.path", "must name a recording");
    if (iq.polyphase < 1) fail("signal.iq.polyphase", "must be >= 1");
  }
  if (!noise_filter.empty()) {
    bool nonzero = false;
    for (double f : noise_filter) nonzero = nonzero || f != 0.0;
    if (!nonzero) fail("noise.filter", "must have a nonzero tap");
  }
  if (prewhiten && noise_filter.empty()) fail("noise.prewhiten", "requires noise.filter");
  for (double p : roc.pfa_grid) {
    if (!(p >= 0.0 && p <= 1.0)) fail("roc.pfa_grid", "values must lie in [0, 1]");
  }
  for (const auto& [label, grid] : roc.thresholds) {
    if (!labels.count(label)) fail("roc.thresholds", "no detector labelled " + label);
    if (grid.empty()) fail("roc.thresholds", label + " has an empty grid");
  }
}

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::string& where,
                       std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get(const nlohmann::json& j, const char* key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

inline DetectorSpec parse_detector(const nlohmann::json& j) {
  auto from_name = [](const std::string& s) {
    if (s == "MME") return TestKind::mme;
    if (s == "EME") return TestKind::eme;
    if (s == "ED") return TestKind::energy;
    if (s == "COIN") return TestKind::coin;
    throw ConfigError("detectors: unknown detector '" + s + "' (MME, EME, ED, COIN)");
  };
  DetectorSpec d;
  if (j.is_string()) {
    d.kind = from_name(j.get<std::string>());
    return d;
  }
  check_keys(j, "detectors[]", {"kind", "uncertainty_db"});
  if (!j.contains("kind")) throw ConfigError("detectors[]: missing kind");
  d.kind = from_name(get<std::string>(j, "kind", "detectors[]", ""));
  d.uncertainty_db = get<double>(j, "uncertainty_db", "detectors[]", 0.0);
  return d;
}

inline SignalKind parse_signal_kind(const std::string& s) {
  if (s == "none") return SignalKind::none;
  if (s == "iid-bpsk") return SignalKind::iid_bpsk;
  if (s == "iid-gaussian") return SignalKind::iid_gaussian;
  if (s == "fm-microphone") return SignalKind::fm_microphone;
  if (s == "iq-file") return SignalKind::iq_file;
  throw ConfigError("signal.kind: unknown kind '" + s + "'");
}

}  // namespace detail

inline Scenario parse_scenario(const nlohmann::json& j) {
  using detail::get;
  detail::check_keys(j, "scenario",
                     {"name", "signal", "channels", "smoothing", "samples", "snr_db", "detectors", "pfa",
                      "trials", "seed", "noise", "roc"});
  Scenario s;
  s.name = get<std::string>(j, "name", "scenario", s.name);
  s.channels = get<Index>(j, "channels", "scenario", s.channels);
  s.smoothing = get<Index>(j, "smoothing", "scenario", s.smoothing);
  if (j.contains("samples")) {
    const auto& ns = j.at("samples");
    try {
      s.samples = ns.is_array() ? ns.get<std::vector<Index>>() : std::vector<Index>{ns.get<Index>()};
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("samples: expected an integer or a list of integers");
    }
  }
  s.snr_db = get<std::vector<double>>(j, "snr_db", "scenario", {});
  s.pfa = get<double>(j, "pfa", "scenario", s.pfa);
  s.trials = get<Index>(j, "trials", "scenario", s.trials);
  s.seed = get<std::uint64_t>(j, "seed", "scenario", s.seed);

  if (j.contains("detectors")) {
    if (!j.at("detectors").is_array()) throw ConfigError("detectors: expected a list");
    for (const auto& d : j.at("detectors")) s.detectors.push_back(detail::parse_detector(d));
  }

  if (j.contains("signal")) {
    const auto& sig = j.at("signal");
    detail::check_keys(sig, "signal", {"kind", "sources", "channel_order", "complex", "fm", "iq"});
    s.signal = detail::parse_signal_kind(get<std::string>(sig, "kind", "signal", "none"));
    s.source.sources = get<Index>(sig, "sources", "signal", 1);
    s.channel_order = get<Index>(sig, "channel_order", "signal", 0);
    s.complex_samples = get<bool>(sig, "complex", "signal", false);
    if (sig.contains("fm")) {
      const auto& fm = sig.at("fm");
      detail::check_keys(fm, "signal.fm",
                         {"sample_rate_hz", "carrier_offset_hz", "deviation_hz", "tone_hz", "baseband",
                          "amplitude"});
      FmParams& p = s.source.fm;
      p.sample_rate_hz = get<double>(fm, "sample_rate_hz", "signal.fm", p.sample_rate_hz);
      p.carrier_offset_hz = get<double>(fm, "carrier_offset_hz", "signal.fm", p.carrier_offset_hz);
      p.deviation_hz = get<double>(fm, "deviation_hz", "signal.fm", p.deviation_hz);
      p.tone_hz = get<double>(fm, "tone_hz", "signal.fm", p.tone_hz);
      p.amplitude = get<double>(fm, "amplitude", "signal.fm", p.amplitude);
      const auto bb = get<std::string>(fm, "baseband", "signal.fm", "tone");
      if (bb == "tone") p.baseband = Baseband::tone;
      else if (bb == "silence") p.baseband = Baseband::silence;
      else throw ConfigError("signal.fm.baseband: expected tone or silence");
    }
    if (sig.contains("iq")) {
      const auto& iq = sig.at("iq");
      detail::check_keys(iq, "signal.iq", {"path", "polyphase", "format"});
      s.iq.path = get<std::string>(iq, "path", "signal.iq", "");
      s.iq.polyphase = get<Index>(iq, "polyphase", "signal.iq", 1);
      if (iq.contains("format")) {
        try {
          s.iq.format = parse_iq_format(iq.at("format"));
        } catch (const IoError& e) {
          throw ConfigError(std::string("signal.iq.format: ") + e.what());
        }
      }
    }
  }

  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    detail::check_keys(n, "noise", {"variance", "filter", "prewhiten"});
    s.noise_variance = get<double>(n, "variance", "noise", s.noise_variance);
    s.noise_filter = get<std::vector<double>>(n, "filter", "noise", {});
    s.prewhiten = get<bool>(n, "prewhiten", "noise", false);
  }

  if (j.contains("roc")) {
    const auto& r = j.at("roc");
    detail::check_keys(r, "roc", {"pfa_grid", "thresholds"});
    s.roc.pfa_grid = get<std::vector<double>>(r, "pfa_grid", "roc", {});
    s.roc.thresholds = get<std::map<std::string, std::vector<double>>>(r, "thresholds", "roc", {});
  }

  s.validate();
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("scenario file " + path + " is not valid JSON: " + e.what());
  }
  Scenario s = parse_scenario(j);
  s.base_dir = std::filesystem::path(path).parent_path().string();
  return s;
}

/// Canonical JSON of the effective scenario (after overrides).
inline nlohmann::json to_json(const Scenario& s) {
  nlohmann::json sig{{"kind", to_string(s.signal)}};
  if (s.signal != SignalKind::none && s.signal != SignalKind::iq_file) {
    sig["sources"] = s.source.sources;
    sig["channel_order"] = s.channel_order;
    sig["complex"] = s.complex_samples;
  }
  if (s.signal == SignalKind::fm_microphone) {
    const auto& p = s.source.fm;
    sig["fm"] = {{"sample_rate_hz", p.sample_rate_hz}, {"carrier_offset_hz", p.carrier_offset_hz},
                 {"deviation_hz", p.deviation_hz},     {"tone_hz", p.tone_hz},
                 {"baseband", p.baseband == Baseband::tone ? "tone" : "silence"},
                 {"amplitude", p.amplitude}};
  }
  if (s.signal == SignalKind::iq_file) {
    nlohmann::json iq{{"path", s.iq.path}, {"polyphase", s.iq.polyphase}};
    if (s.iq.format) iq["format"] = to_json(*s.iq.format);
    sig["iq"] = iq;
  }
  nlohmann::json dets = nlohmann::json::array();
  for (const auto& d : s.detectors) {
    const char* kind = d.kind == TestKind::mme ? "MME" : d.kind == TestKind::eme ? "EME"
                       : d.kind == TestKind::energy ? "ED" : "COIN";
    dets.push_back({{"kind", kind}, {"uncertainty_db", d.uncertainty_db}});
  }
  nlohmann::json j{{"name", s.name},
                   {"signal", sig},
                   {"channels", s.channels},
                   {"smoothing", s.smoothing},
                   {"samples", s.samples},
                   {"snr_db", s.snr_db},
                   {"detectors", dets},
                   {"pfa", s.pfa},
                   {"trials", s.trials},
                   {"seed", s.seed},
                   {"noise", {{"variance", s.noise_variance}, {"filter", s.noise_filter}, {"prewhiten", s.prewhiten}}}};
  if (!s.roc.pfa_grid.empty() || !s.roc.thresholds.empty()) {
    j["roc"] = {{"pfa_grid", s.roc.pfa_grid}, {"thresholds", s.roc.thresholds}};
  }
  return j;
}

/// FNV-1a 64 of the canonical JSON, as 16 hex digits.
inline std::string config_hash(const Scenario& s) {
  const std::string text = to_json(s).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
  return out;
}

}  // namespace eigsense::harness
