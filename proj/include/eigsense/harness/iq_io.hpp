#pragma once

// Raw IQ recordings: little-endian float32 samples, frame-interleaved across
// channels, with a JSON sidecar next to the data file:
//
//   <file>.json  {"format": "f32le", "layout": "real" | "iq",
//                 "channels": M, "sample_rate": Hz}
//
// "iq" stores each value as an (I, Q) pair and yields complex samples.

#include <bit>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "eigsense/errors.hpp"
#include "eigsense/sample_block.hpp"

namespace eigsense::harness {

enum class IqLayout { real, interleaved };

struct IqFormat {
  IqLayout layout = IqLayout::real;
  Index channels = 1;
  double sample_rate = 0.0;

  friend bool operator==(const IqFormat&, const IqFormat&) = default;
};

using AnyBlock = std::variant<RealBlock, ComplexBlock>;

inline std::string sidecar_path(const std::string& data_path) { return data_path + ".json"; }

inline std::string to_string(IqLayout layout) { return layout == IqLayout::real ? "real" : "iq"; }

inline IqLayout parse_layout(const std::string& s) {
  if (s == "real") return IqLayout::real;
  if (s == "iq") return IqLayout::interleaved;
  throw IoError("unknown IQ layout '" + s + "' (expected real or iq)");
}

inline IqFormat parse_iq_format(const nlohmann::json& j) {
  if (!j.is_object()) throw IoError("IQ sidecar must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "format" && key != "layout" && key != "channels" && key != "sample_rate") {
      throw IoError("unknown key '" + key + "' in IQ sidecar");
    }
  }
  if (!j.contains("format") || j.at("format") != "f32le") {
    throw IoError("IQ sidecar must declare \"format\": \"f32le\"");
  }
  IqFormat f;
  try {
    f.layout = parse_layout(j.value("layout", std::string("real")));
    f.channels = j.value("channels", Index{1});
    f.sample_rate = j.value("sample_rate", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed IQ sidecar: ") + e.what());
  }
  if (f.channels < 1) throw IoError("IQ sidecar declares fewer than one channel");
  if (!(f.sample_rate >= 0.0)) throw IoError("IQ sidecar sample rate must be >= 0");
  return f;
}

inline nlohmann::json to_json(const IqFormat& f) {
  return {{"format", "f32le"}, {"layout", to_string(f.layout)}, {"channels", f.channels},
          {"sample_rate", f.sample_rate}};
}

inline IqFormat read_iq_format(const std::string& sidecar) {
  std::ifstream in(sidecar);
  if (!in) throw IoError("cannot open IQ sidecar " + sidecar);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("IQ sidecar " + sidecar + " is not valid JSON: " + e.what());
  }
  return parse_iq_format(j);
}

namespace detail {

inline float load_f32le(const unsigned char* p) {
  const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                             (static_cast<std::uint32_t>(p[2]) << 16) |
                             (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

inline void store_f32le(std::vector<unsigned char>& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  out.push_back(static_cast<unsigned char>(bits & 0xff));
  out.push_back(static_cast<unsigned char>((bits >> 8) & 0xff));
  out.push_back(static_cast<unsigned char>((bits >> 16) & 0xff));
  out.push_back(static_cast<unsigned char>((bits >> 24) & 0xff));
}

}  // namespace detail

/// Reads a recording described by `format`.
inline AnyBlock ingest_iq(const std::string& path, const IqFormat& format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open IQ file " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::size_t per_value = format.layout == IqLayout::real ? 4 : 8;
  const std::size_t frame = per_value * static_cast<std::size_t>(format.channels);
  if (bytes.empty()) throw IoError("IQ file " + path + " is empty");
  if (bytes.size() % frame != 0) {
    throw IoError("IQ file " + path + " is truncated: " + std::to_string(bytes.size()) +
                  " bytes is not a whole number of " + std::to_string(frame) + "-byte frames");
  }
  const Index length = static_cast<Index>(bytes.size() / frame);
  const unsigned char* p = bytes.data();
  if (format.layout == IqLayout::real) {
    Matrix<double> x(format.channels, length);
    for (Index n = 0; n < length; ++n) {
      for (Index i = 0; i < format.channels; ++i, p += 4) x(i, n) = detail::load_f32le(p);
    }
    return RealBlock(std::move(x), format.sample_rate);
  }
  Matrix<std::complex<double>> x(format.channels, length);
  for (Index n = 0; n < length; ++n) {
    for (Index i = 0; i < format.channels; ++i, p += 8) {
      x(i, n) = {detail::load_f32le(p), detail::load_f32le(p + 4)};
    }
  }
  return ComplexBlock(std::move(x), format.sample_rate);
}

/// Reads a recording through its sidecar.
inline AnyBlock ingest_iq(const std::string& path) { return ingest_iq(path, read_iq_format(sidecar_path(path))); }

/// Writes samples (rounded to float32) plus the sidecar. Complex blocks use
/// the interleaved layout.
template <typename Scalar>
void write_iq(const SampleBlock<Scalar>& block, const std::string& path) {
  std::vector<unsigned char> bytes;
  const std::size_t values = static_cast<std::size_t>(block.channels() * block.length());
  bytes.reserve(values * (is_complex_v<Scalar> ? 8 : 4));
  for (Index n = 0; n < block.length(); ++n) {
    for (Index i = 0; i < block.channels(); ++i) {
      if constexpr (is_complex_v<Scalar>) {
        detail::store_f32le(bytes, static_cast<float>(block(i, n).real()));
        detail::store_f32le(bytes, static_cast<float>(block(i, n).imag()));
      } else {
        detail::store_f32le(bytes, static_cast<float>(block(i, n)));
      }
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create IQ file " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing IQ file " + path);

  IqFormat f;
  f.layout = is_complex_v<Scalar> ? IqLayout::interleaved : IqLayout::real;
  f.channels = block.channels();
  f.sample_rate = block.sample_rate();
  std::ofstream side(sidecar_path(path));
  if (!side) throw IoError("cannot create IQ sidecar for " + path);
  side << to_json(f).dump(2) << '\n';
}

/// Splits one stream into M polyphase channels, x_i(n) = x(nM + i).
template <typename Scalar>
SampleBlock<Scalar> polyphase_split(const SampleBlock<Scalar>& stream, Index phases) {
  if (stream.channels() != 1) throw DimensionError("polyphase split needs a single-channel stream");
  if (phases < 1) throw DimensionError("polyphase factor must be >= 1");
  const Index length = stream.length() / phases;
  if (length < 1) throw DimensionError("stream shorter than one polyphase frame");
  Matrix<Scalar> x(phases, length);
  for (Index n = 0; n < length; ++n) {
    for (Index i = 0; i < phases; ++i) x(i, n) = stream(0, n * phases + i);
  }
  return SampleBlock<Scalar>(std::move(x), stream.sample_rate());
}

}  // namespace eigsense::harness
