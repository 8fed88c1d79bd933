// Generates one noisy block from a random multipath channel and runs the
// three detectors on it.

#include <cstdio>

#include "eigsense/eigsense.hpp"

int main() {
  using namespace eigsense;
  constexpr Index m = 4, p = 2, l = 8, ns = 20000;
  constexpr double pfa = 0.1, snr_db = -15.0;

  Engine engine = make_engine(7, 0, Stream::channel);
  const FirChannelSet channels = FirChannelSet::random(p, m, 9, engine);
  SourceSpec spec;
  spec.sources = p;
  const auto signal = generate_signal(spec, channels, m, ns + l - 1, derive_seed(7, 0, Stream::source));
  const auto noise = generate_noise(NoiseModel{}, m, ns + l - 1, derive_seed(7, 0, Stream::noise));

  for (const bool present : {false, true}) {
    const RealBlock block = present ? mix_at_snr(signal, noise, snr_db).block : noise;
    const auto mme = detect_mme(block, l, ns, pfa);
    const auto eme = detect_eme(block, l, ns, pfa);
    const auto ed = detect_energy(block, ns, 1.0, pfa);
    std::printf("%s\n", present ? "signal at -15 dB:" : "noise only:");
    for (const auto& v : {mme, eme, ed}) {
      std::printf("  %-3s %10.6f vs %10.6f -> %s\n", to_string(v.detector).c_str(), v.statistic, v.threshold,
                  v.decision ? "signal" : "noise");
    }
  }
}
