// Small Pd-vs-SNR sweep with the analytic curves, printed as CSV.

#include <iostream>

#include "eigsense/eigsense.hpp"

int main() {
  using namespace eigsense::harness;
  Scenario s;
  s.name = "demo";
  s.signal = SignalKind::iid_bpsk;
  s.source.sources = 2;
  s.channel_order = 9;
  s.channels = 4;
  s.smoothing = 8;
  s.samples = {10000};
  s.snr_db = {-24, -22, -20, -18, -16};
  s.detectors = {{TestKind::mme}, {TestKind::eme}, {TestKind::energy, 0.0}, {TestKind::energy, 1.0}};
  s.trials = 200;
  write_csv(sweep_pd_vs_snr(s), std::cout);
}
