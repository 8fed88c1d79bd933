// Command-line front end: Monte Carlo runs, ROC sweeps, thresholds, the
// Tracy-Widom table and IQ file inspection.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "eigsense/eigsense.hpp"

namespace {

using namespace eigsense;
using namespace eigsense::harness;

struct RunFlags {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<Index> trials;
  std::size_t workers = 0;
  std::string out;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("scenario", f.scenario, "Scenario JSON file")->required();
  cmd->add_option("--seed", f.seed, "Override the master seed");
  cmd->add_option("--trials", f.trials, "Override the trial count");
  cmd->add_option("--workers", f.workers, "Worker threads (0 = all cores)");
  cmd->add_option("--out", f.out, "CSV output path (stdout if omitted)");
}

Scenario load_with_overrides(const RunFlags& f) {
  Scenario s = load_scenario(f.scenario);
  if (f.seed) s.seed = *f.seed;
  if (f.trials) s.trials = *f.trials;
  s.validate();
  return s;
}

void publish(const RunResult& r, const std::string& out) {
  if (out.empty()) {
    write_csv(r, std::cout);
    std::cerr << "seed " << r.seed << ", config " << r.config_hash << '\n';
    return;
  }
  emit_csv(r, out);
  std::cerr << "wrote " << r.cells.size() << " rows to " << out << " (seed " << r.seed << ", config "
            << r.config_hash << ")\n";
}

void print_tw_check(const std::string& write_path) {
  const TracyWidomTable& tw = default_tw_table();
  static constexpr double kPoints[] = {-3.90, -3.18, -2.78, -1.91, -1.27, -0.59, 0.45, 0.98, 2.02};
  std::printf("%8s %10s\n", "t", "F1(t)");
  for (double t : kPoints) std::printf("%8.2f %10.6f\n", t, tw_cdf(tw, t));
  std::printf("F1^-1(0.90) = %.5f\nF1^-1(0.95) = %.5f\n", tw_quantile(tw, 0.90), tw_quantile(tw, 0.95));
  if (!write_path.empty()) {
    std::ofstream out(write_path);
    if (!out) throw IoError("cannot create " + write_path);
    write_tw_table(tw, out);
    std::printf("table written to %s\n", write_path.c_str());
  }
}

template <typename Scalar>
void summarize(const SampleBlock<Scalar>& block, Index smoothing, double pfa) {
  std::printf("channels     %ld\nsamples      %ld\nsample rate  %g Hz\npower        %.6g\n",
              static_cast<long>(block.channels()), static_cast<long>(block.length()), block.sample_rate(),
              average_power(block));
  const Index ns = block.length() - smoothing + 1;
  if (ns <= block.channels() * smoothing) {
    std::printf("too short for detection with L=%ld\n", static_cast<long>(smoothing));
    return;
  }
  const auto mme = detect_mme(block, smoothing, ns, pfa);
  const auto eme = detect_eme(block, smoothing, ns, pfa);
  std::printf("MME  statistic %.6f  threshold %.6f  %s\n", mme.statistic, mme.threshold,
              mme.decision ? "signal" : "noise");
  std::printf("EME  statistic %.6f  threshold %.6f  %s\n", eme.statistic, eme.threshold,
              eme.decision ? "signal" : "noise");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eigenvalue-based blind spectrum sensing"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "Monte Carlo Pfa/Pd run of a scenario");
  add_run_flags(run, run_flags);
  bool with_theory = false;
  run->add_flag("--theory", with_theory, "Add MME-theo/EME-theo rows (iid sources, white noise)");

  RunFlags roc_flags;
  auto* roc = app.add_subcommand("roc", "ROC sweep of a scenario");
  add_run_flags(roc, roc_flags);

  std::string table_path;
  auto* tw_table = app.add_subcommand("tw-table", "Tracy-Widom F1 check values");
  tw_table->add_option("--write", table_path, "Also write the full table to this file");

  Index ns = 0, m = 0, l = 0;
  double pfa = 0.1;
  auto* thresholds = app.add_subcommand("thresholds", "Detection thresholds for given dimensions");
  thresholds->add_option("--ns", ns, "Samples Ns")->required();
  thresholds->add_option("--m", m, "Receive channels M")->required();
  thresholds->add_option("--l", l, "Smoothing factor L")->required();
  thresholds->add_option("--pfa", pfa, "Target false-alarm probability");

  std::string iq_path, iq_layout;
  std::optional<Index> iq_channels;
  std::optional<double> iq_rate;
  Index iq_smoothing = 8;
  double iq_pfa = 0.1;
  auto* ingest = app.add_subcommand("ingest", "Read an IQ recording and run MME/EME on it");
  ingest->add_option("path", iq_path, "float32 little-endian recording")->required();
  ingest->add_option("--format", iq_layout, "real or iq")->required()->check(CLI::IsMember({"real", "iq"}));
  ingest->add_option("--channels", iq_channels, "Interleaved channels");
  ingest->add_option("--rate", iq_rate, "Sample rate in Hz");
  ingest->add_option("--l", iq_smoothing, "Smoothing factor L");
  ingest->add_option("--pfa", iq_pfa, "Target false-alarm probability");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) {
      const Scenario s = load_with_overrides(run_flags);
      const RunOptions opt{run_flags.workers};
      const bool sweep = with_theory && s.has_signal();
      publish(sweep ? sweep_pd_vs_snr(s, opt) : run_scenario(s, opt), run_flags.out);
    } else if (*roc) {
      const Scenario s = load_with_overrides(roc_flags);
      publish(sweep_roc(s, RunOptions{roc_flags.workers}), roc_flags.out);
    } else if (*tw_table) {
      print_tw_check(table_path);
    } else if (*thresholds) {
      std::printf("gamma1 (MME) %.6f\n", mme_threshold(ns, m, l, pfa));
      std::printf("gamma2 (EME) %.6f\n", eme_threshold(ns, m, l, pfa));
      std::printf("ED           %.6f\n", energy_threshold(m, ns, pfa));
    } else if (*ingest) {
      IqFormat format;
      format.layout = parse_layout(iq_layout);
      const std::string side = sidecar_path(iq_path);
      const bool has_sidecar = std::ifstream(side).good();
      if (has_sidecar) {
        const IqFormat declared = read_iq_format(side);
        if (declared.layout != format.layout) {
          throw IoError("--format " + iq_layout + " disagrees with sidecar layout " + to_string(declared.layout));
        }
        if (iq_channels && *iq_channels != declared.channels) {
          throw IoError("--channels disagrees with the sidecar");
        }
        if (iq_rate && *iq_rate != declared.sample_rate) throw IoError("--rate disagrees with the sidecar");
        format = declared;
      } else {
        format.channels = iq_channels.value_or(1);
        format.sample_rate = iq_rate.value_or(0.0);
        if (format.channels < 1) throw IoError("--channels must be >= 1");
      }
      const AnyBlock block = ingest_iq(iq_path, format);
      std::visit([&](const auto& b) { summarize(b, iq_smoothing, iq_pfa); }, block);
    }
  } catch (const std::exception& e) {
    std::cerr << "eigsense: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
