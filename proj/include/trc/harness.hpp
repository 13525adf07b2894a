#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "trc/codec.hpp"
#include "trc/rates.hpp"

namespace trc {

enum class Phase { UplinkOnly, EndToEnd };

// Scaling mode at the relay: the MMSE value computed from the realized
// shaping powers, or a fixed user value in [0, 1].
struct AlphaMode {
  bool mmse = true;
  double fixed = 1.0;
};

struct SimConfig {
  ChainDescription chain;
  ChannelParams params;  // p1/p2 are targets; rows report realized powers
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  Phase phase = Phase::UplinkOnly;
  AlphaMode alpha;
  double delta = 0.05;  // codebook draw backoff
  int threads = 1;
  bool keep_transcript = false;  // per-trial records (needs enumerable chain)
};

// One per-trial transcript line; fields hold canonical coset indices
// (-1 when not applicable in the current phase).
struct TrialRecord {
  std::uint64_t trial = 0;
  long long w1 = -1, w2 = -1;
  long long t = -1, t_hat = -1, t1_hat = -1, t2_hat = -1;
  long long w1_hat = -1, w2_hat = -1;
  double snr_up = 0.0, snr_d1 = 0.0, snr_d2 = 0.0;  // empirical, per phase
};

struct SweepRow {
  ChannelParams params;  // with realized p1/p2
  double alpha_used = 1.0;
  int n = 0;
  double r1 = 0.0, r2 = 0.0;  // bits per dimension
  std::uint64_t trials = 0;
  // err_t: relay decoding errors; err_t1/err_t2: node downlink errors counted
  // on trials where the relay was correct; err_e2e: message-level errors.
  std::uint64_t err_t = 0, err_t1 = 0, err_t2 = 0, err_e2e = 0;
  double p_hat = 0.0, ci_lo = 0.0, ci_hi = 0.0;  // headline rate + Wilson 95%
  std::uint64_t seed = 0;
  std::uint64_t wall_ms = 0;
  bool failed = false;
  std::string error;
  std::vector<TrialRecord> transcript;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

// Wilson score interval for a binomial proportion (95% by default).
std::pair<double, double> wilson_interval(std::uint64_t successes,
                                          std::uint64_t trials,
                                          double z = 1.959963984540054);

// Relay-only campaign: p_hat estimates Pr{T_hat != T}.
SweepRow run_uplink_trials(const SimConfig& config);

// Full two-phase campaign: p_hat estimates the message error probability;
// the three component counters make the union-bound accounting checkable on
// every run (err_e2e <= err_t + err_t1 + err_t2, exactly, per sample).
SweepRow run_end_to_end_trials(const SimConfig& config);

// Runs rows in order; a row failure is recorded and the sweep continues.
// Rows are bit-reproducible individually (each config carries its own seed).
SweepResult sweep(const std::vector<SimConfig>& grid);

// Derives a per-row seed from a master seed and the row's configuration
// content, so permuting a grid never changes any row's numbers.
std::uint64_t derive_row_seed(std::uint64_t master, const SimConfig& row);

// Shortest round-trip decimal formatting (locale-independent).
std::string format_double(double v);

// CSV emission. Headers are fixed; wallMs is written as 0 unless
// include_timing is set, keeping default output byte-reproducible.
std::string csv_header();
void write_csv(std::ostream& os, const std::vector<SweepRow>& rows,
               bool include_timing = false);
std::string transcript_csv_header();
void write_transcript_csv(std::ostream& os, const SweepRow& row);

// gnuplot sidecar scripts referencing an emitted CSV.
std::string gnuplot_pe_script(const std::string& csv_name);
std::string gnuplot_rate_region_script(const std::string& csv_name);

}  // namespace trc
