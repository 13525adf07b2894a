#include "trc/harness.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

namespace trc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double empirical_snr(const Eigen::VectorXd& signal, double variance) {
  const double p = signal.squaredNorm() / static_cast<double>(signal.size());
  return variance > 0 ? p / variance : kInf;
}

struct Counters {
  std::uint64_t err_t = 0, err_t1 = 0, err_t2 = 0, err_e2e = 0;
  Counters& operator+=(const Counters& o) {
    err_t += o.err_t;
    err_t1 += o.err_t1;
    err_t2 += o.err_t2;
    err_e2e += o.err_e2e;
    return *this;
  }
};

struct Prepared {
  LatticeChain chain;
  double p1 = 0.0, p2 = 0.0;  // realized shaping powers
  double alpha = 1.0;
};

Prepared prepare(const SimConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("trial count must be >= 1");
  cfg.params.validate();
  Prepared p{build_chain(cfg.chain)};
  p.p1 = p.chain.shaping_power(1).value;
  p.p2 = p.chain.shaping_power(2).value;
  if (cfg.alpha.mmse) {
    p.alpha = mmse_alpha(p.p1, p.p2, cfg.params.sigma_r2);
  } else {
    if (!(cfg.alpha.fixed >= 0.0 && cfg.alpha.fixed <= 1.0)) {
      throw std::invalid_argument("fixed alpha must lie in [0, 1]");
    }
    p.alpha = cfg.alpha.fixed;
  }
  return p;
}

void fill_common(SweepRow& row, const SimConfig& cfg, const Prepared& p) {
  row.params = cfg.params;
  row.params.p1 = p.p1;
  row.params.p2 = p.p2;
  row.alpha_used = p.alpha;
  row.n = p.chain.dim();
  row.r1 = p.chain.rate1();
  row.r2 = p.chain.rate2();
  row.trials = cfg.trials;
  row.seed = cfg.seed;
}

// Runs fn(trial, counters, record) across a static partition of the trial
// range. Integer counters merge exactly; per-trial records land at their own
// index, so results do not depend on the worker count.
template <typename Fn>
Counters run_partitioned(const SimConfig& cfg, std::vector<TrialRecord>* recs,
                         Fn&& fn) {
  const int workers =
      std::max(1, std::min<int>(cfg.threads,
                                static_cast<int>(std::min<std::uint64_t>(
                                    cfg.trials, 1024))));
  std::vector<Counters> partial(workers);
  std::vector<std::string> errors(workers);
  auto body = [&](int w) {
    try {
      const std::uint64_t chunk = (cfg.trials + workers - 1) / workers;
      const std::uint64_t lo = chunk * static_cast<std::uint64_t>(w);
      const std::uint64_t hi = std::min<std::uint64_t>(lo + chunk, cfg.trials);
      for (std::uint64_t i = lo; i < hi; ++i) {
        fn(i, partial[w], recs ? &(*recs)[i] : nullptr);
      }
    } catch (const std::exception& e) {
      errors[w] = e.what();
    }
  };
  if (workers == 1) {
    body(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(body, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw std::runtime_error(e);
  }
  Counters total;
  for (const auto& c : partial) total += c;
  return total;
}

}  // namespace

std::pair<double, double> wilson_interval(std::uint64_t successes,
                                          std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // The boundary cases are exact by algebra; keep them exact in floating
  // point too.
  const double lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, center + half);
  return {lo, hi};
}

SweepRow run_uplink_trials(const SimConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const Prepared prep = prepare(cfg);
  const LatticeChain& chain = prep.chain;
  const double eps = chain.fine().coord_tolerance();
  SweepRow row;
  fill_common(row, cfg, prep);
  if (cfg.keep_transcript) row.transcript.resize(cfg.trials);

  const Counters total = run_partitioned(
      cfg, cfg.keep_transcript ? &row.transcript : nullptr,
      [&](std::uint64_t i, Counters& c, TrialRecord* rec) {
        CounterRng rng_m1(cfg.seed, Stream::Message1, i);
        CounterRng rng_m2(cfg.seed, Stream::Message2, i);
        CounterRng rng_d1(cfg.seed, Stream::Dither1, i);
        CounterRng rng_d2(cfg.seed, Stream::Dither2, i);
        CounterRng rng_zr(cfg.seed, Stream::RelayNoise, i);
        const SourceMessage w1 = draw_message(chain, 1, rng_m1);
        const SourceMessage w2 = draw_message(chain, 2, rng_m2);
        const Dither u1 = draw_dither(chain, 1, rng_d1);
        const Dither u2 = draw_dither(chain, 2, rng_d2);
        const Eigen::VectorXd x1 = encode_source(chain, w1, u1);
        const Eigen::VectorXd x2 = encode_source(chain, w2, u2);
        const Eigen::VectorXd y_r = uplink(x1, x2, cfg.params.sigma_r2, rng_zr);
        const Eigen::VectorXd t_hat =
            relay_decode(chain, y_r, u1.u, u2.u, prep.alpha);
        const Eigen::VectorXd t =
            compute_effective_t(chain, w1.leader, w2.leader, u2.u);
        const bool err = !detail::approx_equal(t_hat, t, eps);
        c.err_t += err;
        if (rec) {
          rec->trial = i;
          rec->w1 = static_cast<long long>(chain.leader_index(1, w1.leader));
          rec->w2 = static_cast<long long>(chain.leader_index(2, w2.leader));
          rec->t = static_cast<long long>(chain.leader_index(1, t));
          rec->t_hat = static_cast<long long>(chain.leader_index(1, t_hat));
          rec->snr_up = empirical_snr(x1 + x2, cfg.params.sigma_r2);
        }
      });

  row.err_t = total.err_t;
  row.p_hat = static_cast<double>(row.err_t) / static_cast<double>(cfg.trials);
  std::tie(row.ci_lo, row.ci_hi) = wilson_interval(row.err_t, cfg.trials);
  row.wall_ms = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - t0)
          .count());
  return row;
}

SweepRow run_end_to_end_trials(const SimConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const Prepared prep = prepare(cfg);
  const LatticeChain& chain = prep.chain;
  const double eps = chain.fine().coord_tolerance();
  SweepRow row;
  fill_common(row, cfg, prep);
  if (cfg.keep_transcript) row.transcript.resize(cfg.trials);
  const RelayCodebook codebook =
      build_relay_codebook(chain, cfg.params.pr, cfg.seed, cfg.delta);

  const Counters total = run_partitioned(
      cfg, cfg.keep_transcript ? &row.transcript : nullptr,
      [&](std::uint64_t i, Counters& c, TrialRecord* rec) {
        CounterRng rng_m1(cfg.seed, Stream::Message1, i);
        CounterRng rng_m2(cfg.seed, Stream::Message2, i);
        CounterRng rng_d1(cfg.seed, Stream::Dither1, i);
        CounterRng rng_d2(cfg.seed, Stream::Dither2, i);
        CounterRng rng_zr(cfg.seed, Stream::RelayNoise, i);
        CounterRng rng_z1(cfg.seed, Stream::Down1Noise, i);
        CounterRng rng_z2(cfg.seed, Stream::Down2Noise, i);
        const SourceMessage w1 = draw_message(chain, 1, rng_m1);
        const SourceMessage w2 = draw_message(chain, 2, rng_m2);
        const Dither u1 = draw_dither(chain, 1, rng_d1);
        const Dither u2 = draw_dither(chain, 2, rng_d2);
        const Eigen::VectorXd x1 = encode_source(chain, w1, u1);
        const Eigen::VectorXd x2 = encode_source(chain, w2, u2);
        const Eigen::VectorXd y_r = uplink(x1, x2, cfg.params.sigma_r2, rng_zr);
        const Eigen::VectorXd t_hat =
            relay_decode(chain, y_r, u1.u, u2.u, prep.alpha);
        const Eigen::VectorXd t =
            compute_effective_t(chain, w1.leader, w2.leader, u2.u);

        const Eigen::VectorXd& x_r =
            codebook.words[chain.leader_index(1, t_hat)];
        const Eigen::VectorXd y1 = downlink(x_r, cfg.params.sigma1_2, rng_z1);
        const Eigen::VectorXd y2 = downlink(x_r, cfg.params.sigma2_2, rng_z2);
        const Eigen::VectorXd t1_hat = node_decode_relay(
            codebook, chain, y1, NodeSide{1, w1.leader, u2.u});
        const Eigen::VectorXd t2_hat = node_decode_relay(
            codebook, chain, y2, NodeSide{2, w2.leader, u2.u});
        const Eigen::VectorXd w2_hat = recover_w2(chain, t1_hat, w1.leader);
        const Eigen::VectorXd w1_hat =
            recover_w1(chain, t2_hat, w2.leader, u2.u);

        const bool relay_err = !detail::approx_equal(t_hat, t, eps);
        const bool t1_err =
            !relay_err && !detail::approx_equal(t1_hat, t_hat, eps);
        const bool t2_err =
            !relay_err && !detail::approx_equal(t2_hat, t_hat, eps);
        const bool e2e_err = !detail::approx_equal(w1_hat, w1.leader, eps) ||
                             !detail::approx_equal(w2_hat, w2.leader, eps);
        c.err_t += relay_err;
        c.err_t1 += t1_err;
        c.err_t2 += t2_err;
        c.err_e2e += e2e_err;
        if (rec) {
          rec->trial = i;
          rec->w1 = static_cast<long long>(chain.leader_index(1, w1.leader));
          rec->w2 = static_cast<long long>(chain.leader_index(2, w2.leader));
          rec->t = static_cast<long long>(chain.leader_index(1, t));
          rec->t_hat = static_cast<long long>(chain.leader_index(1, t_hat));
          rec->t1_hat = static_cast<long long>(chain.leader_index(1, t1_hat));
          rec->t2_hat = static_cast<long long>(chain.leader_index(1, t2_hat));
          rec->w1_hat = static_cast<long long>(chain.leader_index(1, w1_hat));
          rec->w2_hat = static_cast<long long>(chain.leader_index(2, w2_hat));
          rec->snr_up = empirical_snr(x1 + x2, cfg.params.sigma_r2);
          rec->snr_d1 = empirical_snr(x_r, cfg.params.sigma1_2);
          rec->snr_d2 = empirical_snr(x_r, cfg.params.sigma2_2);
        }
      });

  row.err_t = total.err_t;
  row.err_t1 = total.err_t1;
  row.err_t2 = total.err_t2;
  row.err_e2e = total.err_e2e;
  row.p_hat =
      static_cast<double>(row.err_e2e) / static_cast<double>(cfg.trials);
  std::tie(row.ci_lo, row.ci_hi) = wilson_interval(row.err_e2e, cfg.trials);
  row.wall_ms = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - t0)
          .count());
  return row;
}

SweepResult sweep(const std::vector<SimConfig>& grid) {
  if (grid.empty()) throw std::invalid_argument("sweep grid is empty");
  SweepResult result;
  result.rows.reserve(grid.size());
  for (const SimConfig& cfg : grid) {
    try {
      result.rows.push_back(cfg.phase == Phase::UplinkOnly
                                ? run_uplink_trials(cfg)
                                : run_end_to_end_trials(cfg));
    } catch (const std::exception& e) {
      SweepRow row;
      row.params = cfg.params;
      row.trials = cfg.trials;
      row.seed = cfg.seed;
      row.failed = true;
      row.error = e.what();
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

std::uint64_t derive_row_seed(std::uint64_t master, const SimConfig& row) {
  // Hash the row's observable configuration (not its seed) so identical rows
  // in reordered grids always get identical seeds.
  nlohmann::json j;
  to_json(j, row.chain);
  j["p1"] = row.params.p1;
  j["p2"] = row.params.p2;
  j["pr"] = row.params.pr;
  j["nr"] = row.params.sigma_r2;
  j["n1"] = row.params.sigma1_2;
  j["n2"] = row.params.sigma2_2;
  j["trials"] = row.trials;
  j["phase"] = row.phase == Phase::UplinkOnly ? "uplink" : "e2e";
  j["alpha"] = row.alpha.mmse ? -1.0 : row.alpha.fixed;
  j["delta"] = row.delta;
  const std::string s = j.dump();
  return hash_bytes(s.data(), s.size(), master);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_header() {
  return "p1,p2,pr,sigmaR2,sigma1sq,sigma2sq,alpha,n,r1,r2,trials,errT,errT1,"
         "errT2,errE2E,pHat,ciLo,ciHi,seed,wallMs";
}

void write_csv(std::ostream& os, const std::vector<SweepRow>& rows,
               bool include_timing) {
  os << csv_header() << "\n";
  std::size_t i = 0;
  for (const SweepRow& r : rows) {
    if (r.failed) {
      os << "# row " << i << " failed: " << r.error << "\n";
      ++i;
      continue;
    }
    os << format_double(r.params.p1) << ',' << format_double(r.params.p2)
       << ',' << format_double(r.params.pr) << ','
       << format_double(r.params.sigma_r2) << ','
       << format_double(r.params.sigma1_2) << ','
       << format_double(r.params.sigma2_2) << ','
       << format_double(r.alpha_used) << ',' << r.n << ','
       << format_double(r.r1) << ',' << format_double(r.r2) << ',' << r.trials
       << ',' << r.err_t << ',' << r.err_t1 << ',' << r.err_t2 << ','
       << r.err_e2e << ',' << format_double(r.p_hat) << ','
       << format_double(r.ci_lo) << ',' << format_double(r.ci_hi) << ','
       << r.seed << ',' << (include_timing ? r.wall_ms : 0) << "\n";
    ++i;
  }
}

std::string transcript_csv_header() {
  return "trial,w1,w2,t,tHat,t1Hat,t2Hat,w1Hat,w2Hat,snrUp,snrD1,snrD2";
}

void write_transcript_csv(std::ostream& os, const SweepRow& row) {
  os << transcript_csv_header() << "\n";
  for (const TrialRecord& r : row.transcript) {
    os << r.trial << ',' << r.w1 << ',' << r.w2 << ',' << r.t << ',' << r.t_hat
       << ',' << r.t1_hat << ',' << r.t2_hat << ',' << r.w1_hat << ','
       << r.w2_hat << ',' << format_double(r.snr_up) << ','
       << format_double(r.snr_d1) << ',' << format_double(r.snr_d2) << "\n";
  }
}

std::string gnuplot_pe_script(const std::string& csv_name) {
  std::ostringstream os;
  os << "# Error rate vs uplink SNR. Usage: gnuplot -p <this file>\n"
     << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set logscale y\n"
     << "set xlabel 'uplink SNR P1/sigmaR^2 [dB]'\n"
     << "set ylabel 'estimated error probability'\n"
     << "set grid\n"
     << "plot '" << csv_name
     << "' using (10*log10($1/$4)):16:17:18 with yerrorlines title 'pHat "
        "(Wilson 95%)'\n";
  return os.str();
}

std::string gnuplot_rate_region_script(const std::string& csv_name) {
  std::ostringstream os;
  os << "# Cut-set vs achievable rate rectangles (first CSV row).\n"
     << "# Columns: ...,cutR1,cutR2,achR1,achR2,gap1,gap2,...\n"
     << "set datafile separator ','\n"
     << "stats '" << csv_name << "' using 7 every ::0::0 nooutput\n"
     << "c1 = STATS_min\n"
     << "stats '" << csv_name << "' using 8 every ::0::0 nooutput\n"
     << "c2 = STATS_min\n"
     << "stats '" << csv_name << "' using 9 every ::0::0 nooutput\n"
     << "a1 = STATS_min\n"
     << "stats '" << csv_name << "' using 10 every ::0::0 nooutput\n"
     << "a2 = STATS_min\n"
     << "set xlabel 'R1 [bits/dim]'\n"
     << "set ylabel 'R2 [bits/dim]'\n"
     << "set xrange [0:c1*1.2]\n"
     << "set yrange [0:c2*1.2]\n"
     << "set object 1 rect from 0,0 to c1,c2 fs empty border lc rgb 'red'\n"
     << "set object 2 rect from 0,0 to a1,a2 fs solid 0.15 fc rgb 'blue'\n"
     << "plot -1 title 'cut-set (red) / achievable (blue)'\n";
  return os.str();
}

}  // namespace trc
