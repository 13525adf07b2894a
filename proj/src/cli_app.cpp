#include "trc/cli_app.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "trc/harness.hpp"

namespace trc {

namespace {

using nlohmann::json;

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return j;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
}

// Channel parameters out of a merged config document. Noise variances accept
// linear ("nr") or dB ("nr_db") forms, mutually exclusive per parameter.
ChannelParams params_from_json(const json& j) {
  ChannelParams p;
  p.p1 = j.value("p1", 1.0);
  p.p2 = j.value("p2", 1.0);
  p.pr = j.value("pr", 1.0);
  auto noise = [&](const char* lin, const char* db, const char* what) {
    const bool has_lin = j.contains(lin);
    const bool has_db = j.contains(db);
    if (has_lin && has_db) {
      throw std::invalid_argument(std::string("give either ") + lin + " or " +
                                  db + " for " + what + ", not both");
    }
    if (has_db) return db_to_linear(j.at(db).get<double>());
    return has_lin ? j.at(lin).get<double>() : 1.0;
  };
  p.sigma_r2 = noise("nr", "nr_db", "the relay noise");
  p.sigma1_2 = noise("n1", "n1_db", "node 1 noise");
  p.sigma2_2 = noise("n2", "n2_db", "node 2 noise");
  return p;
}

struct ResolvedConfig {
  SimConfig cfg;
  bool swapped = false;  // node labels exchanged (p2 > p1 matching)
};

// Builds a full simulation row config from a merged JSON document. When no
// explicit chain/scale is given, a self-similar chain is power-matched to
// (p1, p2); if p2 > p1 the node labels are swapped here and mapped back
// after the run.
ResolvedConfig resolve_config(json j) {
  ResolvedConfig out;
  SimConfig& cfg = out.cfg;
  cfg.params = params_from_json(j);
  const std::string phase = j.value("phase", std::string("uplink"));
  if (phase == "uplink") {
    cfg.phase = Phase::UplinkOnly;
  } else if (phase == "e2e") {
    cfg.phase = Phase::EndToEnd;
  } else {
    throw std::invalid_argument("phase must be 'uplink' or 'e2e'");
  }
  cfg.trials = j.value("trials", cfg.phase == Phase::UplinkOnly
                                     ? std::uint64_t{100000}
                                     : std::uint64_t{10000});
  if (!j.contains("seed")) {
    throw std::invalid_argument("a seed is required (seeds must be explicit)");
  }
  cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("alpha")) {
    const json& a = j.at("alpha");
    if (a.is_string()) {
      if (a.get<std::string>() != "mmse") {
        throw std::invalid_argument("alpha must be 'mmse' or a number in [0,1]");
      }
      cfg.alpha.mmse = true;
    } else {
      cfg.alpha.mmse = false;
      cfg.alpha.fixed = a.get<double>();
    }
  }
  cfg.delta = j.value("delta", 0.05);
  cfg.threads = j.value("threads", 1);
  cfg.keep_transcript = j.value("transcript", false);

  if (j.contains("chain")) {
    cfg.chain = j.at("chain").get<ChainDescription>();
    return out;
  }
  const std::string base = j.value("base", std::string("z"));
  int n = j.value("n", 1);
  if (base == "a2") n = 2;
  if (base == "d4") n = 4;
  if (base == "e8") n = 8;
  const int k2 = j.value("k2", 2);
  if (j.contains("scale")) {
    // Explicit geometry; node orientation is the caller's business.
    ChainDescription d;
    d.family = (base == "z") ? "scaled-cubic" : "base-matrix";
    d.base = base;
    d.n = n;
    d.k1 = j.value("k1", 1);
    d.k2 = k2;
    d.scale = j.at("scale").get<double>();
    if (d.family == "base-matrix") {
      const Eigen::MatrixXd g = base_generator(base, n);
      d.generator_row_major.resize(static_cast<std::size_t>(n) * n);
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
          d.generator_row_major[static_cast<std::size_t>(r) * n + c] = g(r, c);
        }
      }
    }
    cfg.chain = d;
    return out;
  }
  // Power-matched construction; the chain wants p1 >= p2.
  if (cfg.params.p2 > cfg.params.p1) {
    out.swapped = true;
    std::swap(cfg.params.p1, cfg.params.p2);
    std::swap(cfg.params.sigma1_2, cfg.params.sigma2_2);
  }
  const Lattice base_lat =
      (base == "z") ? Lattice::scaled_cubic(n, 1.0)
                    : Lattice::from_generator(base_generator(base, n));
  if (j.contains("k1")) {
    throw std::invalid_argument(
        "k1 is derived by power matching; give scale to set it explicitly");
  }
  MatchedChain matched = match_chain_to_powers(base_lat, k2, cfg.params.p1,
                                               cfg.params.p2,
                                               LatticeChain::kPowerMcBudget,
                                               LatticeChain::kPowerMcSeed, base);
  cfg.chain = matched.chain.description();
  return out;
}

// Maps a row computed under swapped node labels back to the user's labels.
SweepRow unswap_row(SweepRow row) {
  std::swap(row.params.p1, row.params.p2);
  std::swap(row.params.sigma1_2, row.params.sigma2_2);
  std::swap(row.r1, row.r2);
  std::swap(row.err_t1, row.err_t2);
  return row;
}

// Overlays flag values (only those actually passed) onto the config file
// document, giving "flags win" merge semantics.
class FlagMerge {
 public:
  explicit FlagMerge(json base) : doc_(std::move(base)) {}

  void set_if(CLI::Option* opt, const char* key, const double* v) {
    if (opt->count() > 0) doc_[key] = *v;
  }
  void set_if(CLI::Option* opt, const char* key, const std::uint64_t* v) {
    if (opt->count() > 0) doc_[key] = *v;
  }
  void set_if(CLI::Option* opt, const char* key, const int* v) {
    if (opt->count() > 0) doc_[key] = *v;
  }
  void set_if(CLI::Option* opt, const char* key, const std::string* v) {
    if (opt->count() > 0) doc_[key] = *v;
  }
  void set_flag(CLI::Option* opt, const char* key) {
    if (opt->count() > 0) doc_[key] = true;
  }
  json& doc() { return doc_; }

 private:
  json doc_;
};

struct CommonSimFlags {
  std::string config_path;
  double p1 = 1, p2 = 1, pr = 1;
  double nr = 1, n1 = 1, n2 = 1;
  double nr_db = 0, n1_db = 0, n2_db = 0;
  std::string base = "z";
  int n = 1;
  int k1 = 1, k2 = 2;
  double scale = 1;
  std::string chain_path;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  std::string alpha = "mmse";
  double delta = 0.05;
  int threads = 1;
  std::string out_path;
  std::string transcript_path;
  bool plot = false;
  bool timing = false;

  struct Opts {
    CLI::Option *p1, *p2, *pr, *nr, *n1, *n2, *nr_db, *n1_db, *n2_db;
    CLI::Option *base, *n, *k1, *k2, *scale, *chain, *trials, *seed, *alpha;
    CLI::Option *delta, *threads;
  } o{};

  void attach(CLI::App* app, bool with_chain_flags) {
    app->add_option("--config", config_path,
                    "JSON config file (flags override its values)");
    o.p1 = app->add_option("--p1", p1, "transmit power of node 1");
    o.p2 = app->add_option("--p2", p2, "transmit power of node 2");
    o.pr = app->add_option("--pr", pr, "transmit power of the relay");
    o.nr = app->add_option("--nr", nr, "relay noise variance (linear)");
    o.nr_db = app->add_option("--nr-db", nr_db, "relay noise variance in dB");
    o.n1 = app->add_option("--n1", n1, "node 1 noise variance (linear)");
    o.n1_db = app->add_option("--n1-db", n1_db, "node 1 noise variance in dB");
    o.n2 = app->add_option("--n2", n2, "node 2 noise variance (linear)");
    o.n2_db = app->add_option("--n2-db", n2_db, "node 2 noise variance in dB");
    o.nr->excludes(o.nr_db);
    o.n1->excludes(o.n1_db);
    o.n2->excludes(o.n2_db);
    if (with_chain_flags) {
      o.base = app->add_option("--base", base, "base lattice: z|a2|d4|e8");
      o.n = app->add_option("--n", n, "dimension (base z)");
      o.k1 = app->add_option("--k1", k1, "coarse/mid nesting ratio");
      o.k2 = app->add_option("--k2", k2, "mid/fine nesting ratio");
      o.scale = app->add_option("--scale", scale,
                                "fine lattice scale (skips power matching)");
      o.chain = app->add_option("--chain", chain_path,
                                "chain description JSON file");
      o.trials = app->add_option("--trials", trials, "Monte Carlo trials");
      o.seed = app->add_option("--seed", seed, "master seed (required)");
      o.alpha = app->add_option("--alpha", alpha, "'mmse' or a value in [0,1]");
      o.delta = app->add_option("--delta", delta, "codebook power backoff");
      o.threads = app->add_option("--threads", threads, "worker threads");
      app->add_option("--out", out_path, "output CSV path (default stdout)");
      app->add_option("--transcript", transcript_path,
                      "per-trial transcript CSV path");
      app->add_flag("--plot", plot, "emit a gnuplot sidecar next to --out");
      app->add_flag("--timing", timing,
                    "write measured wallMs into the CSV (not reproducible)");
    }
  }

  json merged(const std::string& phase_value, bool phase_given) const {
    json base_doc = config_path.empty() ? json::object()
                                        : load_json_file(config_path);
    FlagMerge m(std::move(base_doc));
    m.set_if(o.p1, "p1", &p1);
    m.set_if(o.p2, "p2", &p2);
    m.set_if(o.pr, "pr", &pr);
    m.set_if(o.nr, "nr", &nr);
    m.set_if(o.n1, "n1", &n1);
    m.set_if(o.n2, "n2", &n2);
    m.set_if(o.nr_db, "nr_db", &nr_db);
    m.set_if(o.n1_db, "n1_db", &n1_db);
    m.set_if(o.n2_db, "n2_db", &n2_db);
    if (o.base) {
      m.set_if(o.base, "base", &base);
      m.set_if(o.n, "n", &n);
      m.set_if(o.k1, "k1", &k1);
      m.set_if(o.k2, "k2", &k2);
      m.set_if(o.scale, "scale", &scale);
      m.set_if(o.trials, "trials", &trials);
      m.set_if(o.seed, "seed", &seed);
      m.set_if(o.delta, "delta", &delta);
      m.set_if(o.threads, "threads", &threads);
      if (o.alpha->count() > 0) {
        try {
          m.doc()["alpha"] = std::stod(alpha);
        } catch (...) {
          m.doc()["alpha"] = alpha;
        }
      }
      if (o.chain->count() > 0) m.doc()["chain"] = load_json_file(chain_path);
      if (!transcript_path.empty()) m.doc()["transcript"] = true;
    }
    if (phase_given || !m.doc().contains("phase")) {
      m.doc()["phase"] = phase_value;
    }
    return m.doc();
  }
};

// ---- lattice subcommand ----------------------------------------------------

json chain_report(const LatticeChain& chain, std::uint64_t mc_budget,
                  std::uint64_t seed) {
  json j;
  to_json(j["chain"], chain.description());
  j["n"] = chain.dim();
  j["volume"] = {{"fine", chain.fine().volume()},
                 {"mid", chain.mid().volume()},
                 {"coarse", chain.coarse().volume()}};
  j["leaders"] = {{"c1", chain.leader_count(1)}, {"c2", chain.leader_count(2)}};
  j["rate"] = {{"r1", chain.rate1()}, {"r2", chain.rate2()}};
  for (int level : {1, 2}) {
    const SecondMomentEstimate est = chain.shaping_power(level, mc_budget, seed);
    json je = {{"value", est.value},
               {"method", est.method == SecondMomentEstimate::Method::ClosedForm
                              ? "closed-form"
                              : "monte-carlo"},
               {"samples", est.sample_count},
               {"standardError", est.standard_error}};
    j["shapingPower"][level == 1 ? "level1" : "level2"] = je;
  }
  return j;
}

int run_lattice(const json& merged, const std::string& out_path, bool as_json,
                std::uint64_t mc_budget, std::ostream& out) {
  ResolvedConfig rc = resolve_config(merged);
  const LatticeChain chain = build_chain(rc.cfg.chain);
  const json report =
      chain_report(chain, mc_budget, LatticeChain::kPowerMcSeed);
  if (!out_path.empty()) {
    json desc;
    to_json(desc, chain.description());
    write_file(out_path, desc.dump(2) + "\n");
  }
  if (as_json) {
    out << report.dump(2) << "\n";
  } else {
    out << "family        " << chain.description().family << "\n"
        << "n             " << chain.dim() << "\n"
        << "volumes       fine " << format_double(chain.fine().volume())
        << "  mid " << format_double(chain.mid().volume()) << "  coarse "
        << format_double(chain.coarse().volume()) << "\n"
        << "|C1|, |C2|    " << format_double(chain.leader_count(1)) << ", "
        << format_double(chain.leader_count(2)) << "\n"
        << "rates         r1 " << format_double(chain.rate1()) << "  r2 "
        << format_double(chain.rate2()) << " bits/dim\n"
        << "shaping power level1 "
        << format_double(report["shapingPower"]["level1"]["value"].get<double>())
        << " (" << report["shapingPower"]["level1"]["method"].get<std::string>()
        << ")  level2 "
        << format_double(report["shapingPower"]["level2"]["value"].get<double>())
        << " (" << report["shapingPower"]["level2"]["method"].get<std::string>()
        << ")\n";
  }
  return 0;
}

// ---- rates subcommand ------------------------------------------------------

json rates_report(const ChannelParams& p) {
  const RateRegion cut = cutset_region(p);
  const RateRegion ach = achievable_region(p);
  const auto [g1, g2] = rate_gap(p);
  const double alpha = mmse_alpha(p);
  const double eff_noise =
      (p.p1 + p.p2) * p.sigma_r2 / (p.p1 + p.p2 + p.sigma_r2);
  return json{{"cutset", {{"r1", cut.r1_max}, {"r2", cut.r2_max}}},
              {"achievable", {{"r1", ach.r1_max}, {"r2", ach.r2_max}}},
              {"gap", {{"g1", g1}, {"g2", g2}}},
              {"alpha", alpha},
              {"effNoiseVar", eff_noise}};
}

std::string rates_csv_row(const ChannelParams& p) {
  const json r = rates_report(p);
  std::string s;
  for (double v : {p.p1, p.p2, p.pr, p.sigma_r2, p.sigma1_2, p.sigma2_2,
                   r["cutset"]["r1"].get<double>(),
                   r["cutset"]["r2"].get<double>(),
                   r["achievable"]["r1"].get<double>(),
                   r["achievable"]["r2"].get<double>(),
                   r["gap"]["g1"].get<double>(), r["gap"]["g2"].get<double>(),
                   r["alpha"].get<double>(), r["effNoiseVar"].get<double>()}) {
    if (!s.empty()) s += ',';
    s += format_double(v);
  }
  return s;
}

constexpr const char* kRatesCsvHeader =
    "p1,p2,pr,sigmaR2,sigma1sq,sigma2sq,cutR1,cutR2,achR1,achR2,gap1,gap2,"
    "alpha,effNoiseVar";

// ---- shared output helpers --------------------------------------------------

void emit(const std::string& content, const std::string& out_path,
          std::ostream& out) {
  if (out_path.empty()) {
    out << content;
  } else {
    write_file(out_path, content);
  }
}

}  // namespace

int cli_run(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{
      "Nested-lattice coding for the Gaussian two-way relay channel: chain "
      "construction, rate regions, error exponents and Monte Carlo "
      "simulation"};
  app.require_subcommand(1);
  app.fallthrough(false);

  // lattice
  auto* lat = app.add_subcommand("lattice", "build a chain and print a report");
  CommonSimFlags lat_flags;
  lat_flags.attach(lat, true);
  bool lat_json = false;
  lat->add_flag("--json", lat_json, "JSON report");
  std::uint64_t lat_budget = LatticeChain::kPowerMcBudget;
  lat->add_option("--sigma-budget", lat_budget,
                  "Monte Carlo samples for second moments");

  // rates
  auto* rates_cmd =
      app.add_subcommand("rates", "cut-set and achievable rate regions");
  CommonSimFlags rates_flags;
  rates_flags.attach(rates_cmd, false);
  bool rates_json = false, rates_csv = false, rates_plot = false;
  std::string rates_out, sweep_param, sweep_values;
  rates_cmd->add_flag("--json", rates_json, "JSON output");
  rates_cmd->add_flag("--csv", rates_csv, "CSV output");
  rates_cmd->add_flag("--plot", rates_plot,
                      "emit a rate-region gnuplot sidecar next to --out");
  rates_cmd->add_option("--out", rates_out, "output path (default stdout)");
  rates_cmd->add_option("--sweep-param", sweep_param,
                        "parameter to sweep: p1|p2|pr|nr|n1|n2");
  rates_cmd->add_option("--sweep-values", sweep_values,
                        "comma-separated values for --sweep-param");

  // exponent
  auto* exp_cmd = app.add_subcommand("exponent", "error-exponent table");
  double mu_min = 1.0, mu_max = 16.0;
  int mu_points = 64;
  bool exp_json = false;
  std::string exp_out;
  exp_cmd->add_option("--mu-min", mu_min, "grid start (>= 1)");
  exp_cmd->add_option("--mu-max", mu_max, "grid end");
  exp_cmd->add_option("--points", mu_points, "grid size");
  exp_cmd->add_flag("--json", exp_json, "JSON output");
  exp_cmd->add_option("--out", exp_out, "output path (default stdout)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "run one Monte Carlo campaign");
  CommonSimFlags sim_flags;
  sim_flags.attach(sim, true);
  std::string sim_phase = "uplink";
  auto* sim_phase_opt =
      sim->add_option("--phase", sim_phase, "uplink | e2e");

  // sweep
  auto* sw = app.add_subcommand("sweep", "run a grid of campaigns");
  std::string sw_config, sw_out;
  std::uint64_t sw_seed = 0;
  int sw_threads = 1;
  bool sw_plot = false, sw_timing = false;
  sw->add_option("--config", sw_config, "sweep JSON config")->required();
  auto* sw_seed_opt =
      sw->add_option("--seed", sw_seed, "master seed (required unless in config)");
  sw->add_option("--threads", sw_threads, "worker threads");
  sw->add_option("--out", sw_out, "output CSV path (default stdout)");
  sw->add_flag("--plot", sw_plot, "emit a gnuplot sidecar next to --out");
  sw->add_flag("--timing", sw_timing, "write measured wallMs into the CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (lat->parsed()) {
      json merged = lat_flags.merged("uplink", false);
      if (!merged.contains("seed")) merged["seed"] = 0;  // no trials run here
      if (!merged.contains("scale") && !merged.contains("chain") &&
          !merged.contains("p1") && !merged.contains("p2")) {
        // Without power targets, chain reports default to unit scale.
        merged["scale"] = 1.0;
      }
      return run_lattice(merged, lat_flags.out_path, lat_json, lat_budget, out);
    }

    if (rates_cmd->parsed()) {
      const json merged = rates_flags.merged("uplink", false);
      std::vector<ChannelParams> rows;
      ChannelParams base_params = params_from_json(merged);
      if (!sweep_param.empty() || !sweep_values.empty()) {
        if (sweep_param.empty() || sweep_values.empty()) {
          throw std::invalid_argument(
              "--sweep-param and --sweep-values go together");
        }
        std::stringstream ss(sweep_values);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
          ChannelParams p = base_params;
          const double v = std::stod(tok);
          if (sweep_param == "p1") p.p1 = v;
          else if (sweep_param == "p2") p.p2 = v;
          else if (sweep_param == "pr") p.pr = v;
          else if (sweep_param == "nr") p.sigma_r2 = v;
          else if (sweep_param == "n1") p.sigma1_2 = v;
          else if (sweep_param == "n2") p.sigma2_2 = v;
          else throw std::invalid_argument("unknown sweep parameter: " + sweep_param);
          rows.push_back(p);
        }
        if (rows.empty()) throw std::invalid_argument("empty sweep value list");
      } else {
        rows.push_back(base_params);
      }
      std::string content;
      if (rates_csv) {
        content = std::string(kRatesCsvHeader) + "\n";
        for (const auto& p : rows) content += rates_csv_row(p) + "\n";
      } else if (rates_json || rows.size() > 1) {
        json jr = json::array();
        for (const auto& p : rows) jr.push_back(rates_report(p));
        content = (rows.size() == 1 ? jr[0] : jr).dump(2) + "\n";
      } else {
        const json r = rates_report(rows[0]);
        content =
            "cutset      r1 " + format_double(r["cutset"]["r1"].get<double>()) +
            "  r2 " + format_double(r["cutset"]["r2"].get<double>()) + "\n" +
            "achievable  r1 " +
            format_double(r["achievable"]["r1"].get<double>()) + "  r2 " +
            format_double(r["achievable"]["r2"].get<double>()) + "\n" +
            "gap         g1 " + format_double(r["gap"]["g1"].get<double>()) +
            "  g2 " + format_double(r["gap"]["g2"].get<double>()) + "\n" +
            "alpha       " + format_double(r["alpha"].get<double>()) + "\n" +
            "effNoiseVar " + format_double(r["effNoiseVar"].get<double>()) +
            "\n";
      }
      emit(content, rates_out, out);
      if (rates_plot) {
        if (rates_out.empty()) {
          throw std::invalid_argument("--plot needs --out so the script can "
                                      "reference the CSV file");
        }
        write_file(rates_out + ".gp", gnuplot_rate_region_script(rates_out));
      }
      return 0;
    }

    if (exp_cmd->parsed()) {
      if (mu_points < 1) throw std::invalid_argument("--points must be >= 1");
      if (!(mu_min >= 1.0) || !(mu_max >= mu_min)) {
        throw std::invalid_argument("need 1 <= mu-min <= mu-max");
      }
      json rows = json::array();
      std::string csv = "mu,exponentNats,exponentBits\n";
      for (int i = 0; i < mu_points; ++i) {
        const double mu =
            mu_points == 1
                ? mu_min
                : mu_min + (mu_max - mu_min) * i / (mu_points - 1.0);
        const double e = poltyrev_exponent(mu);
        rows.push_back({{"mu", mu},
                        {"exponentNats", e},
                        {"exponentBits", e / std::numbers::ln2}});
        csv += format_double(mu) + "," + format_double(e) + "," +
               format_double(e / std::numbers::ln2) + "\n";
      }
      emit(exp_json ? rows.dump(2) + "\n" : csv, exp_out, out);
      return 0;
    }

    if (sim->parsed()) {
      json merged = sim_flags.merged(sim_phase, sim_phase_opt->count() > 0);
      ResolvedConfig rc = resolve_config(merged);
      if (rc.swapped) {
        err << "note: node labels swapped internally (p2 > p1); outputs "
               "mapped back\n";
      }
      SweepRow row = rc.cfg.phase == Phase::UplinkOnly
                         ? run_uplink_trials(rc.cfg)
                         : run_end_to_end_trials(rc.cfg);
      err << "row completed in " << row.wall_ms << " ms\n";
      if (rc.swapped) row = unswap_row(row);
      std::ostringstream csv;
      write_csv(csv, {row}, sim_flags.timing);
      emit(csv.str(), sim_flags.out_path, out);
      if (!sim_flags.transcript_path.empty()) {
        std::ostringstream ts;
        write_transcript_csv(ts, row);
        write_file(sim_flags.transcript_path, ts.str());
      }
      if (sim_flags.plot) {
        if (sim_flags.out_path.empty()) {
          throw std::invalid_argument("--plot needs --out so the script can "
                                      "reference the CSV file");
        }
        write_file(sim_flags.out_path + ".gp",
                   gnuplot_pe_script(sim_flags.out_path));
      }
      return 0;
    }

    if (sw->parsed()) {
      const json doc = load_json_file(sw_config);
      if (!doc.contains("grid") || !doc["grid"].is_array() ||
          doc["grid"].empty()) {
        throw std::invalid_argument("sweep config needs a nonempty 'grid' array");
      }
      std::uint64_t master;
      if (sw_seed_opt->count() > 0) {
        master = sw_seed;
      } else if (doc.contains("master_seed")) {
        master = doc["master_seed"].get<std::uint64_t>();
      } else {
        throw std::invalid_argument(
            "a master seed is required (--seed or 'master_seed' in config)");
      }
      const json defaults = doc.value("defaults", json::object());
      std::vector<SimConfig> grid;
      std::vector<bool> swapped;
      for (const json& entry : doc["grid"]) {
        json merged = defaults;
        merged.update(entry);
        merged["seed"] = 0;  // placeholder; derived below
        ResolvedConfig rc = resolve_config(merged);
        rc.cfg.threads = sw_threads;
        rc.cfg.keep_transcript = false;
        rc.cfg.seed = derive_row_seed(master, rc.cfg);
        grid.push_back(rc.cfg);
        swapped.push_back(rc.swapped);
      }
      SweepResult result = sweep(grid);
      for (std::size_t i = 0; i < result.rows.size(); ++i) {
        err << "row " << i << ": "
            << (result.rows[i].failed ? "failed: " + result.rows[i].error
                                      : std::to_string(result.rows[i].wall_ms) +
                                            " ms")
            << "\n";
        if (swapped[i] && !result.rows[i].failed) {
          result.rows[i] = unswap_row(result.rows[i]);
        }
      }
      std::ostringstream csv;
      write_csv(csv, result.rows, sw_timing);
      emit(csv.str(), sw_out, out);
      if (sw_plot) {
        if (sw_out.empty()) {
          throw std::invalid_argument("--plot needs --out so the script can "
                                      "reference the CSV file");
        }
        write_file(sw_out + ".gp", gnuplot_pe_script(sw_out));
      }
      return 0;
    }
  } catch (const EnumerationCapError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace trc
