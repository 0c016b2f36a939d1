// fracspec: command-line front end.
//
//   fracspec VERB --config FILE --out DIR [--seed N] [--force] [--threads N] [PATH...]
//
// Exit status: 0 success, 1 domain error, 2 numerical error, 3 I/O error,
// 64 usage or configuration error.

#include <CLI11.hpp>
#include <json.hpp>

#include <unistd.h>

#include <csignal>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fracspec/config.hpp"
#include "fracspec/estimate.hpp"
#include "fracspec/gsim.hpp"
#include "fracspec/specmodel.hpp"
#include "fracspec/verify.hpp"
#include "fracspec/version.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kDomain = 1, kNumerical = 2, kIo = 3, kUsage = 64 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Atomic output with signal-safe temp cleanup
// ---------------------------------------------------------------------------

char g_temp_path[4096] = {0};

extern "C" void on_signal(int sig) {
  if (g_temp_path[0] != '\0') ::unlink(g_temp_path);
  std::_Exit(128 + sig);
}

/// Files are staged in memory and written only after every computation
/// succeeded; each file goes to a temp name and is renamed into place.
class Bundle {
 public:
  void add(std::string name, std::string content) {
    files_.push_back({std::move(name), std::move(content)});
  }

  std::vector<fs::path> commit(const fs::path& dir, bool force) const {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw fracspec::io_error("cannot create output directory '" + dir.string() + "': " + ec.message());
    for (const auto& f : files_) {
      const auto target = dir / f.name;
      if (fs::exists(target) && !force) {
        throw fracspec::io_error("refusing to overwrite '" + target.string() + "' (use --force)");
      }
    }
    std::vector<fs::path> written;
    for (const auto& f : files_) {
      const auto target = dir / f.name;
      const auto temp = dir / ("." + f.name + ".tmp." + std::to_string(::getpid()));
      const std::string t = temp.string();
      if (t.size() >= sizeof(g_temp_path)) throw fracspec::io_error("output path too long");
      std::memcpy(g_temp_path, t.c_str(), t.size() + 1);
      {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        out << f.content;
        out.flush();
        if (!out) {
          ::unlink(g_temp_path);
          g_temp_path[0] = '\0';
          throw fracspec::io_error("cannot write '" + temp.string() + "'");
        }
      }
      fs::rename(temp, target, ec);
      g_temp_path[0] = '\0';
      if (ec) {
        fs::remove(temp);
        throw fracspec::io_error("cannot rename into '" + target.string() + "': " + ec.message());
      }
      written.push_back(target);
    }
    return written;
  }

 private:
  struct File {
    std::string name;
    std::string content;
  };
  std::vector<File> files_;
};

// ---------------------------------------------------------------------------
// Shared header comments
// ---------------------------------------------------------------------------

struct Run {
  std::string verb;
  fracspec::Settings settings;
  fs::path config_path;
  unsigned threads = 0;
};

std::vector<std::string> header(const Run& run, const std::vector<std::string>& extra) {
  std::vector<std::string> lines;
  lines.push_back(std::string("fracspec ") + fracspec::version);
  lines.push_back("command = " + run.verb);
  std::istringstream cfg(fracspec::resolved_config(run.settings));
  std::string l;
  while (std::getline(cfg, l)) lines.push_back("config: " + l);
  lines.insert(lines.end(), extra.begin(), extra.end());
  return lines;
}

std::string comments(const Run& run, const std::vector<std::string>& extra) {
  std::ostringstream os;
  fracspec::write_comments(os, header(run, extra));
  return os.str();
}

std::string seed_line(const Run& run) { return "seed = " + std::to_string(run.settings.mc.seed); }

std::string d(double v) { return fracspec::format_double(v); }

// ---------------------------------------------------------------------------
// Verbs
// ---------------------------------------------------------------------------

void cmd_simulate(const Run& run, Bundle& out) {
  const auto& s = run.settings;
  for (std::size_t ni = 0; ni < s.mc.n_list.size(); ++ni) {
    const std::size_t n = s.mc.n_list[ni];
    const fracspec::CirculantSampler sampler(s.mc.model, n);
    for (std::size_t p = 0; p < s.simulate_paths; ++p) {
      // same (seed, stream) layout as the Monte Carlo replications
      const std::uint64_t stream = (static_cast<std::uint64_t>(ni) << 40) + p;
      auto path = sampler.sample(s.mc.seed, stream, s.simulate_mean);
      if (s.simulate_center) path = fracspec::center_sample(std::move(path));
      std::ostringstream os;
      fracspec::write_csv(os, path,
                          header(run, {"embedding_size = " + std::to_string(sampler.embedding_size())}));
      out.add("path_n" + std::to_string(n) + "_" + std::to_string(p) + ".csv", os.str());
    }
  }
}

void cmd_estimate(const Run& run, const std::vector<std::string>& inputs, Bundle& out) {
  if (inputs.empty()) throw UsageError("estimate: give one or more sample path CSV files");
  const auto& mc = run.settings.mc;
  std::vector<std::string> stems;
  for (const auto& input : inputs) {
    std::ifstream in(input);
    if (!in) throw fracspec::io_error("cannot open sample path '" + input + "'");
    const auto path = fracspec::read_sample_path_csv(in);
    const std::size_t points = mc.grid_for(path.n());
    const auto j = fracspec::periodogram(path, points);
    const auto e = fracspec::frac_estimate(j, mc.alpha);
    std::string stem = fs::path(input).stem().string();
    if (std::find(stems.begin(), stems.end(), stem) != stems.end()) {
      throw UsageError("estimate: two inputs share the file name '" + stem + "'");
    }
    stems.push_back(stem);
    const std::vector<std::string> extra = {
        "source = " + input, "path_seed = " + std::to_string(path.seed),
        "path_stream = " + std::to_string(path.stream), "path_model = " + path.model_id,
        "grid_points = " + std::to_string(points)};
    std::ostringstream pj;
    fracspec::write_csv(pj, j, header(run, extra));
    out.add(stem + "_periodogram.csv", pj.str());
    std::ostringstream pe;
    fracspec::write_csv(pe, e, header(run, extra));
    out.add(stem + "_estimate.csv", pe.str());
    std::ostringstream pv;
    pv << comments(run, extra) << "# bias_correction = 0.5\nlambda,estimate,plugin_variance\n";
    for (double l : mc.probe_lambdas) {
      pv << d(l) << ',' << d(e.grid_fn.at(l)) << ',' << d(fracspec::plugin_variance(j, mc.alpha, l)) << '\n';
    }
    out.add(stem + "_probes.csv", pv.str());
  }
}

void cmd_truth(const Run& run, Bundle& out) {
  const auto& s = run.settings;
  const auto& m = s.mc.model;
  const double alpha = s.mc.alpha;
  const std::vector<std::string> extra = {"grid_points = " + std::to_string(s.truth_points)};
  const auto big_f = fracspec::GridFunction::sample(s.truth_points, [&](double x) {
    return fracspec::spectral_function(m, std::min(x, fracspec::two_pi));
  });
  std::ostringstream a;
  fracspec::write_csv(a, big_f, header(run, extra));
  out.add("spectral_function.csv", a.str());
  std::ostringstream b;
  fracspec::write_csv(b, fracspec::frac_spectral_derivative_grid(m, alpha, s.truth_points), header(run, extra));
  out.add("frac_spectral_derivative.csv", b.str());
  const auto cov = fracspec::limit_covariance(m, alpha, s.mc.probe_lambdas);
  std::ostringstream c;
  fracspec::write_csv(c, cov, header(run, {}));
  out.add("limit_covariance.csv", c.str());
  std::ostringstream t;
  t << comments(run, {}) << "lambda,F,F_alpha,theta_diag,limit_variance,beta_squared\n";
  for (std::size_t i = 0; i < cov.size(); ++i) {
    const double l = s.mc.probe_lambdas[i];
    t << d(l) << ',' << d(fracspec::spectral_function(m, l)) << ','
      << d(fracspec::frac_spectral_derivative(m, alpha, l)) << ',' << d(cov.matrix(i, i)) << ','
      << d(fracspec::limit_variance(m, alpha, l)) << ',' << d(fracspec::beta_squared(m, l)) << '\n';
  }
  out.add("truth.csv", t.str());
  std::cout << "F^(" << alpha << ")(pi) = " << d(fracspec::frac_spectral_derivative(m, alpha, M_PI)) << '\n';
}

void cmd_fejer(const Run& run, Bundle& out) {
  const auto& s = run.settings;
  std::ostringstream os;
  os << comments(run, {"bound = omega(f, 1/n) |ln omega(f, 1/n)|, unit constant"})
     << "n,grid_points,sup_error,omega,bound,ratio\n";
  for (auto n : s.fejer_n_list) {
    const std::size_t points = s.mc.grid_for(n);
    const auto row = fracspec::fejer_bias(s.mc.model, n, points);
    os << n << ',' << points << ',' << d(row.sup_error) << ',' << d(row.omega) << ',' << d(row.bound) << ','
       << d(row.bound > 0 ? row.sup_error / row.bound : 0.0) << '\n';
  }
  out.add("fejer.csv", os.str());
}

void cmd_confidence(const Run& run, Bundle& out) {
  const auto& mc = run.settings.mc;
  std::ostringstream os;
  os << comments(run, {seed_line(run)}) << "n,grid_points,delta,u0,half_width,coverage,covered,replications,clip_applied\n";
  for (auto n : mc.n_list) {
    const std::size_t points = mc.grid_for(n);
    const auto band = fracspec::confidence_band(mc.model, mc.alpha, n, mc.delta_confidence, mc.calibration_draws,
                                                mc.seed, mc.replications, mc.confidence_probes, run.threads,
                                                mc.grid_points);
    os << n << ',' << points << ',' << d(mc.delta_confidence) << ',' << d(band.u0) << ',' << d(band.half_width)
       << ',' << d(band.coverage) << ',' << band.covered << ',' << band.replications << ','
       << (band.clip_applied ? 1 : 0) << '\n';
  }
  out.add("confidence.csv", os.str());
}

void cmd_mc(const Run& run, Bundle& out) {
  auto cfg = run.settings.mc;
  cfg.threads = run.threads;
  const auto r = fracspec::run_monte_carlo(cfg);
  std::vector<std::string> extra = {seed_line(run)};
  for (const auto& s : r.summaries) {
    extra.push_back("grid_points[n=" + std::to_string(s.n) + "] = " + std::to_string(s.grid_points));
  }
  const std::string head = comments(run, extra);

  std::ostringstream bias;
  bias << head << "n,lambda,bias,mean_estimate,target\n";
  for (const auto& p : r.probes) {
    bias << p.n << ',' << d(p.lambda) << ',' << d(p.bias) << ',' << d(p.mean_estimate) << ',' << d(p.target) << '\n';
  }
  out.add("bias.csv", bias.str());

  std::ostringstream cov;
  cov << head << "n,lambda,mu,emp,theory,rel_err\n";
  for (const auto& c : r.cov) {
    cov << c.n << ',' << d(c.lambda) << ',' << d(c.mu) << ',' << d(c.emp) << ',' << d(c.theory) << ','
        << d(c.rel_err) << '\n';
  }
  out.add("cov.csv", cov.str());

  std::ostringstream norm;
  norm << head << "# ks, p: zeta / sqrt(theta_diag); ks_matched, p_matched: zeta standardised by its sample moments\n"
       << "n,lambda,ks,p,ks_matched,p_matched\n";
  for (const auto& p : r.probes) {
    norm << p.n << ',' << d(p.lambda) << ',' << d(p.ks) << ',' << d(p.p) << ',' << d(p.ks_matched) << ','
         << d(p.p_matched) << '\n';
  }
  out.add("normality.csv", norm.str());

  std::ostringstream var;
  var << head << "n,lambda,zeta_mean,zeta_var,theta_diag,ratio,tau_var,beta_squared,tau_ratio\n";
  for (const auto& p : r.probes) {
    var << p.n << ',' << d(p.lambda) << ',' << d(p.zeta_mean) << ',' << d(p.zeta_var) << ',' << d(p.theta_diag)
        << ',' << d(p.zeta_var / p.theta_diag) << ',' << d(p.tau_var) << ',' << d(p.beta_sq) << ','
        << d(p.tau_var / p.beta_sq) << '\n';
  }
  out.add("variance.csv", var.str());

  std::ostringstream mom;
  mom << head << "n,lambda,p,lp_norm\n";
  for (const auto& p : r.probes) {
    for (std::size_t k = 0; k < p.lp.size(); ++k) {
      mom << p.n << ',' << d(p.lambda) << ',' << 2 * (k + 1) << ',' << d(p.lp[k]) << '\n';
    }
  }
  out.add("moments.csv", mom.str());

  std::ostringstream tails;
  tails << head << "# probabilities from fewer than 2 exceedances are flagged as censored\n"
        << "n,u,w0,w,censored0,censored\n";
  for (const auto& t : r.tails) {
    tails << t.n << ',' << d(t.u) << ',' << d(t.w0) << ',' << d(t.w) << ',' << (t.censored0 ? 1 : 0) << ','
          << (t.censored ? 1 : 0) << '\n';
  }
  out.add("tails.csv", tails.str());

  std::ostringstream fits;
  fits << head << "# log w0 ~ intercept + slope u on w0 in [0.01, 0.5]; quadratic: log w0 ~ q0 + q1 u + q2 u^2\n"
       << "n,points,intercept,slope,q0,q1,q2,checked,worst_ratio,envelope_holds\n";
  for (const auto& f : r.tail_fits) {
    fits << f.n << ',' << f.points << ',' << d(f.intercept) << ',' << d(f.slope);
    for (std::size_t k = 0; k < 3; ++k) fits << ',' << (k < f.quadratic.size() ? d(f.quadratic[k]) : "nan");
    fits << ',' << f.checked << ',' << d(f.worst_ratio) << ',' << (f.envelope_holds ? 1 : 0) << '\n';
  }
  out.add("tail_fit.csv", fits.str());

  std::ostringstream hol;
  hol << head << "# holder_delta = " << d(r.holder_delta) << "\nn,h,q95_ratio\n";
  for (const auto& h : r.holder) hol << h.n << ',' << d(h.h) << ',' << d(h.q95) << '\n';
  out.add("holder.csv", hol.str());

  std::ostringstream fej;
  fej << head << "n,sup_error,omega,bound\n";
  for (const auto& f : r.fejer) fej << f.n << ',' << d(f.sup_error) << ',' << d(f.omega) << ',' << d(f.bound) << '\n';
  out.add("fejer.csv", fej.str());

  if (cfg.confidence) {
    std::ostringstream conf;
    conf << head << "# clip_applied = " << (r.confidence_clip_applied ? 1 : 0) << "\nn,delta,u0,coverage\n";
    for (const auto& c : r.confidence) {
      conf << c.n << ',' << d(c.delta) << ',' << d(c.u0) << ',' << d(c.coverage) << '\n';
    }
    out.add("confidence.csv", conf.str());
  }

  nlohmann::ordered_json j;
  j["header"] = header(run, extra);
  j["alpha"] = cfg.alpha;
  j["replications"] = cfg.replications;
  j["holder_delta"] = r.holder_delta;
  for (const auto& s : r.summaries) {
    j["summaries"].push_back({{"n", s.n}, {"grid_points", s.grid_points}, {"sup_bias", s.sup_bias},
                              {"holder_spread", s.holder_spread}});
  }
  for (const auto& p : r.probes) {
    j["probes"].push_back({{"n", p.n}, {"lambda", p.lambda}, {"bias", p.bias}, {"zeta_mean", p.zeta_mean},
                           {"zeta_var", p.zeta_var}, {"theta_diag", p.theta_diag}, {"ks", p.ks}, {"p", p.p},
                           {"ks_matched", p.ks_matched}, {"p_matched", p.p_matched}, {"tau_var", p.tau_var},
                           {"beta_squared", p.beta_sq}, {"lp_norms", p.lp}});
  }
  for (const auto& f : r.tail_fits) {
    j["tail_fits"].push_back({{"n", f.n}, {"points", f.points}, {"intercept", f.intercept}, {"slope", f.slope},
                              {"quadratic", f.quadratic}, {"checked", f.checked},
                              {"worst_ratio", f.worst_ratio}, {"envelope_holds", f.envelope_holds}});
  }
  for (const auto& c : r.confidence) {
    j["confidence"].push_back({{"n", c.n}, {"delta", c.delta}, {"u0", c.u0}, {"coverage", c.coverage}});
  }
  j["confidence_clip_applied"] = r.confidence_clip_applied;
  out.add("report.json", j.dump(2) + "\n");
  std::cerr << "mc: " << cfg.replications << " replications x " << cfg.n_list.size() << " sample sizes in "
            << r.runtime_seconds << " s on " << r.threads << " thread(s)\n";
}

unsigned resolve_thread_flag(const std::optional<unsigned>& flag, unsigned from_config) {
  if (flag) return *flag;
  if (const char* env = std::getenv("FRACSPEC_THREADS")) {
    const std::string s = env;
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw UsageError("FRACSPEC_THREADS must be a non-negative integer, got '" + s + "'");
    }
    return static_cast<unsigned>(std::stoul(s));
  }
  return from_config;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"fracspec: fractional spectral-derivative estimation and Monte Carlo verification", "fracspec"};
  std::string verb;
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool force = false;
  std::vector<std::string> inputs;
  app.add_option("verb", verb, "simulate | estimate | truth | mc | confidence | fejer")->required();
  app.add_option("paths", inputs, "sample path CSVs (estimate only)");
  app.add_option("--config", config_path, "configuration file")->required();
  app.add_option("--out", out_dir, "output directory (created if absent)")->required();
  app.add_option("--seed", seed, "override [experiment] seed");
  app.add_flag("--force", force, "overwrite existing output files");
  app.add_option("--threads", threads, "worker threads, 0 = all cores (fallback: FRACSPEC_THREADS, then config)");
  app.set_version_flag("--version", std::string("fracspec ") + fracspec::version);
  app.footer(std::string(fracspec::config_reference()) +
             "\nVerbs:\n"
             "  simulate    sample paths path_n<N>_<k>.csv\n"
             "  estimate    <stem>_periodogram.csv, <stem>_estimate.csv, <stem>_probes.csv per input path\n"
             "  truth       spectral_function.csv, frac_spectral_derivative.csv, limit_covariance.csv, truth.csv\n"
             "  mc          report.json, bias.csv, cov.csv, variance.csv, normality.csv, moments.csv,\n"
             "              tails.csv, tail_fit.csv, holder.csv, fejer.csv, confidence.csv\n"
             "  confidence  confidence.csv\n"
             "  fejer       fejer.csv\n"
             "\nExit status: 0 ok, 1 domain error, 2 numerical error, 3 I/O error, 64 usage/config error.\n");
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  static const std::vector<std::string> verbs = {"simulate", "estimate", "truth", "mc", "confidence", "fejer"};
  if (std::find(verbs.begin(), verbs.end(), verb) == verbs.end()) {
    throw UsageError("unknown verb '" + verb + "' (simulate, estimate, truth, mc, confidence, fejer)");
  }
  if (verb != "estimate" && !inputs.empty()) throw UsageError(verb + ": unexpected positional arguments");

  Run run;
  run.verb = verb;
  run.config_path = config_path;
  run.settings = fracspec::parse_config(config_path);
  if (seed) run.settings.mc.seed = *seed;
  run.threads = fracspec::resolve_threads(resolve_thread_flag(threads, run.settings.mc.threads));

  Bundle bundle;
  if (verb == "simulate") cmd_simulate(run, bundle);
  if (verb == "estimate") cmd_estimate(run, inputs, bundle);
  if (verb == "truth") cmd_truth(run, bundle);
  if (verb == "mc") cmd_mc(run, bundle);
  if (verb == "confidence") cmd_confidence(run, bundle);
  if (verb == "fejer") cmd_fejer(run, bundle);
  for (const auto& p : bundle.commit(out_dir, force)) std::cout << p.string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  try {
    return run_cli(argc, argv);
  } catch (const fracspec::config_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const fracspec::domain_error& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kDomain;
  } catch (const fracspec::numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const fracspec::io_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  }
}
