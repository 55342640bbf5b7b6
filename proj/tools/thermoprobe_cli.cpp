// Command-line front end. Every subcommand prints its result to stdout; with
// --out PREFIX it also writes files next to a PREFIX.manifest.json record.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thermoprobe/analytic.hpp"
#include "thermoprobe/chain_opt.hpp"
#include "thermoprobe/errors.hpp"
#include "thermoprobe/estimator.hpp"
#include "thermoprobe/hamiltonian.hpp"
#include "thermoprobe/io.hpp"
#include "thermoprobe/phase_sweep.hpp"
#include "thermoprobe/spectrum_opt.hpp"

namespace fs = std::filesystem;
using namespace thermoprobe;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kDivergent = 2, kCapacity = 3, kNumerical = 4 };

struct Common {
  unsigned threads = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
};

struct DeOptions {
  std::size_t population = OptimizerConfig{}.population;
  std::size_t generations = OptimizerConfig{}.max_generations;
  bool no_polish = false;
};

void add_common(CLI::App* sub, Common& c, bool randomized) {
  sub->add_option("--threads", c.threads, "worker threads (0: THERMOPROBE_THREADS or 1)");
  sub->add_option("--out", c.out, "output prefix; writes PREFIX.* files and a manifest");
  if (randomized) sub->add_option("--seed", c.seed, "random seed (generated and echoed when omitted)");
}

void add_de(CLI::App* sub, DeOptions& d) {
  sub->add_option("--population", d.population, "differential-evolution population");
  sub->add_option("--generations", d.generations, "maximum generations");
  sub->add_flag("--no-polish", d.no_polish, "skip the local quasi-Newton refinement");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("not a number in list: '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

// Files are written under a ".partial" name and renamed only when the whole
// command succeeds, so a failed run never leaves outputs that look complete.
class Outputs {
 public:
  Outputs(std::string command, const Common& common, const CLI::App* sub, std::vector<std::string> argv)
      : prefix_(common.out) {
    manifest_.command = std::move(command);
    manifest_.started = utc_now();
    manifest_.config["argv"] = std::move(argv);
    for (const CLI::Option* opt : sub->get_options()) {
      if (opt->get_name() == "--help" || opt->get_name() == "-h" || opt->count() == 0) continue;
      const std::vector<std::string>& r = opt->results();
      manifest_.config[opt->get_name()] = r.size() == 1 ? Json(r.front()) : Json(r);
    }
  }

  ~Outputs() {
    std::error_code ec;
    for (const auto& [partial, final_path] : pending_) fs::remove(partial, ec);
  }

  bool enabled() const { return !prefix_.empty(); }
  void set_seed(std::uint64_t seed) {
    manifest_.seed = seed;
    manifest_.config["seed"] = seed;
  }
  std::string manifest_path() const { return prefix_ + ".manifest.json"; }

  void json(const std::string& suffix, Json value) {
    if (!enabled()) return;
    value["manifest"] = fs::path(manifest_path()).filename().string();
    const std::string path = stage(suffix);
    write_json(path, value);
  }

  void text(const std::string& suffix, const std::string& body) {
    if (!enabled()) return;
    const std::string path = stage(suffix);
    std::ofstream f(path);
    f << "# manifest: " << fs::path(manifest_path()).filename().string() << '\n' << body;
    if (!f) throw FormatError("failed writing " + path);
  }

  void spectrum(const std::string& suffix, const EnergySpectrum& s) {
    if (!enabled()) return;
    write_spectrum_csv(fs::path(stage(suffix)), s, fs::path(manifest_path()).filename().string());
  }

  void commit() {
    if (!enabled()) return;
    manifest_.finished = utc_now();
    const std::string mpath = manifest_path() + ".partial";
    write_json(mpath, manifest_.to_json());
    pending_.emplace_back(mpath, manifest_path());
    for (const auto& [partial, final_path] : pending_) fs::rename(partial, final_path);
    pending_.clear();
  }

 private:
  std::string stage(const std::string& suffix) {
    const std::string final_path = prefix_ + suffix;
    manifest_.outputs.push_back(fs::path(final_path).filename().string());
    pending_.emplace_back(final_path + ".partial", final_path);
    return pending_.back().first;
  }

  std::string prefix_;
  RunManifest manifest_;
  std::vector<std::pair<std::string, std::string>> pending_;
};

std::uint64_t resolve_seed(const Common& c) {
  if (c.seed) return *c.seed;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

OptimizerConfig make_config(const DeOptions& d, const Common& c, std::uint64_t seed) {
  OptimizerConfig cfg;
  cfg.population = d.population;
  cfg.max_generations = d.generations;
  cfg.polish = !d.no_polish;
  cfg.seed = seed;
  cfg.threads = c.threads;
  cfg.validate();
  return cfg;
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string row;
  for (const auto& c : cells) {
    if (!row.empty()) row += ',';
    row += c;
  }
  return row + '\n';
}

void print(const Json& j) { std::cout << j.dump(2) << '\n'; }

std::vector<std::pair<std::string, double>> named_parameters(const ChainParameters& p) {
  std::vector<std::pair<std::string, double>> out;
  const XYZChain& m = p.model;
  using Named = std::vector<std::pair<const char*, const std::vector<double>*>>;
  Named arrays;
  switch (p.family) {
    case ChainFamily::xyz:
      arrays = {{"jx", &m.jx}, {"jy", &m.jy}, {"jz", &m.jz}, {"hx", &m.hx}, {"hy", &m.hy}, {"hz", &m.hz}};
      break;
    case ChainFamily::ising:
      arrays = {{"jz", &m.jz}, {"hz", &m.hz}};
      break;
    default:
      arrays = {{"j", &m.jz}, {"hx", &m.hx}, {"hy", &m.hy}, {"hz", &m.hz}};
  }
  for (const auto& [name, values] : arrays) {
    for (std::size_t i = 0; i < values->size(); ++i) out.emplace_back(std::string(name) + "_" + std::to_string(i), (*values)[i]);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal thermometry probes: thermal QFI, spectrum and spin-chain optimization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  std::vector<std::string> args(argv, argv + argc);

  Common common;
  DeOptions de;
  std::string spectrum_file, target_file, params_file, family_text, sign_text = "both", ratios_text, levels_text;
  double t = 0.0, t_min = 0.0, t_max = 0.0, t_hm = 1.0, coupling_cap = 20.0, field_cap = 20.0;
  int n = 0, n_from = 0, n_to = 0;
  std::size_t phase = 1, m_samples = 0, trials = 0;
  std::vector<double> bracket;
  std::optional<double> t_opt;

  auto* qfi = app.add_subcommand("qfi", "thermal QFI of a spectrum at one temperature");
  qfi->add_option("--spectrum", spectrum_file, "spectrum CSV")->required();
  qfi->add_option("--t", t, "temperature")->required();
  add_common(qfi, common, false);

  auto* g = app.add_subcommand("g", "average inverse QFI over a temperature range");
  g->add_option("--spectrum", spectrum_file, "spectrum CSV")->required();
  g->add_option("--tmin", t_min)->required();
  g->add_option("--tmax", t_max)->required();
  add_common(g, common, false);

  auto* local = app.add_subcommand("local-gap", "optimal two-level gap at a single temperature");
  local->add_option("--n", n, "number of levels")->required();
  local->add_option("--t", t_opt, "temperature; also prints the gap in energy units");
  add_common(local, common, false);

  auto* opt = app.add_subcommand("optimize-levels", "minimize G over all N-1 excited levels");
  opt->add_option("--n", n)->required();
  opt->add_option("--tmin", t_min)->required();
  opt->add_option("--tmax", t_max)->required();
  opt->add_option("--warm", spectrum_file, "warm-start spectrum CSV");
  add_de(opt, de);
  add_common(opt, common, true);

  auto* sw = app.add_subcommand("sweep", "optimal spectra over a grid of T_max/T_min");
  sw->add_option("--n", n)->required();
  sw->add_option("--thm", t_hm, "harmonic-mean temperature")->required();
  sw->add_option("--ratios", ratios_text, "comma-separated ascending ratios")->required();
  add_de(sw, de);
  add_common(sw, common, true);

  auto* crit = app.add_subcommand("critical-ratio", "bisect the ratio where the optimum gains a cluster");
  crit->add_option("--n", n)->required();
  crit->add_option("--thm", t_hm)->required();
  crit->add_option("--bracket", bracket, "LO HI")->required()->expected(2);
  crit->add_option("--phase", phase, "phase index k (transition to k+2 clusters)");
  add_de(crit, de);
  add_common(crit, common, true);

  auto* design = app.add_subcommand("design-ising", "generalized Ising couplings for a target spectrum");
  design->add_option("--target", target_file, "target spectrum CSV with 2^n levels")->required();
  add_common(design, common, false);

  auto* rank = app.add_subcommand("rank-check", "numerical rank of the inverse-design system");
  rank->add_option("--n", n, "spins")->required();
  add_common(rank, common, false);

  auto* chain = app.add_subcommand("optimize-chain", "minimize G over spin-chain parameters");
  chain->add_option("--family", family_text, "xyz | xxx | xxx-hom | ising")->required();
  chain->add_option("--n", n, "spins")->required();
  chain->add_option("--tmin", t_min)->required();
  chain->add_option("--tmax", t_max)->required();
  chain->add_option("--sign", sign_text, "ferro | antiferro | both");
  chain->add_option("--coupling-cap", coupling_cap, "coupling bound in units of t_hm");
  chain->add_option("--field-cap", field_cap, "field bound in units of t_hm");
  add_de(chain, de);
  add_common(chain, common, true);

  auto* transfer = app.add_subcommand("transfer", "grow an optimized chain one site at a time");
  transfer->add_option("--family", family_text)->required();
  transfer->add_option("--from", n_from)->required();
  transfer->add_option("--to", n_to)->required();
  transfer->add_option("--tmin", t_min)->required();
  transfer->add_option("--tmax", t_max)->required();
  transfer->add_option("--sign", sign_text, "ferro | antiferro | both");
  transfer->add_option("--start", params_file, "start from these chain parameters instead of a global search");
  add_de(transfer, de);
  add_common(transfer, common, true);

  auto* noise = app.add_subcommand("noise-sweep", "QFI under uniform parameter noise");
  noise->add_option("--params", params_file, "chain parameter JSON")->required();
  noise->add_option("--t", t)->required();
  noise->add_option("--levels", levels_text, "comma-separated noise amplitudes")->required();
  noise->add_option("--trials", trials = 30, "draws per level");
  add_common(noise, common, true);

  auto* sim = app.add_subcommand("simulate", "Monte Carlo MLE variance against the Cramer-Rao bound");
  sim->add_option("--spectrum", spectrum_file)->required();
  sim->add_option("--t", t)->required();
  sim->add_option("--m", m_samples, "energy measurements per trial")->required();
  sim->add_option("--trials", trials, "trials")->required();
  add_common(sim, common, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }

  const CLI::App* sub = app.get_subcommands().front();
  try {
    Outputs out(sub->get_name(), common, sub, args);

    if (sub == qfi) {
      const double f = thermal_qfi(read_spectrum_csv(fs::path(spectrum_file)), t);
      std::cout << format_double(f) << '\n';
      out.json(".json", {{"t", t}, {"qfi", f}});
    } else if (sub == g) {
      const double value = g_measure(read_spectrum_csv(fs::path(spectrum_file)), TemperatureRange(t_min, t_max));
      std::cout << format_double(value) << '\n';
      out.json(".json", {{"t_min", t_min}, {"t_max", t_max}, {"g", value}});
    } else if (sub == local) {
      const double x = local_optimal_gap(n);
      std::cout << "x = " << format_double(x) << '\n';
      Json j{{"n", n}, {"x", x}};
      if (t_opt) {
        if (!(*t_opt > 0.0)) throw DomainError("temperature must be positive");
        std::cout << "epsilon = " << format_double(x * *t_opt) << '\n';
        j["t"] = *t_opt;
        j["epsilon"] = x * *t_opt;
      }
      out.json(".json", j);
    } else if (sub == opt) {
      const std::uint64_t seed = resolve_seed(common);
      out.set_seed(seed);
      std::vector<EnergySpectrum> warm;
      if (!spectrum_file.empty()) warm.push_back(read_spectrum_csv(fs::path(spectrum_file)));
      const OptimizationResult r = optimize_levels(n, TemperatureRange(t_min, t_max), make_config(de, common, seed), warm);
      Json j = to_json(r);
      j["t_min"] = t_min;
      j["t_max"] = t_max;
      print(j);
      out.json(".json", j);
      out.spectrum(".spectrum.csv", r.spectrum);
    } else if (sub == sw) {
      const std::uint64_t seed = resolve_seed(common);
      out.set_seed(seed);
      const std::vector<double> ratios = parse_list(ratios_text);
      const PhaseDiagram d = sweep(n, t_hm, ratios, make_config(de, common, seed));
      std::size_t width = 0;
      for (const SweepPoint& p : d.points) width = std::max(width, p.clusters.count());
      std::string csv = "r,g,clusters";
      for (std::size_t i = 0; i < width; ++i) {
        csv += ",cluster_energy_" + std::to_string(i) + "/t_hm,degeneracy_" + std::to_string(i);
      }
      csv += ",status\n";
      for (const SweepPoint& p : d.points) {
        csv += format_double(p.ratio);
        if (p.result) {
          csv += "," + format_double(p.result->g_value) + "," + std::to_string(p.clusters.count());
        } else {
          csv += ",,";
        }
        for (std::size_t i = 0; i < width; ++i) {
          if (p.result && i < p.clusters.count()) {
            csv += "," + format_double(p.clusters.energies[i] / t_hm) + "," + std::to_string(p.clusters.degeneracies[i]);
          } else {
            csv += ",,";
          }
        }
        csv += p.result ? ",ok\n" : ",failed\n";
      }
      std::cout << csv;
      Json j = to_json(d);
      j["seed"] = seed;
      out.json(".json", j);
      out.text(".csv", csv);
    } else if (sub == crit) {
      const std::uint64_t seed = resolve_seed(common);
      out.set_seed(seed);
      const CriticalRatio c = find_critical_ratio(n, t_hm, phase, bracket[0], bracket[1], make_config(de, common, seed));
      Json j = to_json(c);
      j["n_levels"] = n;
      j["t_hm"] = t_hm;
      j["seed"] = seed;
      print(j);
      out.json(".json", j);
    } else if (sub == design) {
      const EnergySpectrum target = read_spectrum_csv(fs::path(target_file));
      int spins = 0;
      while ((std::size_t{1} << spins) < target.size()) ++spins;
      if ((std::size_t{1} << spins) != target.size()) throw FormatError("target must have 2^n levels");
      const IsingDesign d = design_couplings(spins, target);
      const EnergySpectrum realized = ising_spectrum(d.model);
      double spectrum_error = 0.0;
      for (std::size_t i = 0; i < target.size(); ++i) spectrum_error = std::max(spectrum_error, std::abs(realized[i] - target[i]));
      Json j = to_json(d);
      j["round_trip"] = {{"max_configuration_error", d.max_error}, {"max_spectrum_error", spectrum_error}};
      print(j);
      out.json(".json", j);
    } else if (sub == rank) {
      const long r = rank_check(n);
      std::cout << r << '\n';
      out.json(".json", {{"n", n}, {"rank", r}, {"full_rank", (1L << n) - 1}});
    } else if (sub == chain) {
      const std::uint64_t seed = resolve_seed(common);
      out.set_seed(seed);
      ChainConstraint c;
      c.family = parse_family(family_text);
      if (sign_text != "both") c.sign = parse_sign(sign_text);
      c.coupling_cap = coupling_cap;
      c.field_cap = field_cap;
      const TemperatureRange range(t_min, t_max);
      const ChainOptimizationResult r = optimize_chain(n, range, c, make_config(de, common, seed));
      Json j = to_json(r.result);
      j["sign"] = to_string(r.sign);
      j["parameters"] = to_json(r.parameters);
      print(j);
      out.json(".json", j);
      out.json(".params.json", to_json(r.parameters));
      out.spectrum(".spectrum.csv", r.result.spectrum);
      std::string csv = "r,parameter,value/t_hm\n";
      for (const auto& [name, value] : named_parameters(r.parameters)) {
        csv += csv_row({format_double(range.ratio()), name, format_double(value / range.harmonic_mean())});
      }
      out.text(".parameters.csv", csv);
    } else if (sub == transfer) {
      const std::uint64_t seed = resolve_seed(common);
      out.set_seed(seed);
      ChainConstraint c;
      c.family = parse_family(family_text);
      if (sign_text != "both") c.sign = parse_sign(sign_text);
      const TemperatureRange range(t_min, t_max);
      std::vector<TransferRung> ladder;
      if (!params_file.empty()) {
        const ChainParameters start = chain_parameters_from_json(read_json(params_file));
        if (start.model.n != n_from) throw ConfigError("--from does not match the start parameters");
        ladder = transfer_from(start, n_to, range, c, common.threads);
      } else {
        ladder = transfer_optimize(n_from, n_to, range, c, make_config(de, common, seed));
      }
      std::string csv = "n,g,ising_subspace,status\n";
      Json rungs = Json::array();
      for (const TransferRung& rung : ladder) {
        const bool ok = rung.note.empty();
        csv += csv_row({std::to_string(rung.n), ok ? format_double(rung.g_value) : "", rung.ising_subspace ? "1" : "0",
                        ok ? "ok" : "failed"});
        Json jr{{"n", rung.n}, {"ising_subspace", rung.ising_subspace}, {"parameters", to_json(rung.parameters)}};
        if (ok) {
          jr["g"] = rung.g_value;
        } else {
          jr["failure"] = rung.note;
        }
        rungs.push_back(std::move(jr));
      }
      std::cout << csv;
      out.json(".json", {{"t_min", t_min}, {"t_max", t_max}, {"seed", seed}, {"rungs", rungs}});
      out.text(".csv", csv);
      if (!ladder.empty() && !ladder.back().note.empty()) {
        out.commit();
        std::cerr << "error: ladder halted at n = " << ladder.back().n << ": " << ladder.back().note << '\n';
        return kNumerical;
      }
    } else if (sub == noise) {
      const std::uint64_t seed = resolve_seed(common);
      out.set_seed(seed);
      const ChainParameters p = chain_parameters_from_json(read_json(params_file));
      const std::vector<double> levels = parse_list(levels_text);
      const NoiseSweepResult r = noise_robustness(p, t, levels, trials, seed, common.threads);
      std::string csv = "epsilon,mean_qfi,std_error,min_qfi,max_qfi,noiseless_qfi,trials\n";
      for (std::size_t i = 0; i < levels.size(); ++i) {
        csv += csv_row({format_double(r.noise_levels[i]), format_double(r.mean_qfi[i]), format_double(r.std_error[i]),
                        format_double(r.min_qfi[i]), format_double(r.max_qfi[i]), format_double(r.noiseless_qfi),
                        std::to_string(r.trial_count)});
      }
      std::cout << csv;
      Json j = to_json(r);
      j["seed"] = seed;
      out.json(".json", j);
      out.text(".csv", csv);
    } else if (sub == sim) {
      const std::uint64_t seed = resolve_seed(common);
      out.set_seed(seed);
      const EstimationRun r = crb_saturation_check(read_spectrum_csv(fs::path(spectrum_file)), t, m_samples, trials,
                                                   seed, common.threads);
      Json j = to_json(r);
      print(j);
      out.json(".json", j);
      if (r.clip_warning) std::cerr << "warning: more than 1% of trials were clipped\n";
    }
    out.commit();
    return kOk;
  } catch (const DivergentMeasureError& e) {
    std::cerr << "error: divergent measure: " << e.what() << '\n';
    return kDivergent;
  } catch (const CapacityError& e) {
    std::cerr << "error: capacity: " << e.what() << '\n';
    return kCapacity;
  } catch (const RankError& e) {
    std::cerr << "error: rank deficient (rank " << e.rank() << "): " << e.what() << '\n';
    return kCapacity;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
}
