#include "thermoprobe/io.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "thermoprobe/errors.hpp"

namespace thermoprobe {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> doubles(const Json& v, const char* key) {
  if (!v.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  return v.at(key).get<std::vector<double>>();
}

Json xyz_json(const XYZChain& m) {
  return Json{{"type", "xyz"}, {"n", m.n}, {"jx", m.jx}, {"jy", m.jy}, {"jz", m.jz},
              {"hx", m.hx},    {"hy", m.hy}, {"hz", m.hz}};
}

XYZChain xyz_from(const Json& v) {
  XYZChain m{v.at("n").get<int>(), doubles(v, "jx"), doubles(v, "jy"), doubles(v, "jz"),
             doubles(v, "hx"),     doubles(v, "hy"), doubles(v, "hz")};
  m.validate();
  return m;
}

Json levels_json(const EnergySpectrum& s) { return Json(s.values()); }

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_spectrum_csv(std::ostream& out, const EnergySpectrum& spectrum, const std::string& manifest) {
  if (!manifest.empty()) out << "# manifest: " << manifest << '\n';
  out << "energy\n";
  for (double e : spectrum.levels()) out << format_double(e) << '\n';
}

void write_spectrum_csv(const std::filesystem::path& path, const EnergySpectrum& spectrum,
                        const std::string& manifest) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_spectrum_csv(out, spectrum, manifest);
  if (!out) throw FormatError("failed writing " + path.string());
}

EnergySpectrum read_spectrum_csv(std::istream& in) {
  std::string line;
  bool header = false;
  std::vector<double> levels;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (!header) {
      if (t != "energy") throw FormatError("spectrum file must start with the header 'energy'");
      header = true;
      continue;
    }
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
      throw FormatError("line " + std::to_string(line_no) + ": not a number: '" + t + "'");
    }
    levels.push_back(x);
  }
  if (!header) throw FormatError("spectrum file has no 'energy' header");
  if (levels.empty()) throw FormatError("spectrum file has no levels");
  try {
    return EnergySpectrum::pinned(std::move(levels));
  } catch (const DomainError& e) {
    throw FormatError(std::string("invalid spectrum: ") + e.what());
  }
}

EnergySpectrum read_spectrum_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_spectrum_csv(in);
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& value) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << value.dump(2) << '\n';
  if (!out) throw FormatError("failed writing " + path.string());
}

Json to_json(const SpinModel& model) {
  return std::visit(
      [](const auto& m) -> Json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GeneralizedIsing>) {
          Json edges = Json::array();
          for (const auto& [edge, j] : m.couplings) edges.push_back({{"sites", edge.sites()}, {"j", j}});
          return {{"type", "ising"}, {"n", m.n}, {"couplings", edges}};
        } else if constexpr (std::is_same_v<T, XYZChain>) {
          return xyz_json(m);
        } else if constexpr (std::is_same_v<T, XXXChain>) {
          return {{"type", "xxx"}, {"n", m.n}, {"j", m.j}, {"hx", m.hx}, {"hy", m.hy}, {"hz", m.hz}};
        } else {
          return {{"type", "dimer"}, {"n", m.n}, {"j", m.j}};
        }
      },
      model);
}

SpinModel model_from_json(const Json& v) {
  try {
    const std::string type = v.at("type").get<std::string>();
    const int n = v.at("n").get<int>();
    if (type == "xyz") return xyz_from(v);
    if (type == "xxx") {
      XXXChain m{n, doubles(v, "j"), doubles(v, "hx"), doubles(v, "hy"), doubles(v, "hz")};
      m.validate();
      return m;
    }
    if (type == "dimer") {
      DimerChain m{n, doubles(v, "j")};
      m.validate();
      return m;
    }
    if (type == "ising") {
      GeneralizedIsing m{n, {}};
      for (const auto& e : v.at("couplings")) {
        Hyperedge edge(e.at("sites").get<std::vector<int>>(), n);
        if (!m.couplings.emplace(edge, e.at("j").get<double>()).second) {
          throw FormatError("duplicate hyperedge in model file");
        }
      }
      return m;
    }
    throw FormatError("unknown model type '" + type + "'");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model: ") + e.what());
  } catch (const DomainError& e) {
    throw FormatError(std::string("invalid model: ") + e.what());
  }
}

Json to_json(const ChainParameters& params) {
  return {{"family", to_string(params.family)}, {"model", xyz_json(params.model)}};
}

ChainParameters chain_parameters_from_json(const Json& v) {
  try {
    ChainParameters p{parse_family(v.at("family").get<std::string>()), xyz_from(v.at("model"))};
    // Reject models the declared family cannot express.
    const std::vector<double> free = free_parameters(p);
    const ChainParameters back = from_free_parameters(p.family, p.model.n, free);
    if (back.model.jx != p.model.jx || back.model.jy != p.model.jy || back.model.jz != p.model.jz ||
        back.model.hx != p.model.hx || back.model.hy != p.model.hy || back.model.hz != p.model.hz) {
      throw FormatError("model is not a member of the declared family");
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed chain parameters: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(e.what());
  } catch (const DomainError& e) {
    throw FormatError(std::string("invalid chain parameters: ") + e.what());
  }
}

Json to_json(const OptimizationResult& r) {
  return {{"g", r.g_value},           {"levels", levels_json(r.spectrum)}, {"evaluations", r.evaluations},
          {"generations", r.generations}, {"converged", r.converged},     {"seed", r.seed}};
}

Json to_json(const ClusteredSpectrum& c) {
  return {{"energies", c.energies}, {"degeneracies", c.degeneracies}};
}

Json to_json(const PhaseDiagram& d) {
  Json points = Json::array();
  for (const SweepPoint& p : d.points) {
    Json j{{"ratio", p.ratio}};
    if (p.result) {
      j["g"] = p.result->g_value;
      j["clusters"] = to_json(p.clusters);
      j["levels"] = levels_json(p.result->spectrum);
    } else {
      j["failure"] = p.failure;
    }
    points.push_back(std::move(j));
  }
  Json transitions = Json::array();
  for (const CountChange& c : d.transitions) {
    transitions.push_back({{"r_lo", c.r_lo}, {"r_hi", c.r_hi}, {"count_lo", c.count_lo}, {"count_hi", c.count_hi}});
  }
  return {{"n_levels", d.n_levels}, {"t_hm", d.t_hm},         {"cluster_tol", d.cluster_tol},
          {"points", points},       {"transitions", transitions}};
}

Json to_json(const CriticalRatio& c) {
  return {{"phase", c.phase},       {"ratio", c.ratio},       {"half_width", c.half_width},
          {"r_lo", c.r_lo},         {"r_hi", c.r_hi},         {"count_lo", c.count_lo},
          {"count_hi", c.count_hi}, {"optimizations", c.optimizations}};
}

Json to_json(const EstimationRun& r) {
  return {{"levels", levels_json(r.spectrum)},
          {"true_t", r.true_t},
          {"samples_per_trial", r.samples_per_trial},
          {"trials", r.trials},
          {"seed", r.seed},
          {"mean_estimate", r.mean_estimate},
          {"empirical_variance", r.empirical_variance},
          {"crb", r.crb},
          {"ratio", r.ratio},
          {"ratio_ci", {r.ratio_ci_low, r.ratio_ci_high}},
          {"cold_clipped", r.cold_clipped},
          {"hot_clipped", r.hot_clipped},
          {"clip_warning", r.clip_warning},
          {"estimates", r.estimates}};
}

Json to_json(const NoiseSweepResult& r) {
  return {{"noise_levels", r.noise_levels}, {"mean_qfi", r.mean_qfi}, {"std_error", r.std_error},
          {"min_qfi", r.min_qfi},           {"max_qfi", r.max_qfi},   {"trials", r.trial_count},
          {"noiseless_qfi", r.noiseless_qfi}};
}

Json to_json(const IsingDesign& d) {
  Json j = to_json(SpinModel{d.model});
  j["shift"] = d.shift;
  j["max_error"] = d.max_error;
  return j;
}

Json RunManifest::to_json() const {
  return {{"command", command}, {"version", kToolVersion}, {"seed", seed},      {"config", config},
          {"started", started}, {"finished", finished},    {"outputs", outputs}};
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

}  // namespace thermoprobe
