#ifndef THERMOPROBE_IO_HPP
#define THERMOPROBE_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "thermoprobe/chain_opt.hpp"
#include "thermoprobe/estimator.hpp"
#include "thermoprobe/hamiltonian.hpp"
#include "thermoprobe/phase_sweep.hpp"
#include "thermoprobe/spectrum_opt.hpp"

namespace thermoprobe {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

/// 17 significant digits: enough to round-trip any double.
std::string format_double(double x);

// Spectrum files: one `energy` column, optional leading `#` comment lines.
void write_spectrum_csv(std::ostream& out, const EnergySpectrum& spectrum, const std::string& manifest = {});
void write_spectrum_csv(const std::filesystem::path& path, const EnergySpectrum& spectrum,
                        const std::string& manifest = {});
/// Accepts unsorted levels and pins the minimum to zero. Throws FormatError.
EnergySpectrum read_spectrum_csv(std::istream& in);
EnergySpectrum read_spectrum_csv(const std::filesystem::path& path);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& value);

// Model files. Every object carries a "type" of ising, xyz, xxx or dimer.
Json to_json(const SpinModel& model);
SpinModel model_from_json(const Json& value);

// Chain parameter files: {"family": ..., "model": <xyz model>}.
Json to_json(const ChainParameters& params);
ChainParameters chain_parameters_from_json(const Json& value);

Json to_json(const OptimizationResult& result);
Json to_json(const ClusteredSpectrum& clusters);
Json to_json(const PhaseDiagram& diagram);
Json to_json(const CriticalRatio& ratio);
Json to_json(const EstimationRun& run);
Json to_json(const NoiseSweepResult& result);
Json to_json(const IsingDesign& design);

/// Provenance record written next to every output.
struct RunManifest {
  std::string command;
  Json config = Json::object();
  std::uint64_t seed = 0;
  std::string started;
  std::string finished;
  std::vector<std::string> outputs;

  Json to_json() const;
};

/// UTC timestamp, ISO 8601.
std::string utc_now();

}  // namespace thermoprobe

#endif  // THERMOPROBE_IO_HPP
