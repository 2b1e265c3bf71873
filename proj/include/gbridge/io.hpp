#ifndef GBRIDGE_IO_HPP
#define GBRIDGE_IO_HPP

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gbridge/compensator.hpp"
#include "gbridge/filter.hpp"
#include "gbridge/harness.hpp"
#include "gbridge/mixing_law.hpp"
#include "gbridge/pathgen.hpp"

// Config parsing and CSV/JSON artifact serialization for the CLI.

namespace gbridge {

using nlohmann::json;

struct RunConfig {
  std::uint64_t seed = 0;
  ProcessParams process;
  json law_spec;
  std::vector<double> grid;
  std::size_t ensemble_size = 1;
};

inline MixingLaw law_from_json(const json& spec) {
  if (!spec.is_object() || !spec.contains("family"))
    throw std::invalid_argument("config.law: expected an object with a \"family\" field");
  const std::string family = spec.at("family").get<std::string>();
  try {
    if (family == "dirac") return MixingLaw::dirac(spec.at("location").get<double>());
    if (family == "discrete") {
      std::vector<MixingLaw::Atom> atoms;
      for (const auto& a : spec.at("atoms"))
        atoms.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
      return MixingLaw::discrete(std::move(atoms));
    }
    const std::size_t nodes = spec.value("nodes", std::size_t{512});
    if (family == "exponential")
      return MixingLaw::exponential_grid(spec.at("rate").get<double>(),
                                         spec.at("upper").get<double>(), nodes);
    if (family == "uniform")
      return MixingLaw::uniform_grid(spec.at("lo").get<double>(),
                                     spec.at("hi").get<double>(), nodes);
    if (family == "gamma")
      return MixingLaw::gamma_grid(spec.at("shape").get<double>(),
                                   spec.at("rate").get<double>(),
                                   spec.at("upper").get<double>(), nodes);
    if (family == "grid")
      return MixingLaw::from_grid(spec.at("nodes").get<std::vector<double>>(),
                                  spec.at("weights").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config.law: ") + e.what());
  }
  throw std::invalid_argument("config.law: unknown family \"" + family + "\"");
}

inline std::vector<double> grid_from_json(const json& spec) {
  std::vector<double> grid;
  if (spec.contains("times")) {
    grid = spec.at("times").get<std::vector<double>>();
  } else {
    const double end = spec.at("end").get<double>();
    const double step = spec.at("step").get<double>();
    if (!(end > 0.0) || !(step > 0.0))
      throw std::invalid_argument("config.grid: end and step must be positive");
    for (double t = 0.0; t < end + 0.5 * step; t += step)
      grid.push_back(std::min(t, end));
    grid.back() = end;
  }
  if (grid.empty() || grid.front() != 0.0)
    throw std::invalid_argument("config.grid: grid must start at 0");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1]))
      throw std::invalid_argument("config.grid: times must be strictly increasing");
  return grid;
}

inline RunConfig parse_config(const json& j) {
  RunConfig cfg;
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  try {
    cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("process")) {
      const auto& p = j.at("process");
      cfg.process.eta = p.value("eta", 1.0);
      cfg.process.kappa = p.value("kappa", 1.0);
      cfg.process.endpoint = p.value("endpoint", 1.0);
    }
    cfg.process.validate();
    cfg.law_spec = j.at("law");
    law_from_json(cfg.law_spec);  // fail fast with diagnostics
    cfg.grid = grid_from_json(j.at("grid"));
    cfg.ensemble_size = j.value("n", std::size_t{1});
    if (cfg.ensemble_size < 1)
      throw std::invalid_argument("config.n: must be >= 1");
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config " + path + ": " + e.what());
  }
  return parse_config(j);
}

// FNV-1a of the canonical dump; embedded in every output for provenance.
inline std::string config_hash(const json& j) {
  const std::string dump = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

// ---------------------------------------------------------------------------
// Writers.  Numeric formatting is fixed (max_digits10) so identical runs
// produce byte-identical files.

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline void write_paths_csv(const std::string& file, const std::vector<Path>& paths) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file);
  out << "path_id,time,value\n";
  for (std::size_t i = 0; i < paths.size(); ++i)
    for (std::size_t k = 0; k < paths[i].times.size(); ++k)
      out << i << ',' << format_double(paths[i].times[k]) << ','
          << format_double(paths[i].values[k]) << '\n';
}

inline void write_drift_csv(const std::string& file,
                            const std::vector<PathDriftRecord>& records) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file);
  out << "path_id,time,value,drift_integral,residual\n";
  for (std::size_t i = 0; i < records.size(); ++i)
    for (std::size_t k = 0; k < records[i].times.size(); ++k)
      out << i << ',' << format_double(records[i].times[k]) << ','
          << format_double(records[i].values[k]) << ','
          << format_double(records[i].drift_integral[k]) << ','
          << format_double(records[i].residual[k]) << '\n';
}

inline json to_json(const TauPosterior& post) {
  json atoms = json::array();
  for (const auto& p : post.support) atoms.push_back({p.location, p.weight});
  return json{{"observation", {{"t", post.observation_time}, {"x", post.observation_value}}},
              {"stopped_weight", post.stopped_weight},
              {"atoms", atoms}};
}

inline json to_json(const PredictiveLaw& pl) {
  return json{{"observation", {{"t", pl.observation_time}, {"x", pl.observation_value}}},
              {"horizon", pl.horizon},
              {"atom_at_one", pl.atom_at_one},
              {"grid", pl.cell_centers},
              {"density", pl.density},
              {"weights", pl.cell_mass}};
}

inline json to_json(const GateResult& g) {
  return json{{"name", g.name},           {"statistic", g.statistic},
              {"threshold", g.threshold}, {"pass", g.pass},
              {"sample_size", g.sample_size}, {"seed", g.seed},
              {"detail", g.detail}};
}

inline json to_json(const DriftSummary& s) {
  return json{{"step_times", s.step_times},
              {"mean_increment", s.mean_increment},
              {"standard_error", s.standard_error},
              {"max_abs_z", s.max_abs_z}};
}

inline void write_json(const std::string& file, const json& j) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file);
  out << j.dump(2) << '\n';
}

}  // namespace gbridge

#endif  // GBRIDGE_IO_HPP
