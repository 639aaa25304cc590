#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aggdiff/interaction.hpp"
#include "aggdiff/mesh.hpp"
#include "aggdiff/stepper.hpp"

namespace aggdiff {

struct parse_error : std::runtime_error {
  parse_error(const std::string& what, int line_) : std::runtime_error(what), line(line_) {}
  int line = 0;
};

struct DomainConfig {
  DomainKind kind = DomainKind::torus;
  double length = 1.0;
  int cells = 0;
};

struct PotentialConfig {
  Potential::Kind kind = Potential::Kind::kuramoto;
  double sigma = 0.0;     // kuramoto
  double amplitude = 0.0; // gaussian
  double variance = 1.0;  // gaussian
  std::string file;       // tabulated
};

struct InitialConfig {
  enum class Kind { uniform, cosine, peaks, file };
  Kind kind = Kind::uniform;
  double amplitude = 0.0; // cosine
  int mode = 1;           // cosine
  std::vector<double> centers;
  std::vector<double> widths;
  std::vector<double> weights;
  double baseline = 1e-4;
  std::string path; // file
};

struct TimeConfig {
  double dt_init = 0.0; // 0: default to the mesh size h
  double t_max = 1.0;
  bool adaptive = true;
  double newton_tol = 1e-12;
  int newton_max_iter = 25;
  double energy_gap_tol = 0.0; // 0 disables gap-based stopping
  int stall_window = 10;
};

struct OutputConfig {
  std::string directory = "out";
  int snapshot_every = 0; // 0: only the final snapshot
  std::string csv = "timeseries.csv";
};

struct RunConfig {
  DomainConfig domain;
  double kappa = 1.0;
  PotentialConfig potential;
  InitialConfig initial;
  TimeConfig time;
  FluxKind flux = FluxKind::scharfetter_gummel;
  OutputConfig output;
};

/// Parses the line-oriented `key = value` format with `[section]` headers
/// (strings quoted, numbers plain, booleans true/false, arrays bracketed;
/// `#` comments). Unknown keys, missing required keys, type mismatches and
/// out-of-range values are reported with section.key and line number.
RunConfig parse_config(const std::string& text);

/// parse_config on the contents of a file.
RunConfig load_config(const std::string& path);

/// Materialize the configured pieces.
CellComplex build_mesh(const RunConfig& cfg);
Potential build_potential(const RunConfig& cfg);

/// Cell midpoint evaluation of the configured initial datum, mass-normalized
/// against the cell volumes. Peaks use the periodic distance on a torus.
DensityState build_initial(const RunConfig& cfg, const CellComplex& mesh);

} // namespace aggdiff
