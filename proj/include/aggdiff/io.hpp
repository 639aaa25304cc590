#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace aggdiff {

/// One accepted time step of an evolution run.
struct TimeSeriesRow {
  long step = 0;
  double time = 0.0;
  double dt = 0.0;
  double mass = 0.0;
  double min_density = 0.0;
  double free_energy = 0.0;
  double entropy = 0.0;
  double interaction = 0.0;
  double dissipation = 0.0;
  double rel_entropy_step = 0.0;
  double fed_residual = 0.0;
  int newton_iters = 0;
  double energy_gap = 0.0;
};

/// Shortest decimal form that round-trips the double exactly.
std::string format_double(double v);

void write_timeseries_csv(std::ostream& out, const std::vector<TimeSeriesRow>& rows);
void write_timeseries_csv(const std::string& path, const std::vector<TimeSeriesRow>& rows);
std::vector<TimeSeriesRow> read_timeseries_csv(const std::string& path);
std::vector<TimeSeriesRow> parse_timeseries_csv(std::istream& in);

struct Snapshot {
  Eigen::VectorXd x;
  Eigen::VectorXd rho;
};

/// Two-column text `x_K rho_K`, 17 significant digits.
void write_snapshot(const std::string& path, const Eigen::VectorXd& x, const Eigen::VectorXd& rho);
Snapshot read_snapshot(const std::string& path);

} // namespace aggdiff
