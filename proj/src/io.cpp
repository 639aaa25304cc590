#include "aggdiff/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aggdiff {

namespace {

constexpr const char* kHeader =
    "step,time,dt,mass,min_density,free_energy,entropy,interaction,dissipation,"
    "rel_entropy_step,fed_residual,newton_iters,energy_gap";

} // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_timeseries_csv(std::ostream& out, const std::vector<TimeSeriesRow>& rows) {
  out << kHeader << "\n";
  for (const TimeSeriesRow& r : rows) {
    out << r.step << ',' << format_double(r.time) << ',' << format_double(r.dt) << ','
        << format_double(r.mass) << ',' << format_double(r.min_density) << ','
        << format_double(r.free_energy) << ',' << format_double(r.entropy) << ','
        << format_double(r.interaction) << ',' << format_double(r.dissipation) << ','
        << format_double(r.rel_entropy_step) << ',' << format_double(r.fed_residual) << ','
        << r.newton_iters << ',' << format_double(r.energy_gap) << "\n";
  }
}

void write_timeseries_csv(const std::string& path, const std::vector<TimeSeriesRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_timeseries_csv(out, rows);
}

std::vector<TimeSeriesRow> parse_timeseries_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv");
  if (line != kHeader) throw std::runtime_error("unexpected csv header: " + line);
  std::vector<TimeSeriesRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    TimeSeriesRow r;
    char comma;
    ss >> r.step >> comma >> r.time >> comma >> r.dt >> comma >> r.mass >> comma >>
        r.min_density >> comma >> r.free_energy >> comma >> r.entropy >> comma >>
        r.interaction >> comma >> r.dissipation >> comma >> r.rel_entropy_step >> comma >>
        r.fed_residual >> comma >> r.newton_iters >> comma >> r.energy_gap;
    if (ss.fail()) throw std::runtime_error("malformed csv row: " + line);
    rows.push_back(r);
  }
  return rows;
}

std::vector<TimeSeriesRow> read_timeseries_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return parse_timeseries_csv(in);
}

void write_snapshot(const std::string& path, const Eigen::VectorXd& x, const Eigen::VectorXd& rho) {
  if (x.size() != rho.size()) throw std::invalid_argument("write_snapshot: size mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (long k = 0; k < x.size(); ++k)
    out << format_double(x[k]) << ' ' << format_double(rho[k]) << "\n";
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<double> xs, rs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    double x, r;
    if (!(ss >> x >> r)) throw std::runtime_error("malformed snapshot line: " + line);
    xs.push_back(x);
    rs.push_back(r);
  }
  Snapshot snap;
  snap.x = Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<long>(xs.size()));
  snap.rho = Eigen::Map<Eigen::VectorXd>(rs.data(), static_cast<long>(rs.size()));
  return snap;
}

} // namespace aggdiff
