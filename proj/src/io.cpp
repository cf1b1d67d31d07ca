#include "matsim/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "matsim/errors.hpp"

namespace matsim::io {

namespace {

std::ofstream open(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  return out;
}

}  // namespace

std::string format(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_fields_csv(const std::string& path, const solver::FieldSolution& sol) {
  auto out = open(path);
  out << "t,m,N,P\n";
  for (const auto& snap : sol.dumps) {
    for (std::size_t j = 0; j < sol.m.size(); ++j) {
      out << format(snap.t) << ',' << format(sol.m[j]) << ',' << format(std::max(snap.N[j], 0.0))
          << ',' << format(std::max(snap.P[j], 0.0)) << '\n';
    }
  }
}

void write_immature_csv(const std::string& path, const immature::Trajectory& traj) {
  auto out = open(path);
  out << "t,x,y\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    out << format(traj.times[i]) << ',' << format(traj.xs[i]) << ',' << format(traj.ys[i]) << '\n';
  }
}

void write_mu_csv(const std::string& path, const std::vector<double>& m,
                  const model::InitialData& data) {
  auto out = open(path);
  out << "m,mu\n";
  for (double x : m) out << format(x) << ',' << format(data.mu(x)) << '\n';
}

void write_gamma_csv(const std::string& path, const std::vector<double>& m,
                     const std::vector<double>& a, const model::InitialData& data) {
  auto out = open(path);
  out << "m,a,Gamma\n";
  for (double x : m) {
    for (double age : a) out << format(x) << ',' << format(age) << ',' << format(data.Gamma(x, age)) << '\n';
  }
}

Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("'" + path + "' is empty");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError("'" + path + "': not a number: " + cell);
      }
    }
    if (row.size() != t.header.size()) throw ConfigError("'" + path + "': ragged row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_json(const std::string& path, const model::Json& j) {
  auto out = open(path);
  out << j.dump(2) << '\n';
}

}  // namespace matsim::io
