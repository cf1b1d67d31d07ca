#ifndef MATSIM_IO_HPP
#define MATSIM_IO_HPP

#include <string>
#include <vector>

#include "matsim/immature.hpp"
#include "matsim/initial_data.hpp"
#include "matsim/structured_solver.hpp"

namespace matsim::io {

/// 17 significant digits, enough to round-trip a double.
std::string format(double v);

/// Columns t,m,N,P; negative interpolation undershoots are written as 0.
void write_fields_csv(const std::string& path, const solver::FieldSolution& sol);
/// Columns t,x,y on the trajectory's output grid.
void write_immature_csv(const std::string& path, const immature::Trajectory& traj);
/// Columns m,mu at the given maturities.
void write_mu_csv(const std::string& path, const std::vector<double>& m,
                  const model::InitialData& data);
/// Columns m,a,Gamma on m x a.
void write_gamma_csv(const std::string& path, const std::vector<double>& m,
                     const std::vector<double>& a, const model::InitialData& data);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table read_csv(const std::string& path);
void write_json(const std::string& path, const model::Json& j);

}  // namespace matsim::io

#endif  // MATSIM_IO_HPP
