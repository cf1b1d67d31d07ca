#ifndef MATSIM_VERIFY_HPP
#define MATSIM_VERIFY_HPP

#include <functional>
#include <string>
#include <vector>

namespace matsim::verify {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Outcome of one end-to-end experiment; passes iff every check passes.
struct Experiment {
  int id = 0;
  std::string title;
  std::vector<Check> checks;
  double seconds = 0.0;

  bool pass() const;
  std::string summary() const;
};

Experiment closed_forms();       // 1
Experiment global_stability();   // 2
Experiment instability();        // 3
Experiment boundedness();        // 4
Experiment unbounded_growth();   // 5
Experiment zero_propagation();   // 6
Experiment dependence();         // 7
Experiment extinction();         // 8
Experiment y_limit();            // 9
Experiment self_convergence();   // 10

/// All ten, in order.
std::vector<std::function<Experiment()>> all_experiments();

/// Suite names: closed-forms, stability, instability, unbounded, dependence,
/// extinction, convergence, all.
std::vector<std::string> suite_names();
/// Throws ConfigError for an unknown name.
std::vector<std::function<Experiment()>> suite(const std::string& name);

}  // namespace matsim::verify

#endif  // MATSIM_VERIFY_HPP
