#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "config.hpp"

namespace lab {

/// One invariant evaluation. `relation` is one of <=, <, >=, > (value against bound) or
/// "report" for quantities that are listed but not asserted.
struct Check {
  std::string suite;
  std::string invariant;
  std::string subject;  ///< case, surface or curve the check ran on
  double value = 0.0;
  std::string relation;
  double bound = 0.0;
  bool pass = false;
  std::string where;  ///< worst node or curve, empty when not applicable

  /// Distance from failing, positive when passing (NaN for reports).
  double margin() const;
};

struct VerifyContext {
  const RunConfig* config = nullptr;  ///< when set, its domain/differential/surface replace the built-in cases
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::function<void(const Check&)> on_check;
};

class Verifier {
 public:
  explicit Verifier(VerifyContext ctx);
  ~Verifier();
  /// Runs one suite, or every suite for "all". Throws std::invalid_argument for an unknown name.
  std::vector<Check> run(const std::string& suite);
  static const std::vector<std::string>& suites();

 private:
  struct State;
  std::unique_ptr<State> s_;
};

std::string describe_node(const hitchin::Lattice& lattice, std::size_t k);

}  // namespace lab
