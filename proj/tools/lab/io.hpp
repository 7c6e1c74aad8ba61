#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hitchin/background.hpp"
#include "hitchin/solver.hpp"

namespace lab {

using json = nlohmann::ordered_json;

/// %.17g; "nan", "inf", "-inf" for non-finite values.
std::string num(double v);

/// JSON text with every floating-point number printed with 17 significant digits
/// (non-finite numbers become null). Two-space indent, trailing newline.
std::string dump17(const json& j);

void write_json(const std::filesystem::path& path, const json& j);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(long long v);
  CsvWriter& operator<<(int v) { return *this << static_cast<long long>(v); }
  CsvWriter& operator<<(const std::string& s);
  CsvWriter& operator<<(const char* s) { return *this << std::string(s); }
  void end_row();

 private:
  void sep();
  std::ofstream out_;
  bool first_ = true;
};

/// Header line "kind,h,nx,ny" with its values, then x,y,sigma,kappa per active node.
void write_background_csv(const std::filesystem::path& path, const hitchin::ConformalBackground& bg);

/// x,y,psi1,psi2 per active node.
void write_solution_csv(const std::filesystem::path& path, const hitchin::ConformalBackground& bg,
                        const hitchin::SolutionPair& sol);

}  // namespace lab
