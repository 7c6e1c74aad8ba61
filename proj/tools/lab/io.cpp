#include "io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace lab {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void emit(const json& j, std::string& out, int depth) {
  const std::string pad(std::size_t(2 * (depth + 1)), ' ');
  const std::string close(std::size_t(2 * depth), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(it.key()).dump() + ": ";
        emit(it.value(), out, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(j.begin(), j.end(), [](const json& e) { return e.is_structured(); });
      out += flat ? "[" : "[\n";
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat ? ", " : ",\n";
        first = false;
        if (!flat) out += pad;
        emit(e, out, depth + 1);
      }
      out += flat ? "]" : "\n" + close + "]";
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? num(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump17(const json& j) {
  std::string out;
  emit(j, out, 0);
  out += "\n";
  return out;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << dump17(j);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  for (const auto& h : header) *this << h;
  end_row();
}

void CsvWriter::sep() {
  if (!first_) out_ << ',';
  first_ = false;
}

CsvWriter& CsvWriter::operator<<(double v) {
  sep();
  out_ << num(v);
  return *this;
}

CsvWriter& CsvWriter::operator<<(long long v) {
  sep();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& s) {
  sep();
  out_ << s;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
}

void write_background_csv(const std::filesystem::path& path, const hitchin::ConformalBackground& bg) {
  const auto& lat = bg.lattice();
  CsvWriter w(path, {"kind", "h", "nx", "ny"});
  w << (lat.kind() == hitchin::DomainKind::torus ? "torus" : "disk") << lat.hx() << lat.nx() << lat.ny();
  w.end_row();
  w << "x" << "y" << "sigma" << "kappa";
  w.end_row();
  for (std::size_t k = 0; k < lat.size(); ++k) {
    if (!lat.active(k)) continue;
    w << lat.z(k).real() << lat.z(k).imag() << bg.sigma()[k] << bg.kappa()[k];
    w.end_row();
  }
}

void write_solution_csv(const std::filesystem::path& path, const hitchin::ConformalBackground& bg,
                        const hitchin::SolutionPair& sol) {
  const auto& lat = bg.lattice();
  CsvWriter w(path, {"x", "y", "psi1", "psi2"});
  for (std::size_t k = 0; k < lat.size(); ++k) {
    if (!lat.active(k)) continue;
    w << lat.z(k).real() << lat.z(k).imag() << sol.psi1[k] << sol.psi2[k];
    w.end_row();
  }
}

}  // namespace lab
