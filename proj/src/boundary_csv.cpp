#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "detail/format.hpp"
#include "seqrd/boundary.hpp"

namespace seqrd {

namespace {

constexpr const char* kHeader =
    "gamma_c,gamma_m,gamma_s,r_m,r_s,i_c,i_m,i_s,distortion,lagrangian,regime,converged,iterations";
constexpr std::string_view kInfeasible = "Infeasible";

}  // namespace

void write_boundary_csv(std::ostream& os, std::span<const BoundaryPoint> points, Units units) {
  const double scale = units == Units::Bits ? 1.0 / std::log(2.0) : 1.0;
  os << kHeader << '\n';
  for (const BoundaryPoint& p : points) {
    using detail::fmt17;
    os << fmt17(p.mult.gamma_c) << ',' << fmt17(p.mult.gamma_m) << ',' << fmt17(p.mult.gamma_s) << ','
       << fmt17(p.r_m * scale) << ',' << fmt17(p.r_s * scale) << ',' << fmt17(p.i_c * scale) << ','
       << fmt17(p.i_m * scale) << ',' << fmt17(p.i_s * scale) << ',' << fmt17(p.distortion) << ','
       << fmt17(p.lagrangian) << ',' << (p.regime ? regime_name(*p.regime) : kInfeasible) << ','
       << (p.converged ? "true" : "false") << ',' << p.iterations << '\n';
  }
}

std::vector<BoundaryPoint> read_boundary_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kHeader) throw std::runtime_error("boundary CSV: missing or unexpected header");
  std::vector<BoundaryPoint> out;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 13) {
      throw std::runtime_error("boundary CSV line " + std::to_string(line_no) + ": expected 13 fields");
    }
    try {
      BoundaryPoint p;
      p.mult = {std::stod(cells[0]), std::stod(cells[1]), std::stod(cells[2])};
      p.r_m = std::stod(cells[3]);
      p.r_s = std::stod(cells[4]);
      p.i_c = std::stod(cells[5]);
      p.i_m = std::stod(cells[6]);
      p.i_s = std::stod(cells[7]);
      p.distortion = std::stod(cells[8]);
      p.lagrangian = std::stod(cells[9]);
      if (cells[10] != kInfeasible) {
        p.regime = parse_regime(cells[10]);
        if (!p.regime) throw std::invalid_argument("unknown regime '" + cells[10] + "'");
      }
      if (cells[11] != "true" && cells[11] != "false") throw std::invalid_argument("bad converged flag");
      p.converged = cells[11] == "true";
      p.iterations = std::stoi(cells[12]);
      const Classification cls = classify_regime(p.i_c, p.i_m, p.i_s, p.mult);
      p.slope_m = cls.slope_m;
      p.slope_s = cls.slope_s;
      out.push_back(p);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("boundary CSV line " + std::to_string(line_no) + ": " + e.what());
    } catch (const std::out_of_range&) {
      throw std::runtime_error("boundary CSV line " + std::to_string(line_no) + ": number out of range");
    }
  }
  return out;
}

}  // namespace seqrd
