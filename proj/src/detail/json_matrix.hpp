#pragma once

#include <Eigen/Core>
#include <json.hpp>

#include <ostream>
#include <string>

#include "detail/format.hpp"

namespace seqrd::detail {

inline void write_json_vector(std::ostream& os, const Eigen::VectorXd& v) {
  os << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) os << ", ";
    write_json_number(os, v(i));
  }
  os << ']';
}

inline void write_json_matrix(std::ostream& os, const Eigen::MatrixXd& m, const std::string& indent) {
  os << "[\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    os << indent << "  [";
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) os << ", ";
      write_json_number(os, m(r, c));
    }
    os << (r + 1 < m.rows() ? "],\n" : "]\n");
  }
  os << indent << ']';
}

}  // namespace seqrd::detail
