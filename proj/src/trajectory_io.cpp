#include <json.hpp>

#include <istream>
#include <ostream>

#include "detail/format.hpp"
#include "detail/json_matrix.hpp"
#include "seqrd/planner.hpp"

namespace seqrd {

using detail::write_json_matrix;
using detail::write_json_number;

void write_trajectory_json(std::ostream& os, const Trajectory& traj, const Multipliers& mult) {
  os << "{\n  \"multipliers\": {\"gamma_c\": ";
  write_json_number(os, mult.gamma_c);
  os << ", \"gamma_m\": ";
  write_json_number(os, mult.gamma_m);
  os << ", \"gamma_s\": ";
  write_json_number(os, mult.gamma_s);
  os << "},\n  \"total_cost\": ";
  write_json_number(os, traj.total_cost);
  os << ",\n  \"distortion\": ";
  write_json_number(os, traj.distortion);
  os << ",\n  \"i_c\": ";
  write_json_number(os, traj.i_c);
  os << ",\n  \"i_m\": ";
  write_json_number(os, traj.i_m);
  os << ",\n  \"i_s\": ";
  write_json_number(os, traj.i_s);
  os << ",\n  \"iterations\": " << traj.iterations << ",\n  \"converged\": " << (traj.converged ? "true" : "false");
  os << ",\n  \"steps\": [";
  for (std::size_t t = 0; t < traj.policies.size(); ++t) {
    const auto& r = traj.reports[t];
    os << (t ? ",\n" : "\n") << "    {\n      \"t\": " << t + 1;
    os << ",\n      \"report\": {\"distortion\": ";
    write_json_number(os, r.distortion);
    os << ", \"i_c\": ";
    write_json_number(os, r.i_c);
    os << ", \"i_m\": ";
    write_json_number(os, r.i_m);
    os << ", \"i_s\": ";
    write_json_number(os, r.i_s);
    os << ", \"entropy_q\": ";
    write_json_number(os, r.entropy_q);
    os << ", \"lagrangian\": ";
    write_json_number(os, r.lagrangian);
    os << "},\n      \"belief\": ";
    write_json_matrix(os, traj.beliefs[t].table, "      ");
    os << ",\n      \"policy\": ";
    write_json_matrix(os, traj.policies[t].table, "      ");
    os << ",\n      \"nu\": ";
    write_json_matrix(os, traj.nus[t].table, "      ");
    os << "\n    }";
  }
  os << "\n  ]\n}\n";
}

Policy read_trajectory_policies(std::istream& is) {
  const auto doc = nlohmann::json::parse(is);
  Policy policies;
  for (const auto& step : doc.at("steps")) {
    const auto& rows = step.at("policy");
    const auto num_rows = static_cast<Eigen::Index>(rows.size());
    const auto num_mem = static_cast<Eigen::Index>(rows.at(0).size());
    if (num_mem == 0 || num_rows % num_mem != 0) throw std::runtime_error("malformed policy table in trajectory");
    StepPolicy q(static_cast<int>(num_mem), static_cast<int>(num_rows / num_mem));
    for (Eigen::Index r = 0; r < num_rows; ++r) {
      for (Eigen::Index c = 0; c < num_mem; ++c) q.table(r, c) = rows.at(r).at(c).get<double>();
    }
    policies.push_back(std::move(q));
  }
  return policies;
}

}  // namespace seqrd
