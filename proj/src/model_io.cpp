#include <json.hpp>

#include <fstream>
#include <sstream>

#include "detail/format.hpp"
#include "detail/json_matrix.hpp"
#include "seqrd/model.hpp"

namespace seqrd {

namespace {

using nlohmann::json;

const json& require(const json& doc, const char* field) {
  auto it = doc.find(field);
  if (it == doc.end()) throw ModelError(std::string("parse error: missing field \"") + field + "\"");
  return *it;
}

int read_int(const json& doc, const char* field) {
  const json& v = require(doc, field);
  if (!v.is_number_integer()) throw ModelError(std::string("parse error: field \"") + field + "\" must be an integer");
  return v.get<int>();
}

double read_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ModelError("parse error: " + where + " is not a number");
  return v.get<double>();
}

Vector read_vector(const json& doc, const char* field) {
  const json& v = require(doc, field);
  if (!v.is_array()) throw ModelError(std::string("parse error: field \"") + field + "\" must be an array");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = read_number(v[i], std::string(field) + "[" + std::to_string(i) + "]");
  }
  return out;
}

Matrix read_matrix(const json& doc, const char* field) {
  const json& v = require(doc, field);
  if (!v.is_array()) throw ModelError(std::string("parse error: field \"") + field + "\" must be an array of rows");
  const std::size_t rows = v.size();
  const std::size_t cols = rows ? v[0].size() : 0;
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const json& row = v[r];
    if (!row.is_array() || row.size() != cols) {
      throw ModelError(std::string("parse error: field \"") + field + "\" row " + std::to_string(r) +
                       " is ragged or not an array");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          read_number(row[c], std::string(field) + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
  }
  return out;
}

std::string line_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return std::to_string(line);
}

}  // namespace

ModelSpec parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ModelError("parse error at line " + line_of(text, e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) throw ModelError("parse error: model file must hold a JSON object");

  ModelSpec spec;
  spec.num_world = read_int(doc, "num_world");
  spec.num_obs = read_int(doc, "num_obs");
  spec.num_mem = read_int(doc, "num_mem");
  spec.horizon = read_int(doc, "horizon");
  spec.init_world = read_vector(doc, "init_world");
  spec.init_mem = read_vector(doc, "init_mem");
  spec.trans = read_matrix(doc, "trans");
  spec.obs = read_matrix(doc, "obs");
  spec.cost = read_matrix(doc, "cost");
  return validate(std::move(spec));
}

std::string serialize_model(const ModelSpec& spec) {
  std::ostringstream os;
  os << "{\n";
  os << "  \"num_world\": " << spec.num_world << ",\n";
  os << "  \"num_obs\": " << spec.num_obs << ",\n";
  os << "  \"num_mem\": " << spec.num_mem << ",\n";
  os << "  \"horizon\": " << spec.horizon << ",\n";
  os << "  \"init_world\": ";
  detail::write_json_vector(os, spec.init_world);
  os << ",\n  \"init_mem\": ";
  detail::write_json_vector(os, spec.init_mem);
  os << ",\n  \"trans\": ";
  detail::write_json_matrix(os, spec.trans, "  ");
  os << ",\n  \"obs\": ";
  detail::write_json_matrix(os, spec.obs, "  ");
  os << ",\n  \"cost\": ";
  detail::write_json_matrix(os, spec.cost, "  ");
  os << "\n}\n";
  return os.str();
}

ModelSpec load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

void save_model(const ModelSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ModelError("cannot write model file " + path.string());
  out << serialize_model(spec);
  if (!out) throw ModelError("write failed for " + path.string());
}

}  // namespace seqrd
