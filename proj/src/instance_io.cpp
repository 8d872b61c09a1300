#include "hcpcut/instance_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace hcpcut {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const std::set<std::string> kFields = {"n", "dx", "dy", "dz", "mode_exactly_one", "Q", "R", "S",
                                       "A", "B", "C", "f", "G", "H", "lb", "ub", "lin_x",
                                       "lin_y", "x_init", "obj_offset"};

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ParseError("field '" + field + "': expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ParseError("field '" + field + "': expected an integer");
  return j.get<int>();
}

Vec vector_of(const json& j, const std::string& field) {
  if (!j.is_array()) throw ParseError("field '" + field + "': expected an array");
  Vec v(j.size());
  for (size_t i = 0; i < j.size(); ++i)
    v[i] = number(j[i], field + "[" + std::to_string(i) + "]");
  return v;
}

Mat matrix_of(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ParseError("field '" + field + "': expected a matrix");
  size_t rows = j.size();
  if (!j[0].is_array()) throw ParseError("field '" + field + "': expected nested rows");
  size_t cols = j[0].size();
  Mat M(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    std::string rf = field + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != cols)
      throw ParseError("field '" + rf + "': ragged matrix row");
    for (size_t c = 0; c < cols; ++c) M(r, c) = number(j[r][c], rf);
  }
  return M;
}

std::vector<Mat> matrices(const json& root, const char* key) {
  if (!root.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  const json& j = root.at(key);
  if (!j.is_array()) throw ParseError(std::string("field '") + key + "': expected per-period array");
  std::vector<Mat> out;
  for (size_t t = 0; t < j.size(); ++t)
    out.push_back(matrix_of(j[t], std::string(key) + "[" + std::to_string(t) + "]"));
  return out;
}

std::vector<Vec> vectors(const json& root, const char* key, bool required) {
  if (!root.contains(key)) {
    if (required) throw ParseError(std::string("missing field '") + key + "'");
    return {};
  }
  const json& j = root.at(key);
  if (!j.is_array()) throw ParseError(std::string("field '") + key + "': expected per-period array");
  std::vector<Vec> out;
  for (size_t t = 0; t < j.size(); ++t)
    out.push_back(vector_of(j[t], std::string(key) + "[" + std::to_string(t) + "]"));
  return out;
}

ordered_json to_json(const Vec& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

ordered_json to_json(const Mat& M) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    a.push_back(row);
  }
  return a;
}

template <class T>
ordered_json list(const std::vector<T>& xs) {
  ordered_json a = ordered_json::array();
  for (const auto& x : xs) a.push_back(to_json(x));
  return a;
}

}  // namespace

HcpInstance parse_instance(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    size_t line = 1 + std::count(text.begin(), text.begin() + std::min(e.byte, text.size()), '\n');
    throw ParseError("line " + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
  }
  if (!root.is_object()) throw ParseError("top level must be an object");
  for (const auto& [key, _] : root.items())
    if (!kFields.count(key)) throw ParseError("unknown field '" + key + "'");

  HcpInstance in;
  for (const char* k : {"n", "dx", "dy", "dz"})
    if (!root.contains(k)) throw ParseError(std::string("missing field '") + k + "'");
  in.n = integer(root["n"], "n");
  in.dx = integer(root["dx"], "dx");
  in.dy = integer(root["dy"], "dy");
  in.dz = integer(root["dz"], "dz");
  if (root.contains("mode_exactly_one")) {
    if (!root["mode_exactly_one"].is_boolean())
      throw ParseError("field 'mode_exactly_one': expected true/false");
    in.mode_exactly_one = root["mode_exactly_one"].get<bool>();
  }
  in.Q = matrices(root, "Q");
  in.R = matrices(root, "R");
  in.S = matrices(root, "S");
  in.A = matrices(root, "A");
  in.B = matrices(root, "B");
  in.C = matrices(root, "C");
  in.G = matrices(root, "G");
  in.H = matrices(root, "H");
  in.f = vectors(root, "f", true);
  in.lb = vectors(root, "lb", true);
  in.ub = vectors(root, "ub", true);
  in.lin_x = vectors(root, "lin_x", false);
  in.lin_y = vectors(root, "lin_y", false);
  if (root.contains("x_init")) in.x_init = vector_of(root["x_init"], "x_init");
  if (root.contains("obj_offset")) in.obj_offset = number(root["obj_offset"], "obj_offset");

  auto rep = validate(in, false);
  if (!rep.ok()) throw ParseError("instance violates invariants:\n" + rep.to_string());
  return in;
}

std::string serialize_instance(const HcpInstance& in) {
  ordered_json j;
  j["n"] = in.n;
  j["dx"] = in.dx;
  j["dy"] = in.dy;
  j["dz"] = in.dz;
  j["mode_exactly_one"] = in.mode_exactly_one;
  j["Q"] = list(in.Q);
  j["R"] = list(in.R);
  j["S"] = list(in.S);
  j["A"] = list(in.A);
  j["B"] = list(in.B);
  j["C"] = list(in.C);
  j["f"] = list(in.f);
  j["G"] = list(in.G);
  j["H"] = list(in.H);
  j["lb"] = list(in.lb);
  j["ub"] = list(in.ub);
  if (!in.lin_x.empty()) j["lin_x"] = list(in.lin_x);
  if (!in.lin_y.empty()) j["lin_y"] = list(in.lin_y);
  if (in.x_init) j["x_init"] = to_json(*in.x_init);
  if (in.obj_offset != 0.0) j["obj_offset"] = in.obj_offset;
  return j.dump(1) + "\n";
}

HcpInstance read_instance_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_instance(ss.str());
}

void write_instance_file(const std::string& path, const HcpInstance& inst) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  os << serialize_instance(inst);
  if (!os) throw IoError("write failed for " + path);
}

}  // namespace hcpcut
