#include "evtrack/modelio.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace evtrack {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_array(const std::string& key,
                                const std::string& value) {
  std::string body = trim(value);
  if (body.size() >= 2 && body.front() == '[' && body.back() == ']') {
    body = body.substr(1, body.size() - 2);
  }
  for (char& c : body) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(body);
  std::vector<double> out;
  double v;
  while (in >> v) out.push_back(v);
  std::string rest;
  if (in.fail() && !in.eof() && (in.clear(), in >> rest, !rest.empty())) {
    throw ConfigError(key + ": bad numeric literal '" + rest + "'");
  }
  if (out.empty()) throw ConfigError(key + ": empty array");
  return out;
}

Matrix to_matrix(const std::string& key, const std::vector<double>& v,
                 int dim) {
  if (static_cast<int>(v.size()) != dim * dim) {
    throw ConfigError(key + ": expected " + std::to_string(dim * dim) +
                      " entries, got " + std::to_string(v.size()));
  }
  Matrix M(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      M(i, j) = v[static_cast<std::size_t>(i * dim + j)];
    }
  }
  return M;
}

}  // namespace

StateSpaceModel parse_model(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    }
    kv[key] = trim(line.substr(eq + 1));
  }
  for (const char* required : {"dim", "A", "B", "Sigma0"}) {
    if (kv.find(required) == kv.end()) {
      throw ConfigError(std::string(required) + ": missing key");
    }
  }
  int dim = 0;
  try {
    dim = std::stoi(kv["dim"]);
  } catch (const std::exception&) {
    throw ConfigError("dim: not an integer");
  }
  if (dim < 1 || dim > 64) throw ConfigError("dim: out of range [1, 64]");
  const Matrix A = to_matrix("A", parse_array("A", kv["A"]), dim);
  const Matrix B = to_matrix("B", parse_array("B", kv["B"]), dim);
  const Matrix S0 = to_matrix("Sigma0", parse_array("Sigma0", kv["Sigma0"]),
                              dim);
  return make_model(A, B, S0);
}

StateSpaceModel load_model(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError(path + ": cannot open");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_model(buf.str());
}

}  // namespace evtrack
