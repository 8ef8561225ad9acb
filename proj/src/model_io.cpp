#include "sparsegd/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "sparsegd/io.hpp"

namespace sparsegd {

namespace {

std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double read_double(const std::string& tok, const char* what) {
  if (tok == "inf") return std::numeric_limits<double>::infinity();
  if (tok == "-inf") return -std::numeric_limits<double>::infinity();
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || tok.empty())
    throw IoError(std::string("model: bad ") + what + " '" + tok + "'");
  return v;
}

std::uint64_t read_uint(const std::string& tok, const char* what) {
  if (tok.empty())
    throw IoError(std::string("model: bad ") + what + " ''");
  std::uint64_t v = 0;
  for (char c : tok) {
    if (c < '0' || c > '9')
      throw IoError(std::string("model: bad ") + what + " '" + tok + "'");
    std::uint64_t digit = static_cast<std::uint64_t>(c - '0');
    if (v > (std::numeric_limits<std::uint64_t>::max() - digit) / 10)
      throw IoError(std::string("model: ") + what + " out of range: " + tok);
    v = v * 10 + digit;
  }
  return v;
}

}  // namespace

std::string format_model(const Model& m) {
  std::string out;
  out += "rule " + to_string(m.rule) + "\n";
  out += "eta " + fmt_double(m.eta) + "\n";
  out += "g " + fmt_double(m.g) + "\n";
  out += "theta " + fmt_double(m.theta) + "\n";
  out += "K " + std::to_string(m.K) + "\n";
  out += "loss " + to_string(m.loss) + "\n";
  char buf[64];
  for (const auto& [j, w] : m.weights) {
    std::snprintf(buf, sizeof(buf), "%llu:%.17g\n",
                  static_cast<unsigned long long>(j), w);
    out += buf;
  }
  return out;
}

void save_model(const std::string& path, const Model& m) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  f << format_model(m);
  if (!f.good()) throw IoError("write error on " + path);
}

Model parse_model(const std::string& text) {
  std::istringstream in(text);
  Model m;
  std::string line;
  const char* keys[6] = {"rule", "eta", "g", "theta", "K", "loss"};
  for (int k = 0; k < 6; ++k) {
    if (!std::getline(in, line))
      throw IoError("model: truncated header");
    size_t sp = line.find(' ');
    if (sp == std::string::npos || line.substr(0, sp) != keys[k])
      throw IoError(std::string("model: expected '") + keys[k] +
                    "' header, got '" + line + "'");
    std::string val = line.substr(sp + 1);
    try {
      switch (k) {
        case 0: m.rule = rule_from_string(val); break;
        case 1: m.eta = read_double(val, "eta"); break;
        case 2: m.g = read_double(val, "g"); break;
        case 3: m.theta = read_double(val, "theta"); break;
        case 4: m.K = read_uint(val, "K"); break;
        case 5: m.loss = loss_from_string(val); break;
      }
    } catch (const std::invalid_argument& e) {
      throw IoError(std::string("model: ") + e.what());
    }
  }
  std::uint64_t prev = 0;
  bool have_prev = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    size_t colon = line.find(':');
    if (colon == std::string::npos)
      throw IoError("model: bad weight line '" + line + "'");
    std::uint64_t j = read_uint(line.substr(0, colon), "weight index");
    double w = read_double(line.substr(colon + 1), "weight");
    if (!std::isfinite(w))
      throw IoError("model: non-finite weight in '" + line + "'");
    if (have_prev && j <= prev)
      throw IoError("model: weight indices must be strictly increasing");
    prev = j;
    have_prev = true;
    m.weights.emplace(j, w);
  }
  return m;
}

Model load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_model(ss.str());
}

Model make_model(const LearnerConfig& cfg,
                 const std::map<std::uint64_t, double>& weights) {
  Model m;
  m.rule = cfg.rule;
  m.loss = cfg.loss;
  m.eta = cfg.eta;
  m.g = cfg.g;
  m.theta = cfg.theta;
  m.K = cfg.K;
  m.weights = weights;
  return m;
}

}  // namespace sparsegd
