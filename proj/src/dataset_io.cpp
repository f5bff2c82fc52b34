#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fedsel/error.hpp"
#include "fedsel/fedtrain.hpp"

namespace fedsel {
namespace {

void write_rows(std::ostream& os, long client, const char* split, const Dataset& d) {
  char buf[32];
  for (std::size_t i = 0; i < d.size(); ++i) {
    os << client << ',' << split << ',' << d.labels[i];
    for (double v : d.row(i)) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << ',' << buf;
    }
    os << '\n';
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  return out;
}

}  // namespace

void write_partition_csv(const Partition& partition, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << "client,split,label";
  for (std::size_t j = 0; j < partition.dim; ++j) os << ",x" << j;
  os << '\n';
  for (std::size_t n = 0; n < partition.clients(); ++n) {
    write_rows(os, static_cast<long>(n), "train", partition.train[n]);
    write_rows(os, static_cast<long>(n), "test", partition.test[n]);
  }
  write_rows(os, -1, "global", partition.global_test);
  if (!os) throw IoError("write failed: " + path);
}

Partition read_partition_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw ConfigError(path + ": missing header");
  const auto header = split_csv(line);
  if (header.size() < 4 || header[0] != "client" || header[1] != "split" || header[2] != "label")
    throw ConfigError(path + ": unexpected header");
  Partition p;
  p.dim = header.size() - 3;
  p.global_test.dim = p.dim;

  std::vector<double> x(p.dim);
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != header.size()) throw ConfigError(path + ":" + std::to_string(lineno) + ": wrong field count");
    long client = 0;
    int label = 0;
    try {
      client = std::stol(f[0]);
      label = std::stoi(f[2]);
      for (std::size_t j = 0; j < p.dim; ++j) x[j] = std::stod(f[3 + j]);
    } catch (const std::exception&) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed number");
    }
    if (label != 1 && label != -1) throw ConfigError(path + ":" + std::to_string(lineno) + ": label must be +-1");
    if (f[1] == "global") {
      p.global_test.push_back(x, label);
      continue;
    }
    if (client < 0) throw ConfigError(path + ":" + std::to_string(lineno) + ": negative client id");
    const auto c = static_cast<std::size_t>(client);
    if (c >= p.train.size()) {
      p.train.resize(c + 1, Dataset{p.dim, {}, {}});
      p.test.resize(c + 1, Dataset{p.dim, {}, {}});
    }
    if (f[1] == "train")
      p.train[c].push_back(x, label);
    else if (f[1] == "test")
      p.test[c].push_back(x, label);
    else
      throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown split '" + f[1] + "'");
  }
  return p;
}

}  // namespace fedsel
