#include "gslab/field_io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace gslab {

using nlohmann::json;

namespace {

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

double parse_double(const std::string& s) {
  return std::strtod(s.c_str(), nullptr);
}

}  // namespace

void save_field(const ScalarField& f, const std::string& stem, const std::string& name) {
  require_finite(f, "save_field");
  const Grid& g = *f.grid;
  json header;
  header["dim"] = g.dim;
  header["lo"] = std::vector<double>(g.lo.begin(), g.lo.begin() + g.dim);
  header["hi"] = std::vector<double>(g.hi.begin(), g.hi.begin() + g.dim);
  header["n_nodes"] = std::vector<int>(g.n_nodes.begin(), g.n_nodes.begin() + g.dim);
  header["name"] = name;
  header["truncated_unbounded"] = g.truncated_unbounded;
  header["count"] = f.values.size();

  std::ofstream hs(stem + ".json");
  if (!hs) throw Error("save_field: cannot open " + stem + ".json");
  hs << header.dump(2) << "\n";

  std::ofstream bs(stem + ".bin", std::ios::binary);
  if (!bs) throw Error("save_field: cannot open " + stem + ".bin");
  // Payload is little-endian IEEE float64; written natively (x86/aarch64).
  bs.write(reinterpret_cast<const char*>(f.values.data()),
           static_cast<std::streamsize>(f.values.size() * sizeof(double)));
}

ScalarField load_field(const std::string& stem, std::string* name) {
  std::ifstream hs(stem + ".json");
  if (!hs) throw Error("load_field: cannot open " + stem + ".json");
  json header = json::parse(hs);
  const int dim = header.at("dim").get<int>();
  Point lo{0.0, 0.0}, hi{0.0, 0.0};
  std::array<int, 2> nn{1, 1};
  for (int a = 0; a < dim; ++a) {
    lo[a] = header.at("lo").at(a).get<double>();
    hi[a] = header.at("hi").at(a).get<double>();
    nn[a] = header.at("n_nodes").at(a).get<int>();
  }
  const bool trunc = header.value("truncated_unbounded", false);
  GridPtr grid = build_grid(dim, lo, hi, nn, trunc);
  ScalarField f(grid);
  std::ifstream bs(stem + ".bin", std::ios::binary);
  if (!bs) throw Error("load_field: cannot open " + stem + ".bin");
  bs.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (static_cast<std::size_t>(bs.gcount()) != f.values.size() * sizeof(double)) {
    throw Error("load_field: payload size mismatch in " + stem + ".bin");
  }
  if (name) *name = header.value("name", "");
  require_finite(f, "load_field");
  return f;
}

void save_field_csv(const ScalarField& f, const std::string& path, const std::string& name) {
  require_finite(f, "save_field_csv");
  const Grid& g = *f.grid;
  std::ofstream os(path);
  if (!os) throw Error("save_field_csv: cannot open " + path);
  os << "# name=" << name << " dim=" << g.dim;
  os << " lo=" << fmt_double(g.lo[0]);
  if (g.dim == 2) os << "," << fmt_double(g.lo[1]);
  os << " hi=" << fmt_double(g.hi[0]);
  if (g.dim == 2) os << "," << fmt_double(g.hi[1]);
  os << " n=" << g.n_nodes[0];
  if (g.dim == 2) os << "," << g.n_nodes[1];
  os << " truncated=" << (g.truncated_unbounded ? 1 : 0) << "\n";
  const int n = g.node_count();
  for (int i = 0; i < n; ++i) {
    const Point x = g.node(i);
    os << fmt_double(x[0]);
    if (g.dim == 2) os << "," << fmt_double(x[1]);
    os << "," << fmt_double(f.values[static_cast<std::size_t>(i)]) << "\n";
  }
}

ScalarField load_field_csv(const std::string& path, std::string* name) {
  std::ifstream is(path);
  if (!is) throw Error("load_field_csv: cannot open " + path);
  std::string header;
  if (!std::getline(is, header) || header.empty() || header[0] != '#') {
    throw Error("load_field_csv: missing metadata line in " + path);
  }
  auto grab = [&header, &path](const std::string& key) {
    const std::string tag = " " + key + "=";
    auto pos = header.find(tag);
    if (pos == std::string::npos) throw Error("load_field_csv: missing " + key + " in " + path);
    pos += tag.size();
    auto end = header.find(' ', pos);
    return header.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
  };
  const int dim = std::stoi(grab("dim"));
  auto split2 = [](const std::string& s) {
    auto comma = s.find(',');
    if (comma == std::string::npos) return std::pair<std::string, std::string>{s, ""};
    return std::pair<std::string, std::string>{s.substr(0, comma), s.substr(comma + 1)};
  };
  const auto [lo0, lo1] = split2(grab("lo"));
  const auto [hi0, hi1] = split2(grab("hi"));
  const auto [n0, n1] = split2(grab("n"));
  Point lo{parse_double(lo0), dim == 2 ? parse_double(lo1) : 0.0};
  Point hi{parse_double(hi0), dim == 2 ? parse_double(hi1) : 0.0};
  std::array<int, 2> nn{std::stoi(n0), dim == 2 ? std::stoi(n1) : 1};
  const bool trunc = std::stoi(grab("truncated")) != 0;
  GridPtr grid = build_grid(dim, lo, hi, nn, trunc);
  ScalarField f(grid);
  std::string line;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (row >= f.values.size()) throw Error("load_field_csv: too many rows in " + path);
    const auto last_comma = line.rfind(',');
    if (last_comma == std::string::npos) throw Error("load_field_csv: malformed row in " + path);
    f.values[row] = parse_double(line.substr(last_comma + 1));
    ++row;
  }
  if (row != f.values.size()) throw Error("load_field_csv: row count mismatch in " + path);
  if (name) {
    const std::string n = grab("name");
    *name = n;
  }
  require_finite(f, "load_field_csv");
  return f;
}

}  // namespace gslab
