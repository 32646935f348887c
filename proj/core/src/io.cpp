#include "cutlim/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cutlim {

namespace {

using nlohmann::json;

void append_double_array(std::string& out, std::span<const double> values) {
  out += '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  out += ']';
}

json parse(const std::string& text) {
  json j = json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("expected a JSON object");
  return j;
}

std::vector<double> double_array(const json& j, const char* field) {
  if (!j.contains(field) || !j[field].is_array()) {
    throw std::invalid_argument(std::string("missing array field: ") + field);
  }
  std::vector<double> out;
  for (const auto& v : j[field]) out.push_back(v.get<double>());
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string to_json(const DiscreteMeasure& mu) {
  std::string out = "{\"q\":" + std::to_string(mu.alphabet().size) +
                    ",\"n\":" + std::to_string(mu.dimension()) + ",\"support\":[";
  bool first = true;
  for (const auto& [c, w] : mu.support()) {
    if (!first) out += ',';
    first = false;
    out += "{\"config\":[";
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(static_cast<int>(c[i]));
    }
    out += "],\"p\":";
    out += format_double(w);
    out += '}';
  }
  out += "]}";
  return out;
}

std::string to_json(const StepKernel& kappa) {
  std::string out = "{\"q\":" + std::to_string(kappa.alphabet.size) + ",\"row_weights\":";
  append_double_array(out, kappa.row_weights);
  out += ",\"col_weights\":";
  append_double_array(out, kappa.col_weights);
  out += ",\"blocks\":[";
  for (int i = 0; i < kappa.num_rows(); ++i) {
    if (i) out += ',';
    out += '[';
    for (int j = 0; j < kappa.num_cols(); ++j) {
      if (j) out += ',';
      append_double_array(out, kappa.block(i, j));
    }
    out += ']';
  }
  out += "]}";
  return out;
}

std::string to_json(const Law& mu) {
  std::string out = "{\"q\":" + std::to_string(mu.alphabet.size) + ",\"col_weights\":";
  append_double_array(out, mu.col_weights);
  out += ",\"atoms\":[";
  for (int a = 0; a < mu.num_atoms(); ++a) {
    if (a) out += ',';
    out += "{\"w\":";
    out += format_double(mu.atoms[static_cast<std::size_t>(a)].weight);
    out += ",\"values\":[";
    for (int c = 0; c < mu.num_cols(); ++c) {
      if (c) out += ',';
      append_double_array(out, mu.cell(a, c));
    }
    out += "]}";
  }
  out += "]}";
  return out;
}

DiscreteMeasure measure_from_json(const std::string& text) {
  json j = parse(text);
  const int q = j.at("q").get<int>();
  const int n = j.at("n").get<int>();
  std::vector<DiscreteMeasure::Entry> entries;
  for (const auto& item : j.at("support")) {
    Config c;
    for (const auto& s : item.at("config")) c.push_back(static_cast<std::uint8_t>(s.get<int>()));
    entries.emplace_back(std::move(c), item.at("p").get<double>());
  }
  return DiscreteMeasure(Alphabet{q}, n, std::move(entries));
}

StepKernel kernel_from_json(const std::string& text) {
  json j = parse(text);
  StepKernel k;
  k.alphabet = Alphabet{j.at("q").get<int>()};
  k.row_weights = double_array(j, "row_weights");
  k.col_weights = double_array(j, "col_weights");
  const auto& blocks = j.at("blocks");
  for (const auto& row : blocks) {
    for (const auto& cell : row) {
      for (const auto& v : cell) k.blocks.push_back(v.get<double>());
    }
  }
  k.validate();
  if (blocks.size() != k.row_weights.size()) throw std::invalid_argument("kernel JSON: row count mismatch");
  return k;
}

Law law_from_json(const std::string& text) {
  json j = parse(text);
  Law law;
  law.alphabet = Alphabet{j.at("q").get<int>()};
  law.col_weights = double_array(j, "col_weights");
  for (const auto& item : j.at("atoms")) {
    LawAtom atom;
    atom.weight = item.at("w").get<double>();
    for (const auto& cell : item.at("values")) {
      for (const auto& v : cell) atom.values.push_back(v.get<double>());
    }
    law.atoms.push_back(std::move(atom));
  }
  law.canonicalize();
  law.validate();
  return law;
}

JsonKind detect_json_kind(const std::string& text) {
  json j = parse(text);
  if (j.contains("support")) return JsonKind::kMeasure;
  if (j.contains("blocks")) return JsonKind::kKernel;
  if (j.contains("atoms")) return JsonKind::kLaw;
  throw std::invalid_argument("unrecognised JSON object (need support/blocks/atoms)");
}

std::string to_csv(const RealMatrix& a) {
  std::string out = std::to_string(a.rows) + "," + std::to_string(a.cols) + "\n";
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < a.cols; ++j) {
      if (j) out += ',';
      out += format_double(a.value(i, j));
    }
    out += '\n';
  }
  return out;
}

RealMatrix matrix_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("matrix CSV: empty input");
  int m = 0, n = 0;
  if (std::sscanf(line.c_str(), "%d,%d", &m, &n) != 2 || m < 1 || n < 1) {
    throw std::invalid_argument("matrix CSV: header must be \"m,n\"");
  }
  RealMatrix a = RealMatrix::zeros(m, n);
  for (int i = 0; i < m; ++i) {
    if (!std::getline(in, line)) throw std::invalid_argument("matrix CSV: missing row");
    std::istringstream row(line);
    std::string cell;
    for (int j = 0; j < n; ++j) {
      if (!std::getline(row, cell, ',')) throw std::invalid_argument("matrix CSV: short row");
      a.value(i, j) = std::stod(cell);
    }
  }
  a.validate();
  return a;
}

std::string to_pgm(const StepKernel& kappa, int symbol, int width, int height) {
  if (symbol < 0 || symbol >= kappa.alphabet.size) throw std::out_of_range("to_pgm: symbol out of range");
  if (width < 1 || height < 1) throw std::invalid_argument("to_pgm: empty image");
  auto cell_of = [](const std::vector<double>& weights, double point) {
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (point < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  };
  std::vector<int> col_cell(static_cast<std::size_t>(width));
  for (int c = 0; c < width; ++c) col_cell[static_cast<std::size_t>(c)] = cell_of(kappa.col_weights, (c + 0.5) / width);

  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int r = 0; r < height; ++r) {
    const int row = cell_of(kappa.row_weights, (r + 0.5) / height);
    for (int c = 0; c < width; ++c) {
      const double v = kappa.at(row, col_cell[static_cast<std::size_t>(c)], symbol);
      const int pixel = static_cast<int>(std::floor(255.0 * v + 0.5));
      out += static_cast<char>(std::clamp(pixel, 0, 255));
    }
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

}  // namespace cutlim
