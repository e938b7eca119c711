#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "expca/axes.hpp"
#include "expca/table_io.hpp"
#include "text_utils.hpp"

namespace expca {

using detail::split_tabs;

namespace {

constexpr int kFormatVersion = 1;
constexpr double kOrthonormalityTol = 1e-8;

double parse_model_number(const std::string &token, const char *where) {
  const char *begin = token.c_str();
  char *end = nullptr;
  const double value = std::strtod(begin, &end);
  if (token.empty() || end != begin + token.size())
    fail(std::string("model file: bad number '") + token + "' in " + where);
  if (!std::isfinite(value))
    fail(std::string("model file: non-finite value in ") + where);
  return value;
}

std::string next_line(std::istream &in, const char *what) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }
  fail(std::string("model file: unexpected end of file, expected ") + what);
}

void expect_section(std::istream &in, const std::string &name) {
  const std::string line = next_line(in, name.c_str());
  if (line != name) fail("model file: expected section '" + name + "', found '" + line + "'");
}

void check_orthonormal(const Matrix &factor, const char *name) {
  const Matrix gram = factor.transpose() * factor;
  const Matrix deviation =
      gram - Matrix::Identity(factor.cols(), factor.cols());
  if (deviation.array().abs().maxCoeff() > kOrthonormalityTol)
    fail(std::string("corrupt model: ") + name + " columns are not orthonormal");
}

}  // namespace

void save_model(const AxesModel &model, std::ostream &out) {
  const int k = model.k();
  const int m = model.m();
  out << "expca-model v" << kFormatVersion << "\n";
  out << "n_T " << model.n_T << "  k " << k << "  m " << m << "\n";
  out << "#reference\n";
  for (int j = 0; j < m; ++j)
    out << model.variable_ids[static_cast<std::size_t>(j)] << '\t'
        << format_double(model.reference.values[j]) << "\n";
  out << "#singulars\n";
  for (int i = 0; i < k; ++i) out << (i ? "\t" : "") << format_double(model.singulars[i]);
  out << "\n#right\n";
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < k; ++i) out << (i ? "\t" : "") << format_double(model.right(j, i));
    out << "\n";
  }
  out << "#left\n";
  for (int r = 0; r < model.n_T; ++r) {
    out << model.unit_labels[static_cast<std::size_t>(r)];
    for (int i = 0; i < k; ++i) out << '\t' << format_double(model.left(r, i));
    out << "\n";
  }
}

std::size_t save_model_file(const AxesModel &model, const std::string &path) {
  std::ostringstream buffer;
  save_model(model, buffer);
  const std::string content = buffer.str();
  atomic_write_file(path, content);
  return content.size();
}

AxesModel load_model(std::istream &in) {
  // Provenance comments ("# ...") may precede the version line; section
  // markers like "#reference" never contain a space, so "# " is unambiguous.
  std::string magic = next_line(in, "header");
  while (magic.rfind("# ", 0) == 0 || magic == "#") magic = next_line(in, "header");
  if (magic.rfind("expca-model v", 0) != 0) fail("model file: missing 'expca-model' header");
  const std::string version_token = magic.substr(13);
  char *end = nullptr;
  const long version = std::strtol(version_token.c_str(), &end, 10);
  if (version_token.empty() || *end != '\0')
    fail("model file: malformed version '" + version_token + "'");
  if (version != kFormatVersion)
    fail("model file: unsupported format version " + std::to_string(version));

  std::istringstream dims(next_line(in, "dimensions"));
  std::string key_n, key_k, key_m;
  long n_T = 0, k = 0, m = 0;
  if (!(dims >> key_n >> n_T >> key_k >> k >> key_m >> m) || key_n != "n_T" || key_k != "k" ||
      key_m != "m")
    fail("model file: malformed dimension line");
  if (n_T < 1 || k < 1 || m < 1) fail("model file: dimensions must be positive");
  if (k > std::min<long>(n_T, m)) fail("model file: k exceeds min(n_T, m)");

  AxesModel model;
  model.format_version = static_cast<int>(version);
  model.n_T = static_cast<int>(n_T);

  expect_section(in, "#reference");
  model.reference.values = Vector(m);
  for (long j = 0; j < m; ++j) {
    const auto cells = split_tabs(next_line(in, "#reference row"));
    if (cells.size() != 2 || cells[0].empty())
      fail("model file: malformed #reference row " + std::to_string(j + 1));
    model.variable_ids.push_back(cells[0]);
    model.reference.values[j] = parse_model_number(cells[1], "#reference");
  }
  model.reference.variable_ids = model.variable_ids;
  {
    std::set<std::string> unique(model.variable_ids.begin(), model.variable_ids.end());
    if (static_cast<long>(unique.size()) != m)
      fail("model file: duplicate variable IDs in #reference");
  }

  expect_section(in, "#singulars");
  {
    const auto cells = split_tabs(next_line(in, "#singulars row"));
    if (static_cast<long>(cells.size()) != k) fail("model file: #singulars shape mismatch");
    model.singulars = Vector(k);
    for (long i = 0; i < k; ++i)
      model.singulars[i] = parse_model_number(cells[static_cast<std::size_t>(i)], "#singulars");
  }
  for (long i = 0; i < k; ++i) {
    if (model.singulars[i] < 0.0) fail("model file: negative singular value");
    if (i > 0 && model.singulars[i] > model.singulars[i - 1])
      fail("model file: singular values are not non-increasing");
  }

  expect_section(in, "#right");
  model.right = Matrix(m, k);
  for (long j = 0; j < m; ++j) {
    const auto cells = split_tabs(next_line(in, "#right row"));
    if (static_cast<long>(cells.size()) != k)
      fail("model file: #right row " + std::to_string(j + 1) + " shape mismatch");
    for (long i = 0; i < k; ++i)
      model.right(j, i) = parse_model_number(cells[static_cast<std::size_t>(i)], "#right");
  }

  expect_section(in, "#left");
  model.left = Matrix(n_T, k);
  for (long r = 0; r < n_T; ++r) {
    const auto cells = split_tabs(next_line(in, "#left row"));
    if (static_cast<long>(cells.size()) != k + 1 || cells[0].empty())
      fail("model file: #left row " + std::to_string(r + 1) + " shape mismatch");
    model.unit_labels.push_back(cells[0]);
    for (long i = 0; i < k; ++i)
      model.left(r, i) = parse_model_number(cells[static_cast<std::size_t>(i + 1)], "#left");
  }

  check_orthonormal(model.right, "right");
  check_orthonormal(model.left, "left");
  return model;
}

AxesModel load_model_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) fail("cannot open model file '" + path + "'");
  return load_model(in);
}

}  // namespace expca
