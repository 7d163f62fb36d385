#include "fastqm/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "fastqm/error.hpp"
#include "fastqm/tensorops.hpp"

namespace fastqm {

namespace {

constexpr std::array<char, 4> kMagic{'F', 'Q', 'M', '1'};

void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> buf;
  for (int i = 0; i < 8; ++i) buf[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(buf.data(), 8);
}

bool get_u64(std::istream& is, std::uint64_t& v) {
  std::array<unsigned char, 8> buf;
  if (!is.read(reinterpret_cast<char*>(buf.data()), 8)) return false;
  v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | buf[static_cast<std::size_t>(i)];
  return true;
}

std::uint64_t require_u64(std::istream& is, const char* what) {
  std::uint64_t v = 0;
  if (!get_u64(is, v)) throw IoError(std::string("FQM1: truncated file while reading ") + what);
  return v;
}

std::string read_bytes(std::istream& is, std::uint64_t n, std::uint64_t remaining, const char* what) {
  if (n > remaining) throw IoError(std::string("FQM1: ") + what + " length exceeds file size");
  std::string s(static_cast<std::size_t>(n), '\0');
  if (n > 0 && !is.read(s.data(), static_cast<std::streamsize>(n))) {
    throw IoError(std::string("FQM1: truncated file while reading ") + what);
  }
  return s;
}

std::uint64_t remaining_bytes(std::istream& is) {
  const auto here = is.tellg();
  if (here < 0) return std::numeric_limits<std::uint64_t>::max();
  is.seekg(0, std::ios::end);
  const auto end = is.tellg();
  is.seekg(here);
  return static_cast<std::uint64_t>(end - here);
}

std::string render_header(const std::vector<std::pair<std::string, std::string>>& metadata) {
  std::string out;
  for (const auto& [k, v] : metadata) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

void check_meta(const std::string& key, const std::string& value) {
  if (key.empty() || key.find_first_of("=\n") != std::string::npos) {
    throw InputError("FQM1 metadata key '" + key + "' is empty or contains '=' or a newline");
  }
  if (value.find('\n') != std::string::npos) throw InputError("FQM1 metadata value for '" + key + "' contains a newline");
}

Eigen::VectorXd as_vector(const Eigen::MatrixXd& M, const char* what) {
  if (M.cols() != 1 && M.size() != 0) throw IoError(std::string("block ") + what + " must be a column vector");
  return M.size() == 0 ? Eigen::VectorXd() : Eigen::VectorXd(M.col(0));
}

double as_scalar(const Eigen::MatrixXd& M, const char* what) {
  if (M.size() != 1) throw IoError(std::string("block ") + what + " must be 1x1");
  return M(0, 0);
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void Fqm1File::set_meta(const std::string& key, const std::string& value) {
  check_meta(key, value);
  for (auto& [k, v] : metadata) {
    if (k == key) {
      v = value;
      return;
    }
  }
  metadata.emplace_back(key, value);
}

std::optional<std::string> Fqm1File::meta(const std::string& key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return v;
  }
  return std::nullopt;
}

void Fqm1File::add_block(const std::string& name, Eigen::MatrixXd value) {
  if (name.empty()) throw InputError("FQM1 block name must not be empty");
  blocks.emplace_back(name, std::move(value));
}

bool Fqm1File::has_block(const std::string& name) const {
  for (const auto& [n, m] : blocks) {
    if (n == name) return true;
  }
  return false;
}

const Eigen::MatrixXd& Fqm1File::block(const std::string& name) const {
  for (const auto& [n, m] : blocks) {
    if (n == name) return m;
  }
  throw IoError("FQM1 file has no block named '" + name + "'");
}

void write_fqm1(std::ostream& os, const Fqm1File& file) {
  os.write(kMagic.data(), kMagic.size());
  for (const auto& [k, v] : file.metadata) check_meta(k, v);
  const std::string header = render_header(file.metadata);
  put_u64(os, header.size());
  os.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const auto& [name, M] : file.blocks) {
    put_u64(os, name.size());
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u64(os, static_cast<std::uint64_t>(M.rows()));
    put_u64(os, static_cast<std::uint64_t>(M.cols()));
    // column-major traversal, each value as its 64-bit pattern in little-endian order
    std::vector<char> buf(static_cast<std::size_t>(M.size()) * 8);
    std::size_t off = 0;
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      for (Eigen::Index i = 0; i < M.rows(); ++i) {
        const auto bits = std::bit_cast<std::uint64_t>(M(i, j));
        for (int b = 0; b < 8; ++b) buf[off++] = static_cast<char>((bits >> (8 * b)) & 0xffu);
      }
    }
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  if (!os) throw IoError("FQM1: write failed");
}

Fqm1File read_fqm1(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) throw IoError("not an FQM1 file (bad magic bytes)");
  Fqm1File file;
  const std::uint64_t header_len = require_u64(is, "header length");
  const std::string header = read_bytes(is, header_len, remaining_bytes(is), "header");
  std::istringstream lines(header);
  for (std::string line; std::getline(lines, line);) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError("FQM1: malformed header line '" + line + "'");
    file.metadata.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }

  for (;;) {
    std::uint64_t name_len = 0;
    if (!get_u64(is, name_len)) {
      if (is.gcount() == 0) break;
      throw IoError("FQM1: truncated block header");
    }
    std::string name = read_bytes(is, name_len, remaining_bytes(is), "block name");
    const std::uint64_t rows = require_u64(is, "block rows");
    const std::uint64_t cols = require_u64(is, "block cols");
    const std::uint64_t remaining = remaining_bytes(is);
    if (cols != 0 && rows > remaining / 8 / cols) throw IoError("FQM1: block '" + name + "' exceeds file size");
    const std::uint64_t bytes = rows * cols * 8;
    std::vector<unsigned char> buf(static_cast<std::size_t>(bytes));
    if (bytes > 0 && !is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes))) {
      throw IoError("FQM1: truncated data in block '" + name + "'");
    }
    Eigen::MatrixXd M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::size_t off = 0;
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      for (Eigen::Index i = 0; i < M.rows(); ++i) {
        std::uint64_t bits = 0;
        for (int b = 7; b >= 0; --b) bits = (bits << 8) | buf[off + static_cast<std::size_t>(b)];
        off += 8;
        M(i, j) = std::bit_cast<double>(bits);
      }
    }
    file.blocks.emplace_back(std::move(name), std::move(M));
  }
  return file;
}

void write_fqm1(const std::filesystem::path& path, const Fqm1File& file) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  write_fqm1(os, file);
}

Fqm1File read_fqm1(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  return read_fqm1(is);
}

Eigen::MatrixXd read_csv_matrix(std::istream& is) {
  std::vector<double> values;
  Eigen::Index cols = -1;
  Eigen::Index rows = 0;
  std::size_t lineno = 0;
  for (std::string line; std::getline(is, line);) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    Eigen::Index count = 0;
    std::size_t pos = 0;
    for (;;) {
      const auto comma = line.find(',', pos);
      std::string_view field(line.data() + pos, (comma == std::string::npos ? line.size() : comma) - pos);
      while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
      while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
      if (!field.empty() && field.front() == '+') field.remove_prefix(1);
      double v = 0.0;
      const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw IoError("CSV line " + std::to_string(lineno) + ": cannot parse '" + std::string(field) + "' as a number");
      }
      values.push_back(v);
      ++count;
      if (static_cast<Eigen::Index>(values.size()) > kCsvMaxEntries) {
        throw IoError("CSV matrix exceeds " + std::to_string(kCsvMaxEntries) + " entries; use the FQM1 format");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (cols < 0) cols = count;
    if (count != cols) {
      throw IoError("CSV line " + std::to_string(lineno) + " has " + std::to_string(count) + " fields, expected " +
                    std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0) throw IoError("CSV input contains no data rows");
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  }
  return M;
}

Eigen::MatrixXd read_csv_matrix(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  return read_csv_matrix(is);
}

void write_csv_matrix(std::ostream& os, const Eigen::Ref<const Eigen::MatrixXd>& M,
                      const std::vector<std::string>& comments) {
  if (M.size() > kCsvMaxEntries) {
    throw IoError("matrix has " + std::to_string(M.size()) + " entries; CSV is limited to " +
                  std::to_string(kCsvMaxEntries) + ", use the FQM1 format");
  }
  for (const auto& c : comments) os << "# " << c << '\n';
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) os << ',';
      os << format_number(M(i, j));
    }
    os << '\n';
  }
  if (!os) throw IoError("CSV write failed");
}

void write_csv_matrix(const std::filesystem::path& path, const Eigen::Ref<const Eigen::MatrixXd>& M,
                      const std::vector<std::string>& comments) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  write_csv_matrix(os, M, comments);
}

Eigen::MatrixXd load_matrix(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  std::array<char, 4> magic{};
  is.read(magic.data(), magic.size());
  const bool fqm = is.gcount() == 4 && magic == kMagic;
  is.clear();
  is.seekg(0);
  if (!fqm) return read_csv_matrix(is);
  Fqm1File file = read_fqm1(is);
  if (file.has_block("data")) return file.block("data");
  if (file.blocks.empty()) throw IoError("FQM1 file '" + path.string() + "' holds no matrix blocks");
  return file.blocks.front().second;
}

void save_matrix(const std::filesystem::path& path, const Eigen::Ref<const Eigen::MatrixXd>& M,
                 const std::vector<std::pair<std::string, std::string>>& metadata) {
  const auto ext = path.extension().string();
  if (ext == ".fqm" || ext == ".fqm1") {
    Fqm1File file;
    file.set_meta("format", "fqm1-snapshots");
    file.set_meta("version", "1");
    for (const auto& [k, v] : metadata) file.set_meta(k, v);
    file.add_block("data", M);
    write_fqm1(path, file);
    return;
  }
  std::vector<std::string> comments;
  for (const auto& [k, v] : metadata) comments.push_back(k + "=" + v);
  write_csv_matrix(path, M, comments);
}

Fqm1File basis_to_fqm1(const CandidateBasis& basis) {
  Fqm1File file;
  file.set_meta("format", "fqm1-basis");
  file.set_meta("version", "1");
  file.set_meta("m", std::to_string(basis.m()));
  file.set_meta("N", std::to_string(basis.state_dim()));
  file.set_meta("K", std::to_string(basis.num_snapshots()));
  file.add_block("reference", basis.reference);
  file.add_block("V_tilde", basis.V_tilde);
  file.add_block("sigma", basis.sigma.head(basis.m()));
  file.add_block("spectrum", basis.sigma);
  file.add_block("S_tilde", basis.S_tilde);
  file.add_block("total_energy", Eigen::MatrixXd::Constant(1, 1, basis.total_energy));
  return file;
}

CandidateBasis basis_from_fqm1(const Fqm1File& file) {
  CandidateBasis b;
  b.reference = as_vector(file.block("reference"), "reference");
  b.V_tilde = file.block("V_tilde");
  b.sigma = as_vector(file.has_block("spectrum") ? file.block("spectrum") : file.block("sigma"), "sigma");
  b.S_tilde = file.block("S_tilde");
  b.total_energy = as_scalar(file.block("total_energy"), "total_energy");
  const Eigen::Index m = b.V_tilde.cols();
  if (b.reference.size() != b.V_tilde.rows() || b.S_tilde.rows() != m || b.sigma.size() < m || m < 1) {
    throw IoError("basis file has inconsistent block shapes");
  }
  return b;
}

Fqm1File model_to_fqm1(const QuadraticManifoldModel& model) {
  Fqm1File file;
  file.set_meta("format", "fqm1-model");
  file.set_meta("version", "1");
  file.set_meta("method", std::string(to_string(model.method)));
  file.set_meta("r", std::to_string(model.r()));
  file.set_meta("q", std::to_string(model.q()));
  file.set_meta("gamma", format_number(model.gamma));
  file.set_meta("xi_feature_order", "lexicographic upper triangle (0,0),(0,1),...,(r-1,r-1)");
  file.set_meta("xi_cross_term_scaling", "none (plain products s_i*s_j)");
  file.add_block("reference", model.reference);
  file.add_block("V_r", model.V_r);
  file.add_block("V_q", model.V_q);
  file.add_block("Xi", model.Xi);
  file.add_block("gamma", Eigen::MatrixXd::Constant(1, 1, model.gamma));
  if (model.factor) {
    file.add_block("Q_r", model.factor->Q_r);
    file.add_block("Q_q", model.factor->Q_q);
  }
  return file;
}

QuadraticManifoldModel model_from_fqm1(const Fqm1File& file) {
  QuadraticManifoldModel model;
  const auto method = file.meta("method");
  if (!method) throw IoError("model file lacks the 'method' metadata key");
  try {
    model.method = parse_method(*method);
  } catch (const InputError& e) {
    throw IoError(std::string("model file: ") + e.what());
  }
  model.reference = as_vector(file.block("reference"), "reference");
  model.V_r = file.block("V_r");
  model.V_q = file.block("V_q");
  model.Xi = file.block("Xi");
  model.gamma = as_scalar(file.block("gamma"), "gamma");
  if (file.has_block("Q_r") && file.has_block("Q_q")) model.factor = CandidateFactor{file.block("Q_r"), file.block("Q_q")};
  try {
    model.validate();
  } catch (const InputError& e) {
    throw IoError(std::string("model file: ") + e.what());
  }
  return model;
}

}  // namespace fastqm
