#include "qduff/io.hpp"

#include <json.hpp>

#include <charconv>
#include <sstream>

#include "qduff/errors.hpp"

namespace qduff {

using json = nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     std::initializer_list<std::string_view> header)
    : out_(open_out(path)), path_(path) {
  for (auto h : header) *this << h;
  end_row();
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(open_out(path)), path_(path) {
  for (const auto& h : header) *this << std::string_view(h);
  end_row();
}

void CsvWriter::separator() {
  if (row_started_) out_ << ',';
  row_started_ = true;
}

CsvWriter& CsvWriter::operator<<(double v) {
  separator();
  out_ << format_double(v);
  return *this;
}

CsvWriter& CsvWriter::operator<<(long v) {
  separator();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::operator<<(unsigned long v) {
  separator();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::operator<<(std::string_view v) {
  separator();
  out_ << v;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  row_started_ = false;
}

void CsvWriter::close() {
  out_.close();
  if (!out_) throw std::runtime_error("error writing '" + path_.string() + "'");
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::out_of_range("csv: no column '" + std::string(name) + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  CsvTable table;
  std::string line;
  if (std::getline(in, line)) table.header = split(line);
  while (std::getline(in, line)) {
    if (!line.empty()) table.rows.push_back(split(line));
  }
  return table;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    auto out = open_out(tmp);
    out << text;
    if (!out) throw std::runtime_error("error writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

void write_state_json(const std::filesystem::path& path, const FockState& state, double t) {
  json j;
  j["t"] = t;
  j["N"] = state.dim();
  json coeffs = json::array();
  for (Eigen::Index n = 0; n < state.dim(); ++n) {
    coeffs.push_back({state.coeffs(n).real(), state.coeffs(n).imag()});
  }
  j["coeffs"] = std::move(coeffs);
  write_text(path, j.dump() + "\n");
}

void write_density_json(const std::filesystem::path& path, const Eigen::MatrixXcd& rho,
                        long samples) {
  json j;
  j["N"] = rho.rows();
  j["samples"] = samples;
  json rows = json::array();
  for (Eigen::Index i = 0; i < rho.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < rho.cols(); ++k) row.push_back({rho(i, k).real(), rho(i, k).imag()});
    rows.push_back(std::move(row));
  }
  j["rho"] = std::move(rows);
  write_text(path, j.dump() + "\n");
}

Eigen::MatrixXcd read_density_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("input: cannot open '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("input: invalid JSON: " + std::string(e.what()));
  }
  auto cplx = [](const json& pair) {
    return std::complex<double>(pair.at(0).get<double>(), pair.at(1).get<double>());
  };
  try {
    if (j.contains("coeffs")) {
      const auto& c = j["coeffs"];
      FockState s(static_cast<Eigen::Index>(c.size()));
      for (std::size_t n = 0; n < c.size(); ++n) s.coeffs(n) = cplx(c[n]);
      return density_matrix(s);
    }
    if (j.contains("rho")) {
      const auto& r = j["rho"];
      const auto n = static_cast<Eigen::Index>(r.size());
      Eigen::MatrixXcd rho(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(r[i].size()) != n) throw ConfigError("input: rho is not square");
        for (Eigen::Index k = 0; k < n; ++k) rho(i, k) = cplx(r[i][k]);
      }
      return rho;
    }
  } catch (const json::exception& e) {
    throw ConfigError("input: malformed snapshot: " + std::string(e.what()));
  }
  throw ConfigError("input: expected a 'coeffs' or 'rho' entry");
}

Eigen::VectorXd GridAxis::points() const {
  return Eigen::VectorXd::LinSpaced(count, min, max);
}

void write_grid_csv(const std::filesystem::path& path, const Eigen::MatrixXd& values,
                    const GridAxis& q, const GridAxis& p) {
  if (values.rows() != q.count || values.cols() != p.count) {
    throw ConfigError("grid csv: value matrix does not match the axes");
  }
  auto out = open_out(path);
  out << "# q_min=" << format_double(q.min) << ",q_max=" << format_double(q.max)
      << ",q_count=" << q.count << ",p_min=" << format_double(p.min)
      << ",p_max=" << format_double(p.max) << ",p_count=" << p.count << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index k = 0; k < values.cols(); ++k) {
      if (k) out << ',';
      out << format_double(values(i, k));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("error writing '" + path.string() + "'");
}

}  // namespace qduff
