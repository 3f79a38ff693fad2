#include "equiset/equimap.hpp"

#include <fstream>
#include <random>
#include <set>

#include "json.hpp"

namespace equiset {

EquivariantBasis basis_from_partition(const OrbitPartition& p) {
  EquivariantBasis basis;
  basis.degree = p.degree;
  basis.source = BasisSource::kOrbit;
  basis.matrices.resize(static_cast<std::size_t>(p.orbit_count));
  for (int k = 0; k < p.orbit_count; ++k) {
    basis.matrices[static_cast<std::size_t>(k)] = {Eigen::MatrixXd::Zero(p.degree, p.degree), k};
  }
  for (int s = 0; s < p.degree; ++s) {
    for (int t = 0; t < p.degree; ++t) {
      basis.matrices[static_cast<std::size_t>(p.at(s, t))].matrix(s, t) = 1.0;
    }
  }
  return basis;
}

EquivariantBasis kron_basis(const EquivariantBasis& a, const EquivariantBasis& b) {
  EquivariantBasis out;
  out.degree = a.degree * b.degree;
  out.source = BasisSource::kKron;
  out.matrices.reserve(a.size() * b.size());
  int id = 0;
  for (const BasisMatrix& ma : a.matrices) {
    for (const BasisMatrix& mb : b.matrices) {
      Eigen::MatrixXd k(out.degree, out.degree);
      for (int i = 0; i < a.degree; ++i)
        for (int p = 0; p < a.degree; ++p)
          k.block(i * b.degree, p * b.degree, b.degree, b.degree) = ma.matrix(i, p) * mb.matrix;
      out.matrices.push_back({std::move(k), id++});
    }
  }
  return out;
}

Eigen::MatrixXd apply_kron(const Eigen::MatrixXd& left, const Eigen::MatrixXd& right,
                           const Eigen::MatrixXd& x) {
  if (left.cols() != x.rows() || right.cols() != x.cols()) {
    throw DimensionError("apply_kron: shape mismatch");
  }
  return left * x * right.transpose();
}

bool basis_is_transitive(const EquivariantBasis& basis) {
  int touching = 0;
  for (const BasisMatrix& m : basis.matrices) {
    const double diag = m.matrix.diagonal().sum();
    if (diag == 0.0) continue;
    ++touching;
    if (diag != static_cast<double>(basis.degree)) return false;
  }
  return touching == 1;
}

EquivariantBasis wreath_basis(const EquivariantBasis& h_basis, int n) {
  if (n <= 0) throw DimensionError("wreath_basis: n must be positive");
  if (!basis_is_transitive(h_basis)) {
    throw ConfigError(
        "wreath_basis: H must act transitively on {0..d-1} (the point action has more than "
        "one orbit)");
  }
  const int d = h_basis.degree;
  const int l = n * d;
  EquivariantBasis out;
  out.degree = l;
  out.source = BasisSource::kWreath;
  int id = 0;
  for (const BasisMatrix& m : h_basis.matrices) {
    Eigen::MatrixXd big = Eigen::MatrixXd::Zero(l, l);
    for (int i = 0; i < n; ++i) big.block(i * d, i * d, d, d) = m.matrix;
    out.matrices.push_back({std::move(big), id++});
  }
  Eigen::MatrixXd off = Eigen::MatrixXd::Ones(l, l);
  for (int i = 0; i < n; ++i) off.block(i * d, i * d, d, d).setZero();
  if (n > 1) out.matrices.push_back({std::move(off), id++});
  return out;
}

const std::array<std::array<std::uint8_t, 3>, kPaletteSize>& scheme_palette() {
  static const std::array<std::array<std::uint8_t, 3>, kPaletteSize> palette{{
      {230, 25, 75},   {60, 180, 75},   {255, 225, 25},  {0, 130, 200},   {245, 130, 48},
      {145, 30, 180},  {70, 240, 240},  {240, 50, 230},  {210, 245, 60},  {250, 190, 212},
      {0, 128, 128},   {220, 190, 255}, {170, 110, 40},  {255, 250, 200}, {128, 0, 0},
      {170, 255, 195}, {128, 128, 0},   {255, 215, 180}, {0, 0, 128},     {128, 128, 128},
      {255, 255, 255}, {0, 0, 0},       {31, 119, 180},  {255, 127, 14},  {44, 160, 44},
      {214, 39, 40},   {148, 103, 189}, {140, 86, 75},   {227, 119, 194}, {188, 189, 34},
      {23, 190, 207},  {99, 99, 99},
  }};
  return palette;
}

SchemeImage render_scheme(const OrbitPartition& p, int scale) {
  if (scale <= 0) throw DimensionError("render_scheme: scale must be positive");
  SchemeImage img;
  img.width = p.degree * scale;
  img.height = p.degree * scale;
  img.color_index.resize(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      img.color_index[static_cast<std::size_t>(y) * static_cast<std::size_t>(img.width) +
                      static_cast<std::size_t>(x)] =
          p.at(y / scale, x / scale) % static_cast<int>(kPaletteSize);
    }
  }
  return img;
}

std::string encode_ppm(const SchemeImage& image) {
  std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                    "\n255\n";
  const auto& palette = scheme_palette();
  out.reserve(out.size() + image.color_index.size() * 3);
  for (int idx : image.color_index) {
    for (std::uint8_t c : palette[static_cast<std::size_t>(idx)]) out.push_back(static_cast<char>(c));
  }
  return out;
}

void write_ppm(const SchemeImage& image, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  const std::string bytes = encode_ppm(image);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::size_t distinct_colors(const SchemeImage& image) {
  const auto& palette = scheme_palette();
  std::set<std::array<std::uint8_t, 3>> colors;
  for (int idx : image.color_index) colors.insert(palette[static_cast<std::size_t>(idx)]);
  return colors.size();
}

double check_equivariance(const Eigen::MatrixXd& l, const GeneratorSet& gens, int trials,
                          std::uint64_t seed) {
  if (l.rows() != gens.degree() || l.cols() != gens.degree()) {
    throw DimensionError("check_equivariance: matrix does not match group degree");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const auto n = static_cast<std::size_t>(gens.degree());
  double worst = 0.0;
  std::vector<double> x(n);
  for (int trial = 0; trial < trials; ++trial) {
    for (double& v : x) v = normal(rng);
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), gens.degree());
    const Eigen::VectorXd lx = l * xv;
    for (const Perm& g : gens.generators()) {
      const std::vector<double> gx = apply_perm(g, x);
      const Eigen::VectorXd lgx = l * Eigen::Map<const Eigen::VectorXd>(gx.data(), gens.degree());
      const std::vector<double> glx = apply_perm(g, std::span<const double>(lx.data(), n));
      for (std::size_t i = 0; i < n; ++i) {
        worst = std::max(worst, std::abs(lgx(static_cast<Eigen::Index>(i)) - glx[i]));
      }
    }
  }
  return worst;
}

bool commutes_exactly(const Eigen::MatrixXd& b, const Perm& g) {
  const std::vector<double> pdata = permutation_matrix(g);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> p(
      pdata.data(), g.degree(), g.degree());
  const Eigen::MatrixXd lhs = p * b;
  const Eigen::MatrixXd rhs = b * p;
  return lhs == rhs;
}

namespace {

Eigen::MatrixXd stack_vectorized(const EquivariantBasis& basis) {
  const Eigen::Index len = static_cast<Eigen::Index>(basis.degree) * basis.degree;
  Eigen::MatrixXd cols(len, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) {
    cols.col(static_cast<Eigen::Index>(k)) =
        Eigen::Map<const Eigen::VectorXd>(basis.matrices[k].matrix.data(), len);
  }
  return cols;
}

}  // namespace

double projection_residual(const EquivariantBasis& from, const EquivariantBasis& onto) {
  if (from.degree != onto.degree) throw DimensionError("projection_residual: degree mismatch");
  const Eigen::MatrixXd a = stack_vectorized(onto);
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::MatrixXd targets = stack_vectorized(from);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < targets.cols(); ++k) {
    const Eigen::VectorXd y = targets.col(k);
    const Eigen::VectorXd coef = qr.solve(y);
    const double norm = std::max(y.norm(), 1e-300);
    worst = std::max(worst, (a * coef - y).norm() / norm);
  }
  return worst;
}

double mutual_projection_residual(const EquivariantBasis& a, const EquivariantBasis& b) {
  return std::max(projection_residual(a, b), projection_residual(b, a));
}

int span_rank(const std::vector<Eigen::MatrixXd>& matrices, double tol) {
  if (matrices.empty()) return 0;
  const Eigen::Index len = matrices.front().size();
  Eigen::MatrixXd cols(len, static_cast<Eigen::Index>(matrices.size()));
  for (std::size_t k = 0; k < matrices.size(); ++k) {
    if (matrices[k].size() != len) throw DimensionError("span_rank: size mismatch");
    cols.col(static_cast<Eigen::Index>(k)) =
        Eigen::Map<const Eigen::VectorXd>(matrices[k].data(), len);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(cols);
  qr.setThreshold(tol);
  return static_cast<int>(qr.rank());
}

std::string basis_json(const EquivariantBasis& basis) {
  nlohmann::json doc = nlohmann::json::array();
  for (const BasisMatrix& m : basis.matrices) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.matrix.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(m.matrix.cols()));
      for (Eigen::Index c = 0; c < m.matrix.cols(); ++c) row[static_cast<std::size_t>(c)] = m.matrix(r, c);
      rows.push_back(row);
    }
    doc.push_back(rows);
  }
  return doc.dump();
}

}  // namespace equiset
