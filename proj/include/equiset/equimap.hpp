#pragma once

// Bases of spaces of linear equivariant maps, built from pair-orbit
// partitions or from closed forms (Kronecker products of bases, wreath
// layers), plus sharing-scheme rendering and numerical equivariance checks.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "equiset/permgroup.hpp"

namespace equiset {

struct BasisMatrix {
  Eigen::MatrixXd matrix;  // 0/1 entries
  int orbit_id = 0;
};

enum class BasisSource { kOrbit, kKron, kWreath, kDss };

struct EquivariantBasis {
  int degree = 0;
  std::vector<BasisMatrix> matrices;
  BasisSource source = BasisSource::kOrbit;

  std::size_t size() const { return matrices.size(); }
};

EquivariantBasis basis_from_partition(const OrbitPartition& p);

// All products A_i (x) B_j, index i*|B| + j. Row-major convention: the
// product acts on vec(X) for X in R^{l_a x l_b} as X -> A_i X B_j^T.
EquivariantBasis kron_basis(const EquivariantBasis& a, const EquivariantBasis& b);

// X -> left * X * right^T without materializing the Kronecker product.
Eigen::MatrixXd apply_kron(const Eigen::MatrixXd& left, const Eigen::MatrixXd& right,
                           const Eigen::MatrixXd& x);

// Layers for H^n acting blockwise with S_n permuting blocks: each H basis
// matrix repeated on the n diagonal blocks, plus the indicator of all
// off-block-diagonal entries. `h_basis` must be an orbit-indicator basis of a
// transitive group; throws ConfigError otherwise.
EquivariantBasis wreath_basis(const EquivariantBasis& h_basis, int n);

// True iff exactly one matrix touches the diagonal and it covers all of it,
// i.e. the underlying group acts transitively on points.
bool basis_is_transitive(const EquivariantBasis& basis);

struct SchemeImage {
  int width = 0;
  int height = 0;
  std::vector<int> color_index;  // row-major, palette index per pixel
};

inline constexpr std::size_t kPaletteSize = 32;
const std::array<std::array<std::uint8_t, 3>, kPaletteSize>& scheme_palette();

// Pixel (s, t) gets color orbit_id(s, t) mod 32; each entry is drawn as a
// `scale` x `scale` square.
SchemeImage render_scheme(const OrbitPartition& p, int scale = 1);
std::string encode_ppm(const SchemeImage& image);
void write_ppm(const SchemeImage& image, const std::string& path);
std::size_t distinct_colors(const SchemeImage& image);

// max over generators g and `trials` random x of |L(g.x) - g.L(x)|_inf.
double check_equivariance(const Eigen::MatrixXd& l, const GeneratorSet& gens, int trials,
                          std::uint64_t seed = 0);

// P(g) B == B P(g), compared entry by entry.
bool commutes_exactly(const Eigen::MatrixXd& b, const Perm& g);

// Largest least-squares residual (Frobenius) when projecting each matrix of
// `from` onto span(`onto`), relative to the matrix norm.
double projection_residual(const EquivariantBasis& from, const EquivariantBasis& onto);
double mutual_projection_residual(const EquivariantBasis& a, const EquivariantBasis& b);

// Rank of the vectorized matrices.
int span_rank(const std::vector<Eigen::MatrixXd>& matrices, double tol = 1e-9);

// JSON array of dense row-major matrices.
std::string basis_json(const EquivariantBasis& basis);

}  // namespace equiset
