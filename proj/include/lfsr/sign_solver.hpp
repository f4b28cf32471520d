#pragma once

#include "lfsr/multidomain.hpp"

#include <Eigen/Sparse>

#include <iosfwd>
#include <span>
#include <vector>

namespace lfsr {

struct EdgeSignGuess {
  int v0 = 0, v1 = 0;  // v0 < v1
  int sign = 1;
};

enum class SignGuessRule {
  // -1 iff the edge meets the eps sublevel of I_u
  sublevel,
  // additionally require the edge ends to sit on opposite sides of the
  // tangent planes of the samples nearest to the contact
  sublevel_with_side,
};

struct SignGuessOptions {
  SignGuessRule rule = SignGuessRule::sublevel_with_side;
  EnvelopeParams envelope;
  int side_votes = 5;
};

// Edges outside or on the boundary of the envelope get +1; edges whose
// incident cells are all envelope cells are searched with eps = reach / 2.
std::vector<EdgeSignGuess> guess_edge_signs(const MultiDomain& md, const KdTree& index,
                                            std::span<const Vector3> normals, const SignGuessOptions& opt);

// sign of one segment under the same rules, for segments known to lie in the envelope
int guess_segment_sign(const Point3& a, const Point3& b, const KdTree& index, std::span<const Vector3> normals,
                       double eps, const SignGuessOptions& opt);

struct KktSystem {
  int num_vertices = 0;
  double lambda = 1.0;
  Eigen::SparseMatrix<double> S;        // one row per edge
  Eigen::SparseMatrix<double> B;        // one row per data point
  Eigen::SparseMatrix<double> hessian;  // 2 S^T S + 2 lambda B^T B

  // [[H, 1], [1^T, 0]] of size |V| + 1
  Eigen::SparseMatrix<double> full_matrix() const;
  // (0, ..., 0, |V|)
  Eigen::VectorXd rhs() const;
  // x^T (S^T S + lambda B^T B) x
  double energy(const Eigen::VectorXd& x) const;
};

KktSystem assemble_kkt(int num_vertices, std::span<const EdgeSignGuess> guesses,
                       const std::vector<Eigen::Triplet<double>>& data_rows, int num_data_rows, double lambda);

// locates every data point and assembles the system; points outside the
// triangulation raise ContractError
KktSystem assemble_kkt(const Delaunay3& tri, std::span<const EdgeSignGuess> guesses,
                       std::span<const Point3> data, double lambda);

// barycentric coordinates of p in finite cell c
Eigen::Vector4d barycentric(const Delaunay3& tri, int c, const Point3& p);

struct SignedField {
  Eigen::VectorXd values;
  double lagrange = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

// projected preconditioned conjugate gradient on the null space of the
// constraint, started from the feasible x = 1
SignedField solve_signed_field(const KktSystem& system, double tol = 1e-8, int max_iter = 20000);

// residual norm of the full KKT system relative to |V|
double kkt_residual(const KktSystem& system, const Eigen::VectorXd& x, double z);

// sparse triplet text: "rows cols nnz" then "i j value" lines
void write_triplets(std::ostream& out, const Eigen::SparseMatrix<double>& m);

// d^_s(x) = sign(d_s interpolated at x) * d^_u(x); sign(0) = +1
class SignedRobustDistance {
public:
  SignedRobustDistance(const Delaunay3& tri, const Eigen::VectorXd& values, const KdTree& index, int k);

  // throws DomainError when x lies outside the triangulation
  double operator()(const Point3& x) const;
  // interpolated d_s, and whether x was inside the triangulation
  double interpolate(const Point3& x, bool* inside = nullptr) const;
  double distance(const Point3& x) const;

  // sign used outside the triangulation hull
  int exterior_sign() const { return exterior_sign_; }

  void negate() { sign_flip_ = -sign_flip_; }

private:
  const Delaunay3& tri_;
  const Eigen::VectorXd& values_;
  const KdTree& index_;
  int k_;
  int exterior_sign_ = 1;
  int sign_flip_ = 1;
};

}  // namespace lfsr
