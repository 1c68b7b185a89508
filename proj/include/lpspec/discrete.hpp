#pragma once

// Finite-difference realization of the model Laplacian on a collar patch
// [0, u_max] x T^n in the boundary-depth coordinate u = log(x1/x). Fluxes are
// discretized in conservation form against the coordinate densities
//
//   u-direction:  omega(u) = e^{n u} (1 + c x(u))^n,  d/du log omega = n - w,
//   y-direction:  1 / alpha(y),
//
// which reproduces the continuum operator
//
//   alpha^2 (-d_uu - n d_u + w d_u) - C(u) alpha sum_i d_i (alpha^{-1} d_i),
//   C(u) = x^2 / (1 + c x)^2,
//
// to second order and is exactly symmetric in the inner product weighted by
// the volume density x1^{-n} omega(u) / alpha(y) per cell. Rows at u = 0 and
// u = u_max are eliminated (Dirichlet).

#include "lpspec/model.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace lpspec {

class NearSpectrumError : public std::runtime_error {
 public:
  explicit NearSpectrumError(const std::string& what) : std::runtime_error(what) {}
};

struct CollarGrid {
  double u_max = 1.0;
  int nu = 3;  // u samples including both Dirichlet endpoints
  int ny = 8;  // torus samples per axis
  int n = 1;

  static CollarGrid make(double u_max, int nu, int ny, int n) {
    if (!(u_max > 0.0)) throw std::invalid_argument("CollarGrid: u_max must be > 0");
    if (nu < 3) throw std::invalid_argument("CollarGrid: need nu >= 3 for an interior");
    if (ny < 8) throw std::invalid_argument("CollarGrid: need ny >= 8 torus samples");
    if (n < 1) throw std::invalid_argument("CollarGrid: dimension must be >= 1");
    CollarGrid g{u_max, nu, ny, n};
    if (g.interior_count() > (1L << 26))
      throw std::invalid_argument("CollarGrid: grid exceeds the size budget");
    return g;
  }

  double hu() const { return u_max / double(nu - 1); }
  double hy() const { return kTwoPi / double(ny); }
  double u(int i) const { return double(i) * hu(); }

  long torus_count() const {
    long t = 1;
    for (int a = 0; a < n; ++a) {
      if (t > (1L << 40) / ny) throw std::invalid_argument("CollarGrid: torus too large");
      t *= ny;
    }
    return t;
  }
  long interior_count() const { return long(nu - 2) * torus_count(); }

  // interior nodes are numbered u-major, torus odometer within each level
  long index(int i, long jflat) const { return long(i - 1) * torus_count() + jflat; }
  int u_index(long id) const { return int(id / torus_count()) + 1; }
  long torus_flat(long id) const { return id % torus_count(); }

  TorusPoint y_of(long jflat) const {
    TorusPoint y(static_cast<size_t>(n), 0.0);
    for (int a = n - 1; a >= 0; --a) {
      y[size_t(a)] = double(jflat % ny) * hy();
      jflat /= ny;
    }
    return y;
  }
};

struct DiscreteOperator {
  CollarGrid grid;
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
  std::vector<double> weight;      // cell measure, the W of the symmetry W L = L^T W
  std::vector<double> log_weight;  // same in log form, safe at any depth
};

// (2(n+1) + 1)-point stencil per interior node: second differences in u
// against omega and per torus axis against 1/alpha. All omega appearances are
// ratios between neighboring half-cells, so nothing overflows at depth.
inline DiscreteOperator assemble_operator(const ModelMetric& m, const CollarGrid& g) {
  m.validate();
  if (m.n() != g.n) throw std::invalid_argument("assemble_operator: dimension mismatch");
  const double hu = g.hu(), hy = g.hy();
  const long T = g.torus_count();
  const long dim = g.interior_count();
  const double nn = double(g.n);

  const auto log_omega = [&](double u) {
    return nn * u + nn * std::log1p(m.c * m.x_of_u(u));
  };

  // per-axis profile samples at nodes and at half-step midpoints
  std::vector<double> fnode(size_t(g.ny)), fmid(size_t(g.ny));
  for (int j = 0; j < g.ny; ++j) {
    fnode[size_t(j)] = m.profile.is_constant() ? 0.0 : m.profile.axis_value(double(j) * hy);
    fmid[size_t(j)] =
        m.profile.is_constant() ? 0.0 : m.profile.axis_value((double(j) + 0.5) * hy);
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(size_t(dim) * size_t(2 * g.n + 3));
  DiscreteOperator op{g, {}, {}, {}};
  op.weight.resize(size_t(dim));
  op.log_weight.resize(size_t(dim));

  std::vector<long> stride(size_t(g.n));
  stride[size_t(g.n - 1)] = 1;
  for (int a = g.n - 2; a >= 0; --a) stride[size_t(a)] = stride[size_t(a + 1)] * g.ny;

  std::vector<int> digits(size_t(g.n));
  const double log_cell = std::log(hu) + nn * std::log(hy) - nn * std::log(m.x1);

  for (int i = 1; i <= g.nu - 2; ++i) {
    const double u = g.u(i);
    const double lo = log_omega(u);
    const double rp = std::exp(log_omega(u + hu / 2.0) - lo);  // omega ratio up
    const double rm = std::exp(log_omega(u - hu / 2.0) - lo);  // omega ratio down
    const double x = m.x_of_u(u);
    const double cu = x * x / ((1.0 + m.c * x) * (1.0 + m.c * x));

    std::fill(digits.begin(), digits.end(), 0);
    for (long jf = 0; jf < T; ++jf) {
      double alpha = m.profile.base();
      for (int a = 0; a < g.n; ++a) alpha += fnode[size_t(digits[size_t(a)])];
      const long row = g.index(i, jf);

      const double au = alpha * alpha / (hu * hu);
      double diag = au * (rp + rm);
      if (i + 1 <= g.nu - 2) trips.emplace_back(row, g.index(i + 1, jf), -au * rp);
      if (i - 1 >= 1) trips.emplace_back(row, g.index(i - 1, jf), -au * rm);

      if (cu > 0.0) {
        for (int a = 0; a < g.n; ++a) {
          const int ja = digits[size_t(a)];
          const double base_a = alpha - fnode[size_t(ja)];
          const double mid_up = base_a + fmid[size_t(ja)];
          const double mid_dn = base_a + fmid[size_t((ja + g.ny - 1) % g.ny)];
          const double cy = cu * alpha / (hy * hy);
          diag += cy * (1.0 / mid_up + 1.0 / mid_dn);
          const long up = jf + ((ja + 1) % g.ny - ja) * stride[size_t(a)];
          const long dn = jf + ((ja + g.ny - 1) % g.ny - ja) * stride[size_t(a)];
          trips.emplace_back(row, g.index(i, up), -cy / mid_up);
          trips.emplace_back(row, g.index(i, dn), -cy / mid_dn);
        }
      }
      trips.emplace_back(row, row, diag);

      const double lw = lo - std::log(alpha) + log_cell;
      op.log_weight[size_t(row)] = lw;
      op.weight[size_t(row)] = std::exp(lw);

      for (int a = g.n - 1; a >= 0; --a) {  // odometer step
        if (++digits[size_t(a)] < g.ny) break;
        digits[size_t(a)] = 0;
      }
    }
  }

  op.matrix.resize(Eigen::Index(dim), Eigen::Index(dim));
  op.matrix.setFromTriplets(trips.begin(), trips.end());
  op.matrix.makeCompressed();
  return op;
}

// Samples a function of (u, y) on the interior nodes.
template <class F>
Eigen::VectorXd sample_on_grid(const CollarGrid& g, F&& f) {
  Eigen::VectorXd v(g.interior_count());
  for (long id = 0; id < g.interior_count(); ++id)
    v[Eigen::Index(id)] = f(g.u(g.u_index(id)), g.y_of(g.torus_flat(id)));
  return v;
}

struct EigenOptions {
  double tol = 1e-8;       // on ||B v - mu v|| / mu
  int max_restarts = 200;
  long memory_budget = 256L << 20;  // bytes of Lanczos basis storage
};

struct EigenResult {
  double value = 0.0;
  double residual = 0.0;
  int restarts = 0;
  int basis = 0;
};

// Smallest eigenvalue via restarted Lanczos with full reorthogonalization on
// the similarity transform B = D^{1/2} L D^{-1/2}, D = diag(weight), which is
// symmetric because L is W-symmetric. The start vector is torus-constant, so
// for y-independent metrics the whole Krylov space stays in the cheap
// constant-in-y sector while remaining a valid start in general.
inline EigenResult smallest_eigenvalue(const DiscreteOperator& op,
                                       const EigenOptions& opts = {}) {
  const long dim = op.matrix.rows();
  const int cap =
      int(std::clamp(opts.memory_budget / (8 * dim), long(24), long(140)));

  Eigen::SparseMatrix<double, Eigen::RowMajor> B = op.matrix;
  for (long r = 0; r < dim; ++r)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(B, Eigen::Index(r));
         it; ++it)
      it.valueRef() *= std::exp(
          0.5 * (op.log_weight[size_t(r)] - op.log_weight[size_t(it.col())]));

  Eigen::VectorXd v(dim);
  for (long id = 0; id < dim; ++id) {
    const double u = op.grid.u(op.grid.u_index(id));
    v[Eigen::Index(id)] = std::sin(std::numbers::pi * u / op.grid.u_max) *
                          std::exp(0.5 * op.log_weight[size_t(id)]);
  }
  v.normalize();

  EigenResult out;
  Eigen::MatrixXd V(dim, cap);
  Eigen::VectorXd a(cap), b(cap);
  for (int restart = 0; restart < opts.max_restarts; ++restart) {
    int mdim = 0;
    V.col(0) = v;
    for (int k = 0; k < cap; ++k) {
      Eigen::VectorXd w = B * V.col(k);
      a[k] = V.col(k).dot(w);
      w -= a[k] * V.col(k);
      if (k > 0) w -= b[k - 1] * V.col(k - 1);
      for (int pass = 0; pass < 2; ++pass)  // full reorthogonalization
        w -= V.leftCols(k + 1) * (V.leftCols(k + 1).transpose() * w);
      mdim = k + 1;
      if (k + 1 == cap) break;
      b[k] = w.norm();
      if (b[k] < 1e-13 * std::abs(a[k])) break;  // invariant subspace reached
      V.col(k + 1) = w / b[k];
    }

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(mdim, mdim);
    for (int k = 0; k < mdim; ++k) {
      T(k, k) = a[k];
      if (k + 1 < mdim) T(k, k + 1) = T(k + 1, k) = b[k];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    out.value = es.eigenvalues()[0];
    v = V.leftCols(mdim) * es.eigenvectors().col(0);
    v.normalize();
    out.residual = (B * v - out.value * v).norm() / std::abs(out.value);
    out.restarts = restart + 1;
    out.basis = mdim;
    if (out.residual < opts.tol) return out;
  }
  return out;  // caller can inspect .residual if tol was not reached
}

// Max over random probes of ||(L - z)^{-1} f||_{W,p} / ||f||_{W,p}. A direct
// complex sparse factorization keeps the probe honest arbitrarily close to
// the spectrum; an outright singular factorization reports NearSpectrumError.
inline double resolvent_probe(const DiscreteOperator& op, Complex z, double p, int trials,
                              std::uint64_t seed) {
  if (!(p >= 1.0 && p <= 2.0))
    throw std::invalid_argument("resolvent_probe: p must lie in [1, 2]");
  if (trials < 1) throw std::invalid_argument("resolvent_probe: trials must be >= 1");
  const long dim = op.matrix.rows();

  Eigen::SparseMatrix<Complex> A(static_cast<Eigen::Index>(dim),
                                 static_cast<Eigen::Index>(dim));
  {
    std::vector<Eigen::Triplet<Complex>> trips;
    trips.reserve(size_t(op.matrix.nonZeros()) + size_t(dim));
    for (long r = 0; r < dim; ++r)
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(op.matrix,
                                                                          Eigen::Index(r));
           it; ++it)
        trips.emplace_back(int(r), int(it.col()), Complex(it.value(), 0.0));
    for (long r = 0; r < dim; ++r) trips.emplace_back(int(r), int(r), -z);
    A.setFromTriplets(trips.begin(), trips.end());
  }
  A.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<Complex>> solver;
  solver.compute(A);
  if (solver.info() != Eigen::Success)
    throw NearSpectrumError("resolvent_probe: factorization failed; z is at or near the "
                            "spectrum of the discrete operator");

  const auto wnorm = [&](const Eigen::VectorXcd& vec) {
    KahanSum s;
    for (long k = 0; k < dim; ++k)
      s.add(op.weight[size_t(k)] * std::pow(std::abs(vec[Eigen::Index(k)]), p));
    return std::pow(s.value(), 1.0 / p);
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double best = 0.0;
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXcd f(dim);
    for (long k = 0; k < dim; ++k) f[Eigen::Index(k)] = Complex(gauss(rng), 0.0);
    const Eigen::VectorXcd sol = solver.solve(f);
    if (solver.info() != Eigen::Success)
      throw NearSpectrumError("resolvent_probe: solve failed; z is too close to the "
                              "spectrum of the discrete operator");
    best = std::max(best, wnorm(sol) / wnorm(f));
  }
  return best;
}

// One "row col value" line per stored entry, row-major, value round-trippable.
inline void export_triplets(const DiscreteOperator& op, std::ostream& out) {
  out.precision(17);
  for (long r = 0; r < op.matrix.rows(); ++r)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(op.matrix,
                                                                        Eigen::Index(r));
         it; ++it)
      out << r << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace lpspec
