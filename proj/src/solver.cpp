#include "mixedfem/solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <chrono>
#include <cmath>

namespace mixedfem {

namespace {

double block_residual(const SaddleSystem& s, const Eigen::VectorXd& sigma,
                      const Eigen::VectorXd& u) {
  const Eigen::VectorXd r1 = s.A * sigma - s.B.transpose() * u - s.F_flux;
  const Eigen::VectorXd r2 = s.B * sigma - s.F_pot;
  const double rhs =
      std::sqrt(s.F_flux.squaredNorm() + s.F_pot.squaredNorm());
  const double res = std::sqrt(r1.squaredNorm() + r2.squaredNorm());
  return rhs > 0.0 ? res / rhs : res;
}

}  // namespace

SolveReport solve_saddle(const SaddleSystem& system, double tol,
                         SolveMethod method) {
  if (!(tol >= 1e-14 && tol <= 1e-6))
    throw Error("solve_saddle: tol out of [1e-14, 1e-6]");
  const auto t0 = std::chrono::steady_clock::now();
  const int n_flux = static_cast<int>(system.A.rows());
  const int n_pot = static_cast<int>(system.B.rows());

  Eigen::VectorXd sigma(n_flux), u(n_pot);

  if (method == SolveMethod::Direct) {
    Eigen::SparseMatrix<double> K(n_flux + n_pot, n_flux + n_pot);
    std::vector<Eigen::Triplet<double>> tr;
    tr.reserve(system.A.nonZeros() + 2 * system.B.nonZeros());
    for (int c = 0; c < system.A.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(system.A, c); it; ++it)
        tr.emplace_back(it.row(), it.col(), it.value());
    for (int c = 0; c < system.B.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(system.B, c); it; ++it) {
        tr.emplace_back(n_flux + it.row(), it.col(), it.value());
        tr.emplace_back(it.col(), n_flux + it.row(), it.value());
      }
    K.setFromTriplets(tr.begin(), tr.end());
    Eigen::VectorXd rhs(n_flux + n_pot);
    rhs << system.F_flux, system.F_pot;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(K);
    if (lu.info() != Eigen::Success)
      throw SingularSystem("direct factorization of the block system failed");
    const Eigen::VectorXd x = lu.solve(rhs);
    sigma = x.head(n_flux);
    u = -x.tail(n_pot);  // block system is posed in w = -u
  } else {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> alt(system.A);
    if (alt.info() != Eigen::Success)
      throw SingularSystem("Cholesky factorization of A failed");

    // Schur complement S u = F_pot - B A^{-1} F_flux, S = B A^{-1} B^T
    auto apply_s = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
      return system.B * alt.solve(system.B.transpose() * x);
    };
    const Eigen::VectorXd rhs = system.F_pot - system.B * alt.solve(system.F_flux);
    const double load_scale = std::max(
        std::sqrt(system.F_flux.squaredNorm() + system.F_pot.squaredNorm()),
        rhs.norm());

    u.setZero();
    double target = (tol / 10.0) * load_scale;
    for (int attempt = 0; attempt < 4; ++attempt) {
      if (load_scale == 0.0) break;
      Eigen::VectorXd r = rhs - apply_s(u);
      Eigen::VectorXd p = r;
      double rr = r.squaredNorm();
      const int max_iter = 4 * n_pot + 200;
      for (int it = 0; it < max_iter && std::sqrt(rr) > target; ++it) {
        const Eigen::VectorXd sp = apply_s(p);
        const double alpha = rr / p.dot(sp);
        u += alpha * p;
        r -= alpha * sp;
        const double rr_new = r.squaredNorm();
        p = r + (rr_new / rr) * p;
        rr = rr_new;
      }
      sigma = alt.solve(system.F_flux + system.B.transpose() * u);
      if (block_residual(system, sigma, u) <= tol) break;
      target *= 1e-2;
      if (attempt == 3)
        throw NoConvergence("Schur CG did not reach the requested tolerance");
    }
    sigma = alt.solve(system.F_flux + system.B.transpose() * u);
  }

  SolveReport rep;
  rep.method = method == SolveMethod::Direct ? "direct" : "schur";
  rep.residual_norm = block_residual(system, sigma, u);
  if (rep.residual_norm > tol)
    throw NoConvergence("solver residual " + std::to_string(rep.residual_norm) +
                        " exceeds tolerance");
  rep.flux.dofmap = system.flux_dofmap;
  rep.flux.coeffs = sigma;
  rep.potential.dofmap = system.pot_dofmap;
  rep.potential.coeffs = u;
  rep.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

}  // namespace mixedfem
