#include "linalg.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "warpcone/errors.hpp"

namespace warpcone::detail {

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

namespace {

void axpy(double alpha, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

void project_out(const std::vector<Vec>& basis, Vec& w) {
  for (const Vec& q : basis) axpy(-dot(q, w), q, w);
}

}  // namespace

Vec cosine_start(std::size_t n) {
  Vec x(n);
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double di = static_cast<double>(i);
    x[i] = std::cos(M_PI * (di + 0.5) / dn) + 0.5 * std::cos(3.7 * (di + 1.0)) + 0.25 * std::cos(0.61 * di * di / dn);
  }
  return x;
}

Eigenpair lanczos(const Operator& A, std::size_t n, Extreme which, const std::vector<Vec>& deflate, Vec x,
                  const LanczosOptions& options) {
  if (deflate.size() >= n) throw DomainError("nothing left after deflation");
  const std::size_t dim = n - deflate.size();
  const std::size_t m = std::max<std::size_t>(1, std::min(options.basis, dim));

  Eigenpair best;
  Vec w(n), ax(n);
  std::vector<Vec> Q;
  Q.reserve(m + 1);
  double residual = std::numeric_limits<double>::infinity();
  // Convergence is judged relative to the largest Ritz value seen.
  double scale = 1.0;

  for (std::size_t restart = 0; restart <= options.max_restarts; ++restart) {
    project_out(deflate, x);
    project_out(deflate, x);
    double nx = norm(x);
    if (!(nx > 1e-300)) {
      // Start vector lost in the deflated space; perturb deterministically.
      for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(1.0 + 2.3 * static_cast<double>(i + restart));
      project_out(deflate, x);
      nx = norm(x);
    }
    for (double& v : x) v /= nx;

    Q.clear();
    Q.push_back(x);
    std::vector<double> alpha, beta;
    bool invariant = false;
    Eigen::VectorXd ritz_y;
    double theta = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      A(Q[j], w);
      ++best.matvecs;
      const double a = dot(Q[j], w);
      alpha.push_back(a);
      // Full reorthogonalization, twice.
      for (int pass = 0; pass < 2; ++pass) {
        project_out(deflate, w);
        project_out(Q, w);
      }
      const double b = norm(w);

      const auto k = static_cast<Eigen::Index>(alpha.size());
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
      for (Eigen::Index i = 0; i < k; ++i) {
        T(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = beta[static_cast<std::size_t>(i)];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      const Eigen::Index pick = which == Extreme::largest ? k - 1 : 0;
      theta = es.eigenvalues()(pick);
      scale = std::max(scale, es.eigenvalues().cwiseAbs().maxCoeff());
      ritz_y = es.eigenvectors().col(pick);
      const double estimate = std::abs(b * ritz_y(k - 1));
      if (b <= 1e-14 * std::max(1.0, std::abs(theta)) || Q.size() == dim) {
        invariant = true;
        break;
      }
      if (estimate <= 0.1 * options.tol * scale) break;
      beta.push_back(b);
      if (j + 1 < m) {
        for (double& v : w) v /= b;
        Q.push_back(w);
      }
    }

    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t i = 0; i < static_cast<std::size_t>(ritz_y.size()); ++i) {
      axpy(ritz_y(static_cast<Eigen::Index>(i)), Q[i], x);
    }
    project_out(deflate, x);
    const double nrm = norm(x);
    for (double& v : x) v /= nrm;
    A(x, ax);
    ++best.matvecs;
    const double rq = dot(x, ax);
    axpy(-rq, x, ax);
    project_out(deflate, ax);
    residual = norm(ax);
    if (residual <= options.tol * scale || invariant) {
      best.value = rq;
      best.vector = std::move(x);
      best.residual = residual;
      if (residual > std::max(options.tol, 1e-8) * scale) {
        throw ConvergenceError("Lanczos reached an invariant subspace with a large residual", residual);
      }
      return best;
    }
  }
  throw ConvergenceError("Lanczos did not converge within the restart cap", residual);
}

}  // namespace warpcone::detail
