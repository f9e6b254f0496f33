#pragma once

// Restarted Lanczos for one extreme eigenpair of a symmetric operator.

#include <cstddef>
#include <functional>
#include <vector>

namespace warpcone::detail {

using Vec = std::vector<double>;
using Operator = std::function<void(const Vec& x, Vec& y)>;

enum class Extreme { largest, smallest };

struct LanczosOptions {
  double tol = 1e-10;  // on ||A x - theta x|| / max(1, largest |Ritz value|)
  std::size_t basis = 120;
  std::size_t max_restarts = 400;
};

struct Eigenpair {
  double value = 0.0;
  Vec vector;
  double residual = 0.0;
  std::size_t matvecs = 0;
};

/// Extreme eigenpair of A restricted to the orthogonal complement of
/// `deflate` (orthonormal vectors). Throws ConvergenceError on the cap.
Eigenpair lanczos(const Operator& A, std::size_t n, Extreme which, const std::vector<Vec>& deflate,
                  Vec start, const LanczosOptions& options = {});

/// Deterministic start vector built from node-index cosines.
Vec cosine_start(std::size_t n);

double dot(const Vec& a, const Vec& b);
double norm(const Vec& a);

}  // namespace warpcone::detail
