#include "stableid/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "stableid/errors.hpp"

namespace stableid {

namespace {

// Relative deflation threshold of the QR iteration.
constexpr double kQrDeflationTol = 1e-12;

double sign_of(double value, double sign_source) {
  return sign_source >= 0.0 ? std::fabs(value) : -std::fabs(value);
}

// Diagonal similarity scaling so that row and column norms roughly match
// (Parlett & Reinsch; the scaling part of EISPACK balanc). Eigenvalues are
// unchanged, accuracy of the QR iteration improves for badly scaled input.
void balance(std::vector<double>& a, std::size_t n) {
  constexpr double radix = 2.0;
  constexpr double sqrdx = radix * radix;
  bool done = false;
  int guard = 0;
  while (!done && guard++ < 100) {
    done = true;
    for (std::size_t i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::fabs(a[j * n + i]);
        r += std::fabs(a[i * n + j]);
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        g = 1.0 / f;
        for (std::size_t j = 0; j < n; ++j) a[i * n + j] *= g;
        for (std::size_t j = 0; j < n; ++j) a[j * n + i] *= f;
      }
    }
  }
}

// Householder reduction to upper Hessenberg form (in place, row-major).
void hessenberg(std::vector<double>& a, std::size_t n) {
  if (n < 3) return;
  std::vector<double> v(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double xnorm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) {
      const double t = a[i * n + k];
      xnorm2 += t * t;
    }
    const double xnorm = std::sqrt(xnorm2);
    if (xnorm == 0.0) continue;
    const double alpha = -sign_of(xnorm, a[(k + 1) * n + k]);
    double vnorm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) {
      v[i] = a[i * n + k];
      if (i == k + 1) v[i] -= alpha;
      vnorm2 += v[i] * v[i];
    }
    if (vnorm2 <= 0.0) continue;
    const double inv = 1.0 / std::sqrt(vnorm2);
    for (std::size_t i = k + 1; i < n; ++i) v[i] *= inv;
    // left: A <- (I - 2 v v^T) A on rows k+1..n-1
    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) s += v[i] * a[i * n + j];
      s *= 2.0;
      for (std::size_t i = k + 1; i < n; ++i) a[i * n + j] -= s * v[i];
    }
    // right: A <- A (I - 2 v v^T) on cols k+1..n-1
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) s += a[i * n + j] * v[j];
      s *= 2.0;
      for (std::size_t j = k + 1; j < n; ++j) a[i * n + j] -= s * v[j];
    }
    a[(k + 1) * n + k] = alpha;
    for (std::size_t i = k + 2; i < n; ++i) a[i * n + k] = 0.0;
  }
}

// Implicitly shifted double QR iteration on an upper Hessenberg matrix,
// eigenvalues only, with 2x2 deflation for complex conjugate pairs.
// Follows the classic EISPACK hqr scheme (Golub & Van Loan, 4th ed.,
// section 7.5), with the deflation test pinned to kQrDeflationTol and an
// overall budget of 100*n double steps.
std::vector<std::complex<double>> hqr_eigenvalues(std::vector<double>& a,
                                                  std::size_t n_in,
                                                  int* sweeps_out) {
  const int n = static_cast<int>(n_in);
  auto h = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n_in + j]; };
  std::vector<std::complex<double>> lam(n_in);

  double anorm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::fabs(h(i, j));
  if (anorm == 0.0) anorm = 1.0;

  const int sweep_cap = 100 * n;
  int total_sweeps = 0;
  int nn = n - 1;
  double t = 0.0;
  while (nn >= 0) {
    int its = 0;
    for (;;) {
      int l = 0;
      for (int ls = nn; ls >= 1; --ls) {
        double s = std::fabs(h(ls - 1, ls - 1)) + std::fabs(h(ls, ls));
        if (s == 0.0) s = anorm;
        if (std::fabs(h(ls, ls - 1)) <= kQrDeflationTol * s) {
          h(ls, ls - 1) = 0.0;
          l = ls;
          break;
        }
      }
      double x = h(nn, nn);
      if (l == nn) {  // one real eigenvalue deflated
        lam[nn] = {x + t, 0.0};
        --nn;
        break;
      }
      double y = h(nn - 1, nn - 1);
      double w = h(nn, nn - 1) * h(nn - 1, nn);
      if (l == nn - 1) {  // 2x2 block deflated
        double p = 0.5 * (y - x);
        double q = p * p + w;
        double z = std::sqrt(std::fabs(q));
        x += t;
        if (q >= 0.0) {  // real pair; larger root first, other via product
          z = p + sign_of(z, p);
          lam[nn - 1] = {x + z, 0.0};
          lam[nn] = (z != 0.0) ? std::complex<double>(x - w / z, 0.0)
                               : lam[nn - 1];
        } else {  // complex conjugate pair
          lam[nn - 1] = {x + p, z};
          lam[nn] = {x + p, -z};
        }
        nn -= 2;
        break;
      }
      if (total_sweeps >= sweep_cap) {
        throw ConvergenceError("QR iteration did not converge within " +
                               std::to_string(sweep_cap) + " sweeps");
      }
      if (its > 0 && its % 10 == 0) {  // exceptional shift against cycling
        t += x;
        for (int i = 0; i <= nn; ++i) h(i, i) -= x;
        const double s = std::fabs(h(nn, nn - 1)) + std::fabs(h(nn - 1, nn - 2));
        x = 0.75 * s;
        y = x;
        w = -0.4375 * s * s;
      }
      ++its;
      ++total_sweeps;

      // Look for two consecutive small subdiagonal elements to start the
      // bulge as high up as possible.
      int m;
      double p = 0.0, q = 0.0, r = 0.0;
      for (m = nn - 2; m >= l; --m) {
        const double z = h(m, m);
        const double rr = x - z;
        const double ss = y - z;
        p = (rr * ss - w) / h(m + 1, m) + h(m, m + 1);
        q = h(m + 1, m + 1) - z - rr - ss;
        r = h(m + 2, m + 1);
        const double s = std::fabs(p) + std::fabs(q) + std::fabs(r);
        p /= s;
        q /= s;
        r /= s;
        if (m == l) break;
        const double u = std::fabs(h(m, m - 1)) * (std::fabs(q) + std::fabs(r));
        const double v = std::fabs(p) * (std::fabs(h(m - 1, m - 1)) +
                                         std::fabs(z) + std::fabs(h(m + 1, m + 1)));
        if (u <= kQrDeflationTol * v) break;
      }
      for (int i = m + 2; i <= nn; ++i) {
        h(i, i - 2) = 0.0;
        if (i != m + 2) h(i, i - 3) = 0.0;
      }

      // Double QR step: chase the 3x1 bulge down the active block.
      for (int k = m; k <= nn - 1; ++k) {
        if (k != m) {
          p = h(k, k - 1);
          q = h(k + 1, k - 1);
          r = (k != nn - 1) ? h(k + 2, k - 1) : 0.0;
          x = std::fabs(p) + std::fabs(q) + std::fabs(r);
          if (x == 0.0) continue;
          p /= x;
          q /= x;
          r /= x;
        }
        double s = sign_of(std::sqrt(p * p + q * q + r * r), p);
        if (s == 0.0) continue;
        if (k == m) {
          if (l != m) h(k, k - 1) = -h(k, k - 1);
        } else {
          h(k, k - 1) = -s * x;
        }
        p += s;
        x = p / s;
        y = q / s;
        const double z = r / s;
        q /= p;
        r /= p;
        for (int j = k; j <= nn; ++j) {  // row modification
          double pp = h(k, j) + q * h(k + 1, j);
          if (k != nn - 1) {
            pp += r * h(k + 2, j);
            h(k + 2, j) -= pp * z;
          }
          h(k + 1, j) -= pp * y;
          h(k, j) -= pp * x;
        }
        const int mmin = nn < k + 3 ? nn : k + 3;
        for (int i = l; i <= mmin; ++i) {  // column modification
          double pp = x * h(i, k) + y * h(i, k + 1);
          if (k != nn - 1) {
            pp += z * h(i, k + 2);
            h(i, k + 2) -= pp * r;
          }
          h(i, k + 1) -= pp * q;
          h(i, k) -= pp;
        }
      }
    }
  }
  if (sweeps_out) *sweeps_out = total_sweeps;
  return lam;
}

// LU with partial pivoting over complex numbers, used by inverse iteration.
struct ComplexLu {
  std::vector<std::complex<double>> lu;
  std::vector<int> perm;
  std::size_t n = 0;
  bool singular = false;

  static ComplexLu decompose(std::vector<std::complex<double>> m, std::size_t n) {
    ComplexLu d;
    d.lu = std::move(m);
    d.n = n;
    d.perm.resize(n);
    std::iota(d.perm.begin(), d.perm.end(), 0);
    double amax = 0.0;
    for (const auto& v : d.lu) amax = std::max(amax, std::abs(v));
    const double floor = 4.0 * 2.220446049250313e-16 * static_cast<double>(n) * amax;
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t piv = k;
      double best = std::abs(d.lu[k * n + k]);
      for (std::size_t i = k + 1; i < n; ++i) {
        const double v = std::abs(d.lu[i * n + k]);
        if (v > best) {
          best = v;
          piv = i;
        }
      }
      if (best <= floor || best == 0.0) {
        d.singular = true;
        return d;
      }
      if (piv != k) {
        for (std::size_t j = 0; j < n; ++j)
          std::swap(d.lu[k * n + j], d.lu[piv * n + j]);
        std::swap(d.perm[k], d.perm[piv]);
      }
      const std::complex<double> pivot = d.lu[k * n + k];
      for (std::size_t i = k + 1; i < n; ++i) {
        const std::complex<double> f = d.lu[i * n + k] / pivot;
        d.lu[i * n + k] = f;
        for (std::size_t j = k + 1; j < n; ++j) d.lu[i * n + j] -= f * d.lu[k * n + j];
      }
    }
    return d;
  }

  std::vector<std::complex<double>> solve(const std::vector<std::complex<double>>& rhs) const {
    std::vector<std::complex<double>> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = rhs[static_cast<std::size_t>(perm[i])];
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t k = 0; k < i; ++k) x[i] -= lu[i * n + k] * x[k];
    for (std::size_t ii = n; ii-- > 0;) {
      for (std::size_t k = ii + 1; k < n; ++k) x[ii] -= lu[ii * n + k] * x[k];
      x[ii] /= lu[ii * n + ii];
    }
    return x;
  }
};

double complex_frobenius(const std::vector<std::complex<double>>& m) {
  double acc = 0.0;
  for (const auto& v : m) acc += std::norm(v);
  return std::sqrt(acc);
}

}  // namespace

StabilityClass classify_stability(double rho) {
  if (rho < 1.0 - kStabilityBand) return StabilityClass::stable;
  if (rho > 1.0 + kStabilityBand) return StabilityClass::unstable;
  return StabilityClass::boundary;
}

Spectrum eigenvalues(const Matrix& a) {
  if (!a.square()) throw DimensionError("eigenvalues requires a square matrix");
  const std::size_t n = a.rows();
  Spectrum sp;
  if (n == 1) {
    sp.eigenvalues = {std::complex<double>(a(0, 0), 0.0)};
    return sp;
  }
  std::vector<double> work(a.entries());
  balance(work, n);
  hessenberg(work, n);
  sp.eigenvalues = hqr_eigenvalues(work, n, &sp.qr_sweeps);
  return sp;
}

double spectral_radius(const Matrix& a) {
  const Spectrum sp = eigenvalues(a);
  double rho = 0.0;
  for (const auto& z : sp.eigenvalues) rho = std::max(rho, std::abs(z));
  return rho;
}

bool is_stable(const Matrix& a) {
  return classify_stability(spectral_radius(a)) == StabilityClass::stable;
}

SymmetricEigen symmetric_eigen(const Matrix& s) {
  if (!s.square()) throw DimensionError("symmetric_eigen requires a square matrix");
  if (!is_symmetric(s, 1e-8)) {
    throw InvalidArgumentError("symmetric_eigen: input is not symmetric");
  }
  const std::size_t n = s.rows();
  Matrix a = symmetrize(s);
  Matrix v = Matrix::identity(n);

  const double scale = std::max(frobenius_norm(a), 1e-300);
  auto off_norm = [&]() {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) acc += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(acc);
  };

  // Cyclic Jacobi sweeps (Golub & Van Loan, section 8.5).
  int sweep = 0;
  for (; sweep < 100; ++sweep) {
    if (off_norm() <= 1e-15 * scale) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::fabs(apq) <= 1e-300) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double tt;
        if (std::fabs(theta) > 1e153) {
          tt = 0.5 / theta;
        } else {
          tt = sign_of(1.0, theta) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(tt * tt + 1.0);
        const double ss = tt * c;
        const double tau = ss / (1.0 + c);
        a(p, p) -= tt * apq;
        a(q, q) += tt * apq;
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (i != p && i != q) {
            const double aip = a(i, p);
            const double aiq = a(i, q);
            a(i, p) = a(p, i) = aip - ss * (aiq + tau * aip);
            a(i, q) = a(q, i) = aiq + ss * (aip - tau * aiq);
          }
          const double vip = v(i, p);
          const double viq = v(i, q);
          v(i, p) = vip - ss * (viq + tau * vip);
          v(i, q) = viq + ss * (vip - tau * viq);
        }
      }
    }
  }
  if (sweep >= 100) {
    throw ConvergenceError("Jacobi iteration did not converge in 100 sweeps");
  }

  SymmetricEigen out;
  out.values.resize(n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

double operator_norm(const Matrix& a) {
  const Matrix gram = (a.cols() <= a.rows()) ? transpose(a) * a : a * transpose(a);
  const SymmetricEigen eig = symmetric_eigen(symmetrize(gram));
  const double lmax = eig.values.back();
  return std::sqrt(std::max(lmax, 0.0));
}

double condition_number(const Matrix& a, bool symmetric_pd) {
  if (!a.square()) throw DimensionError("condition_number requires a square matrix");
  const std::size_t n = a.rows();
  if (symmetric_pd) {
    const SymmetricEigen eig = symmetric_eigen(a);
    const double lmin = eig.values.front();
    const double lmax = eig.values.back();
    if (!(lmin > 0.0)) {
      throw NonSpdError("condition_number: matrix is not positive definite "
                        "(min eigenvalue " + std::to_string(lmin) + ")");
    }
    return lmax / lmin;
  }
  const SymmetricEigen eig = symmetric_eigen(symmetrize(transpose(a) * a));
  const double smax = std::sqrt(std::max(eig.values.back(), 0.0));
  const double smin = std::sqrt(std::max(eig.values.front(), 0.0));
  if (smin <= smax * 1e-15 * static_cast<double>(n) || smax == 0.0) {
    throw SingularMatrixError("condition_number: matrix is numerically singular");
  }
  return smax / smin;
}

Matrix sqrt_spd(const Matrix& s) {
  if (!s.square()) throw DimensionError("sqrt_spd requires a square matrix");
  if (!is_symmetric(s, 1e-10)) {
    throw NonSpdError("sqrt_spd: input is not symmetric");
  }
  const SymmetricEigen eig = symmetric_eigen(s);
  if (!(eig.values.front() > 0.0)) {
    throw NonSpdError("sqrt_spd: negative eigenvalue detected (" +
                      std::to_string(eig.values.front()) + ")");
  }
  const std::size_t n = s.rows();
  Matrix root(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        acc += eig.vectors(i, k) * std::sqrt(eig.values[k]) * eig.vectors(j, k);
      root(i, j) = acc;
    }
  return symmetrize(root);
}

EigenBasis eigen_basis(const Matrix& a) {
  if (!a.square()) throw DimensionError("eigen_basis requires a square matrix");
  const std::size_t n = a.rows();
  const Spectrum sp = eigenvalues(a);
  const double scale = std::max(frobenius_norm(a), 1e-300);

  EigenBasis basis;
  basis.values = sp.eigenvalues;
  basis.vectors.assign(n * n, {0.0, 0.0});

  std::mt19937_64 rng(0x5eedbed5u);  // fixed stream: eigen_basis is deterministic
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  for (std::size_t idx = 0; idx < n; ++idx) {
    const std::complex<double> lambda = sp.eigenvalues[idx];
    ComplexLu lu;
    bool factored = false;
    for (int attempt = 0; attempt < 4 && !factored; ++attempt) {
      const double pert = attempt == 0 ? 0.0 : std::pow(4.0, attempt - 1) * 1e-13 * scale;
      std::vector<std::complex<double>> m(n * n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          m[i * n + j] = std::complex<double>(a(i, j), 0.0);
          if (i == j) m[i * n + j] -= lambda + std::complex<double>(pert, pert);
        }
      lu = ComplexLu::decompose(std::move(m), n);
      factored = !lu.singular;
    }
    if (!factored) {
      throw DefectiveMatrixError("eigen_basis: could not factor shifted matrix");
    }
    std::vector<std::complex<double>> v(n);
    for (auto& c : v) c = {unif(rng), unif(rng)};
    for (int it = 0; it < 3; ++it) {
      v = lu.solve(v);
      double nrm = 0.0;
      for (const auto& c : v) nrm += std::norm(c);
      nrm = std::sqrt(nrm);
      if (!(nrm > 0.0) || !std::isfinite(nrm)) {
        throw DefectiveMatrixError("eigen_basis: inverse iteration broke down");
      }
      for (auto& c : v) c /= nrm;
    }
    for (std::size_t i = 0; i < n; ++i) basis.vectors[idx * n + i] = v[i];
  }

  // Condition estimate of the eigenvector basis via ||V||_F * ||V^-1||_F.
  std::vector<std::complex<double>> vmat(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) vmat[i * n + j] = basis.vec(i, j);
  const ComplexLu vlu = ComplexLu::decompose(vmat, n);
  if (vlu.singular) {
    throw DefectiveMatrixError("eigen_basis: eigenvector basis is numerically singular");
  }
  std::vector<std::complex<double>> vinv(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<std::complex<double>> e(n, {0.0, 0.0});
    e[j] = {1.0, 0.0};
    const auto col = vlu.solve(e);
    for (std::size_t i = 0; i < n; ++i) vinv[i * n + j] = col[i];
  }
  basis.basis_condition = complex_frobenius(vmat) * complex_frobenius(vinv);
  if (!(basis.basis_condition < 1e10)) {
    throw DefectiveMatrixError(
        "eigen_basis: eigenvector basis condition estimate " +
        std::to_string(basis.basis_condition) + " exceeds 1e10");
  }
  return basis;
}

}  // namespace stableid
