#pragma once

// Reference implementations written independently of the library: plain loops,
// explicit matrices and textbook integrators. Tests compare the library against
// these rather than against itself.

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Mirror an index into [0, n) by repeated folding, edge pixel not repeated.
inline int mirror(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

// Dense K×N matrix of the whole-image operator. Row (p·k + j) holds row j of
// `rows` applied to the patch at position p, positions row-major.
inline Eigen::MatrixXd dense_global_operator(const Eigen::MatrixXd& rows, int width, int height,
                                             bool reflective) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rows.cols()))));
  const int k = static_cast<int>(rows.rows());
  const int anchor = side % 2 == 1 ? side / 2 : side / 2 - 1;
  const int px = reflective ? width : width - side + 1;
  const int py = reflective ? height : height - side + 1;
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(px) * py * k,
                                                static_cast<Eigen::Index>(width) * height);
  for (int pr = 0; pr < py; ++pr) {
    for (int pc = 0; pc < px; ++pc) {
      const int p = pr * px + pc;
      for (int i = 0; i < side; ++i) {
        for (int j = 0; j < side; ++j) {
          const int r = reflective ? mirror(pr - anchor + i, height) : pr + i;
          const int c = reflective ? mirror(pc - anchor + j, width) : pc + j;
          for (int row = 0; row < k; ++row) {
            dense(p * k + row, r * width + c) += rows(row, i * side + j) / side;
          }
        }
      }
    }
  }
  return dense;
}

// Orthonormal basis (columns) of the span of the given vectors, by classical
// Gram–Schmidt with one reorthogonalization pass.
inline Eigen::MatrixXd gram_schmidt(const std::vector<Eigen::VectorXd>& vectors) {
  std::vector<Eigen::VectorXd> basis;
  for (Eigen::VectorXd v : vectors) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) v -= q.dot(v) * q;
    }
    const double norm = v.norm();
    if (norm > 1e-12) basis.push_back(v / norm);
  }
  Eigen::MatrixXd out(vectors.front().size(), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = basis[i];
  return out;
}

// Projector onto the orthogonal complement of span{x, 1}.
inline Eigen::MatrixXd tangent_projector(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  const Eigen::MatrixXd q = gram_schmidt({Eigen::VectorXd::Ones(n), x});
  return Eigen::MatrixXd::Identity(n, n) - q * q.transpose();
}

// Orthonormal basis of 1⊥ from Gram–Schmidt on e_1 − e_0, e_2 − e_0, ...
inline Eigen::MatrixXd complement_of_ones(Eigen::Index n) {
  std::vector<Eigen::VectorXd> v;
  for (Eigen::Index i = 1; i < n; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[i] = 1.0;
    e[0] = -1.0;
    v.push_back(e);
  }
  return gram_schmidt(v);
}

// Determinant by Gaussian elimination with partial pivoting.
inline double determinant(Eigen::MatrixXd a) {
  const Eigen::Index n = a.rows();
  double det = 1.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    Eigen::Index pivot = c;
    for (Eigen::Index r = c + 1; r < n; ++r) {
      if (std::abs(a(r, c)) > std::abs(a(pivot, c))) pivot = r;
    }
    if (a(pivot, c) == 0.0) return 0.0;
    if (pivot != c) {
      a.row(pivot).swap(a.row(c));
      det = -det;
    }
    det *= a(c, c);
    for (Eigen::Index r = c + 1; r < n; ++r) {
      const double f = a(r, c) / a(c, c);
      for (Eigen::Index j = c; j < n; ++j) a(r, j) -= f * a(c, j);
    }
  }
  return det;
}

inline double sparsity(const std::vector<double>& x, double nu) {
  double s = 0.0;
  for (double v : x) s += std::log(1.0 + nu * v * v);
  return s;
}

inline double coupled(const std::vector<double>& a, const std::vector<double>& b, double nu) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += std::log(1.0 + nu * (a[j] * a[j] + b[j] * b[j]));
  return s;
}

// Mean over columns m of Σ_j log(1 + ν((Ω_U u_m)_j² + (Ω_V v_m)_j²)).
inline double mean_coupling(const Eigen::MatrixXd& wu, const Eigen::MatrixXd& wv, const Eigen::MatrixXd& u,
                            const Eigen::MatrixXd& v, double nu) {
  double total = 0.0;
  for (Eigen::Index m = 0; m < u.cols(); ++m) {
    for (Eigen::Index j = 0; j < wu.rows(); ++j) {
      double a = 0.0, b = 0.0;
      for (Eigen::Index i = 0; i < wu.cols(); ++i) {
        a += wu(j, i) * u(i, m);
        b += wv(j, i) * v(i, m);
      }
      total += std::log(1.0 + nu * (a * a + b * b));
    }
  }
  return total / static_cast<double>(u.cols());
}

// h with an arbitrary orthonormal basis of 1⊥ and a generic determinant.
inline double rank_penalty(const Eigen::MatrixXd& rows, const Eigen::MatrixXd& basis) {
  const double k = static_cast<double>(rows.rows());
  const double n1 = static_cast<double>(rows.cols() - 1);
  const Eigen::MatrixXd rw = rows * basis;
  const Eigen::MatrixXd gram = rw.transpose() * rw / k;
  return -std::log(determinant(gram)) / (n1 * std::log(n1));
}

inline double coherence_penalty(const Eigen::MatrixXd& rows) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index l = i + 1; l < rows.rows(); ++l) {
      double c = 0.0;
      for (Eigen::Index j = 0; j < rows.cols(); ++j) c += rows(i, j) * rows(l, j);
      s -= std::log(1.0 - c * c);
    }
  }
  return s;
}

// Great circle per column by RK4 on x'' = −‖h‖² x, x(0) = x, x'(0) = h.
// Also carries v' = −(x'·v) x, the transport equation on the sphere.
struct GeodesicState {
  Eigen::MatrixXd x, dx, v;
};

inline GeodesicState integrate_geodesic(const Eigen::MatrixXd& x0, const Eigen::MatrixXd& h,
                                        const Eigen::MatrixXd& v0, double t, int steps) {
  auto rhs = [](const GeodesicState& s) {
    GeodesicState d{s.dx, s.x, s.v};
    for (Eigen::Index c = 0; c < s.x.cols(); ++c) {
      // Speed is conserved along a geodesic, so ‖x'‖² equals ‖h‖².
      d.dx.col(c) = -s.dx.col(c).squaredNorm() * s.x.col(c);
      d.v.col(c) = -s.dx.col(c).dot(s.v.col(c)) * s.x.col(c);
    }
    return d;
  };
  auto axpy = [](const GeodesicState& s, double a, const GeodesicState& d) {
    return GeodesicState{s.x + a * d.x, s.dx + a * d.dx, s.v + a * d.v};
  };
  GeodesicState s{x0, h, v0};
  const double dt = t / steps;
  for (int i = 0; i < steps; ++i) {
    const GeodesicState k1 = rhs(s);
    const GeodesicState k2 = rhs(axpy(s, dt / 2, k1));
    const GeodesicState k3 = rhs(axpy(s, dt / 2, k2));
    const GeodesicState k4 = rhs(axpy(s, dt, k3));
    s.x += dt / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
    s.dx += dt / 6 * (k1.dx + 2 * k2.dx + 2 * k3.dx + k4.dx);
    s.v += dt / 6 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v);
  }
  return s;
}

// Matrix exponential by Taylor series with scaling and squaring.
inline Eigen::Matrix3d expm(const Eigen::Matrix3d& a) {
  int squarings = 0;
  double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.25) {
    norm /= 2;
    ++squarings;
  }
  const Eigen::Matrix3d s = a / std::pow(2.0, squarings);
  Eigen::Matrix3d term = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d sum = Eigen::Matrix3d::Identity();
  for (int i = 1; i <= 30; ++i) {
    term = term * s / i;
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

// Blur with a (2d−1)² Gaussian of σ = d/3 (mirrored borders), then keep every
// d-th pixel from offset ⌊(d−1)/2⌋. Row-major in and out.
inline std::vector<double> blur_decimate(const std::vector<double>& img, int w, int h, int d, int* out_w,
                                         int* out_h) {
  const int side = 2 * d - 1;
  const int half = d - 1;
  const double sigma = d / 3.0;
  std::vector<double> kernel(static_cast<std::size_t>(side * side));
  double total = 0.0;
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      const double y = i - half, x = j - half;
      kernel[static_cast<std::size_t>(i * side + j)] = std::exp(-(x * x + y * y) / (2 * sigma * sigma));
      total += kernel[static_cast<std::size_t>(i * side + j)];
    }
  }
  for (double& v : kernel) v /= total;
  const int offset = (d - 1) / 2;
  std::vector<double> out;
  int rows = 0, cols = 0;
  for (int r = offset; r < h; r += d) {
    ++rows;
    cols = 0;
    for (int c = offset; c < w; c += d) {
      ++cols;
      double acc = 0.0;
      for (int i = 0; i < side; ++i) {
        for (int j = 0; j < side; ++j) {
          acc += kernel[static_cast<std::size_t>(i * side + j)] *
                 img[static_cast<std::size_t>(mirror(r + i - half, h) * w + mirror(c + j - half, w))];
        }
      }
      out.push_back(acc);
    }
  }
  *out_w = cols;
  *out_h = rows;
  return out;
}

struct Metrics {
  double rmse = 0.0;
  double bad_pct = 0.0;
};

inline Metrics metrics(const std::vector<double>& result, const std::vector<double>& truth, double delta,
                       double scale) {
  double sq = 0.0;
  int bad = 0;
  for (std::size_t i = 0; i < result.size(); ++i) {
    const double e = scale * result[i] - scale * truth[i];
    sq += e * e;
    if (std::fabs(e) > delta) ++bad;
  }
  const double n = static_cast<double>(result.size());
  return {std::sqrt(sq / n), 100.0 * bad / n};
}

// Central difference of f at x along every coordinate.
inline Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                        const Eigen::VectorXd& x, double step) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd p = x, m = x;
    p[i] += step;
    m[i] -= step;
    g[i] = (f(p) - f(m)) / (2 * step);
  }
  return g;
}

inline double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-12);
}

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = n(rng);
  }
  return m;
}

// Columns centered and scaled to unit length.
inline Eigen::MatrixXd centered_unit_columns(Eigen::MatrixXd m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    m.col(c).array() -= m.col(c).mean();
    m.col(c).normalize();
  }
  return m;
}

}  // namespace oracle
