#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "linrs/solvers.hpp"

namespace linrs {
namespace {

// Polynomials in one variable up to degree four, lowest degree first.
using Poly = std::array<double, 5>;

Poly mul(const Poly& a, const Poly& b) {
  Poly out{};
  for (int i = 0; i < 5; ++i)
    for (int j = 0; i + j < 5; ++j) out[i + j] += a[i] * b[j];
  return out;
}

Poly sub(const Poly& a, const Poly& b) {
  Poly out;
  for (int i = 0; i < 5; ++i) out[i] = a[i] - b[i];
  return out;
}

double eval(const Poly& p, double x) {
  double y = 0.0;
  for (int i = 4; i >= 0; --i) y = y * x + p[i];
  return y;
}

double derivative(const Poly& p, double x) {
  double y = 0.0;
  for (int i = 4; i >= 1; --i) y = y * x + i * p[i];
  return y;
}

// Real roots via the companion matrix, polished with Newton steps.
std::vector<double> real_roots(const Poly& poly) {
  const double largest = std::max({std::abs(poly[0]), std::abs(poly[1]), std::abs(poly[2]),
                                    std::abs(poly[3]), std::abs(poly[4])});
  if (largest == 0.0) return {};
  int degree = 4;
  while (degree > 0 && std::abs(poly[degree]) <= 1e-14 * largest) --degree;
  if (degree == 0) return {};

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
  for (int i = 0; i < degree; ++i) companion(0, i) = -poly[degree - 1 - i] / poly[degree];
  for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);

  std::vector<double> roots;
  for (int i = 0; i < degree; ++i) {
    const std::complex<double> z = es.eigenvalues()(i);
    if (std::abs(z.imag()) > 1e-6 * std::max(1.0, std::abs(z.real()))) continue;
    double x = z.real();
    for (int k = 0; k < 5; ++k) {
      const double d = derivative(poly, x);
      if (d == 0.0) break;
      const double dx = eval(poly, x) / d;
      x -= dx;
      if (std::abs(dx) <= 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    roots.push_back(x);
  }
  return roots;
}

// Rigid transform with camera = R * world + C from three exact pairs.
PoseCandidate align(const std::array<Vec3, 3>& world, const std::array<Vec3, 3>& camera) {
  const Vec3 wc = (world[0] + world[1] + world[2]) / 3.0;
  const Vec3 cc = (camera[0] + camera[1] + camera[2]) / 3.0;
  Mat3 h = Mat3::Zero();
  for (int i = 0; i < 3; ++i) h += (world[i] - wc) * (camera[i] - cc).transpose();
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
  PoseCandidate pose;
  pose.rotation = svd.matrixV() * d * svd.matrixU().transpose();
  pose.translation = cc - pose.rotation * wc;
  return pose;
}

// Newton steps on the two conics in (u, v); the minimum-norm step keeps
// making progress where the curves are tangent.
void polish(const Poly& p2, const Poly& p1, const Poly& p0, const Poly& q2, const Poly& q1,
            const Poly& q0, double& u, double& v) {
  const auto residual = [&](double uu, double vv) {
    return Vec2(eval(p2, vv) * uu * uu + eval(p1, vv) * uu + eval(p0, vv),
                eval(q2, vv) * uu * uu + eval(q1, vv) * uu + eval(q0, vv));
  };
  Vec2 f = residual(u, v);
  for (int it = 0; it < 8 && f.norm() > 0.0; ++it) {
    Eigen::Matrix2d jac;
    jac << 2 * eval(p2, v) * u + eval(p1, v), derivative(p2, v) * u * u + derivative(p1, v) * u + derivative(p0, v),
        2 * eval(q2, v) * u + eval(q1, v), derivative(q2, v) * u * u + derivative(q1, v) * u + derivative(q0, v);
    const Eigen::Vector2d step = jac.completeOrthogonalDecomposition().solve(-f);
    const Vec2 next = residual(u + step(0), v + step(1));
    if (!(next.norm() < f.norm())) break;
    u += step(0);
    v += step(1);
    f = next;
  }
}

}  // namespace

RowAffinePose PoseCandidate::pose() const {
  return {rotation, translation, Mat3::Zero(), Vec3::Zero(), 0.0};
}

std::vector<PoseCandidate> p3p(std::span<const Correspondence> triple) {
  if (triple.size() != 3) throw std::invalid_argument("p3p takes exactly three correspondences");

  std::array<Vec3, 3> x, ray;
  for (int i = 0; i < 3; ++i) {
    x[i] = triple[i].world_point;
    ray[i] = triple[i].homogeneous().normalized();
  }
  const Vec3 e1 = x[1] - x[0], e2 = x[2] - x[0];
  if (e1.cross(e2).norm() <= 1e-10 * e1.norm() * e2.norm()) {
    throw Error(ErrorCode::kDegenerateConfiguration, "world points are collinear");
  }

  // Depths s1, s2 = u s1, s3 = v s1 obey the law of cosines on each side:
  //   c^2 = s1^2 (1 + u^2 - 2u cos_g)      |X1 - X2| = c
  //   b^2 = s1^2 (1 + v^2 - 2v cos_b)      |X1 - X3| = b
  //   a^2 = s1^2 (u^2 + v^2 - 2uv cos_a)   |X2 - X3| = a
  // Eliminating s1 leaves two conics in (u, v); their resultant in u is a
  // quartic in v.
  const double a2 = (x[1] - x[2]).squaredNorm();
  const double b2 = (x[0] - x[2]).squaredNorm();
  const double c2 = (x[0] - x[1]).squaredNorm();
  const double cos_a = ray[1].dot(ray[2]);
  const double cos_b = ray[0].dot(ray[2]);
  const double cos_g = ray[0].dot(ray[1]);

  // Coefficients of u^2, u, 1 as polynomials in v.
  const Poly p2{b2}, p1{-2 * b2 * cos_g}, p0{b2 - c2, 2 * c2 * cos_b, -c2};
  const Poly q2{-b2}, q1{0, 2 * b2 * cos_a}, q0{a2, -2 * a2 * cos_b, a2 - b2};

  // Resultant of two quadratics in u.
  const Poly lead = sub(mul(p2, q0), mul(p0, q2));
  const Poly resultant =
      sub(mul(lead, lead), mul(sub(mul(p2, q1), mul(p1, q2)), sub(mul(p1, q0), mul(p0, q1))));

  const double scale = std::max({a2, b2, c2});
  std::vector<PoseCandidate> out;
  for (const double v_root : real_roots(resultant)) {
    // q2*E1 - p2*E2 is linear in u. When its slope vanishes (symmetric or
    // tangent configurations) fall back to the roots of the first conic.
    std::vector<double> us;
    const double den = q2[0] * p1[0] - p2[0] * eval(q1, v_root);
    const double num = p2[0] * eval(q0, v_root) - q2[0] * eval(p0, v_root);
    if (std::abs(den) > 1e-6 * std::max(std::abs(num), scale * scale)) {
      us.push_back(num / den);
    } else {
      const double qa = p2[0], qb = p1[0], qc = eval(p0, v_root);
      double disc = qb * qb - 4.0 * qa * qc;
      if (disc < 0.0 && disc > -1e-10 * scale * scale) disc = 0.0;
      if (disc < 0.0) continue;
      us.push_back((-qb + std::sqrt(disc)) / (2.0 * qa));
      us.push_back((-qb - std::sqrt(disc)) / (2.0 * qa));
    }
    for (double u : us) {
      double v = v_root;
      polish(p2, p1, p0, q2, q1, q0, u, v);
      const double e2 = q2[0] * u * u + eval(q1, v) * u + eval(q0, v);
      const double e2_scale = std::abs(q2[0]) * u * u + std::abs(eval(q1, v) * u) + std::abs(eval(q0, v));
      if (std::abs(e2) > 1e-7 * std::max(e2_scale, scale)) continue;
      const double denom1 = 1.0 + u * u - 2.0 * u * cos_g;
      if (!(denom1 > 0.0)) continue;
      const double s1 = std::sqrt(c2 / denom1);
      const double s2 = u * s1, s3 = v * s1;
      if (!(s1 > 0.0 && s2 > 0.0 && s3 > 0.0)) continue;
      const std::array<Vec3, 3> cam{s1 * ray[0], s2 * ray[1], s3 * ray[2]};
      const PoseCandidate pose = align(x, cam);
      bool ok = true;
      for (int i = 0; i < 3; ++i) {
        const Vec3 p = pose.rotation * x[i] + pose.translation;
        if (!(p.z() > 0.0) || (p - cam[i]).norm() > 1e-6 * std::sqrt(scale)) ok = false;
      }
      for (const auto& prev : out) {
        if ((prev.rotation - pose.rotation).cwiseAbs().maxCoeff() < 1e-7 &&
            (prev.translation - pose.translation).cwiseAbs().maxCoeff() < 1e-7 * std::sqrt(scale)) {
          ok = false;
        }
      }
      if (ok) out.push_back(pose);
    }
  }
  return out;
}

PoseCandidate p3p_best(std::span<const Correspondence> sample, std::span<const Correspondence> eval,
                       P3pBestStats* stats) {
  if (sample.size() != 6) throw std::invalid_argument("p3p_best takes exactly six points");
  P3pBestStats local;
  PoseCandidate best;
  double best_score = std::numeric_limits<double>::infinity();
  bool found = false;
  for (int i = 0; i < 6; ++i) {
    for (int j = i + 1; j < 6; ++j) {
      for (int k = j + 1; k < 6; ++k) {
        ++local.triplets_tried;
        const std::array<Correspondence, 3> triple{sample[i], sample[j], sample[k]};
        std::vector<PoseCandidate> candidates;
        try {
          candidates = p3p(triple);
        } catch (const Error&) {
          ++local.degenerate_triplets;
          continue;
        }
        for (const auto& cand : candidates) {
          ++local.candidates_scored;
          const RowAffinePose pose = cand.pose();
          double score = 0.0;
          for (const auto& c : eval) score += reprojection_error(pose, c);
          if (!found || score < best_score) {
            best = cand;
            best_score = score;
            found = true;
          }
        }
      }
    }
  }
  if (stats) *stats = local;
  if (!found) throw Error(ErrorCode::kAllTripletsDegenerate, "no triplet produced a pose");
  return best;
}

}  // namespace linrs
