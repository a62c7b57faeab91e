#include "mixedfem/problems.hpp"

#include <cmath>

namespace mixedfem {

namespace {

constexpr double kPi = 3.14159265358979323846;

Mesh square_mesh_2tri() {
  return build_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}},
                    {{{0, 1, 2}}, {{0, 2, 3}}}, {0, 0});
}

// (-1,1)^2 as a 2x2 grid of squares, each split along its diagonal; every
// cell lies in exactly one quadrant, so quadrant and half-plane subdomain
// layouts are both edge-aligned.
Mesh square4_mesh(const std::function<int(const Vec2&)>& subdomain_of) {
  std::vector<Vec2> verts;
  for (int j = 0; j <= 2; ++j)
    for (int i = 0; i <= 2; ++i) verts.emplace_back(i - 1.0, j - 1.0);
  auto vid = [](int i, int j) { return j * 3 + i; };
  std::vector<std::array<int, 3>> tris;
  std::vector<int> subs;
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i) {
      const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1),
                d = vid(i, j + 1);
      const Vec2 center(i - 0.5, j - 0.5);
      tris.push_back({a, b, c});
      subs.push_back(subdomain_of(center));
      tris.push_back({a, c, d});
      subs.push_back(subdomain_of(center));
    }
  }
  return build_mesh(std::move(verts), std::move(tris), std::move(subs));
}

// Monodromy of the state (mu, mu') around the four quadrants. In a sector
// mu'' = -gamma^2 mu; across an axis mu is continuous and alpha mu' jumps.
using Mat2 = Eigen::Matrix2d;

Mat2 sector_rotation(double gamma) {
  const double c = std::cos(gamma * kPi / 2.0);
  const double s = std::sin(gamma * kPi / 2.0);
  Mat2 m;
  m << c, s / gamma, -gamma * s, c;
  return m;
}

std::array<double, 4> quadrant_alphas(double ratio) {
  return {ratio, 1.0, ratio, 1.0};
}

Mat2 monodromy(double gamma, double ratio) {
  const Mat2 rot = sector_rotation(gamma);
  const auto alpha = quadrant_alphas(ratio);
  Mat2 m = Mat2::Identity();
  for (int i = 0; i < 4; ++i) {
    Mat2 jump = Mat2::Identity();
    jump(1, 1) = alpha[i] / alpha[(i + 1) % 4];
    m = jump * rot * m;
  }
  return m;
}

}  // namespace

double ProblemSpec::regularity(const Mesh& mesh, int t) const {
  for (const Vec2& p : singular_points)
    if (mesh.triangle_touches_point(t, p)) return s_singular;
  return s_regular;
}

double KelloggSolution::mu(double theta) const {
  theta = std::fmod(theta, 2.0 * kPi);
  if (theta < 0.0) theta += 2.0 * kPi;
  const int sector = std::min(3, static_cast<int>(theta / (kPi / 2.0)));
  const double d = theta - sector * kPi / 2.0;
  return mu_start[sector] * std::cos(gamma * d) +
         dmu_start[sector] / gamma * std::sin(gamma * d);
}

double KelloggSolution::dmu(double theta) const {
  theta = std::fmod(theta, 2.0 * kPi);
  if (theta < 0.0) theta += 2.0 * kPi;
  const int sector = std::min(3, static_cast<int>(theta / (kPi / 2.0)));
  const double d = theta - sector * kPi / 2.0;
  return -gamma * mu_start[sector] * std::sin(gamma * d) +
         dmu_start[sector] * std::cos(gamma * d);
}

double KelloggSolution::u(const Vec2& x) const {
  const double r = x.norm();
  if (r == 0.0) return 0.0;
  return std::pow(r, gamma) * mu(std::atan2(x.y(), x.x()));
}

Vec2 KelloggSolution::grad_u(const Vec2& x) const {
  const double r = x.norm();
  const double theta = std::atan2(x.y(), x.x());
  const Vec2 er(std::cos(theta), std::sin(theta));
  const Vec2 et(-std::sin(theta), std::cos(theta));
  const double rp = std::pow(r, gamma - 1.0);
  return rp * (gamma * mu(theta) * er + dmu(theta) * et);
}

double KelloggSolution::alpha_at(const Vec2& x) const {
  const bool odd_quadrant = (x.x() >= 0.0) == (x.y() >= 0.0);
  return odd_quadrant ? ratio : 1.0;
}

KelloggSolution kellogg_constants(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw InvalidParams("kellogg gamma must be in (0,1)");

  auto trace_gap = [gamma](double a) {
    return monodromy(gamma, a).trace() - 2.0;
  };

  // Scan log-spaced ratios upward from 1 for the first sign change, then
  // bisect. trace - 2 < 0 at a = 1 for gamma in (0,1).
  double lo = 1.0, hi = 0.0;
  double f_lo = trace_gap(lo);
  bool bracketed = false;
  for (double t = 0.001; t <= 14.0; t += 0.001) {
    const double a = std::pow(10.0, t);
    const double f_a = trace_gap(a);
    if (f_lo <= 0.0 && f_a > 0.0) {
      hi = a;
      bracketed = true;
      break;
    }
    lo = a;
    f_lo = f_a;
  }
  if (!bracketed)
    throw RootFindFailure("no checkerboard ratio found for gamma=" +
                          std::to_string(gamma));
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (trace_gap(mid) <= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double ratio = 0.5 * (lo + hi);

  KelloggSolution sol;
  sol.gamma = gamma;
  sol.ratio = ratio;

  // eigenvector of the monodromy for eigenvalue 1
  const Mat2 m = monodromy(gamma, ratio);
  Eigen::Vector2d x(m(0, 1), 1.0 - m(0, 0));
  if (x.norm() < 1e-12 * m.norm())
    x = Eigen::Vector2d(1.0 - m(1, 1), m(1, 0));
  if (x.norm() == 0.0) throw RootFindFailure("degenerate monodromy eigenvector");

  const Mat2 rot = sector_rotation(gamma);
  const auto alpha = quadrant_alphas(ratio);
  Eigen::Vector2d state = x;
  double mu_max = 0.0;
  for (int i = 0; i < 4; ++i) {
    sol.mu_start[i] = state[0];
    sol.dmu_start[i] = state[1];
    state = rot * state;
    state[1] *= alpha[i] / alpha[(i + 1) % 4];
  }
  for (double theta = 0.0; theta < 2.0 * kPi; theta += 1e-3)
    mu_max = std::max(mu_max, std::abs(sol.mu(theta)));
  for (int i = 0; i < 4; ++i) {
    sol.mu_start[i] /= mu_max;
    sol.dmu_start[i] /= mu_max;
  }
  return sol;
}

ProblemSpec get_problem(const std::string& name, const ProblemParams& params) {
  ProblemSpec p;
  p.name = name;

  if (name == "smooth") {
    p.initial_mesh = square_mesh_2tri();
    p.alpha_by_subdomain = {{0, 1.0}};
    p.f = [](const Vec2& x) {
      return 2.0 * kPi * kPi * std::sin(kPi * x.x()) * std::sin(kPi * x.y());
    };
    p.g = [](const Vec2&) { return 0.0; };
    p.has_exact = true;
    p.exact_u = [](const Vec2& x) {
      return std::sin(kPi * x.x()) * std::sin(kPi * x.y());
    };
    p.exact_grad_u = [](const Vec2& x) {
      return Vec2(kPi * std::cos(kPi * x.x()) * std::sin(kPi * x.y()),
                  kPi * std::sin(kPi * x.x()) * std::cos(kPi * x.y()));
    };
    p.exact_sigma = [](const Vec2& x) {
      return Vec2(-kPi * std::cos(kPi * x.x()) * std::sin(kPi * x.y()),
                  -kPi * std::sin(kPi * x.x()) * std::cos(kPi * x.y()));
    };
    return p;
  }

  if (name == "interface_smooth") {
    const double R = params.jump_ratio;
    if (!(R > 0.0)) throw InvalidParams("jump_ratio must be > 0");
    p.initial_mesh =
        square4_mesh([](const Vec2& c) { return c.x() < 0.0 ? 0 : 1; });
    p.alpha_by_subdomain = {{0, R}, {1, 1.0}};
    auto side_alpha = [R](const Vec2& x) { return x.x() < 0.0 ? R : 1.0; };
    // u = sin(pi x) sin(pi y) / alpha per side: u and the flux are both
    // continuous across x = 0, so the family is piecewise smooth for every R.
    p.f = [](const Vec2& x) {
      return 2.0 * kPi * kPi * std::sin(kPi * x.x()) * std::sin(kPi * x.y());
    };
    p.has_exact = true;
    p.exact_u = [side_alpha](const Vec2& x) {
      return std::sin(kPi * x.x()) * std::sin(kPi * x.y()) / side_alpha(x);
    };
    p.exact_grad_u = [side_alpha](const Vec2& x) {
      return Vec2(kPi * std::cos(kPi * x.x()) * std::sin(kPi * x.y()),
                  kPi * std::sin(kPi * x.x()) * std::cos(kPi * x.y())) /
             side_alpha(x);
    };
    p.exact_sigma = [](const Vec2& x) {
      return Vec2(-kPi * std::cos(kPi * x.x()) * std::sin(kPi * x.y()),
                  -kPi * std::sin(kPi * x.x()) * std::cos(kPi * x.y()));
    };
    p.g = p.exact_u;
    return p;
  }

  if (name == "kellogg") {
    const KelloggSolution sol = kellogg_constants(params.kellogg_gamma);
    p.initial_mesh = square4_mesh([](const Vec2& c) {
      if (c.x() > 0.0) return c.y() > 0.0 ? 0 : 3;
      return c.y() > 0.0 ? 1 : 2;
    });
    p.alpha_by_subdomain = {{0, sol.ratio}, {1, 1.0}, {2, sol.ratio}, {3, 1.0}};
    p.f = [](const Vec2&) { return 0.0; };
    p.has_exact = true;
    p.exact_u = [sol](const Vec2& x) { return sol.u(x); };
    p.exact_grad_u = [sol](const Vec2& x) { return sol.grad_u(x); };
    p.exact_sigma = [sol](const Vec2& x) {
      return (-sol.alpha_at(x)) * sol.grad_u(x);
    };
    p.g = p.exact_u;
    p.singular_points = {Vec2(0, 0)};
    p.s_singular = params.kellogg_gamma;
    return p;
  }

  throw UnknownProblem("unknown problem \"" + name + "\"");
}

}  // namespace mixedfem
