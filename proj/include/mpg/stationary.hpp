#pragma once

/**
 * @file stationary.hpp
 * @brief Stationary problem on (0,1) by the splitting fixed point S = S2 o S1.
 *
 *   -kappa_m Phi(phi)_xx = Gamma(x, phi, c),   -D c_xx = Q(x, phi, c)
 *
 * S1 maps phi to the nutrient c; S2 maps c to phi through u = Phi(phi).
 * Both are Euler-Lagrange systems of convex-in-gradient functionals J1, J2,
 * solved by Newton with J as the line-search merit. Reaction terms use the
 * truncated kinetics (f^p cut to [0, phi_max], f^d and q cut to [0, inf)).
 */

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mpg/analysis.hpp"
#include "mpg/constitutive.hpp"
#include "mpg/errors.hpp"
#include "mpg/evolution.hpp"
#include "mpg/geometry.hpp"
#include "mpg/kinetics.hpp"
#include "mpg/numerics.hpp"
#include "mpg/poisson.hpp"

namespace mpg {

struct StationaryProblem {
  Grid1D grid = build_grid(16);
  ConstitutivePair pair = build_pair(PowerAdhesive(1.0, 0.5));
  KineticsSpec spec;
  double kappa_m = 1.0;
  double D = 1.0;
  double S = 0.5;          ///< tumor occupies (S_left, S)
  double S_left = 0.0;
  double eps_pos = 0.1;    ///< positivity floor, in (0, phi_star)
  double tol = 1e-10;
  int k_max = 500;
  double omega = 1.0;      ///< fixed-point relaxation
  int lipschitz_resolution = 401;
};

inline std::vector<std::string> stationary_issues(const StationaryProblem& p) {
  std::vector<std::string> issues;
  if (p.grid.no_far_flag) issues.push_back("the stationary problem needs a far boundary");
  if (!(p.kappa_m > 0.0)) issues.push_back("kappa_m must be positive");
  if (!(p.D > 0.0)) issues.push_back("D must be positive");
  if (!(p.S_left >= 0.0 && p.S >= p.S_left && p.S <= 1.0)) issues.push_back("need 0 <= S_left <= S <= 1");
  if (!(p.omega > 0.0 && p.omega <= 1.0)) issues.push_back("omega must lie in (0,1]");
  if (p.k_max < 1) issues.push_back("k_max must be at least 1");
  if (!(p.tol > 0.0)) issues.push_back("tol must be positive");
  const double ps = far_phi_star(p.grid);
  if (std::isfinite(ps) && !(p.eps_pos > 0.0 && p.eps_pos < ps)) issues.push_back("eps_pos must lie in (0, phi_star)");
  for (Population a : kPopulations)
    if (std::abs(p.spec[a].h(0.0)) > 0.0) issues.push_back(std::string("h_") + population_tag(a) + "(0) must vanish");
  return issues;
}

namespace detail {

inline std::vector<double> uniform_nodes(double lo, double hi, double spacing) {
  // Integer multiples of the spacing, so 0 is always a node.
  const int a = static_cast<int>(std::floor(lo / spacing)), b = static_cast<int>(std::ceil(hi / spacing));
  std::vector<double> xs;
  for (int k = a; k <= b; ++k) xs.push_back(k * spacing);
  return xs;
}

inline double truncated_f(const KineticTerm& t, double s, double phi_max) {
  if (t.proliferation) return (s >= 0.0 && s <= phi_max) ? t.f(s) : 0.0;
  return s >= 0.0 ? t.f(s) : 0.0;
}

}  // namespace detail

/// Assembled operators, masks and antiderivative tables shared by S1 and S2.
class StationarySolver {
 public:
  explicit StationarySolver(StationaryProblem problem) : p_(std::move(problem)) {
    if (auto issues = stationary_issues(p_); !issues.empty()) throw ValidationError(std::move(issues));
    n_ = p_.grid.nodes();
    mass_ = lumped_mass(p_.grid);
    const auto m = mask_for_region(p_.grid, p_.S_left, p_.S);
    w_[0] = m.node_tumor;
    w_[1].resize(n_);
    for (std::size_t i = 0; i < n_; ++i) w_[1][i] = 1.0 - m.node_tumor[i];
    phi_star_ = far_phi_star(p_.grid);
    s_hi_ = p_.pair.domain_upper() ? std::min(p_.spec.phi_max, 0.999 * *p_.pair.domain_upper()) : p_.spec.phi_max;
    build_tables();
  }

  const StationaryProblem& problem() const { return p_; }

  // ---- S1 -----------------------------------------------------------------

  /// Absorption coefficient a_alpha,i = w lambda h(phi_i) of node i.
  double uptake_weight(Population a, std::size_t i, double phi) const {
    const auto& pk = p_.spec[a];
    return w_[index(a)][i] * pk.lambda * pk.h(phi);
  }

  double q_tilde(Population a, double c) const { return c >= 0.0 ? p_.spec[a].q(c) : 0.0; }

  /// Gradient of J1 (the discrete weak residual of the nutrient equation).
  Field s1_gradient(const Field& c, const Field& phi) const {
    Field g(n_, 0.0);
    const double inv_h = 1.0 / p_.grid.h;
    for (std::size_t i = 0; i < n_; ++i) {
      if (p_.grid.dirichlet(i)) continue;
      double kc = 0.0;
      if (i > 0) kc += (c[i] - c[i - 1]) * inv_h;
      if (i + 1 < n_) kc += (c[i] - c[i + 1]) * inv_h;
      const auto [eta, cb] = robin(i);
      double react = 0.0;
      for (Population a : kPopulations) react += uptake_weight(a, i, phi[i]) * q_tilde(a, c[i]);
      g[i] = p_.D * kc + eta * (c[i] - cb) + mass_[i] * react;
    }
    return g;
  }

  double j1(const Field& c, const Field& phi) const {
    double j = 0.5 * p_.D * stiffness_inner(p_.grid, c, c);
    for (std::size_t i = 0; i < n_; ++i) {
      const auto [eta, cb] = robin(i);
      j += 0.5 * eta * (c[i] - cb) * (c[i] - cb);
      for (Population a : kPopulations) {
        const double wgt = uptake_weight(a, i, phi[i]);
        if (wgt != 0.0) j += mass_[i] * wgt * (*q_table_[index(a)])(c[i]);
      }
    }
    return j;
  }

  /// S1(phi): nutrient field for the given cells. `j_history` receives J1 at
  /// every accepted iterate.
  Field solve_c_given_phi(const Field& phi, std::vector<double>* j_history = nullptr) const {
    check_size(phi);
    Field c(n_);
    for (std::size_t i = 0; i < n_; ++i) c[i] = dirichlet_c(i).value_or(max_c_b(p_.grid));
    auto grad = [&](const Field& x) { return s1_gradient(x, phi); };
    auto merit = [&](const Field& x) { return j1(x, phi); };
    auto hess = [&](const Field& x, bool) {
      Tridiagonal hm = stiffness_matrix(p_.grid);
      for (std::size_t i = 0; i < n_; ++i) {
        hm.diag[i] *= p_.D;
        hm.lower[i] *= p_.D;
        hm.upper[i] *= p_.D;
        hm.diag[i] += robin(i).first;
        const double eps = 1e-7 * std::max(1.0, std::abs(x[i]));
        double dq = 0.0;
        for (Population a : kPopulations)
          dq += uptake_weight(a, i, phi[i]) * (q_tilde(a, x[i] + eps) - q_tilde(a, x[i] - eps)) / (2 * eps);
        hm.diag[i] += mass_[i] * std::max(dq, 0.0);
      }
      return hm;
    };
    minimize(c, grad, merit, hess, [](const Field&) { return true; }, "S1", j_history);
    return c;
  }

  // ---- S2 -----------------------------------------------------------------

  /// Truncated Gamma at node i, without the forcing the evolution adds.
  double gamma_tilde(std::size_t i, double phi, double c) const {
    double g = -p_.spec.delta * phi;
    for (Population a : kPopulations) {
      const double w = w_[index(a)][i];
      if (w == 0.0) continue;
      const auto& pk = p_.spec[a];
      if (!pk.factored()) {
        g += w * pk.direct(phi, c);
        continue;
      }
      for (const auto& t : pk.terms) g += w * t.rate * detail::truncated_f(t, phi, p_.spec.phi_max) * t.g(c);
    }
    return g;
  }

  bool admissible_u(double u) const {
    const auto [lo, hi] = p_.pair.range();
    return std::isfinite(u) && u > lo && u < hi;
  }

  Field s2_gradient(const Field& u, const Field& c) const {
    Field g(n_, 0.0);
    const double inv_h = 1.0 / p_.grid.h;
    for (std::size_t i = 0; i < n_; ++i) {
      if (p_.grid.dirichlet(i)) continue;
      double ku = 0.0;
      if (i > 0) ku += (u[i] - u[i - 1]) * inv_h;
      if (i + 1 < n_) ku += (u[i] - u[i + 1]) * inv_h;
      g[i] = p_.kappa_m * ku - mass_[i] * gamma_tilde(i, p_.pair.phi_inverse(u[i]), c[i]);
    }
    return g;
  }

  /// int_0^phi Gamma~_i(s, c) Phi'(s) ds, the potential of the reaction at node i.
  double reaction_potential(std::size_t i, double phi, double c) const {
    double r = -p_.spec.delta * (*psi_table_)(phi);
    for (Population a : kPopulations) {
      const double w = w_[index(a)][i];
      if (w == 0.0) continue;
      const auto& pk = p_.spec[a];
      if (!pk.factored()) {
        const ScalarFn integrand = [&](double s) { return pk.direct(s, c) * p_.pair.phi_prime(s); };
        r += w * integrate(integrand, 0.0, phi, 1e-13);
        continue;
      }
      for (std::size_t k = 0; k < pk.terms.size(); ++k) {
        const auto& t = pk.terms[k];
        r += w * t.rate * t.g(c) * (*f_tables_[index(a)][k])(phi);
      }
    }
    return r;
  }

  double j2(const Field& u, const Field& c) const {
    double j = 0.5 * p_.kappa_m * stiffness_inner(p_.grid, u, u);
    for (std::size_t i = 0; i < n_; ++i) j -= mass_[i] * reaction_potential(i, p_.pair.phi_inverse(u[i]), c[i]);
    return j;
  }

  /// S2(c): cells for the given nutrient, through u = Phi(phi). `u_guess`
  /// warm-starts Newton.
  Field solve_phi_given_c(const Field& c, std::vector<double>* j_history = nullptr,
                          const Field* phi_guess = nullptr) const {
    check_size(c);
    const double u_far = p_.pair.phi(phi_star_);
    Field u(n_, u_far);
    if (phi_guess) {
      for (std::size_t i = 0; i < n_; ++i)
        if (!p_.grid.dirichlet(i)) u[i] = p_.pair.phi((*phi_guess)[i]);
    }
    auto grad = [&](const Field& x) { return s2_gradient(x, c); };
    auto merit = [&](const Field& x) { return j2(x, c); };
    auto hess = [&](const Field& x, bool convexify) {
      Tridiagonal hm = stiffness_matrix(p_.grid);
      for (std::size_t i = 0; i < n_; ++i) {
        hm.diag[i] *= p_.kappa_m;
        hm.lower[i] *= p_.kappa_m;
        hm.upper[i] *= p_.kappa_m;
        if (p_.grid.dirichlet(i)) continue;
        const double eps = 1e-7 * std::max(1.0, std::abs(x[i]));
        double a = 0.0;
        if (admissible_u(x[i] + eps) && admissible_u(x[i] - eps)) {
          a = -(gamma_tilde(i, p_.pair.phi_inverse(x[i] + eps), c[i]) -
                gamma_tilde(i, p_.pair.phi_inverse(x[i] - eps), c[i])) /
              (2 * eps);
        }
        hm.diag[i] += mass_[i] * (convexify ? std::max(a, 0.0) : a);
      }
      return hm;
    };
    auto admissible = [&](const Field& x) {
      return std::all_of(x.begin(), x.end(), [&](double v) { return admissible_u(v); });
    };
    minimize(u, grad, merit, hess, admissible, "S2", j_history);
    Field phi(n_);
    for (std::size_t i = 0; i < n_; ++i) phi[i] = p_.grid.dirichlet(i) ? phi_star_ : p_.pair.phi_inverse(u[i]);
    return phi;
  }

  /// max over nodes of the scaled residuals of both equations.
  double coupled_residual(const Field& phi, const Field& c) const {
    Field u(n_);
    for (std::size_t i = 0; i < n_; ++i) u[i] = p_.pair.phi(phi[i]);
    const Field g1 = s1_gradient(c, phi), g2 = s2_gradient(u, c);
    double r = 0.0;
    for (std::size_t i = 0; i < n_; ++i) r = std::max({r, std::abs(g1[i]) / mass_[i], std::abs(g2[i]) / mass_[i]});
    return r;
  }

  double phi_star() const { return phi_star_; }

 private:
  void check_size(const Field& f) const {
    if (f.size() != n_) throw ConfigError("field size does not match the grid");
  }

  std::optional<double> dirichlet_c(std::size_t i) const {
    if (!p_.grid.dirichlet(i)) return std::nullopt;
    return boundary_c_b(p_.grid, i == 0 ? 0 : 1);
  }

  std::pair<double, double> robin(std::size_t i) const {
    double eta = 0.0, cb = 0.0;
    for (std::size_t e = 0; e < 2; ++e) {
      if (p_.grid.boundary_node(e) != i) continue;
      if (const auto* v = std::get_if<Vascular>(&p_.grid.role(e))) {
        eta += v->eta;
        cb = v->c_b;
      }
    }
    return {eta, cb};
  }

  void build_tables() {
    const double cb = max_c_b(p_.grid);
    for (Population a : kPopulations) {
      const auto& pk = p_.spec[a];
      ScalarFn qt = [this, a](double c) { return q_tilde(a, c); };
      q_table_[index(a)] =
          std::make_shared<const CumulativeIntegral>(qt, detail::uniform_nodes(-0.25 * cb, 2.0 * cb, cb / 400.0), 0.0, false);
      f_tables_[index(a)].clear();
      for (const auto& t : pk.terms) {
        const double pm = p_.spec.phi_max;
        const ConstitutivePair pair = p_.pair;
        ScalarFn integrand = [t, pm, pair](double s) { return detail::truncated_f(t, s, pm) * pair.phi_prime(s); };
        f_tables_[index(a)].push_back(std::make_shared<const CumulativeIntegral>(
            integrand, detail::uniform_nodes(-0.25, s_hi_, s_hi_ / 800.0), 0.0, false));
      }
    }
    const ConstitutivePair pair = p_.pair;
    ScalarFn psi = [pair](double s) { return s * pair.phi_prime(s); };
    psi_table_ = std::make_shared<const CumulativeIntegral>(psi, detail::uniform_nodes(-0.25, s_hi_, s_hi_ / 800.0), 0.0, false);
  }

  /// Newton on the gradient of a convex-in-gradient functional with Armijo
  /// backtracking on the functional itself. The exact Hessian is tried
  /// first; if it does not give a descent direction the reaction part is
  /// convexified.
  template <class Grad, class Merit, class Hess, class Admissible>
  void minimize(Field& x, Grad&& grad, Merit&& merit, Hess&& hess, Admissible&& admissible, const char* what,
                std::vector<double>* history) const {
    Field g = grad(x);
    double j = merit(x);
    if (history) history->push_back(j);
    for (int it = 0; it < 200; ++it) {
      double gmax = 0.0;
      for (std::size_t i = 0; i < n_; ++i) gmax = std::max(gmax, std::abs(g[i]) / mass_[i]);
      if (!std::isfinite(gmax)) throw SolveError(std::string(what) + ": non-finite residual");
      Field d;
      double slope = 0.0;
      for (bool convexify : {false, true}) {
        try {
          Tridiagonal hm = hess(x, convexify);
          Field rhs(n_);
          for (std::size_t i = 0; i < n_; ++i) {
            if (p_.grid.dirichlet(i)) {
              hm.pin_row(i);
              if (i > 0) hm.upper[i - 1] = 0.0;
              if (i + 1 < n_) hm.lower[i + 1] = 0.0;
              rhs[i] = 0.0;
            } else {
              rhs[i] = -g[i];
            }
          }
          d = TridiagonalLU(hm).solve(rhs);
        } catch (const SolveError&) {
          d.clear();
          continue;
        }
        slope = 0.0;
        for (std::size_t i = 0; i < n_; ++i) slope += g[i] * d[i];
        if (slope < 0.0 && all_finite(d)) break;
        d.clear();
      }
      double dmax = 0.0, xmax = 1.0;
      for (std::size_t i = 0; i < d.size(); ++i) {
        dmax = std::max(dmax, std::abs(d[i]));
        xmax = std::max(xmax, std::abs(x[i]));
      }
      if (d.empty() || dmax <= 1e-15 * xmax) return;  // stationary point up to rounding
      double alpha = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        Field trial(x);
        for (std::size_t i = 0; i < n_; ++i) trial[i] += alpha * d[i];
        if (admissible(trial)) {
          const double jt = merit(trial);
          const bool armijo = jt <= j + 1e-4 * alpha * slope;
          // Below rounding of J the Armijo test is meaningless; accept a full
          // step that does not raise J beyond that level.
          const bool flat = std::abs(slope) <= 1e-13 * (1.0 + std::abs(j)) && jt <= j + 1e-13 * (1.0 + std::abs(j));
          if (std::isfinite(jt) && (armijo || flat)) {
            x = std::move(trial);
            j = std::min(jt, j);
            accepted = true;
            break;
          }
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        if (dmax <= 1e-10 * xmax) return;
        throw SolveError(std::string(what) + ": line search failed");
      }
      if (history) history->push_back(merit(x));
      g = grad(x);
      if (alpha == 1.0 && dmax <= 1e-13 * xmax) return;
    }
    throw SolveError(std::string(what) + ": Newton did not converge");
  }

  StationaryProblem p_;
  std::size_t n_ = 0;
  Field mass_;
  std::array<Field, 2> w_;
  double phi_star_ = 0.0;
  double s_hi_ = 1.0;
  std::array<std::shared_ptr<const CumulativeIntegral>, 2> q_table_;
  std::array<std::vector<std::shared_ptr<const CumulativeIntegral>>, 2> f_tables_;
  std::shared_ptr<const CumulativeIntegral> psi_table_;
};

// ---------------------------------------------------------------------------
// Constant checks

struct UniquenessCheck {
  double C = 0.0;
  double threshold = 0.0;
  bool satisfied = false;
  std::array<double, 3> branches{};  ///< the three sums, before the factor 1/2
  double poincare = 0.0;
  bool absolute_rates = true;        ///< |gamma| used for death rates
};

struct PositivityCheck {
  double C1 = 0.0;
  double bound = 0.0;
  bool satisfied = false;
  double poincare = 0.0;
};

namespace detail {

inline double sampled_sup(const ScalarFn& f, double lo, double hi, int n) {
  double m = 0.0;
  for (int k = 0; k < n; ++k) m = std::max(m, std::abs(f(lo + (hi - lo) * k / (n - 1))));
  return m;
}

inline double sampled_lipschitz(const ScalarFn& f, double lo, double hi, int n) {
  double m = 0.0, prev = f(lo);
  for (int k = 1; k < n; ++k) {
    const double x0 = lo + (hi - lo) * (k - 1) / (n - 1), x1 = lo + (hi - lo) * k / (n - 1);
    const double cur = f(x1);
    m = std::max(m, std::abs(cur - prev) / (x1 - x0));
    prev = cur;
  }
  return m;
}

inline void require_factored(const KineticsSpec& spec, const char* what) {
  for (Population a : kPopulations)
    if (!spec[a].factored()) throw ConfigError(std::string(what) + " needs factored kinetics");
}

inline double lipschitz_upper(const StationaryProblem& p) {
  return p.pair.domain_upper() ? std::min(p.spec.phi_max, 0.999 * *p.pair.domain_upper()) : p.spec.phi_max;
}

}  // namespace detail

/// Sampled evaluation of the three-branch uniqueness constant, compared with
/// min{kappa_m, delta, D / C_P^2}. Throws DegenerateError when a factor is
/// not Phi-Lipschitz on the sample.
inline UniquenessCheck uniqueness_constant(const StationaryProblem& p) {
  detail::require_factored(p.spec, "uniqueness constant");
  const int n = p.lipschitz_resolution;
  const double pm = p.spec.phi_max, cb = max_c_b(p.grid), hi = detail::lipschitz_upper(p);
  const double cp = poincare_constant(p.grid).constant;
  UniquenessCheck out;
  out.poincare = cp;
  auto& [a, b, c] = out.branches;
  for (Population al : kPopulations) {
    const auto& pk = p.spec[al];
    for (const auto& t : pk.terms) {
      const double g = std::abs(t.rate);
      const double f_sup = detail::sampled_sup(t.f, 0.0, pm, n), g_sup = detail::sampled_sup(t.g, 0.0, cb, n);
      const double lip_f = g == 0.0 ? 0.0 : phi_lipschitz_constant(p.pair, t.f, 0.0, hi, n, t.id).constant;
      const double lip_g = detail::sampled_lipschitz(t.g, 0.0, cb, n);
      a += g * lip_f * g_sup;
      b += g * f_sup * lip_g * lip_g;
      c += g * (f_sup + g_sup);
    }
    const double q_sup = detail::sampled_sup(pk.q, 0.0, cb, n);
    const double lip_h = pk.lambda == 0.0 ? 0.0 : phi_lipschitz_constant(p.pair, pk.h, 0.0, hi, n, "h").constant;
    a += pk.lambda * lip_h * q_sup;
    b += pk.lambda * q_sup;
  }
  c *= cp * cp;
  out.C = 0.5 * std::max({a, b, c});
  out.threshold = std::min({p.kappa_m, p.spec.delta, p.D / (cp * cp)});
  out.satisfied = out.C < out.threshold;
  return out;
}

/// C1 = ((1 + C_P^2) / kappa_m) (sum |gamma| ||f|| ||g|| |Omega_alpha| + delta phi_max)
/// against Phi(phi_star) - Phi(eps_pos).
inline PositivityCheck positivity_constraint_check(const StationaryProblem& p, double eps_pos) {
  detail::require_factored(p.spec, "positivity constraint");
  const double ps = far_phi_star(p.grid);
  if (!(eps_pos > 0.0 && eps_pos < ps)) throw ConfigError("eps_pos must lie in (0, phi_star)");
  const int n = p.lipschitz_resolution;
  const double pm = p.spec.phi_max, cb = max_c_b(p.grid);
  const double cp = poincare_constant(p.grid).constant;
  double sum = 0.0;
  for (Population al : kPopulations) {
    const double measure = al == Population::Tumor ? p.S - p.S_left : 1.0 - (p.S - p.S_left);
    for (const auto& t : p.spec[al].terms)
      sum += std::abs(t.rate) * detail::sampled_sup(t.f, 0.0, pm, n) * detail::sampled_sup(t.g, 0.0, cb, n) * measure;
  }
  PositivityCheck out;
  out.poincare = cp;
  out.C1 = (1.0 + cp * cp) / p.kappa_m * (sum + p.spec.delta * pm);
  out.bound = p.pair.phi(ps) - p.pair.phi(eps_pos);
  out.satisfied = out.C1 <= out.bound;
  return out;
}

// ---------------------------------------------------------------------------
// Fixed point

struct FixedPointReport {
  int iterations = 0;
  std::vector<double> residuals;  ///< ||phi_{k+1} - phi_k||_0 per iteration
  bool converged = false;
  Field phi, c;
  double coupled_residual = 0.0;
  std::optional<UniquenessCheck> uniqueness;  ///< also the constant C2 of the existence proof
  std::optional<PositivityCheck> positivity;
  std::string uniqueness_note;
  bool positivity_warning = false;
  double phi_min = 0.0, phi_max = 0.0, c_min = 0.0, c_max = 0.0;
};

inline FixedPointReport fixed_point_solve(const StationarySolver& solver, Field phi_init) {
  const auto& p = solver.problem();
  const double pm = p.spec.phi_max;
  for (double v : phi_init)
    if (!(v >= 0.0 && v <= pm)) throw ConfigError("initial iterate must lie in [0, phi_max]");
  FixedPointReport rep;
  const NormSuite norms(p.grid);
  Field phi = std::move(phi_init);
  for (int k = 1; k <= p.k_max; ++k) {
    const Field c = solver.solve_c_given_phi(phi);
    const Field next = solver.solve_phi_given_c(c, nullptr, &phi);
    Field relaxed(next.size()), diff(next.size());
    for (std::size_t i = 0; i < next.size(); ++i) {
      relaxed[i] = (1.0 - p.omega) * phi[i] + p.omega * next[i];
      diff[i] = relaxed[i] - phi[i];
    }
    phi = std::move(relaxed);
    rep.iterations = k;
    rep.residuals.push_back(norms.l2(diff));
    if (rep.residuals.back() < p.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.phi = phi;
  rep.c = solver.solve_c_given_phi(phi);
  rep.coupled_residual = solver.coupled_residual(rep.phi, rep.c);
  rep.phi_min = *std::min_element(rep.phi.begin(), rep.phi.end());
  rep.phi_max = *std::max_element(rep.phi.begin(), rep.phi.end());
  rep.c_min = *std::min_element(rep.c.begin(), rep.c.end());
  rep.c_max = *std::max_element(rep.c.begin(), rep.c.end());
  bool factored = true;
  for (Population a : kPopulations) factored = factored && p.spec[a].factored();
  if (factored) {
    try {
      rep.uniqueness = uniqueness_constant(p);
      rep.uniqueness_note = rep.uniqueness->satisfied ? "uniqueness guaranteed" : "uniqueness not guaranteed";
    } catch (const DegenerateError& e) {
      rep.uniqueness_note = std::string("uniqueness not guaranteed: ") + e.what();
    }
    rep.positivity = positivity_constraint_check(p, p.eps_pos);
    rep.positivity_warning = rep.positivity->satisfied && rep.phi_min < p.eps_pos;
  } else {
    rep.uniqueness_note = "uniqueness not assessed: kinetics not factored";
  }
  return rep;
}

inline FixedPointReport fixed_point_solve(const StationaryProblem& p, Field phi_init) {
  return fixed_point_solve(StationarySolver(p), std::move(phi_init));
}

}  // namespace mpg
