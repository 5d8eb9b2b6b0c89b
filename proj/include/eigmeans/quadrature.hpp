#pragma once

// Quadrature building blocks: Gauss-Legendre, Fejer's first rule, and a
// composite Chebyshev-Lobatto panel grid with spectral cumulative integration.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "eigmeans/specialfun.hpp"

namespace eigmeans::quad {

template <class Real = double>
struct Rule {
  std::vector<Real> nodes;
  std::vector<Real> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
template <class Real = double>
Rule<Real> gauss_legendre(int n) {
  using std::abs;
  using std::cos;
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  Rule<Real> rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const Real pi = specialfun::detail::pi<Real>();
  const Real tol = std::numeric_limits<Real>::epsilon() * 4;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Real t = cos(pi * (Real(i) + Real(0.75)) / (Real(n) + Real(0.5)));
    Real dp = 1;
    for (int it = 0; it < 100; ++it) {
      const auto [p, d] = specialfun::legendre_with_derivative<Real>(n, t);
      dp = d;
      const Real dt = p / d;
      t -= dt;
      if (abs(dt) <= tol) {
        dp = specialfun::legendre_with_derivative<Real>(n, t).second;
        break;
      }
    }
    const Real w = 2 / ((1 - t * t) * dp * dp);
    rule.nodes[i] = -t;
    rule.nodes[n - 1 - i] = t;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0;
  return rule;
}

/// Fejer's first rule (nodes at Chebyshev points of the first kind) on [-1, 1].
/// Exact for polynomials of degree n-1.
template <class Real = double>
Rule<Real> fejer1(int n) {
  using std::cos;
  if (n < 1) throw std::invalid_argument("fejer1: n must be >= 1");
  Rule<Real> rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const Real pi = specialfun::detail::pi<Real>();
  for (int k = 0; k < n; ++k) {
    const Real theta = Real(2 * k + 1) * pi / Real(2 * n);
    Real s = 0;
    for (int j = 1; j <= n / 2; ++j) s += cos(2 * Real(j) * theta) / Real(4 * j * j - 1);
    rule.nodes[k] = -cos(theta);
    rule.weights[k] = Real(2) / Real(n) * (1 - 2 * s);
  }
  return rule;
}

/// Chebyshev-Lobatto points on [-1, 1] with barycentric weights and the
/// cumulative integration matrix S[k][j] = int_{-1}^{x_k} l_j(s) ds.
template <class Real = double>
class ChebyshevPanel {
 public:
  explicit ChebyshevPanel(int q) : q_(q) {
    using std::cos;
    if (q < 3) throw std::invalid_argument("ChebyshevPanel: need at least 3 nodes");
    const Real pi = specialfun::detail::pi<Real>();
    nodes_.resize(q);
    bary_.resize(q);
    for (int k = 0; k < q; ++k) {
      nodes_[k] = -cos(Real(k) * pi / Real(q - 1));
      bary_[k] = (k % 2 == 0 ? 1 : -1);
    }
    nodes_[0] = -1;
    nodes_[q - 1] = 1;
    bary_[0] /= 2;
    bary_[q - 1] /= 2;

    const Rule<Real> gl = gauss_legendre<Real>((q + 1) / 2 + 1);
    cumulative_.assign(static_cast<std::size_t>(q) * q, Real(0));
    std::vector<Real> basis(q);
    for (int k = 1; k < q; ++k) {
      const Real half = (nodes_[k] + 1) / 2;
      for (std::size_t g = 0; g < gl.nodes.size(); ++g) {
        const Real s = -1 + half * (gl.nodes[g] + 1);
        lagrange_basis(s, basis);
        for (int j = 0; j < q; ++j) cumulative_[k * q + j] += half * gl.weights[g] * basis[j];
      }
    }
  }

  int size() const noexcept { return q_; }
  const std::vector<Real>& nodes() const noexcept { return nodes_; }
  Real cumulative(int k, int j) const { return cumulative_[static_cast<std::size_t>(k) * q_ + j]; }

  /// Values of all Lagrange basis polynomials at s in [-1, 1].
  void lagrange_basis(Real s, std::vector<Real>& out) const {
    out.assign(q_, Real(0));
    for (int j = 0; j < q_; ++j) {
      if (s == nodes_[j]) {
        out[j] = 1;
        return;
      }
    }
    Real denom = 0;
    for (int j = 0; j < q_; ++j) {
      out[j] = bary_[j] / (s - nodes_[j]);
      denom += out[j];
    }
    for (int j = 0; j < q_; ++j) out[j] /= denom;
  }

  /// Barycentric interpolation of samples at the panel nodes.
  Real interpolate(Real s, std::span<const Real> samples) const {
    Real num = 0;
    Real den = 0;
    for (int j = 0; j < q_; ++j) {
      if (s == nodes_[j]) return samples[j];
      const Real w = bary_[j] / (s - nodes_[j]);
      num += w * samples[j];
      den += w;
    }
    return num / den;
  }

 private:
  int q_;
  std::vector<Real> nodes_;
  std::vector<Real> bary_;
  std::vector<Real> cumulative_;
};

/// Composite grid of Chebyshev-Lobatto panels between increasing breakpoints.
/// Adjacent panels share their endpoint node, so panel p owns global nodes
/// p*(q-1) .. p*(q-1) + q-1.
template <class Real = double>
class PanelGrid {
 public:
  PanelGrid(std::vector<Real> breakpoints, int nodes_per_panel)
      : breaks_(std::move(breakpoints)), panel_(nodes_per_panel) {
    if (breaks_.size() < 2) throw std::invalid_argument("PanelGrid: need at least one panel");
    for (std::size_t i = 1; i < breaks_.size(); ++i) {
      if (!(breaks_[i] > breaks_[i - 1])) throw std::invalid_argument("PanelGrid: breakpoints must increase");
    }
    const int q = panel_.size();
    const std::size_t panels = breaks_.size() - 1;
    nodes_.resize(panels * (q - 1) + 1);
    for (std::size_t p = 0; p < panels; ++p) {
      const Real a = breaks_[p];
      const Real b = breaks_[p + 1];
      for (int k = 0; k < q; ++k) nodes_[p * (q - 1) + k] = a + (b - a) * (panel_.nodes()[k] + 1) / 2;
      nodes_[p * (q - 1)] = a;
      nodes_[p * (q - 1) + q - 1] = b;
    }
  }

  /// Breakpoints 0 < H 2^-levels < ... < H/2 < H < 2H < ... < length with H = length/uniform_panels.
  static PanelGrid graded(Real length, int uniform_panels, int grading_levels, int nodes_per_panel) {
    if (!(length > 0) || uniform_panels < 1 || grading_levels < 0) {
      throw std::invalid_argument("PanelGrid::graded: bad parameters");
    }
    const Real h = length / Real(uniform_panels);
    std::vector<Real> b{Real(0)};
    Real scale = h;
    for (int l = 0; l < grading_levels; ++l) scale /= 2;
    for (int l = 0; l < grading_levels; ++l) {
      b.push_back(scale);
      scale *= 2;
    }
    for (int p = 1; p <= uniform_panels; ++p) b.push_back(h * Real(p));
    b.back() = length;
    return PanelGrid(std::move(b), nodes_per_panel);
  }

  const std::vector<Real>& nodes() const noexcept { return nodes_; }
  const std::vector<Real>& breakpoints() const noexcept { return breaks_; }
  std::size_t panel_count() const noexcept { return breaks_.size() - 1; }
  int nodes_per_panel() const noexcept { return panel_.size(); }
  Real length() const { return breaks_.back() - breaks_.front(); }

  /// Running integral from the first breakpoint to every node.
  std::vector<Real> cumulative_integral(std::span<const Real> f) const {
    if (f.size() != nodes_.size()) throw std::invalid_argument("cumulative_integral: sample count mismatch");
    const int q = panel_.size();
    std::vector<Real> out(nodes_.size(), Real(0));
    for (std::size_t p = 0; p < panel_count(); ++p) {
      const std::size_t base = p * (q - 1);
      const Real half = (breaks_[p + 1] - breaks_[p]) / 2;
      const Real start = out[base];
      for (int k = 1; k < q; ++k) {
        Real s = 0;
        for (int j = 0; j < q; ++j) s += panel_.cumulative(k, j) * f[base + j];
        out[base + k] = start + half * s;
      }
    }
    return out;
  }

  /// Spectral interpolation of node samples at x.
  Real interpolate(Real x, std::span<const Real> samples) const {
    if (samples.size() != nodes_.size()) throw std::invalid_argument("interpolate: sample count mismatch");
    if (x < breaks_.front() || x > breaks_.back()) throw std::domain_error("interpolate: x outside grid");
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    std::size_t p = (it == breaks_.begin()) ? 0 : static_cast<std::size_t>(it - breaks_.begin()) - 1;
    if (p >= panel_count()) p = panel_count() - 1;
    const int q = panel_.size();
    const Real a = breaks_[p];
    const Real b = breaks_[p + 1];
    const Real s = 2 * (x - a) / (b - a) - 1;
    return panel_.interpolate(s, samples.subspan(p * (q - 1), q));
  }

 private:
  std::vector<Real> breaks_;
  ChebyshevPanel<Real> panel_;
  std::vector<Real> nodes_;
};

}  // namespace eigmeans::quad
