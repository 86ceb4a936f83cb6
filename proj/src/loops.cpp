#include "etale/loops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace etale {

namespace {

constexpr double kPi = 3.14159265358979323846;

double energy_of(const TwistedLoop& loop, double* max_gap = nullptr, double* length = nullptr) {
  const int n = loop.size();
  const Geometry& geo = loop.geometry;
  double e = 0, l = 0, gap = 0;
  for (int k = 0; k < n; ++k) {
    const double d = geo.distance(loop.samples[k], k + 1 < n ? loop.samples[k + 1] : loop.twist.apply(loop.samples[0]));
    e += d * d;
    l += d;
    gap = std::max(gap, d);
  }
  if (max_gap) *max_gap = gap;
  if (length) *length = l;
  return 0.5 * n * e;
}

}  // namespace

Vec TwistedLoop::at(int k) const {
  const int n = size();
  if (k == n) return twist.apply(samples[0]);
  if (k == -1) return twist.inverse().apply(samples[n - 1]);
  return samples.at(k);
}

void validate_loop(const TwistedLoop& loop) {
  if (loop.size() < 8) throw Error("a twisted loop needs at least 8 samples");
  check_isometry(loop.geometry, loop.twist);
  for (int k = 0; k < loop.size(); ++k)
    if (!loop.geometry.contains(loop.samples[k])) throw Error("sample " + std::to_string(k) + " is off the manifold");
  double gap = 0;
  energy_of(loop, &gap);
  if (!std::isfinite(gap) || gap >= loop.geometry.convexity_radius())
    throw Error("consecutive samples are not within the convexity radius");
}

double SectionField::sup_norm() const {
  double m = 0;
  for (const Vec& x : v) m = std::max(m, x.norm());
  return m;
}

LoopMeasurements loop_measurements(const TwistedLoop& loop) {
  validate_loop(loop);
  LoopMeasurements m;
  m.energy = energy_of(loop, &m.max_gap, &m.length);
  return m;
}

TwistedLoop chart_apply(const TwistedLoop& base, const SectionField& nu, double eps) {
  if (static_cast<int>(nu.v.size()) != base.size()) throw Error("section has the wrong number of vectors");
  if (!(eps <= base.geometry.convexity_radius())) throw Error("chart radius exceeds the convexity radius");
  if (!(nu.sup_norm() < eps)) throw Error("section leaves the chart ball");
  TwistedLoop out{base.geometry, {}, base.twist};
  out.samples.reserve(base.samples.size());
  for (int k = 0; k < base.size(); ++k) {
    const Vec& x = base.samples[k];
    if ((base.geometry.project_tangent(x, nu.v[k]) - nu.v[k]).norm() > 1e-9)
      throw Error("section vector " + std::to_string(k) + " is not tangent");
    out.samples.push_back(base.geometry.exp(x, nu.v[k]));
  }
  return out;
}

SectionField chart_recover(const TwistedLoop& base, const TwistedLoop& moved) {
  if (moved.size() != base.size()) throw Error("loops have different sample counts");
  SectionField nu;
  for (int k = 0; k < base.size(); ++k) nu.v.push_back(base.geometry.log(base.samples[k], moved.samples[k]));
  return nu;
}

SectionField energy_gradient(const TwistedLoop& loop) {
  const int n = loop.size();
  const Geometry& geo = loop.geometry;
  const Vec last = loop.at(-1), closing = loop.at(n);
  SectionField g;
  g.v.resize(n);
  for (int k = 0; k < n; ++k) {
    const Vec& x = loop.samples[k];
    const Vec& prev = k == 0 ? last : loop.samples[k - 1];
    const Vec& next = k == n - 1 ? closing : loop.samples[k + 1];
    g.v[k] = -static_cast<double>(n) * (geo.log(x, next) + geo.log(x, prev));
  }
  return g;
}

TwistedLoop conjugate_loop(const IsometryElement& g, const TwistedLoop& loop) {
  TwistedLoop out{loop.geometry, {}, g.compose(loop.twist).compose(g.inverse())};
  out.samples.reserve(loop.samples.size());
  for (const Vec& x : loop.samples) out.samples.push_back(g.apply(x));
  return out;
}

MinimizeResult minimize_energy(const TwistedLoop& seed, const MinimizeOptions& opts) {
  validate_loop(seed);
  const int n = seed.size();
  const Geometry& geo = seed.geometry;
  const double radius = geo.convexity_radius();

  // Squared edge lengths; the Armijo test sums their differences, which keeps the
  // energy decrease resolvable long after it drops below the rounding error of the energy itself.
  auto edges = [&](const TwistedLoop& loop, std::vector<double>& d2, double& gap, double& length) {
    gap = length = 0;
    for (int k = 0; k < n; ++k) {
      const double d =
          geo.distance(loop.samples[k], k + 1 < n ? loop.samples[k + 1] : loop.twist.apply(loop.samples[0]));
      d2[k] = d * d;
      gap = std::max(gap, d);
      length += d;
    }
  };

  MinimizeResult res;
  res.loop = seed;
  std::vector<double> d2(n), trial_d2(n);
  double gap = 0, length = 0;
  edges(res.loop, d2, gap, length);
  double energy = 0.5 * n * std::accumulate(d2.begin(), d2.end(), 0.0);
  res.energies.push_back(energy);
  SectionField grad = energy_gradient(res.loop);
  TwistedLoop trial = res.loop;

  long it = 0;
  for (; it < opts.max_iter; ++it) {
    res.grad_norm = grad.sup_norm();
    if (length < opts.degenerate_length) {
      res.degenerate = true;
      break;
    }
    // The gradient scales with the loop, so the tolerance does too.
    if (res.grad_norm < opts.grad_tol * length) {
      res.converged = true;
      break;
    }
    double step = 1.0 / (2.0 * n);
    // Keep every sample inside its chart ball and the gaps below the convexity radius.
    if (std::isfinite(radius)) {
      const double eps = opts.step_fraction * std::min(radius, radius - gap);
      if (step * res.grad_norm >= eps) step = eps / (2.0 * res.grad_norm);
    }
    double g2 = 0;
    for (const Vec& v : grad.v) g2 += v.squaredNorm();

    bool accepted = false;
    double new_gap = 0, new_length = 0, delta = 0;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt, step *= 0.5) {
      for (int k = 0; k < n; ++k) trial.samples[k] = geo.exp(res.loop.samples[k], -step * grad.v[k]);
      edges(trial, trial_d2, new_gap, new_length);
      delta = 0;
      for (int k = 0; k < n; ++k) delta += trial_d2[k] - d2[k];
      delta *= 0.5 * n;
      if (new_gap < radius && delta <= -opts.armijo * step * g2) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.stalled = true;
      break;
    }
    std::swap(res.loop.samples, trial.samples);
    std::swap(d2, trial_d2);
    energy += delta;
    gap = new_gap;
    length = new_length;
    res.energies.push_back(energy);
    grad = energy_gradient(res.loop);
  }
  if (it == opts.max_iter) res.grad_norm = grad.sup_norm();
  res.iterations = it;
  res.measurements = {0.5 * n * std::accumulate(d2.begin(), d2.end(), 0.0), length, gap};
  return res;
}

TwistedLoop seed_loop(const Geometry& geometry, const IsometryElement& twist, int samples, std::uint64_t seed,
                      double amplitude) {
  if (samples < 8) throw Error("a twisted loop needs at least 8 samples");
  check_isometry(geometry, twist);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto random_vec = [&] {
    Vec v(unit(rng), unit(rng), geometry.dim() == 3 ? unit(rng) : 0.0);
    return v;
  };

  TwistedLoop loop{geometry, {}, twist};
  loop.samples.reserve(samples);
  if (geometry.kind() == GeometryKind::Flat) {
    Vec p0 = 0.5 * (random_vec() + Vec(1, 1, geometry.dim() == 3 ? 1 : 0));
    Vec q = twist.apply(p0);
    for (int k = 0; k < samples; ++k) loop.samples.push_back(p0 + (static_cast<double>(k) / samples) * (q - p0));
  } else if (twist.linear.determinant() > 0) {
    // Sweep around the rotation axis; the identity sweeps a full circle.
    Eigen::AngleAxisd aa(twist.linear);
    Vec axis = aa.axis();
    double angle = aa.angle();
    if (angle < 1e-9) {
      axis = Vec::UnitZ();
      angle = 2 * kPi;
    }
    Vec perp = (random_vec().cross(axis)).normalized();
    if (!perp.allFinite()) perp = axis.unitOrthogonal();
    Vec p0 = (perp + 0.5 * unit(rng) * axis).normalized();
    for (int k = 0; k < samples; ++k)
      loop.samples.push_back(Eigen::AngleAxisd(angle * k / samples, axis) * p0);
  } else {
    Vec p0 = random_vec().normalized();
    Vec q = twist.apply(p0);
    Vec v = geometry.log(p0, q);
    if (geometry.distance(p0, q) > kPi - 1e-6) v = kPi * geometry.project_tangent(p0, random_vec()).normalized();
    for (int k = 0; k < samples; ++k) loop.samples.push_back(geometry.exp(p0, (static_cast<double>(k) / samples) * v));
  }

  // Smooth perturbation vanishing at both ends of the fundamental segment.
  std::vector<Vec> modes;
  for (int m = 1; m <= 3; ++m) modes.push_back(random_vec() * (amplitude / m));
  for (int k = 0; k < samples; ++k) {
    Vec p = Vec::Zero();
    for (int m = 1; m <= 3; ++m) p += std::sin(kPi * m * k / samples) * modes[m - 1];
    loop.samples[k] = geometry.exp(loop.samples[k], geometry.project_tangent(loop.samples[k], p));
  }
  validate_loop(loop);
  return loop;
}

std::vector<SpectrumRow> length_spectrum(const IsometryGroup& group, const std::vector<IsometryElement>& twists,
                                         int samples, int seeds, std::uint64_t seed, const MinimizeOptions& opts) {
  if (twists.empty()) throw Error("empty twist set");
  if (seeds < 1) throw Error("at least one seed per class is required");
  const int t = static_cast<int>(twists.size());
  std::vector<int> parent(t);
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<IsometryElement> inverses;
  for (const auto& h : group.elements) inverses.push_back(h.inverse());
  for (int i = 0; i < t; ++i)
    for (int j = i + 1; j < t; ++j) {
      if (root(i) == root(j)) continue;
      for (std::size_t h = 0; h < group.elements.size(); ++h)
        if (group.elements[h].compose(twists[i]).compose(inverses[h]).approx_equal(twists[j])) {
          parent[root(j)] = root(i);
          break;
        }
    }

  std::vector<SpectrumRow> rows;
  for (int i = 0; i < t; ++i) {
    if (root(i) != i) continue;
    SpectrumRow row;
    row.class_word = twists[i].word;
    bool first = true;
    for (int s = 0; s < seeds; ++s) {
      const std::uint64_t run_seed = seed * 1000003ULL + static_cast<std::uint64_t>(i) * 7919ULL + s;
      MinimizeResult r = minimize_energy(seed_loop(group.geometry, twists[i], samples, run_seed), opts);
      const double len = r.degenerate ? 0.0 : r.measurements.length;
      if (first || len < row.min_length) {
        row.min_length = len;
        row.iterations = r.iterations;
        row.converged = r.converged;
        row.degenerate = r.degenerate;
        first = false;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::string spectrum_csv(const std::vector<SpectrumRow>& rows) {
  std::ostringstream out;
  out << "class_word,min_length,iterations,converged,degenerate\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.9f", r.min_length);
    out << r.class_word << "," << buf << "," << r.iterations << "," << (r.converged ? "true" : "false") << ","
        << (r.degenerate ? "true" : "false") << "\n";
  }
  return out.str();
}

}  // namespace etale
