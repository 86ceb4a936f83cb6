#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "etale/geometry.hpp"

namespace etale {

// Samples f_0..f_{N-1} of a loop twisted by gamma: f_N is gamma.f_0.
struct TwistedLoop {
  Geometry geometry;
  std::vector<Vec> samples;
  IsometryElement twist;

  int size() const { return static_cast<int>(samples.size()); }
  // f_k for -1 <= k <= N, using the twist at both ends.
  Vec at(int k) const;
};
// Throws when N < 8, a sample is off the manifold, or a consecutive gap reaches the convexity radius.
void validate_loop(const TwistedLoop& loop);

// A tangent vector at each sample.
struct SectionField {
  std::vector<Vec> v;
  double sup_norm() const;
};

struct LoopMeasurements {
  double energy = 0;  // (N/2) sum d(f_k, f_{k+1})^2
  double length = 0;  // sum d(f_k, f_{k+1})
  double max_gap = 0;
};
LoopMeasurements loop_measurements(const TwistedLoop& loop);

// exp_f(nu); throws unless nu is tangent with sup norm below eps.
TwistedLoop chart_apply(const TwistedLoop& base, const SectionField& nu, double eps);
// The inverse of chart_apply on its image.
SectionField chart_recover(const TwistedLoop& base, const TwistedLoop& moved);

// g_k = -N (log_{f_k} f_{k+1} + log_{f_k} f_{k-1})
SectionField energy_gradient(const TwistedLoop& loop);

// g.loop: samples g.f_k and twist g gamma g^-1.
TwistedLoop conjugate_loop(const IsometryElement& g, const TwistedLoop& loop);

struct MinimizeOptions {
  long max_iter = 500000;
  double grad_tol = 1e-7;        // sup norm of the gradient, relative to the loop length
  double armijo = 1e-4;
  int max_backtracks = 40;
  double step_fraction = 0.9;    // step cap as a fraction of the chart radius
  double degenerate_length = 1e-6;
};

struct MinimizeResult {
  TwistedLoop loop;
  long iterations = 0;
  bool converged = false;
  bool degenerate = false;  // length fell below degenerate_length
  bool stalled = false;     // no acceptable step within max_backtracks
  LoopMeasurements measurements;
  double grad_norm = 0;
  std::vector<double> energies;  // every accepted energy, starting with the seed
};
MinimizeResult minimize_energy(const TwistedLoop& seed, const MinimizeOptions& opts = {});

// Flat: straight segment from a random point to its image. Sphere: the great circle
// perpendicular to the twist axis. Both get random smooth perturbations of size `amplitude`.
TwistedLoop seed_loop(const Geometry& geometry, const IsometryElement& twist, int samples, std::uint64_t seed,
                      double amplitude = 0.1);

struct SpectrumRow {
  std::string class_word;
  double min_length = 0;
  long iterations = 0;
  bool converged = false;
  bool degenerate = false;
};

// Twists are grouped into conjugacy classes by conjugating with the enumerated ball.
// Each class is minimized from `seeds` random seeds; the shortest result is reported.
std::vector<SpectrumRow> length_spectrum(const IsometryGroup& group, const std::vector<IsometryElement>& twists,
                                         int samples, int seeds, std::uint64_t seed,
                                         const MinimizeOptions& opts = {});

std::string spectrum_csv(const std::vector<SpectrumRow>& rows);

}  // namespace etale
