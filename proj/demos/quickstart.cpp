// Walks the reference cavity (l1 = 1.7 f, l2 = 1.5 f) through the library:
// stability, ray damping, beam collapse and the matching wave-packet width.

#include <cmath>
#include <cstdio>

#include "kanai_cavity/kanai_cavity.hpp"

using namespace kanai_cavity;

int main() {
  const double gamma = 1e-3;
  const double lambda = 1e-4;  // in units of f
  const MirrorSchedule sched({1.7, 1.5, 1.0}, FrictionProfile::constant(gamma));
  std::printf("theta = %.6f rad\n", sched.theta());

  const auto xs = iterate_ray(sched, {1.0, 0.0}, 5000).positions();
  std::printf("ray: decay %.4e per trip (gamma/2 = %.4e), period %.4f trips\n", fit_envelope_decay(xs),
              gamma / 2, fit_period(xs));

  CollapseOptions o;
  o.n_max = 5000;
  const auto tr = run_collapse(sched, initial_eigenmode(sched, lambda), lambda, o);
  const QuantumParams p = map_parameters(sched.initial_geometry(), lambda);
  const auto sol = schedule_solution(sched, 5000.0);
  const auto packet = GaussianWavepacket::coherent(p);
  std::printf("%6s %10s %10s %12s\n", "n", "w1/w1(0)", "w2/w2(0)", "dx/dx(0)");
  for (std::size_t n = 0; n <= 5000; n += 500) {
    const auto& r = tr.rows[n];
    const double dx = moments(packet, sol, p, static_cast<double>(n)).width / packet.width;
    std::printf("%6zu %10.5f %10.5f %12.5f\n", n, r.w1 / tr.rows[0].w1, r.w2 / tr.rows[0].w2, dx);
  }
  return 0;
}
