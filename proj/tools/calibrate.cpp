// Scratch calibration probe for the three-stage restart at bench scale.
#include <cstdio>
#include <cstdlib>

#include "increpr/bench.hpp"
#include "increpr/rng.hpp"

using namespace increpr;

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 64;
  const double ratio = argc > 2 ? std::atof(argv[2]) : 3.0;
  const int trials = argc > 3 ? std::atoi(argv[3]) : 6;
  const int field_sel = argc > 4 ? std::atoi(argv[4]) : 0;
  const int stage1_only = argc > 5 ? std::atoi(argv[5]) : 0;
  const int m = static_cast<int>(n * ratio);
  const Field field = field_sel ? Field::Complex : Field::Real;

  std::printf("== n=%d m=%d (%.2fn) %s%s ==\n", n, m, ratio,
              field_sel ? "complex" : "real",
              stage1_only ? " stage1-only" : "");
  int hits = 0;
  for (int s = 0; s < trials; ++s) {
    const CVec x = bench::planted_signal(n, field, rng::derive_seed(s, 1));
    auto e0 =
        MeasurementEnsemble::gaussian(n, m, field, rng::derive_seed(s, 2));
    const auto e = e0.with_intensities(e0.forward_intensity(x));
    RestartConfig rc;
    rc.inner.max_iters = field == Field::Real ? 1000 : 3000;
    rc.eig.seed = rng::derive_seed(s, 4);
    const CMat Y0 = bench::random_factor(n, 1, field, rng::derive_seed(s, 3));

    double relerr;
    std::string stages;
    if (stage1_only) {
      ObjectiveSpec spec;
      spec.fidelity = rc.fidelity;
      IncreConfig ic;
      ic.p_max = rc.p_max;
      ic.epsilon = rc.stage_epsilon(0, e.intensities().mean());
      ic.inner = rc.inner;
      ic.eig = rc.eig;
      auto [Y1, cert, rep] = increpr_solve(spec, e, Y0, ic);
      relerr = metrics::relerr_phase(rank_one_extract(Y1, rc.rank1).vec, x);
      stages = "p=" + std::to_string(rep.termination_p);
    } else {
      const RestartResult rr = restart_solve(e, rc, Y0);
      relerr = metrics::relerr_phase(rr.signal, x);
      for (size_t k = 0; k < rr.record.stage_termination_p.size(); ++k)
        stages += (k ? "," : "") +
                  std::to_string(rr.record.stage_termination_p[k]) +
                  (rr.record.stage_certified[k] ? "" : "!");
      stages += " iters=" + std::to_string(rr.record.total_inner_iterations);
    }
    if (relerr < 1e-5) ++hits;
    std::printf("  seed %2d relerr=%.3e  [%s]\n", s, relerr, stages.c_str());
  }
  std::printf("  recovery: %d/%d\n", hits, trials);
  return 0;
}
