// Serial reference against the parallel kernels for disk quadrature and Gram
// assembly. Usage: bench_kernels [repetitions]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "bergext/bergman.hpp"
#include "bergext/reduce.hpp"

using namespace bergext;

namespace {

template <class F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void report(const std::string& name, double serial, double parallel, double diff) {
  std::printf("%-28s serial %9.4f s  parallel %9.4f s  speedup %5.2f  max diff %.2e\n", name.c_str(), serial,
              parallel, serial / parallel, diff);
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::max(1, std::atoi(argv[1])) : 3;
  std::printf("threads: %d\n", kernels::max_threads());

  const DiskRule rule{DiskRuleSpec{}};
  auto f = [](Complex z) { return std::exp(z) / (0.05 + std::norm(z)); };
  Complex is, ip;
  const double ts = best_of(reps, [&] { is = integrate_serial(rule, f); });
  const double tp = best_of(reps, [&] { ip = integrate(rule, f); });
  report("disk integral (" + std::to_string(rule.size()) + " nodes)", ts, tp, std::abs(is - ip));

  for (int degree : {16, 32}) {
    const Weight w = clamp_max(Weight::linear_re(4), 0.1, 20.0);
    const auto basis = make_basis(Domain::disk, degree, BidiskBasis::tensor);
    Matrix gs, gp;
    const double s = best_of(reps, [&] { gs = assemble_gram_serial(w, basis, rule); });
    const double p = best_of(reps, [&] { gp = assemble_gram(w, basis, rule); });
    report("disk Gram D=" + std::to_string(degree), s, p, (gs - gp).cwiseAbs().maxCoeff());
  }

  DiskRuleSpec inner;
  inner.radial_order = 8;
  inner.angular_order = 32;
  inner.annuli = 8;
  DiskRuleSpec outer;
  outer.radial_order = 8;
  outer.angular_order = 32;
  outer.annuli = 1;
  outer.grading_centers.clear();
  const BidiskRule bi(inner, outer, BidiskGrading::diagonal);
  const Weight wb = Weight::regularized(Domain::bidisk, {0.1, Poly::parse("z1 - z2")});
  const auto basis = make_basis(Domain::bidisk, 6, BidiskBasis::tensor);
  Matrix gs, gp;
  const double s = best_of(reps, [&] { gs = assemble_gram_serial(wb, basis, bi); });
  const double p = best_of(reps, [&] { gp = assemble_gram(wb, basis, bi); });
  report("bidisk Gram D=6 (" + std::to_string(bi.size()) + " nodes)", s, p, (gs - gp).cwiseAbs().maxCoeff());
  return 0;
}
