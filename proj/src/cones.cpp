#include "rank1/cones.hpp"

#include <cmath>
#include <stdexcept>

#include "rank1/linalg.hpp"

namespace rank1 {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865476;

void project_soc(double* v, int dim) {
  if (dim == 1) {
    if (v[0] < 0.0) v[0] = 0.0;
    return;
  }
  const double t = v[0];
  double nz = 0.0;
  for (int i = 1; i < dim; ++i) nz += v[i] * v[i];
  nz = std::sqrt(nz);
  if (nz <= t) return;
  if (nz <= -t) {
    for (int i = 0; i < dim; ++i) v[i] = 0.0;
    return;
  }
  const double r = 0.5 * (t + nz);
  v[0] = r;
  const double scale = r / nz;
  for (int i = 1; i < dim; ++i) v[i] *= scale;
}

// The rotated cone {2ab >= |x|^2, a,b >= 0} maps onto the second-order cone
// by the involution (a,b) -> ((a+b)/sqrt2, (a-b)/sqrt2).
void project_rsoc(double* v, int dim) {
  if (dim < 2) throw std::invalid_argument("rotated cone block needs dim >= 2");
  const double a = v[0];
  const double b = v[1];
  v[0] = kInvSqrt2 * (a + b);
  v[1] = kInvSqrt2 * (a - b);
  project_soc(v, dim);
  const double t = v[0];
  const double u = v[1];
  v[0] = kInvSqrt2 * (t + u);
  v[1] = kInvSqrt2 * (t - u);
}

void project_block(const ConeSpec& cone, double* v, bool project_dual) {
  switch (cone.kind) {
    case ConeKind::Zero:
      // Dual of {0} is the free cone.
      if (!project_dual)
        for (int i = 0; i < cone.dim; ++i) v[i] = 0.0;
      return;
    case ConeKind::Nonnegative:
      for (int i = 0; i < cone.dim; ++i)
        if (v[i] < 0.0) v[i] = 0.0;
      return;
    case ConeKind::SecondOrder:
      project_soc(v, cone.dim);
      return;
    case ConeKind::RotatedSecondOrder:
      project_rsoc(v, cone.dim);
      return;
    case ConeKind::Psd:
      linalg::psd_project_svec(v, cone.dim);
      return;
  }
}
} // namespace

int ConeSpec::slack_rows() const {
  if (dim < 1) throw std::invalid_argument("cone dim must be >= 1");
  return kind == ConeKind::Psd ? dim * (dim + 1) / 2 : dim;
}

std::string cone_kind_name(ConeKind k) {
  switch (k) {
    case ConeKind::Zero: return "zero";
    case ConeKind::Nonnegative: return "nonnegative";
    case ConeKind::SecondOrder: return "second_order";
    case ConeKind::RotatedSecondOrder: return "rotated_second_order";
    case ConeKind::Psd: return "psd";
  }
  return "?";
}

int total_slack_rows(const std::vector<ConeSpec>& cones) {
  int n = 0;
  for (const auto& c : cones) n += c.slack_rows();
  return n;
}

void project_onto_cones(const std::vector<ConeSpec>& cones, double* v,
                        bool project_dual, Exec mode) {
  const int nblocks = static_cast<int>(cones.size());
  std::vector<int> offsets(cones.size() + 1, 0);
  for (int i = 0; i < nblocks; ++i)
    offsets[static_cast<std::size_t>(i) + 1] =
        offsets[static_cast<std::size_t>(i)] + cones[static_cast<std::size_t>(i)].slack_rows();

  if (mode == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 8) num_threads(thread_budget())
    for (int i = 0; i < nblocks; ++i)
      project_block(cones[static_cast<std::size_t>(i)],
                    v + offsets[static_cast<std::size_t>(i)], project_dual);
  } else {
    for (int i = 0; i < nblocks; ++i)
      project_block(cones[static_cast<std::size_t>(i)],
                    v + offsets[static_cast<std::size_t>(i)], project_dual);
  }
}

} // namespace rank1
