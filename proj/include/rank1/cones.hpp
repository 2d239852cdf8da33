#pragma once

#include <string>
#include <vector>

#include "rank1/parallel.hpp"

namespace rank1 {

enum class ConeKind { Zero, Nonnegative, SecondOrder, RotatedSecondOrder, Psd };

// One cone block. For Psd, dim is the matrix order and the block occupies
// dim*(dim+1)/2 slack rows (svec packing); for all other kinds the block
// occupies dim rows.
struct ConeSpec {
  ConeKind kind = ConeKind::Zero;
  int dim = 1;

  int slack_rows() const;
};

std::string cone_kind_name(ConeKind k);
int total_slack_rows(const std::vector<ConeSpec>& cones);

// In-place projection of v onto the product cone (project_dual=false) or onto
// its dual (project_dual=true). Blocks are independent, so the parallel path
// splits over blocks and matches the serial path exactly.
void project_onto_cones(const std::vector<ConeSpec>& cones, double* v,
                        bool project_dual, Exec mode);

} // namespace rank1
