#pragma once

#include "itreg/simd.hpp"

namespace itreg::simd::detail {

const KernelTable& scalar_table();
// Null when the build target has no AVX2 support compiled in.
const KernelTable* avx2_table();

}  // namespace itreg::simd::detail
