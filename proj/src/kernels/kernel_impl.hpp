#pragma once

#include "stagewise/kernels.hpp"

namespace stagewise::kernels::detail {

#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_table();
bool avx2_supported();
#endif
#if defined(__aarch64__)
const KernelTable& neon_table();
#endif

}  // namespace stagewise::kernels::detail
