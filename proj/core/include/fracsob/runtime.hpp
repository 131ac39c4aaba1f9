#pragma once

#include <unistd.h>

#include <cstdlib>

namespace fracsob {

// OpenBLAS 0.3.20 picks its AVX-512 kernels on Cooper Lake class CPUs, and on some virtualised hosts
// those return wrong dsyevd/dgemm results. The kernel choice is fixed when the library loads, so
// executables re-exec themselves once with OPENBLAS_CORETYPE set. An explicit setting is respected.
inline void pin_blas_kernels(char** argv) {
  if (std::getenv("OPENBLAS_CORETYPE") != nullptr) return;
#if defined(__x86_64__) && defined(__GNUC__)
  if (!__builtin_cpu_supports("avx512f") || !__builtin_cpu_supports("avx2")) return;
  if (::setenv("OPENBLAS_CORETYPE", "Haswell", 1) != 0) return;
  ::execv("/proc/self/exe", argv);
#else
  (void)argv;
#endif
}

}  // namespace fracsob
