#include <gtest/gtest.h>

#include "fracsob/runtime.hpp"

int main(int argc, char** argv) {
  fracsob::pin_blas_kernels(argv);
  ::testing::InitGoogleTest(&argc, argv);
  return RUN_ALL_TESTS();
}
