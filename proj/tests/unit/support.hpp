#pragma once

#include <gtest/gtest.h>

#include <string>

#include "fracsob/error.hpp"
#include "fracsob/geometry.hpp"

namespace fracsob::test {

inline std::string fixture_path(const std::string& name) { return std::string(FRACSOB_FIXTURE_DIR) + "/" + name; }

inline DomainModel fixture(const std::string& name) { return load_domain_file(fixture_path(name + ".json")); }

// Unit square with Gamma = boundary and D empty.
inline DomainModel neumann_square() {
  return load_domain(R"({"name": "neumann-square", "rings": [[[0,0],[1,0],[1,1],[0,1]]], "d_arcs": [],
    "gamma_arcs": [[[0,0],[1,0],[1,1],[0,1],[0,0]]], "window": [-1,-1,2,2]})");
}

}  // namespace fracsob::test

// Runs stmt and checks that it throws fracsob::Error with the given code.
#define EXPECT_FRACSOB_ERROR(stmt, expected)                                   \
  do {                                                                         \
    try {                                                                      \
      stmt;                                                                    \
      ADD_FAILURE() << "expected " << #expected << ", nothing was thrown";     \
    } catch (const fracsob::Error& e) {                                        \
      EXPECT_EQ(e.code(), fracsob::ErrorCode::expected) << e.what();           \
    }                                                                          \
  } while (0)
