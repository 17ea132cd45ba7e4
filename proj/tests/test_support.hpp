#pragma once

#include "steerkit/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <string>

namespace steerkit::test {

inline void expect_error(ErrorKind kind, const std::function<void()>& body) {
  try {
    body();
    ADD_FAILURE() << "expected " << to_string(kind) << ", nothing was thrown";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

inline double rel_err(double value, double reference) {
  return std::abs(value - reference) / std::max(std::abs(reference), 1e-300);
}

}  // namespace steerkit::test
