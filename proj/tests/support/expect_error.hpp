#pragma once

#include <gtest/gtest.h>

#include "blayer/error.hpp"

#define EXPECT_ERROR_CODE(statement, expected_code)                                         \
  do {                                                                                      \
    try {                                                                                   \
      statement;                                                                            \
      ADD_FAILURE() << "expected " << blayer::to_string(expected_code) << ", nothing thrown"; \
    } catch (const blayer::Error& e) {                                                      \
      EXPECT_EQ(e.code(), expected_code) << e.what();                                       \
    }                                                                                       \
  } while (0)
