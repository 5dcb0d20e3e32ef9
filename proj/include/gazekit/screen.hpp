#pragma once

#include "gazekit/common.hpp"

namespace gazekit {

// Physical display description; gaze labels are normalized against it.
struct ScreenSpec {
  double width_px = 1920;
  double height_px = 1200;
  double width_cm = 30.0;
  double height_cm = 20.0;

  void validate() const {
    if (width_px <= 0 || height_px <= 0 || width_cm <= 0 || height_cm <= 0)
      throw Error(ErrorCode::InvalidInput, "screen dimensions must be positive");
  }
};

}  // namespace gazekit
